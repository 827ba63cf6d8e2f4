use std::path::PathBuf;

use thiserror::Error;

use gftpl::level_auction::AuctionError;
use gftpl::oracle::OracleError;
use gftpl::perturbation::NoiseError;
use gftpl::ptm::PtmError;
use gftpl::simulation::SimError;

/// Exit code 2: the request could not be carried out as given.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Ptm(#[from] PtmError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Auction(#[from] AuctionError),
    #[error(transparent)]
    Game(#[from] gftpl::game::GameError),
    #[error(transparent)]
    Algo(#[from] gftpl::algorithms::AlgoError),
    #[error("worker pool: {0}")]
    Pool(String),
}
