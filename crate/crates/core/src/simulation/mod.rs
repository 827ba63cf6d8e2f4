//! Seeded experiment harness: environments, the round loop, aggregation, the
//! stability probe and the closed-form counterexamples.
//!
//! Sequences are generated up front (oblivious adversary) from the
//! environment stream of the run seed; algorithm noise comes from the noise
//! stream of the same seed.

mod environment;
mod probe;
mod runner;

pub use environment::{Environment, Scenario};
pub use probe::{
    counterexample_laplace, counterexample_uniform, stability_probe, Counterexample, ExpertStability,
    StabilityProbeReport, MIN_TRACKED_PROBABILITY, MIN_TRIALS, SIGMAS,
};
pub use runner::{
    aggregate, run, AlgorithmSpec, BoundContext, CurvePoint, ExperimentConfig, PtmSpec, RegretTrace, RoundRecord,
    Summary, TRACE_HEADER,
};

use thiserror::Error;

use crate::algorithms::AlgoError;
use crate::game::GameError;
use crate::level_auction::AuctionError;
use crate::perturbation::NoiseError;
use crate::ptm::PtmError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid environment: {0}")]
    Environment(String),
    #[error("{got} trials requested; at least {min} are needed")]
    TooFewTrials { got: usize, min: usize },
    #[error("cannot aggregate: {0}")]
    Aggregate(String),
    #[error(transparent)]
    Algo(#[from] AlgoError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Ptm(#[from] PtmError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Auction(#[from] AuctionError),
}
