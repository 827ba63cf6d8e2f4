//! Online learners and the regret-bound formulas they are measured against.
//!
//! Every learner follows the same two-phase round protocol: [`Learner::choose`]
//! commits to an expert before the adversary's action is revealed, then
//! [`Learner::observe`] feeds that action. Calling the phases out of order is
//! an error rather than a silent re-choice.

mod bounds;
mod ftl;
mod ftpl;
mod gftpl;
mod off;
mod oracle_gftpl;

pub use bounds::{lower_bound, tau, regret_upper_bound, u_hat_gftpl};
pub use ftl::{Ftl, FtlState};
pub use ftpl::VanillaFtpl;
pub use gftpl::{perturbed_leader, Gftpl, GftplState};
pub use off::{Off, OffState};
pub use oracle_gftpl::OracleGftpl;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{AdversaryAction, ExpertIndex, Game, GameError};
use crate::oracle::OracleError;
use crate::perturbation::NoiseError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgoError {
    #[error("step-size parameters must be positive and finite (gamma {gamma}, c {c})")]
    BadSchedule { gamma: f64, c: f64 },
    #[error("L* must be nonnegative, got {0}")]
    NegativeLoss(f64),
    #[error("round protocol violated: {0}")]
    Phase(&'static str),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("wrong noise family: {0}")]
    NoiseFamily(&'static str),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// `eta(L*) = min{1/gamma, c / sqrt(L* + 1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizeSchedule {
    pub gamma: f64,
    pub c: f64,
}

impl StepSizeSchedule {
    pub fn new(gamma: f64, c: f64) -> Result<Self, AlgoError> {
        if !(gamma > 0.0 && gamma.is_finite() && c > 0.0 && c.is_finite()) {
            return Err(AlgoError::BadSchedule { gamma, c });
        }
        Ok(StepSizeSchedule { gamma, c })
    }

    pub fn eta(&self, l_star_prev: f64) -> Result<f64, AlgoError> {
        if l_star_prev.is_nan() || l_star_prev < 0.0 {
            return Err(AlgoError::NegativeLoss(l_star_prev));
        }
        Ok((1.0 / self.gamma).min(self.c / (l_star_prev + 1.0).sqrt()))
    }
}

/// Which algorithm produced a round's decision; the trace's `active_alg` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgTag {
    Ftl,
    Gftpl,
    OracleGftpl,
    NegExpGftpl,
    Ftpl,
}

impl AlgTag {
    pub fn as_str(self) -> &'static str {
        match self {
            AlgTag::Ftl => "ftl",
            AlgTag::Gftpl => "gftpl",
            AlgTag::OracleGftpl => "oracle_gftpl",
            AlgTag::NegExpGftpl => "neg_exp_gftpl",
            AlgTag::Ftpl => "ftpl",
        }
    }
}

pub trait Learner {
    fn choose(&mut self, game: &Game) -> Result<ExpertIndex, AlgoError>;

    fn observe(&mut self, game: &Game, y: &AdversaryAction) -> Result<(), AlgoError>;

    /// Algorithm responsible for the most recent choice.
    fn active(&self) -> AlgTag;

    /// Step size behind the most recent choice, if the algorithm uses one.
    fn last_eta(&self) -> Option<f64> {
        None
    }

    /// `(U_ftl, U_gftpl)` after the most recent observation, for OFF.
    fn estimates(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Round-phase flag shared by the learners.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Phase(Option<ExpertIndex>);

impl Phase {
    fn begin(&mut self, x: ExpertIndex) -> Result<ExpertIndex, AlgoError> {
        if self.0.is_some() {
            return Err(AlgoError::Phase("choose called twice without observe"));
        }
        self.0 = Some(x);
        Ok(x)
    }

    fn check_open(&self) -> Result<ExpertIndex, AlgoError> {
        self.0.ok_or(AlgoError::Phase("observe called without a pending choice"))
    }

    fn finish(&mut self) -> Result<ExpertIndex, AlgoError> {
        self.0.take().ok_or(AlgoError::Phase("observe called without a pending choice"))
    }
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}
