//! Oracle-based GFTPL: the perturbed argmin and the running best loss are
//! both obtained from an [`OfflineOracle`], two calls per round.
//!
//! Step size: `eta_1 = min{1/gamma, 1}`, then
//! `eta_{t+1} = min{1/gamma, 1 / sqrt(L^_t + 1)}` where `L^_t` is the loss of
//! the oracle's minimizer on the unweighted history.
//!
//! With negative-exponential base noise every perturbation weight handed to
//! the oracle in reward mode is nonnegative, so an oracle that only accepts
//! nonnegative weights suffices.

use std::sync::Arc;

use super::{AlgTag, AlgoError, Learner, Phase};
use crate::game::{AdversaryAction, ExpertIndex, Game};
use crate::oracle::{oracle_perturbed_argmin, OfflineOracle, WeightedDataset};
use crate::perturbation::{NoiseFamily, NoiseVector};
use crate::ptm::Ptm;

pub struct OracleGftpl {
    ptm: Arc<Ptm>,
    oracle: Arc<dyn OfflineOracle>,
    noise: NoiseVector,
    gamma: f64,
    history: Vec<AdversaryAction>,
    eta: f64,
    l_hat_star: f64,
    tag: AlgTag,
    phase: Phase,
    last_eta: Option<f64>,
}

impl OracleGftpl {
    pub fn new(
        ptm: Arc<Ptm>,
        oracle: Arc<dyn OfflineOracle>,
        gamma: f64,
        noise: NoiseVector,
    ) -> Result<Self, AlgoError> {
        if ptm.datasets().is_none() {
            return Err(crate::oracle::OracleError::MissingDatasets.into());
        }
        if noise.dimension() != ptm.columns() {
            return Err(AlgoError::Dimension(format!(
                "noise has {} entries, PTM has {} columns",
                noise.dimension(),
                ptm.columns()
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(AlgoError::BadSchedule { gamma, c: 1.0 });
        }
        Ok(OracleGftpl {
            ptm,
            oracle,
            noise,
            gamma,
            history: Vec::new(),
            eta: (1.0 / gamma).min(1.0),
            l_hat_star: 0.0,
            tag: AlgTag::OracleGftpl,
            phase: Phase::default(),
            last_eta: None,
        })
    }

    /// The negative-exponential variant; rejects any other noise family.
    pub fn negative_exponential(
        ptm: Arc<Ptm>,
        oracle: Arc<dyn OfflineOracle>,
        gamma: f64,
        noise: NoiseVector,
    ) -> Result<Self, AlgoError> {
        if noise.family != NoiseFamily::NegExponential {
            return Err(AlgoError::NoiseFamily("expected negative-exponential base noise"));
        }
        let mut alg = Self::new(ptm, oracle, gamma, noise)?;
        alg.tag = AlgTag::NegExpGftpl;
        Ok(alg)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn l_hat_star(&self) -> f64 {
        self.l_hat_star
    }

    pub fn history(&self) -> &[AdversaryAction] {
        &self.history
    }

    /// `alpha / eta` for the upcoming round.
    pub fn perturbation_scalars(&self) -> Vec<f64> {
        self.noise.scaled(self.eta)
    }
}

impl Learner for OracleGftpl {
    fn choose(&mut self, game: &Game) -> Result<ExpertIndex, AlgoError> {
        let x = oracle_perturbed_argmin(self.oracle.as_ref(), game, &self.history, &self.ptm, &self.noise, self.eta)?;
        self.phase.begin(x)?;
        self.last_eta = Some(self.eta);
        Ok(x)
    }

    fn observe(&mut self, game: &Game, y: &AdversaryAction) -> Result<(), AlgoError> {
        self.phase.check_open()?;
        game.loss_column(y)?;
        self.phase.finish()?;
        self.history.push(y.clone());
        let best = self.oracle.solve(game, &WeightedDataset::unweighted(&self.history))?;
        self.l_hat_star = self.history.iter().map(|h| game.loss(best, h)).sum::<Result<f64, _>>()?;
        self.eta = (1.0 / self.gamma).min(1.0 / (self.l_hat_star + 1.0).sqrt());
        Ok(())
    }

    fn active(&self) -> AlgTag {
        self.tag
    }

    fn last_eta(&self) -> Option<f64> {
        self.last_eta
    }
}
