//! Generalized follow-the-perturbed-leader with an adaptive step size.
//!
//! Round `t` plays `argmin_k L_k(t-1) + <Gamma_k, alpha / eta_t>` with
//! `eta_t = min{1/gamma, c / sqrt(L*_{t-1} + 1)}`. The base noise `alpha` is
//! drawn once per run; only its scale changes.

use std::sync::Arc;

use super::{min_of, AlgTag, AlgoError, Learner, Phase, StepSizeSchedule};
use crate::game::{argmin, AdversaryAction, ExpertIndex, Game};
use crate::perturbation::NoiseVector;
use crate::ptm::Ptm;

/// `argmin_k cumulative_k + <Gamma_k, alpha_t>`, ties to the lowest index.
pub fn perturbed_leader(cumulative: &[f64], ptm: &Ptm, alpha_t: &[f64]) -> ExpertIndex {
    argmin(cumulative.iter().enumerate().map(|(k, c)| c + ptm.dot(k, alpha_t)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GftplState {
    pub base_noise: NoiseVector,
    pub cumulative: Vec<f64>,
    /// One-based index of the next round.
    pub round: usize,
    pub schedule: StepSizeSchedule,
    pub l_star_prev: f64,
}

#[derive(Debug, Clone)]
pub struct Gftpl {
    ptm: Arc<Ptm>,
    state: GftplState,
    phase: Phase,
    last_eta: Option<f64>,
}

impl Gftpl {
    pub fn new(ptm: Arc<Ptm>, schedule: StepSizeSchedule, base_noise: NoiseVector) -> Result<Self, AlgoError> {
        if base_noise.dimension() != ptm.columns() {
            return Err(AlgoError::Dimension(format!(
                "noise has {} entries, PTM has {} columns",
                base_noise.dimension(),
                ptm.columns()
            )));
        }
        let cumulative = vec![0.0; ptm.experts()];
        Ok(Gftpl {
            ptm,
            state: GftplState { base_noise, cumulative, round: 1, schedule, l_star_prev: 0.0 },
            phase: Phase::default(),
            last_eta: None,
        })
    }

    pub fn state(&self) -> &GftplState {
        &self.state
    }

    pub fn ptm(&self) -> &Ptm {
        &self.ptm
    }

    /// `eta_t` for the upcoming round.
    pub fn eta(&self) -> Result<f64, AlgoError> {
        self.state.schedule.eta(self.state.l_star_prev)
    }

    /// `alpha / eta_t`.
    pub fn alpha_t(&self) -> Result<Vec<f64>, AlgoError> {
        Ok(self.state.base_noise.scaled(self.eta()?))
    }

    /// The round's choice without advancing the round phase.
    pub fn leader(&self) -> Result<ExpertIndex, AlgoError> {
        Ok(perturbed_leader(&self.state.cumulative, &self.ptm, &self.alpha_t()?))
    }

    /// The same perturbed argmin but with `y` already added: the infeasible
    /// leader of the stability analysis. Never used to play.
    pub fn infeasible_leader(&self, game: &Game, y: &AdversaryAction) -> Result<ExpertIndex, AlgoError> {
        let col = game.loss_column(y)?;
        let extended: Vec<f64> = self.state.cumulative.iter().zip(&col).map(|(c, l)| c + l).collect();
        Ok(perturbed_leader(&extended, &self.ptm, &self.alpha_t()?))
    }

    /// Adds `y` to the cumulative losses and advances the round.
    pub fn update(&mut self, game: &Game, y: &AdversaryAction) -> Result<(), AlgoError> {
        self.phase.check_open()?;
        if game.experts() != self.state.cumulative.len() {
            return Err(AlgoError::Dimension("game and PTM expert counts differ".into()));
        }
        let col = game.loss_column(y)?;
        self.phase.finish()?;
        for (c, l) in self.state.cumulative.iter_mut().zip(col) {
            *c += l;
        }
        self.state.l_star_prev = min_of(&self.state.cumulative);
        self.state.round += 1;
        Ok(())
    }
}

impl Learner for Gftpl {
    fn choose(&mut self, _game: &Game) -> Result<ExpertIndex, AlgoError> {
        let eta = self.eta()?;
        let x = self.leader()?;
        self.phase.begin(x)?;
        self.last_eta = Some(eta);
        Ok(x)
    }

    fn observe(&mut self, game: &Game, y: &AdversaryAction) -> Result<(), AlgoError> {
        self.update(game, y)
    }

    fn active(&self) -> AlgTag {
        AlgTag::Gftpl
    }

    fn last_eta(&self) -> Option<f64> {
        self.last_eta
    }
}
