//! Follow the leader, with mixability-gap bookkeeping.
//!
//! `delta_t = f(x_t, y_t) - (L*_t - L*_{t-1})` lies in `[0, 1]` and the gaps
//! telescope to FTL's realized regret.

use super::{min_of, AlgTag, AlgoError, Learner, Phase};
use crate::game::{argmin, AdversaryAction, ExpertIndex, Game};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FtlState {
    pub cumulative: Vec<f64>,
    /// One-based rounds at which the leader differed from the previous round's
    /// (round 1 always counts).
    pub leader_changes: Vec<usize>,
    pub mixability_gaps: Vec<f64>,
    /// One-based index of the next round.
    pub round: usize,
    last_leader: Option<ExpertIndex>,
}

impl FtlState {
    /// Sum of gaps over leader-change rounds only.
    pub fn change_round_gap_sum(&self) -> f64 {
        self.leader_changes.iter().map(|&t| self.mixability_gaps[t - 1]).sum()
    }

    pub fn gap_sum(&self) -> f64 {
        self.mixability_gaps.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct Ftl {
    state: FtlState,
    phase: Phase,
}

impl Ftl {
    pub fn new(experts: usize) -> Self {
        Ftl {
            state: FtlState { cumulative: vec![0.0; experts], round: 1, ..FtlState::default() },
            phase: Phase::default(),
        }
    }

    pub fn state(&self) -> &FtlState {
        &self.state
    }

    /// Feeds `y` and returns the round's mixability gap.
    pub fn update(&mut self, game: &Game, y: &AdversaryAction) -> Result<f64, AlgoError> {
        let x = self.phase.check_open()?;
        let col = game.loss_column(y)?;
        if col.len() != self.state.cumulative.len() {
            return Err(AlgoError::Dimension("game expert count changed".into()));
        }
        self.phase.finish()?;
        let before = min_of(&self.state.cumulative);
        for (c, l) in self.state.cumulative.iter_mut().zip(&col) {
            *c += l;
        }
        let delta = col[x.get()] - (min_of(&self.state.cumulative) - before);
        self.state.mixability_gaps.push(delta);
        self.state.round += 1;
        Ok(delta)
    }

    /// One full round: choose, observe, and report `(x_t, delta_t)`.
    pub fn step(&mut self, game: &Game, y: &AdversaryAction) -> Result<(ExpertIndex, f64), AlgoError> {
        let x = self.choose(game)?;
        Ok((x, self.update(game, y)?))
    }
}

impl Learner for Ftl {
    fn choose(&mut self, _game: &Game) -> Result<ExpertIndex, AlgoError> {
        let x = argmin(self.state.cumulative.iter().copied());
        self.phase.begin(x)?;
        if self.state.last_leader != Some(x) {
            self.state.leader_changes.push(self.state.round);
        }
        self.state.last_leader = Some(x);
        Ok(x)
    }

    fn observe(&mut self, game: &Game, y: &AdversaryAction) -> Result<(), AlgoError> {
        self.update(game, y).map(|_| ())
    }

    fn active(&self) -> AlgTag {
        AlgTag::Ftl
    }
}
