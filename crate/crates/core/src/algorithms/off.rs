//! Oracle-efficient FlipFlop: run FTL or GFTPL, whichever currently has the
//! smaller estimated regret on the rounds it has played.
//!
//! `U_ftl` sums FTL's mixability gaps over the FTL rounds and `U_gftpl` is the
//! GFTPL bound at `c = 1` evaluated at the best loss over the GFTPL rounds.
//! Each inner algorithm only ever sees the rounds it played, so both
//! estimates depend on the loss sequence alone.

use std::sync::Arc;

use super::{bounds, min_of, AlgTag, AlgoError, Ftl, FtlState, Gftpl, GftplState, Learner, StepSizeSchedule};
use crate::game::{AdversaryAction, ExpertIndex, Game};
use crate::perturbation::NoiseVector;
use crate::ptm::Ptm;

#[derive(Debug, Clone, PartialEq)]
pub struct OffState {
    pub active: AlgTag,
    /// One-based rounds played by each inner algorithm.
    pub ftl_rounds: Vec<usize>,
    pub gftpl_rounds: Vec<usize>,
    pub u_hat_ftl: f64,
    pub u_hat_gftpl: f64,
    pub switch_alpha: f64,
    pub switch_beta: f64,
    pub tau: f64,
    /// One-based index of the next round.
    pub round: usize,
    /// Rounds after which the active algorithm changed.
    pub switches: Vec<usize>,
}

impl OffState {
    /// `U_ftl <= (alpha + 1/beta) U_gftpl + 1`.
    pub fn ftl_inequality_holds(&self) -> bool {
        self.u_hat_ftl <= (self.switch_alpha + 1.0 / self.switch_beta) * self.u_hat_gftpl + 1.0 + 1e-9
    }

    /// `U_gftpl <= (1/alpha + beta) U_ftl + tau`.
    pub fn gftpl_inequality_holds(&self) -> bool {
        self.u_hat_gftpl <= (1.0 / self.switch_alpha + self.switch_beta) * self.u_hat_ftl + self.tau + 1e-9
    }
}

#[derive(Debug, Clone)]
pub struct Off {
    ftl: Ftl,
    gftpl: Gftpl,
    state: OffState,
    experts: usize,
    columns: usize,
    gamma: f64,
    last_eta: Option<f64>,
}

impl Off {
    /// `gamma` must be an approximability constant of `ptm`.
    pub fn new(ptm: Arc<Ptm>, gamma: f64, noise: NoiseVector) -> Result<Self, AlgoError> {
        let schedule = StepSizeSchedule::new(gamma, 1.0)?;
        let (experts, columns) = (ptm.experts(), ptm.columns());
        let gftpl = Gftpl::new(ptm, schedule, noise)?;
        let (u_hat_gftpl, tau) = if experts < 2 {
            (f64::INFINITY, 0.0)
        } else {
            (bounds::u_hat_gftpl(0.0, experts, columns, gamma)?, bounds::tau(experts, columns, gamma)?)
        };
        Ok(Off {
            ftl: Ftl::new(experts),
            gftpl,
            state: OffState {
                active: AlgTag::Ftl,
                ftl_rounds: Vec::new(),
                gftpl_rounds: Vec::new(),
                u_hat_ftl: 0.0,
                u_hat_gftpl,
                switch_alpha: 1.0,
                switch_beta: 1.0,
                tau,
                round: 1,
                switches: Vec::new(),
            },
            experts,
            columns,
            gamma,
            last_eta: None,
        })
    }

    pub fn state(&self) -> &OffState {
        &self.state
    }

    pub fn inner_ftl(&self) -> &FtlState {
        self.ftl.state()
    }

    pub fn inner_gftpl(&self) -> &GftplState {
        self.gftpl.state()
    }

    fn refresh_u_hat_gftpl(&mut self) -> Result<(), AlgoError> {
        if self.experts >= 2 {
            let l_hat = min_of(&self.gftpl.state().cumulative);
            self.state.u_hat_gftpl = bounds::u_hat_gftpl(l_hat, self.experts, self.columns, self.gamma)?;
        }
        Ok(())
    }
}

impl Learner for Off {
    fn choose(&mut self, game: &Game) -> Result<ExpertIndex, AlgoError> {
        match self.state.active {
            AlgTag::Ftl => {
                let x = self.ftl.choose(game)?;
                self.last_eta = None;
                Ok(x)
            }
            _ => {
                let x = self.gftpl.choose(game)?;
                self.last_eta = self.gftpl.last_eta();
                Ok(x)
            }
        }
    }

    fn observe(&mut self, game: &Game, y: &AdversaryAction) -> Result<(), AlgoError> {
        let t = self.state.round;
        let next = match self.state.active {
            AlgTag::Ftl => {
                self.state.u_hat_ftl += self.ftl.update(game, y)?;
                self.state.ftl_rounds.push(t);
                let s = &self.state;
                if s.u_hat_ftl > s.switch_alpha * s.u_hat_gftpl {
                    AlgTag::Gftpl
                } else {
                    AlgTag::Ftl
                }
            }
            _ => {
                self.gftpl.update(game, y)?;
                self.state.gftpl_rounds.push(t);
                self.refresh_u_hat_gftpl()?;
                let s = &self.state;
                if s.u_hat_gftpl > s.switch_beta * s.u_hat_ftl {
                    AlgTag::Ftl
                } else {
                    AlgTag::Gftpl
                }
            }
        };
        if next != self.state.active {
            self.state.switches.push(t);
            self.state.active = next;
        }
        self.state.round += 1;
        Ok(())
    }

    /// The algorithm that will play the next round.
    fn active(&self) -> AlgTag {
        self.state.active
    }

    fn last_eta(&self) -> Option<f64> {
        self.last_eta
    }

    fn estimates(&self) -> Option<(f64, f64)> {
        Some((self.state.u_hat_ftl, self.state.u_hat_gftpl))
    }
}
