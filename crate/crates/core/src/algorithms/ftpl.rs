//! Classical FTPL baseline: one independent Laplace perturbation per expert,
//! drawn once and scaled by `1 / eta_t`.

use super::{min_of, AlgTag, AlgoError, Learner, Phase, StepSizeSchedule};
use crate::game::{argmin, AdversaryAction, ExpertIndex, Game};
use crate::perturbation::{sample, NoiseSpec, NoiseVector};

#[derive(Debug, Clone)]
pub struct VanillaFtpl {
    cumulative: Vec<f64>,
    noise: NoiseVector,
    schedule: StepSizeSchedule,
    phase: Phase,
    last_eta: Option<f64>,
}

impl VanillaFtpl {
    pub fn new(experts: usize, schedule: StepSizeSchedule, seed: u64) -> Result<Self, AlgoError> {
        let noise = sample(&NoiseSpec::laplace(experts)?, seed)?;
        Ok(Self::with_noise(schedule, noise))
    }

    pub fn with_noise(schedule: StepSizeSchedule, noise: NoiseVector) -> Self {
        VanillaFtpl {
            cumulative: vec![0.0; noise.dimension()],
            noise,
            schedule,
            phase: Phase::default(),
            last_eta: None,
        }
    }
}

impl Learner for VanillaFtpl {
    fn choose(&mut self, _game: &Game) -> Result<ExpertIndex, AlgoError> {
        let eta = self.schedule.eta(min_of(&self.cumulative))?;
        let x = argmin(self.cumulative.iter().zip(&self.noise.alpha).map(|(c, a)| c + a / eta));
        self.phase.begin(x)?;
        self.last_eta = Some(eta);
        Ok(x)
    }

    fn observe(&mut self, game: &Game, y: &AdversaryAction) -> Result<(), AlgoError> {
        self.phase.check_open()?;
        let col = game.loss_column(y)?;
        if col.len() != self.cumulative.len() {
            return Err(AlgoError::Dimension("game expert count differs from the noise dimension".into()));
        }
        self.phase.finish()?;
        self.cumulative.iter_mut().zip(col).for_each(|(c, l)| *c += l);
        Ok(())
    }

    fn active(&self) -> AlgTag {
        AlgTag::Ftpl
    }

    fn last_eta(&self) -> Option<f64> {
        self.last_eta
    }
}
