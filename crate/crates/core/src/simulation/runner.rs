//! Experiment configs, the round loop, traces and aggregation.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Environment, Scenario, SimError};
use crate::algorithms::{
    lower_bound, regret_upper_bound, AlgTag, Ftl, Gftpl, Learner, Off, OracleGftpl, StepSizeSchedule, VanillaFtpl,
};
use crate::game::{ExpertIndex, Game, HindsightStats};
use crate::level_auction::{enumerate_auction_set, level_auction_ptm};
use crate::oracle::BruteForceOracle;
use crate::perturbation::{sample, Estimate, NoiseFamily, NoiseSpec};
use crate::ptm::{binary_rep_ptm, min_gamma, small_y_ptm, MinGamma, Ptm};

fn one() -> f64 {
    1.0
}

fn laplace() -> NoiseFamily {
    NoiseFamily::Laplace
}

/// Which PTM to build for a scenario's game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PtmSpec {
    #[default]
    Binary,
    SmallY,
    LevelAuction,
    Custom {
        rows: Vec<Vec<f64>>,
        #[serde(default)]
        gamma: Option<f64>,
    },
}

impl PtmSpec {
    pub fn build(&self, game: &Game, env: &Environment) -> Result<Ptm, SimError> {
        let ptm = match self {
            PtmSpec::Binary => binary_rep_ptm(game.experts())?,
            PtmSpec::SmallY => small_y_ptm(game)?,
            PtmSpec::LevelAuction => match env {
                Environment::LevelAuction { config, cap, .. } => {
                    level_auction_ptm(&enumerate_auction_set(config, *cap)?, config)?
                }
                _ => return Err(SimError::Config("level_auction PTM needs a level_auction environment".into())),
            },
            PtmSpec::Custom { rows, gamma } => {
                let p = Ptm::new(rows.clone())?;
                match gamma {
                    Some(g) => p.with_declared_gamma(*g)?,
                    None => p,
                }
            }
        };
        if ptm.experts() != game.experts() {
            return Err(SimError::Config(format!("PTM has {} rows, game has {} experts", ptm.experts(), game.experts())));
        }
        Ok(ptm)
    }
}

/// A learner and its parameters. `gamma` falls back to the PTM's declared
/// value, then to the LP minimum over the game's action list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Ftl,
    Ftpl {
        #[serde(default = "one")]
        gamma: f64,
        #[serde(default = "one")]
        c: f64,
    },
    Gftpl {
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default = "one")]
        c: f64,
        #[serde(default = "laplace")]
        noise: NoiseFamily,
    },
    OracleGftpl {
        #[serde(default)]
        gamma: Option<f64>,
    },
    NegExpGftpl {
        #[serde(default)]
        gamma: Option<f64>,
    },
    Off {
        #[serde(default)]
        gamma: Option<f64>,
    },
}

impl AlgorithmSpec {
    pub fn label(&self) -> &'static str {
        match self {
            AlgorithmSpec::Ftl => "ftl",
            AlgorithmSpec::Ftpl { .. } => "ftpl",
            AlgorithmSpec::Gftpl { .. } => "gftpl",
            AlgorithmSpec::OracleGftpl { .. } => "oracle_gftpl",
            AlgorithmSpec::NegExpGftpl { .. } => "neg_exp_gftpl",
            AlgorithmSpec::Off { .. } => "off",
        }
    }

    fn gamma_override(&self) -> Option<f64> {
        match self {
            AlgorithmSpec::Gftpl { gamma, .. }
            | AlgorithmSpec::OracleGftpl { gamma }
            | AlgorithmSpec::NegExpGftpl { gamma }
            | AlgorithmSpec::Off { gamma } => *gamma,
            AlgorithmSpec::Ftl | AlgorithmSpec::Ftpl { .. } => None,
        }
    }

    pub fn uses_ptm(&self) -> bool {
        !matches!(self, AlgorithmSpec::Ftl | AlgorithmSpec::Ftpl { .. })
    }

    /// The `gamma` this algorithm will run with on `(ptm, game)`.
    pub fn resolve_gamma(&self, ptm: &Ptm, game: &Game) -> Result<f64, SimError> {
        if let Some(g) = self.gamma_override().or(ptm.declared_gamma()) {
            return Ok(g);
        }
        match min_gamma(ptm, game)? {
            MinGamma::Finite(g) if g > 0.0 => Ok(g),
            MinGamma::Finite(_) => Ok(1.0),
            MinGamma::Infeasible { expert, action } => Err(SimError::Config(format!(
                "PTM is not approximable (expert {expert}, action {action}); set gamma explicitly"
            ))),
        }
    }

    pub fn build(&self, ptm: &Arc<Ptm>, game: &Game, seed: u64) -> Result<Box<dyn Learner>, SimError> {
        let noise = |family: NoiseFamily| -> Result<_, SimError> {
            Ok(sample(&NoiseSpec::new(family, ptm.columns())?, seed)?)
        };
        Ok(match self {
            AlgorithmSpec::Ftl => Box::new(Ftl::new(game.experts())),
            AlgorithmSpec::Ftpl { gamma, c } => {
                Box::new(VanillaFtpl::new(game.experts(), StepSizeSchedule::new(*gamma, *c)?, seed)?)
            }
            AlgorithmSpec::Gftpl { c, noise: family, .. } => {
                let gamma = self.resolve_gamma(ptm, game)?;
                Box::new(Gftpl::new(ptm.clone(), StepSizeSchedule::new(gamma, *c)?, noise(*family)?)?)
            }
            AlgorithmSpec::OracleGftpl { .. } => {
                let gamma = self.resolve_gamma(ptm, game)?;
                Box::new(OracleGftpl::new(ptm.clone(), Arc::new(BruteForceOracle::default()), gamma, noise(NoiseFamily::Laplace)?)?)
            }
            AlgorithmSpec::NegExpGftpl { .. } => {
                let gamma = self.resolve_gamma(ptm, game)?;
                let oracle = Arc::new(BruteForceOracle { allow_negative: false });
                Box::new(OracleGftpl::negative_exponential(ptm.clone(), oracle, gamma, noise(NoiseFamily::NegExponential)?)?)
            }
            AlgorithmSpec::Off { .. } => {
                let gamma = self.resolve_gamma(ptm, game)?;
                Box::new(Off::new(ptm.clone(), gamma, noise(NoiseFamily::Laplace)?)?)
            }
        })
    }
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub horizon: usize,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub environment: Environment,
    #[serde(default)]
    pub ptm: PtmSpec,
    pub algorithms: Vec<AlgorithmSpec>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.horizon == 0 {
            return Err(SimError::Config("horizon must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(SimError::Config("seed list is empty".into()));
        }
        if self.algorithms.is_empty() {
            return Err(SimError::Config("no algorithms configured".into()));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(SimError::Config("name must be nonempty and contain no path separators".into()));
        }
        self.environment.validate()
    }

    pub fn run_id(&self, algorithm: usize, seed: u64) -> String {
        format!("{}-{}-{}-s{}", self.name, algorithm, self.algorithms[algorithm].label(), seed)
    }

    /// One `(algorithm, seed)` run.
    pub fn run_one(&self, algorithm: usize, seed: u64) -> Result<RegretTrace, SimError> {
        let spec = self
            .algorithms
            .get(algorithm)
            .ok_or_else(|| SimError::Config(format!("no algorithm at index {algorithm}")))?;
        let scenario = self.environment.generate(self.horizon, seed)?;
        let ptm = Arc::new(self.ptm.build(&scenario.game, &self.environment)?);
        run(spec, &scenario, &ptm, seed, &self.run_id(algorithm, seed))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub t: usize,
    pub expert: ExpertIndex,
    pub loss: f64,
    pub cum_loss: f64,
    pub best_cum_loss: f64,
    pub eta: Option<f64>,
    pub active_alg: AlgTag,
    pub u_hat_ftl: Option<f64>,
    pub u_hat_gftpl: Option<f64>,
}

impl RoundRecord {
    pub fn regret(&self) -> f64 {
        self.cum_loss - self.best_cum_loss
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretTrace {
    pub run_id: String,
    pub seed: u64,
    pub algorithm: String,
    pub records: Vec<RoundRecord>,
}

pub const TRACE_HEADER: &str = "run_id,seed,t,expert,loss,cum_loss,best_cum_loss,eta,active_alg,u_hat_ftl,u_hat_gftpl";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RegretTrace {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn final_regret(&self) -> f64 {
        self.records.last().map_or(0.0, RoundRecord::regret)
    }

    pub fn l_star(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.best_cum_loss)
    }

    pub fn final_estimates(&self) -> Option<(f64, f64)> {
        let r = self.records.last()?;
        Some((r.u_hat_ftl?, r.u_hat_gftpl?))
    }

    /// CSV with a header line; floats use Rust's shortest round-trip format.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                self.run_id,
                self.seed,
                r.t,
                r.expert,
                r.loss,
                r.cum_loss,
                r.best_cum_loss,
                opt(r.eta),
                r.active_alg.as_str(),
                opt(r.u_hat_ftl),
                opt(r.u_hat_gftpl),
            );
        }
        out
    }
}

/// Plays `spec` against the scenario's fixed sequence.
pub fn run(spec: &AlgorithmSpec, scenario: &Scenario, ptm: &Arc<Ptm>, seed: u64, run_id: &str) -> Result<RegretTrace, SimError> {
    let game = &scenario.game;
    let mut learner = spec.build(ptm, game, seed)?;
    let mut hindsight = HindsightStats::from_cumulative(vec![0.0; game.experts()]);
    let mut cum_loss = 0.0;
    let mut records = Vec::with_capacity(scenario.sequence.len());
    for (i, y) in scenario.sequence.iter().enumerate() {
        let active = learner.active();
        let x = learner.choose(game)?;
        let col = game.loss_column(y)?;
        learner.observe(game, y)?;
        hindsight.push(&col);
        cum_loss += col[x.get()];
        let est = learner.estimates();
        records.push(RoundRecord {
            t: i + 1,
            expert: x,
            loss: col[x.get()],
            cum_loss,
            best_cum_loss: hindsight.best_loss,
            eta: learner.last_eta(),
            active_alg: active,
            u_hat_ftl: est.map(|e| e.0),
            u_hat_gftpl: est.map(|e| e.1),
        });
    }
    Ok(RegretTrace { run_id: run_id.into(), seed, algorithm: spec.label().into(), records })
}

/// Parameters for attaching bound values to a summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundContext {
    pub experts: usize,
    pub columns: usize,
    pub gamma: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: usize,
    pub mean_regret: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub algorithm: String,
    pub runs: usize,
    pub horizon: usize,
    pub final_regret: Estimate,
    pub l_star: Estimate,
    /// Upper and lower bound formulas at the mean `L*_T`.
    pub upper_bound: Option<f64>,
    pub lower_bound: Option<f64>,
    pub curve: Vec<CurvePoint>,
}

/// Pointwise mean and stderr over traces, folded in run-id order.
pub fn aggregate(traces: &[RegretTrace], bounds: Option<BoundContext>) -> Result<Summary, SimError> {
    let first = traces.first().ok_or_else(|| SimError::Aggregate("no traces".into()))?;
    if traces.iter().any(|t| t.horizon() != first.horizon() || t.algorithm != first.algorithm) {
        return Err(SimError::Aggregate("traces differ in horizon or algorithm".into()));
    }
    let mut sorted: Vec<&RegretTrace> = traces.iter().collect();
    sorted.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    let curve = (0..first.horizon())
        .map(|i| {
            let xs: Vec<f64> = sorted.iter().map(|tr| tr.records[i].regret()).collect();
            let e = Estimate::from_samples(&xs);
            CurvePoint { t: i + 1, mean_regret: e.mean, stderr: e.stderr }
        })
        .collect();
    let finals: Vec<f64> = sorted.iter().map(|t| t.final_regret()).collect();
    let stars: Vec<f64> = sorted.iter().map(|t| t.l_star()).collect();
    let l_star = Estimate::from_samples(&stars);
    let (upper_bound, lower_bound) = match bounds {
        Some(b) if b.experts >= 2 => (
            Some(regret_upper_bound(b.experts, b.columns, b.gamma, b.c, l_star.mean)?),
            Some(lower_bound(b.experts, b.columns, b.gamma, b.c, l_star.mean)?),
        ),
        _ => (None, None),
    };
    Ok(Summary {
        algorithm: first.algorithm.clone(),
        runs: traces.len(),
        horizon: first.horizon(),
        final_regret: Estimate::from_samples(&finals),
        l_star,
        upper_bound,
        lower_bound,
        curve,
    })
}
