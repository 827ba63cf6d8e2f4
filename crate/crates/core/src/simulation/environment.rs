//! Oblivious environments. Each one expands `(T, seed)` into a game and a
//! fixed action sequence before any learner runs.

use std::collections::HashMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::game::{AdversaryAction, Game};
use crate::level_auction::{enumerate_auction_set, level_auction_game, BidGenerator, LevelAuctionConfig};
use crate::rng::{self, Rng, Stream};

fn default_experts() -> usize {
    2
}

fn default_cap() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Environment {
    /// Columns of `matrix` played in the given order, cycled to length `T`.
    FixedSequence { matrix: Vec<Vec<f64>>, sequence: Vec<usize> },
    /// Columns of `matrix` drawn i.i.d. with probabilities `probs`.
    Iid { matrix: Vec<Vec<f64>>, probs: Vec<f64> },
    /// Independent 0/1 losses per expert; an i.i.d. distribution over `{0,1}^K`.
    IidBernoulli { means: Vec<f64> },
    /// The target expert (one-based) suffers loss with probability `leak`, the
    /// others with probability `rival_rate` (defaults to `leak`).
    SmallLossRig {
        experts: usize,
        target: usize,
        leak: f64,
        #[serde(default)]
        rival_rate: Option<f64>,
    },
    /// Experts 1 and 2 alternate losses `(1, 0)` and `(0, 1)`, switching every
    /// `period / 2` rounds; any further experts always lose 1.
    LeaderFlip {
        period: usize,
        #[serde(default = "default_experts")]
        experts: usize,
    },
    /// Level-auction revenue game over every auction of the config.
    LevelAuction {
        #[serde(flatten)]
        config: LevelAuctionConfig,
        generator: BidGenerator,
        #[serde(default = "default_cap")]
        cap: usize,
    },
}

/// A game together with the adversary's fixed action sequence.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub game: Game,
    pub sequence: Vec<AdversaryAction>,
}

fn unit(x: f64, what: &str) -> Result<(), SimError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(SimError::Environment(format!("{what} must lie in [0, 1], got {x}")))
    }
}

fn matrix_columns(matrix: &[Vec<f64>]) -> Result<usize, SimError> {
    let cols = matrix.first().map_or(0, Vec::len);
    if cols == 0 || matrix.iter().any(|r| r.len() != cols) {
        return Err(SimError::Environment("matrix must be rectangular and nonempty".into()));
    }
    Ok(cols)
}

impl Environment {
    pub fn validate(&self) -> Result<(), SimError> {
        match self {
            Environment::FixedSequence { matrix, sequence } => {
                let cols = matrix_columns(matrix)?;
                if sequence.is_empty() || sequence.iter().any(|&j| j >= cols) {
                    return Err(SimError::Environment("sequence must be nonempty with column indices in range".into()));
                }
            }
            Environment::Iid { matrix, probs } => {
                let cols = matrix_columns(matrix)?;
                if probs.len() != cols || probs.iter().any(|p| p.is_nan() || *p < 0.0) {
                    return Err(SimError::Environment("need one nonnegative probability per column".into()));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(SimError::Environment(format!("probabilities sum to {total}")));
                }
            }
            Environment::IidBernoulli { means } => {
                if means.is_empty() {
                    return Err(SimError::Environment("need at least one expert".into()));
                }
                means.iter().try_for_each(|&p| unit(p, "mean"))?;
            }
            Environment::SmallLossRig { experts, target, leak, rival_rate } => {
                if !(1..=*experts).contains(target) {
                    return Err(SimError::Environment(format!("target {target} outside 1..={experts}")));
                }
                unit(*leak, "leak")?;
                if let Some(r) = rival_rate {
                    unit(*r, "rival_rate")?;
                }
            }
            Environment::LeaderFlip { period, experts } => {
                if *period < 2 || period % 2 != 0 {
                    return Err(SimError::Environment("period must be even and at least 2".into()));
                }
                if *experts < 2 {
                    return Err(SimError::Environment("leader flip needs at least 2 experts".into()));
                }
            }
            Environment::LevelAuction { config, generator, .. } => {
                config.validate()?;
                generator.validate(config)?;
            }
        }
        Ok(())
    }

    /// Deterministic in `(self, horizon, seed)`; a longer horizon extends the
    /// same sequence.
    pub fn generate(&self, horizon: usize, seed: u64) -> Result<Scenario, SimError> {
        self.validate()?;
        if horizon == 0 {
            return Err(SimError::Config("horizon must be at least 1".into()));
        }
        let mut rng = rng::stream(seed, Stream::Environment);
        match self {
            Environment::FixedSequence { matrix, sequence } => {
                let game = Game::from_matrix(matrix.clone())?;
                let seq = sequence.iter().cycle().take(horizon).map(|&j| AdversaryAction::column(j)).collect();
                Ok(Scenario { game, sequence: seq })
            }
            Environment::Iid { matrix, probs } => {
                let game = Game::from_matrix(matrix.clone())?;
                let seq = (0..horizon).map(|_| AdversaryAction::column(draw_index(probs, &mut rng))).collect();
                Ok(Scenario { game, sequence: seq })
            }
            Environment::IidBernoulli { means } => {
                interned((0..horizon).map(|_| bernoulli_row(means.iter().copied(), &mut rng)), means.len())
            }
            Environment::SmallLossRig { experts, target, leak, rival_rate } => {
                let rival = rival_rate.unwrap_or(*leak);
                let rates: Vec<f64> = (1..=*experts).map(|k| if k == *target { *leak } else { rival }).collect();
                interned((0..horizon).map(|_| bernoulli_row(rates.iter().copied(), &mut rng)), *experts)
            }
            Environment::LeaderFlip { period, experts } => {
                let half = period / 2;
                let rows = (0..horizon).map(|t| {
                    let first = (t / half) % 2 == 0;
                    (0..*experts)
                        .map(|k| match k {
                            0 => f64::from(u8::from(first)),
                            1 => f64::from(u8::from(!first)),
                            _ => 1.0,
                        })
                        .collect()
                });
                interned(rows, *experts)
            }
            Environment::LevelAuction { config, generator, cap } => {
                let game = level_auction_game(enumerate_auction_set(config, *cap)?)?;
                let seq = (1..=horizon as u64).map(|t| AdversaryAction::bids(t, generator.draw(config, &mut rng))).collect();
                Ok(Scenario { game, sequence: seq })
            }
        }
    }
}

fn draw_index(probs: &[f64], rng: &mut Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn bernoulli_row(rates: impl Iterator<Item = f64>, rng: &mut Rng) -> Vec<f64> {
    rates.map(|p| f64::from(u8::from(rng.random::<f64>() < p))).collect()
}

/// Turns per-round loss vectors into a matrix game whose columns are the
/// distinct vectors in order of first appearance.
fn interned(rows: impl Iterator<Item = Vec<f64>>, experts: usize) -> Result<Scenario, SimError> {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut sequence = Vec::new();
    for row in rows {
        let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
        let j = *index.entry(key).or_insert_with(|| {
            columns.push(row);
            columns.len() - 1
        });
        sequence.push(AdversaryAction::column(j));
    }
    let matrix = (0..experts).map(|k| columns.iter().map(|c| c[k]).collect()).collect();
    Ok(Scenario { game: Game::from_matrix(matrix)?, sequence })
}
