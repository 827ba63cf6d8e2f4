//! Single-item level auctions and the augmented `(n+1)`-bidder problem used
//! to build an approximable, implementable PTM.
//!
//! Thresholds live on the grid `{1/m, ..., m/m}` and are stored as integer
//! numerators so that probe comparisons are exact. Indices `i, j, k` in the
//! probe API are one-based, matching the usual `b'(i, j, k)` notation.

use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{AdversaryAction, ExpertIndex, Evaluator, Game, GameError, Mode, Payload};
use crate::oracle::WeightedDataset;
use crate::ptm::{Ptm, PtmError, PtmFamily, Witness};
use crate::rng::Rng;

/// Probe actions use ids in their own range so they never collide with
/// environment bid ids (which are round numbers).
pub const PROBE_ID_BASE: u64 = 1 << 61;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuctionError {
    #[error("invalid auction config: {0}")]
    Config(String),
    #[error("invalid thresholds: {0}")]
    Thresholds(String),
    #[error("probe index (i={i}, j={j}, k={k}) out of range")]
    ProbeIndex { i: usize, j: usize, k: usize },
    #[error("bid profile has {got} entries, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("auction set would have {count} members, above the cap of {cap}")]
    TooMany { count: u128, cap: usize },
    #[error("auctions {0} and {1} coincide on the real bidders")]
    Duplicate(usize, usize),
    #[error(transparent)]
    Ptm(#[from] PtmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelAuctionConfig {
    pub n: usize,
    pub levels: usize,
    pub m: u32,
}

impl LevelAuctionConfig {
    pub fn new(n: usize, levels: usize, m: u32) -> Result<Self, AuctionError> {
        let c = LevelAuctionConfig { n, levels, m };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), AuctionError> {
        if self.n == 0 {
            return Err(AuctionError::Config("need at least one bidder".into()));
        }
        if self.levels == 0 || self.levels > self.m as usize {
            return Err(AuctionError::Config(format!("need 1 <= levels <= m, got levels {} m {}", self.levels, self.m)));
        }
        Ok(())
    }

    /// Probes per `(i, j)` pair: `m - levels + 1`.
    pub fn probes_per_threshold(&self) -> usize {
        self.m as usize - self.levels + 1
    }

    /// `n * levels * (m - levels + 1)`.
    pub fn probe_count(&self) -> usize {
        self.n * self.levels * self.probes_per_threshold()
    }

    /// `n * levels * m`.
    pub fn gamma(&self) -> f64 {
        (self.n * self.levels) as f64 * f64::from(self.m)
    }

    /// Thresholds of the extra bidder: `(1, 1, 2, ..., levels - 1)`.
    pub fn fixed_row(&self) -> Vec<u32> {
        (1..=self.levels).map(|j| if j == 1 { 1 } else { (j - 1) as u32 }).collect()
    }

    /// Zero-based column of probe `(i, j, k)` under lexicographic ordering.
    pub fn probe_column(&self, i: usize, j: usize, k: usize) -> Result<usize, AuctionError> {
        let per = self.probes_per_threshold();
        if !(1..=self.n).contains(&i) || !(1..=self.levels).contains(&j) || !(1..=per).contains(&k) {
            return Err(AuctionError::ProbeIndex { i, j, k });
        }
        Ok(((i - 1) * self.levels + (j - 1)) * per + (k - 1))
    }

    /// All `(i, j, k)` in column order.
    pub fn probes(&self) -> Vec<(usize, usize, usize)> {
        let per = self.probes_per_threshold();
        (1..=self.n)
            .flat_map(|i| (1..=self.levels).flat_map(move |j| (1..=per).map(move |k| (i, j, k))))
            .collect()
    }
}

fn check_row(row: &[u32], c: &LevelAuctionConfig) -> Result<(), AuctionError> {
    if row.len() != c.levels {
        return Err(AuctionError::Thresholds(format!("row has {} thresholds, expected {}", row.len(), c.levels)));
    }
    if row.iter().any(|&a| a == 0 || a > c.m) {
        return Err(AuctionError::Thresholds(format!("entries must lie in 1..={}", c.m)));
    }
    if row.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AuctionError::Thresholds("thresholds must be strictly increasing".into()));
    }
    Ok(())
}

/// Threshold numerators for the `n` real bidders.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AuctionThresholds {
    config: LevelAuctionConfig,
    rows: Vec<Vec<u32>>,
}

impl AuctionThresholds {
    pub fn new(config: LevelAuctionConfig, rows: Vec<Vec<u32>>) -> Result<Self, AuctionError> {
        config.validate()?;
        if rows.len() != config.n {
            return Err(AuctionError::Thresholds(format!("{} rows for {} bidders", rows.len(), config.n)));
        }
        rows.iter().try_for_each(|r| check_row(r, &config))?;
        Ok(AuctionThresholds { config, rows })
    }

    pub fn config(&self) -> LevelAuctionConfig {
        self.config
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn augment(&self) -> AugmentedThresholds {
        let mut rows = self.rows.clone();
        rows.push(self.config.fixed_row());
        AugmentedThresholds { config: self.config, rows }
    }

    /// Revenue on an `n`-bidder profile.
    pub fn revenue(&self, bids: &[f64]) -> Result<f64, AuctionError> {
        if bids.len() != self.config.n {
            return Err(AuctionError::Dimension { expected: self.config.n, got: bids.len() });
        }
        Ok(auction_revenue(&self.rows, self.config.m, bids))
    }
}

/// Thresholds for the augmented problem; the last row is always the fixed row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AugmentedThresholds {
    config: LevelAuctionConfig,
    rows: Vec<Vec<u32>>,
}

impl AugmentedThresholds {
    pub fn config(&self) -> LevelAuctionConfig {
        self.config
    }

    /// All `n + 1` rows.
    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Numerator of `a'(i, j)`, one-based.
    pub fn num(&self, i: usize, j: usize) -> u32 {
        self.rows[i - 1][j - 1]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        f64::from(self.num(i, j)) / f64::from(self.config.m)
    }

    pub fn drop_extra(&self) -> AuctionThresholds {
        AuctionThresholds { config: self.config, rows: self.rows[..self.config.n].to_vec() }
    }

    /// Revenue on an `n+1`-bidder profile, or an `n`-bidder one padded with 0.
    pub fn revenue(&self, bids: &[f64]) -> Result<f64, AuctionError> {
        let n = self.config.n;
        if bids.len() == n {
            let mut padded = bids.to_vec();
            padded.push(0.0);
            return Ok(auction_revenue(&self.rows, self.config.m, &padded));
        }
        if bids.len() != n + 1 {
            return Err(AuctionError::Dimension { expected: n + 1, got: bids.len() });
        }
        Ok(auction_revenue(&self.rows, self.config.m, bids))
    }
}

fn level_of(row: &[u32], m: u32, bid: f64) -> usize {
    row.iter().filter(|&&a| f64::from(a) / f64::from(m) <= bid).count()
}

/// Literal auction rule on numerator thresholds.
///
/// Levels are counted per bidder; the highest level wins with ties to the
/// smallest index. With `L` the highest rival level, the winner pays the
/// threshold of the lowest level at which it still wins: `max(L, 1)` if it
/// precedes the first rival at level `L`, else `L + 1`.
pub fn auction_revenue(rows: &[Vec<u32>], m: u32, bids: &[f64]) -> f64 {
    let levels: Vec<usize> = rows.iter().zip(bids).map(|(r, &b)| level_of(r, m, b)).collect();
    let Some((winner, &top)) = levels.iter().enumerate().rev().max_by_key(|(_, &l)| l) else {
        return 0.0;
    };
    if top == 0 {
        return 0.0;
    }
    let rival = levels
        .iter()
        .enumerate()
        .filter(|&(i, &l)| i != winner && l > 0)
        .fold(None, |best: Option<(usize, usize)>, (i, &l)| match best {
            Some((_, bl)) if bl >= l => best,
            _ => Some((i, l)),
        });
    let needed = match rival {
        None => 1,
        Some((r, l)) if winner < r => l.max(1),
        Some((_, l)) => l + 1,
    };
    f64::from(rows[winner][needed - 1]) / f64::from(m)
}

/// `b'(i, j, k) = (k+j-1)/m e_i + (j-1)/m e_{n+1}`.
pub fn probe_bid_profile(config: &LevelAuctionConfig, i: usize, j: usize, k: usize) -> Result<Vec<f64>, AuctionError> {
    config.probe_column(i, j, k)?;
    let m = f64::from(config.m);
    let mut b = vec![0.0; config.n + 1];
    b[i - 1] = (k + j - 1) as f64 / m;
    b[config.n] = (j - 1) as f64 / m;
    Ok(b)
}

/// `a'(i,j)` if `a'(i,j) <= (k+j-1)/m`, else `(j-1)/m`.
pub fn reward_closed_form(a: &AugmentedThresholds, i: usize, j: usize, k: usize) -> Result<f64, AuctionError> {
    a.config.probe_column(i, j, k)?;
    let num = a.num(i, j);
    let m = f64::from(a.config.m);
    Ok(if (num as usize) < k + j { f64::from(num) / m } else { (j - 1) as f64 / m })
}

fn check_distinct(auctions: &[AugmentedThresholds], config: &LevelAuctionConfig) -> Result<(), AuctionError> {
    let mut seen = std::collections::HashMap::new();
    for (idx, a) in auctions.iter().enumerate() {
        if a.config != *config {
            return Err(AuctionError::Config(format!("auction {idx} has a different config")));
        }
        if let Some(prev) = seen.insert(&a.rows[..config.n], idx) {
            return Err(AuctionError::Duplicate(prev, idx));
        }
    }
    Ok(())
}

/// Probe actions in column order.
pub fn probe_actions(config: &LevelAuctionConfig) -> Result<Vec<AdversaryAction>, AuctionError> {
    config
        .probes()
        .into_iter()
        .enumerate()
        .map(|(col, (i, j, k))| Ok(AdversaryAction::bids(PROBE_ID_BASE | col as u64, probe_bid_profile(config, i, j, k)?)))
        .collect()
}

/// One row per auction, one column per probe, entries from the closed form.
/// Each column is implemented by its single probe with weight 1 against the
/// reward.
pub fn level_auction_ptm(auctions: &[AugmentedThresholds], config: &LevelAuctionConfig) -> Result<Ptm, AuctionError> {
    config.validate()?;
    if auctions.is_empty() {
        return Err(AuctionError::Config("empty auction set".into()));
    }
    check_distinct(auctions, config)?;
    let probes = config.probes();
    let matrix = auctions
        .iter()
        .map(|a| probes.iter().map(|&(i, j, k)| reward_closed_form(a, i, j, k)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let datasets = probe_actions(config)?.into_iter().map(|y| WeightedDataset::single(1.0, y)).collect();
    Ok(Ptm::new(matrix)?
        .with_datasets(datasets)?
        .with_declared_gamma(config.gamma())?
        .with_family(PtmFamily::LevelAuction))
}

/// Entry `m` at column `(i, j, k')` with `(k'+j-1)/m = a'(i,j)`, zero elsewhere.
pub fn level_witness(a: &AugmentedThresholds) -> Result<Witness, AuctionError> {
    let c = a.config;
    let mut s = vec![0.0; c.probe_count()];
    for i in 1..=c.n {
        for j in 1..=c.levels {
            let k = (a.num(i, j) as usize + 1)
                .checked_sub(j)
                .filter(|&k| k >= 1)
                .ok_or(AuctionError::Thresholds(format!("a'({i},{j}) below {j}/m")))?;
            s[c.probe_column(i, j, k)?] = f64::from(c.m);
        }
    }
    Ok(Witness::new(s))
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Strictly increasing `levels`-subsets of `1..=m`, lexicographic.
fn increasing_rows(m: u32, levels: usize) -> Vec<Vec<u32>> {
    fn go(start: u32, m: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for v in start..=m + 1 - left as u32 {
            cur.push(v);
            go(v + 1, m, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, m, levels, &mut Vec::with_capacity(levels), &mut out);
    out
}

/// `C(m, levels)^n`.
pub fn auction_set_size(config: &LevelAuctionConfig) -> u128 {
    binomial(u128::from(config.m), config.levels as u128).saturating_pow(config.n as u32)
}

/// Every valid threshold matrix, augmented; bidder 1 varies slowest.
pub fn enumerate_auction_set(config: &LevelAuctionConfig, cap: usize) -> Result<Vec<AugmentedThresholds>, AuctionError> {
    config.validate()?;
    let count = auction_set_size(config);
    if count > cap as u128 {
        return Err(AuctionError::TooMany { count, cap });
    }
    let rows = increasing_rows(config.m, config.levels);
    let mut out: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    for _ in 0..config.n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                rows.iter().map(move |r| {
                    let mut p = prefix.clone();
                    p.push(r.clone());
                    p
                })
            })
            .collect();
    }
    Ok(out.into_iter().map(|rows| AuctionThresholds { config: *config, rows }.augment()).collect())
}

/// A probe where the literal rule and the closed form disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeMismatch {
    pub thresholds: Vec<Vec<u32>>,
    pub probe: (usize, usize, usize),
    pub literal: f64,
    pub closed_form: f64,
}

/// Compares [`auction_revenue`] with [`reward_closed_form`] on every probe of
/// every enumerated auction.
pub fn closed_form_mismatches(config: &LevelAuctionConfig, cap: usize) -> Result<(usize, Vec<ProbeMismatch>), AuctionError> {
    let auctions = enumerate_auction_set(config, cap)?;
    let probes = config.probes();
    let mut checked = 0;
    let mut bad = Vec::new();
    for a in &auctions {
        for &(i, j, k) in &probes {
            let literal = a.revenue(&probe_bid_profile(config, i, j, k)?)?;
            let closed_form = reward_closed_form(a, i, j, k)?;
            checked += 1;
            if literal != closed_form {
                bad.push(ProbeMismatch { thresholds: a.rows.clone(), probe: (i, j, k), literal, closed_form });
            }
        }
    }
    Ok((checked, bad))
}

/// Reward evaluator over a fixed auction set for [`Payload::Bids`] actions.
#[derive(Debug, Clone)]
pub struct AuctionEvaluator {
    auctions: Arc<Vec<AugmentedThresholds>>,
}

impl AuctionEvaluator {
    pub fn new(auctions: Vec<AugmentedThresholds>) -> Self {
        AuctionEvaluator { auctions: Arc::new(auctions) }
    }

    pub fn auctions(&self) -> &[AugmentedThresholds] {
        &self.auctions
    }
}

impl Evaluator for AuctionEvaluator {
    fn value(&self, k: ExpertIndex, y: &AdversaryAction) -> Result<f64, GameError> {
        let Payload::Bids(b) = &y.payload else {
            return Err(GameError::NotEvaluable { id: y.id, reason: "auction games take bid profiles".into() });
        };
        let a = self.auctions.get(k.get()).ok_or(GameError::ExpertOutOfRange {
            index: k.one_based(),
            experts: self.auctions.len(),
        })?;
        a.revenue(b).map_err(|e| GameError::NotEvaluable { id: y.id, reason: e.to_string() })
    }
}

/// Reward-mode game whose experts are the given auctions.
pub fn level_auction_game(auctions: Vec<AugmentedThresholds>) -> Result<Game, GameError> {
    let k = auctions.len();
    Game::new(k, None, Arc::new(AuctionEvaluator::new(auctions)), Mode::Reward)
}

/// How per-round bid profiles are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum BidGenerator {
    /// Each bid uniform on `{0, 1/m, ..., m/m}`.
    UniformGrid,
    /// The fixed profile with probability `1 - leak`, otherwise a uniform-grid draw.
    Favored { profile: Vec<f64>, leak: f64 },
}

impl BidGenerator {
    pub fn validate(&self, config: &LevelAuctionConfig) -> Result<(), AuctionError> {
        match self {
            BidGenerator::UniformGrid => Ok(()),
            BidGenerator::Favored { profile, leak } => {
                if profile.len() != config.n {
                    return Err(AuctionError::Dimension { expected: config.n, got: profile.len() });
                }
                if profile.iter().any(|b| !(0.0..=1.0).contains(b)) || !(0.0..=1.0).contains(leak) {
                    return Err(AuctionError::Config("bids and leak must lie in [0, 1]".into()));
                }
                Ok(())
            }
        }
    }

    pub fn draw(&self, config: &LevelAuctionConfig, rng: &mut Rng) -> Vec<f64> {
        let uniform = |rng: &mut Rng| -> Vec<f64> {
            (0..config.n).map(|_| f64::from(rng.random_range(0..=config.m)) / f64::from(config.m)).collect()
        };
        match self {
            BidGenerator::UniformGrid => uniform(rng),
            BidGenerator::Favored { profile, leak } => {
                if rng.random::<f64>() < *leak {
                    uniform(rng)
                } else {
                    profile.clone()
                }
            }
        }
    }
}
