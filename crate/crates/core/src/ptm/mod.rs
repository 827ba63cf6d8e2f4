//! Perturbation-translation matrices (PTMs).
//!
//! A PTM `Gamma` is a `K x N` matrix with entries in `[0, 1]` that turns an
//! `N`-dimensional noise vector into `K` correlated expert perturbations. This
//! module certifies the two structural properties the learners rely on:
//!
//! * admissibility: any two rows differ somewhere by at least `delta`;
//! * approximability: for every expert `k` and action `y` there is an `s` with
//!   `||s||_1 <= gamma` and `<Gamma_k - Gamma_j, s> >= f(k, y) - f(j, y)` for
//!   all `j`.
//!
//! Approximability is decided with one small linear program per `(k, y)`
//! minimizing `||s||_1` over the split `s = s+ - s-`. Every witness the LP
//! returns is re-checked against the original inequalities before it is
//! reported.

pub mod lp;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::game::{AdversaryAction, ExpertIndex, Game, GameError, Payload};
use crate::oracle::WeightedDataset;
use lp::{LinearProgram, LpError, LpOutcome, Relation};

/// Slack on constraint verification and on the `gamma` budget comparison.
pub const CERT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PtmError {
    #[error("invalid PTM: {0}")]
    Invalid(String),
    #[error("game has {game} experts but the PTM has {ptm} rows")]
    RowMismatch { game: usize, ptm: usize },
    #[error("the game has no finite action list")]
    AbstractActionSpace,
    #[error("PTM is not a 0/1 matrix")]
    NotBinary,
    #[error("no negative flip is known for this PTM family")]
    Unsupported,
    #[error("LP witness for expert {expert}, action {action} failed re-verification (slack {slack:e})")]
    WitnessRejected { expert: usize, action: u64, slack: f64 },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Which construction produced a PTM; drives the negative-flip datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PtmFamily {
    #[default]
    Custom,
    Binary,
    SmallY,
    Transductive,
    LevelAuction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ptm {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    datasets: Option<Vec<WeightedDataset>>,
    declared_gamma: Option<f64>,
    family: PtmFamily,
}

impl Ptm {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self, PtmError> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(PtmError::Invalid("PTM needs K >= 1 rows and N >= 1 columns".into()));
        }
        if matrix.iter().any(|r| r.len() != cols) {
            return Err(PtmError::Invalid("PTM rows differ in length".into()));
        }
        let entries: Vec<f64> = matrix.into_iter().flatten().collect();
        if let Some(bad) = entries.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(PtmError::Invalid(format!("entry {bad} outside [0, 1]")));
        }
        Ok(Ptm { rows, cols, entries, datasets: None, declared_gamma: None, family: PtmFamily::Custom })
    }

    /// Attach one implementing dataset per column.
    pub fn with_datasets(mut self, datasets: Vec<WeightedDataset>) -> Result<Self, PtmError> {
        if datasets.len() != self.cols {
            return Err(PtmError::Invalid(format!(
                "{} datasets for {} columns",
                datasets.len(),
                self.cols
            )));
        }
        self.datasets = Some(datasets);
        Ok(self)
    }

    pub fn with_declared_gamma(mut self, gamma: f64) -> Result<Self, PtmError> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(PtmError::Invalid(format!("declared gamma {gamma} must be finite and >= 0")));
        }
        self.declared_gamma = Some(gamma);
        Ok(self)
    }

    pub fn with_family(mut self, family: PtmFamily) -> Self {
        self.family = family;
        self
    }

    pub fn experts(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> usize {
        self.cols
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.entries[k * self.cols..(k + 1) * self.cols]
    }

    pub fn entry(&self, k: usize, i: usize) -> f64 {
        self.entries[k * self.cols + i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.cols)
    }

    pub fn datasets(&self) -> Option<&[WeightedDataset]> {
        self.datasets.as_deref()
    }

    pub fn declared_gamma(&self) -> Option<f64> {
        self.declared_gamma
    }

    pub fn family(&self) -> PtmFamily {
        self.family
    }

    /// `<Gamma_k, v>`.
    pub fn dot(&self, k: usize, v: &[f64]) -> f64 {
        self.row(k).iter().zip(v).map(|(g, x)| g * x).sum()
    }

    /// Same matrix with columns (and datasets) permuted: column `i` of the
    /// result is column `perm[i]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Ptm, PtmError> {
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.cols).collect::<Vec<_>>() {
            return Err(PtmError::Invalid("not a column permutation".into()));
        }
        let matrix = self.rows().map(|r| perm.iter().map(|&p| r[p]).collect()).collect();
        let mut out = Ptm::new(matrix)?.with_family(self.family);
        out.declared_gamma = self.declared_gamma;
        if let Some(ds) = &self.datasets {
            out.datasets = Some(perm.iter().map(|&p| ds[p].clone()).collect());
        }
        Ok(out)
    }

    fn check_game(&self, game: &Game) -> Result<(), PtmError> {
        if game.experts() != self.rows {
            return Err(PtmError::RowMismatch { game: game.experts(), ptm: self.rows });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub s: Vec<f64>,
    pub l1_norm: f64,
}

impl Witness {
    pub fn new(s: Vec<f64>) -> Self {
        let l1_norm = s.iter().map(|v| v.abs()).sum();
        Witness { s, l1_norm }
    }

    /// Smallest slack `<Gamma_k - Gamma_j, s> - rhs_j` over `j != k`.
    pub fn min_slack(&self, ptm: &Ptm, k: usize, rhs: impl Fn(usize) -> f64) -> f64 {
        let own = ptm.dot(k, &self.s);
        (0..ptm.experts())
            .filter(|&j| j != k)
            .map(|j| own - ptm.dot(j, &self.s) - rhs(j))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// Smallest nonzero entry difference over all row pairs; infinite when
    /// `K = 1`.
    pub delta: f64,
    pub violating_pair: Option<(ExpertIndex, ExpertIndex)>,
}

pub fn admissibility_delta(ptm: &Ptm) -> AdmissibilityReport {
    let mut delta = f64::INFINITY;
    for k in 0..ptm.experts() {
        for k2 in k + 1..ptm.experts() {
            let mut nonzero = false;
            for (a, b) in ptm.row(k).iter().zip(ptm.row(k2)) {
                let d = (a - b).abs();
                if d > 0.0 {
                    nonzero = true;
                    delta = delta.min(d);
                }
            }
            if !nonzero {
                return AdmissibilityReport {
                    admissible: false,
                    delta: 0.0,
                    violating_pair: Some((ExpertIndex::new(k), ExpertIndex::new(k2))),
                };
            }
        }
    }
    AdmissibilityReport { admissible: true, delta, violating_pair: None }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximabilityReport {
    pub feasible: bool,
    /// The budget the check was run against.
    pub gamma: f64,
    /// Largest per-pair minimal `||s||_1`; absent when some pair admits no `s`.
    pub gamma_star: Option<f64>,
    /// Keyed by zero-based expert and action id (`0` for the loss-free check).
    pub witnesses: BTreeMap<(usize, u64), Witness>,
    pub infeasible_pair: Option<(ExpertIndex, u64)>,
}

/// Outcome of one minimal-norm LP.
enum PairMin {
    Feasible(Witness),
    Infeasible,
}

/// Minimize `||s||_1` subject to `<Gamma_k - Gamma_j, s> >= rhs(j)` for `j != k`.
fn min_norm_witness(ptm: &Ptm, k: usize, rhs: &[f64], action: u64) -> Result<PairMin, PtmError> {
    let n = ptm.columns();
    let mut lp = LinearProgram::minimize(vec![1.0; 2 * n]);
    for j in (0..ptm.experts()).filter(|&j| j != k) {
        let d: Vec<f64> = ptm.row(k).iter().zip(ptm.row(j)).map(|(a, b)| a - b).collect();
        let coeffs = d.iter().copied().chain(d.iter().map(|v| -v)).collect();
        lp.constrain(coeffs, Relation::Ge, rhs[j])?;
    }
    match lp.solve()? {
        LpOutcome::Optimal { x, .. } => {
            let s: Vec<f64> = (0..n).map(|i| x[i] - x[n + i]).collect();
            let w = Witness::new(s);
            let slack = w.min_slack(ptm, k, |j| rhs[j]);
            if slack < -CERT_TOL {
                return Err(PtmError::WitnessRejected { expert: k + 1, action, slack });
            }
            Ok(PairMin::Feasible(w))
        }
        LpOutcome::Infeasible => Ok(PairMin::Infeasible),
        // The objective is bounded below by zero.
        LpOutcome::Unbounded => unreachable!("l1 objective cannot be unbounded"),
    }
}

fn summarize(
    gamma: f64,
    pairs: impl IntoIterator<Item = Result<((usize, u64), PairMin), PtmError>>,
) -> Result<ApproximabilityReport, PtmError> {
    let mut witnesses = BTreeMap::new();
    let mut infeasible_pair = None;
    let mut worst: Option<(f64, (usize, u64))> = None;
    for item in pairs {
        let (key, outcome) = item?;
        match outcome {
            PairMin::Feasible(w) => {
                if worst.is_none_or(|(v, _)| w.l1_norm > v) {
                    worst = Some((w.l1_norm, key));
                }
                witnesses.insert(key, w);
            }
            PairMin::Infeasible => {
                infeasible_pair.get_or_insert((ExpertIndex::new(key.0), key.1));
            }
        }
    }
    let gamma_star = if infeasible_pair.is_none() { Some(worst.map_or(0.0, |w| w.0)) } else { None };
    if let (None, Some((v, key))) = (infeasible_pair, worst) {
        if v > gamma + CERT_TOL {
            infeasible_pair = Some((ExpertIndex::new(key.0), key.1));
        }
    }
    Ok(ApproximabilityReport {
        feasible: infeasible_pair.is_none(),
        gamma,
        gamma_star,
        witnesses,
        infeasible_pair,
    })
}

fn finite_actions(game: &Game) -> Result<&[AdversaryAction], PtmError> {
    game.actions().ok_or(PtmError::AbstractActionSpace)
}

/// Checks `gamma`-approximability of `ptm` for every expert and action of
/// `game`, one LP per pair.
pub fn approximability_check(ptm: &Ptm, game: &Game, gamma: f64) -> Result<ApproximabilityReport, PtmError> {
    ptm.check_game(game)?;
    let actions = finite_actions(game)?;
    let mut columns = Vec::with_capacity(actions.len());
    for y in actions {
        columns.push((y.id, game.loss_column(y)?));
    }
    let pairs = columns.iter().flat_map(|(id, f)| {
        (0..ptm.experts()).map(move |k| {
            let rhs: Vec<f64> = f.iter().map(|fj| f[k] - fj).collect();
            min_norm_witness(ptm, k, &rhs, *id).map(|m| ((k, *id), m))
        })
    });
    summarize(gamma, pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinGamma {
    Finite(f64),
    Infeasible { expert: ExpertIndex, action: u64 },
}

/// Tightest approximability constant, or the first pair admitting no witness.
pub fn min_gamma(ptm: &Ptm, game: &Game) -> Result<MinGamma, PtmError> {
    let report = approximability_check(ptm, game, f64::INFINITY)?;
    Ok(match (report.gamma_star, report.infeasible_pair) {
        (Some(g), _) => MinGamma::Finite(g),
        (None, Some((expert, action))) => MinGamma::Infeasible { expert, action },
        (None, None) => unreachable!("missing gamma_star implies an infeasible pair"),
    })
}

/// Loss-free sufficient condition: `<Gamma_k - Gamma_j, s> >= 1` for all
/// `j != k`. Witness keys use action id `0`.
pub fn strong_approx_check(ptm: &Ptm, gamma: f64) -> Result<ApproximabilityReport, PtmError> {
    let ones = vec![1.0; ptm.experts()];
    let pairs = (0..ptm.experts()).map(|k| min_norm_witness(ptm, k, &ones, 0).map(|m| ((k, 0), m)));
    summarize(gamma, pairs)
}

/// Rows are the 0/1 binary encodings of `0..K`, most significant bit first.
pub fn binary_rep_ptm(k: usize) -> Result<Ptm, PtmError> {
    if k == 0 {
        return Err(PtmError::Invalid("K must be at least 1".into()));
    }
    let n = (usize::BITS - (k - 1).leading_zeros()).max(1) as usize;
    let matrix = (0..k)
        .map(|r| (0..n).map(|b| ((r >> (n - 1 - b)) & 1) as f64).collect())
        .collect();
    Ok(Ptm::new(matrix)?.with_declared_gamma(n as f64)?.with_family(PtmFamily::Binary))
}

/// `s = 2 Gamma_k - 1`.
pub fn binary_witness(ptm: &Ptm, k: ExpertIndex) -> Result<Witness, PtmError> {
    if ptm.entries.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(PtmError::NotBinary);
    }
    if k.get() >= ptm.experts() {
        return Err(PtmError::Invalid(format!("expert {k} outside {} rows", ptm.experts())));
    }
    Ok(Witness::new(ptm.row(k.get()).iter().map(|v| 2.0 * v - 1.0).collect()))
}

/// Columns are the evaluator columns of the game's finite action list, each
/// implemented by a unit-weight dataset holding that action.
pub fn small_y_ptm(game: &Game) -> Result<Ptm, PtmError> {
    let actions = finite_actions(game)?;
    let cols: Vec<Vec<f64>> = actions.iter().map(|y| game.raw_column(y)).collect::<Result<_, _>>()?;
    let matrix = (0..game.experts()).map(|k| cols.iter().map(|c| c[k]).collect()).collect();
    let datasets = actions.iter().map(|y| WeightedDataset::single(1.0, y.clone())).collect();
    Ok(Ptm::new(matrix)?
        .with_datasets(datasets)?
        .with_declared_gamma(1.0)?
        .with_family(PtmFamily::SmallY))
}

/// Sorted distinct features of a classification game's action list.
pub fn feature_set(game: &Game) -> Result<Vec<usize>, PtmError> {
    let mut features = Vec::new();
    for y in finite_actions(game)? {
        match y.payload {
            Payload::Example { feature, .. } => features.push(feature),
            _ => return Err(PtmError::Invalid("transductive PTM needs labeled-example actions".into())),
        }
    }
    features.sort_unstable();
    features.dedup();
    Ok(features)
}

/// Column `j` is the loss of every classifier on `(w_j, 1)`.
pub fn transductive_ptm(game: &Game) -> Result<Ptm, PtmError> {
    let features = feature_set(game)?;
    let probes: Vec<AdversaryAction> = features.iter().map(|&w| AdversaryAction::example(w, true)).collect();
    let cols: Vec<Vec<f64>> = probes.iter().map(|y| game.raw_column(y)).collect::<Result<_, _>>()?;
    let matrix = (0..game.experts()).map(|k| cols.iter().map(|c| c[k]).collect()).collect();
    let datasets = probes.into_iter().map(|y| WeightedDataset::single(1.0, y)).collect();
    Ok(Ptm::new(matrix)?
        .with_datasets(datasets)?
        .with_declared_gamma(1.0)?
        .with_family(PtmFamily::Transductive))
}

/// Nonnegative-weight datasets whose column differences are the negated PTM
/// column differences.
pub fn negative_flip_datasets(ptm: &Ptm, game: &Game) -> Result<Vec<WeightedDataset>, PtmError> {
    ptm.check_game(game)?;
    let datasets = ptm.datasets().ok_or(PtmError::Unsupported)?;
    let flip = |y: &AdversaryAction| -> Result<AdversaryAction, PtmError> {
        match (ptm.family(), &y.payload) {
            (PtmFamily::SmallY, Payload::Column(j)) => Ok(AdversaryAction::complement(*j)),
            (PtmFamily::Transductive, Payload::Example { feature, .. }) => {
                Ok(AdversaryAction::example(*feature, false))
            }
            _ => Err(PtmError::Unsupported),
        }
    };
    datasets
        .iter()
        .map(|ds| {
            ds.items()
                .iter()
                .map(|(w, y)| Ok((*w, flip(y)?)))
                .collect::<Result<Vec<_>, PtmError>>()
                .map(WeightedDataset::new)
        })
        .collect()
}
