//! The online-learning arena: experts, adversary actions, bounded loss
//! evaluators and best-in-hindsight statistics.
//!
//! A [`Game`] owns an [`Evaluator`] that maps `(expert, action)` to a value in
//! `[0, 1]`. In [`Mode::Loss`] that value is the loss `f`; in [`Mode::Reward`]
//! it is a reward `r` and the induced loss is `1 - r`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack allowed outside `[0, 1]` before an evaluator output is rejected.
pub const RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("expert index {index} out of range for {experts} experts")]
    ExpertOutOfRange { index: usize, experts: usize },
    #[error("action {id} cannot be evaluated: {reason}")]
    NotEvaluable { id: u64, reason: String },
    #[error("evaluator returned {value} for expert {expert}, action {id}; outside [0, 1]")]
    OutOfRange { expert: usize, id: u64, value: f64 },
    #[error("invalid game: {0}")]
    Invalid(String),
}

/// Zero-based expert index. Displayed one-based, as in traces and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExpertIndex(usize);

impl ExpertIndex {
    pub const FIRST: ExpertIndex = ExpertIndex(0);

    pub fn new(zero_based: usize) -> Self {
        ExpertIndex(zero_based)
    }

    pub fn from_one_based(k: usize) -> Option<Self> {
        k.checked_sub(1).map(ExpertIndex)
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn one_based(self) -> usize {
        self.0 + 1
    }
}

impl fmt::Display for ExpertIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Loss,
    Reward,
}

/// Environment-specific content of an adversary action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    /// Column `j` of a loss matrix.
    Column(usize),
    /// Column `j` of a loss matrix with every entry replaced by `1 - entry`.
    Complement(usize),
    /// A bid profile for an auction environment.
    Bids(Vec<f64>),
    /// A feature index with a binary label.
    Example { feature: usize, label: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryAction {
    pub id: u64,
    pub payload: Payload,
}

impl AdversaryAction {
    pub fn column(j: usize) -> Self {
        AdversaryAction { id: j as u64, payload: Payload::Column(j) }
    }

    pub fn complement(j: usize) -> Self {
        AdversaryAction { id: (1 << 62) | j as u64, payload: Payload::Complement(j) }
    }

    pub fn bids(id: u64, bids: Vec<f64>) -> Self {
        AdversaryAction { id, payload: Payload::Bids(bids) }
    }

    /// Labeled example; the id packs `(feature, label)` so it stays unique.
    pub fn example(feature: usize, label: bool) -> Self {
        AdversaryAction {
            id: 2 * feature as u64 + u64::from(label),
            payload: Payload::Example { feature, label },
        }
    }
}

/// A pure function `(expert, action) -> [0, 1]`.
pub trait Evaluator: Send + Sync + fmt::Debug {
    fn value(&self, k: ExpertIndex, y: &AdversaryAction) -> Result<f64, GameError>;
}

/// Dense `K x |Y|` matrix evaluator for [`Payload::Column`] and
/// [`Payload::Complement`] actions.
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    rows: Vec<Vec<f64>>,
}

impl LossMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, GameError> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || width == 0 {
            return Err(GameError::Invalid("loss matrix must be non-empty".into()));
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(GameError::Invalid("loss matrix rows differ in length".into()));
        }
        Ok(LossMatrix { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn columns(&self) -> usize {
        self.rows[0].len()
    }
}

impl Evaluator for LossMatrix {
    fn value(&self, k: ExpertIndex, y: &AdversaryAction) -> Result<f64, GameError> {
        let row = &self.rows[k.get()];
        let (j, complement) = match y.payload {
            Payload::Column(j) => (j, false),
            Payload::Complement(j) => (j, true),
            _ => {
                return Err(GameError::NotEvaluable {
                    id: y.id,
                    reason: "loss matrix expects a column action".into(),
                })
            }
        };
        let v = *row.get(j).ok_or_else(|| GameError::NotEvaluable {
            id: y.id,
            reason: format!("column {j} outside {} columns", row.len()),
        })?;
        Ok(if complement { 1.0 - v } else { v })
    }
}

/// Binary classifiers over a finite feature set; loss is the 0/1 error.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifiers {
    predictions: Vec<Vec<bool>>,
}

impl Classifiers {
    pub fn new(predictions: Vec<Vec<bool>>) -> Result<Self, GameError> {
        let width = predictions.first().map_or(0, Vec::len);
        if predictions.is_empty() || width == 0 {
            return Err(GameError::Invalid("classifier table must be non-empty".into()));
        }
        if predictions.iter().any(|r| r.len() != width) {
            return Err(GameError::Invalid("classifier rows differ in length".into()));
        }
        Ok(Classifiers { predictions })
    }

    pub fn features(&self) -> usize {
        self.predictions[0].len()
    }
}

impl Evaluator for Classifiers {
    fn value(&self, k: ExpertIndex, y: &AdversaryAction) -> Result<f64, GameError> {
        let Payload::Example { feature, label } = y.payload else {
            return Err(GameError::NotEvaluable {
                id: y.id,
                reason: "classifier game expects a labeled example".into(),
            });
        };
        let row = &self.predictions[k.get()];
        let pred = *row.get(feature).ok_or_else(|| GameError::NotEvaluable {
            id: y.id,
            reason: format!("feature {feature} outside the feature set"),
        })?;
        Ok(if pred == label { 0.0 } else { 1.0 })
    }
}

#[derive(Debug, Clone)]
pub struct Game {
    experts: usize,
    actions: Option<Vec<AdversaryAction>>,
    evaluator: Arc<dyn Evaluator>,
    mode: Mode,
}

impl Game {
    pub fn new(
        experts: usize,
        actions: Option<Vec<AdversaryAction>>,
        evaluator: Arc<dyn Evaluator>,
        mode: Mode,
    ) -> Result<Self, GameError> {
        if experts == 0 {
            return Err(GameError::Invalid("a game needs at least one expert".into()));
        }
        if let Some(acts) = &actions {
            let mut ids: Vec<u64> = acts.iter().map(|a| a.id).collect();
            ids.sort_unstable();
            if ids.windows(2).any(|w| w[0] == w[1]) {
                return Err(GameError::Invalid("action ids must be unique".into()));
            }
        }
        Ok(Game { experts, actions, evaluator, mode })
    }

    /// Loss-mode game over a dense `K x |Y|` matrix; action `j` is column `j`.
    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Result<Self, GameError> {
        Self::matrix_with_mode(rows, Mode::Loss)
    }

    pub fn matrix_with_mode(rows: Vec<Vec<f64>>, mode: Mode) -> Result<Self, GameError> {
        let m = LossMatrix::new(rows)?;
        let k = m.rows().len();
        let actions = (0..m.columns()).map(AdversaryAction::column).collect();
        let game = Game::new(k, Some(actions), Arc::new(m), mode)?;
        game.validate_actions()?;
        Ok(game)
    }

    /// Transductive classification game: every `(feature, label)` pair is an action.
    pub fn transductive(predictions: Vec<Vec<bool>>) -> Result<Self, GameError> {
        let c = Classifiers::new(predictions)?;
        let k = c.predictions.len();
        let actions = (0..c.features())
            .flat_map(|w| [AdversaryAction::example(w, false), AdversaryAction::example(w, true)])
            .collect();
        Game::new(k, Some(actions), Arc::new(c), Mode::Loss)
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn actions(&self) -> Option<&[AdversaryAction]> {
        self.actions.as_deref()
    }

    pub fn evaluator(&self) -> &Arc<dyn Evaluator> {
        &self.evaluator
    }

    pub fn check_expert(&self, k: ExpertIndex) -> Result<(), GameError> {
        if k.get() < self.experts {
            Ok(())
        } else {
            Err(GameError::ExpertOutOfRange { index: k.one_based(), experts: self.experts })
        }
    }

    /// The evaluator's own value (a loss in loss mode, a reward in reward mode).
    pub fn raw(&self, k: ExpertIndex, y: &AdversaryAction) -> Result<f64, GameError> {
        self.check_expert(k)?;
        let v = self.evaluator.value(k, y)?;
        if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&v) {
            return Err(GameError::OutOfRange { expert: k.one_based(), id: y.id, value: v });
        }
        Ok(v.clamp(0.0, 1.0))
    }

    pub fn loss(&self, k: ExpertIndex, y: &AdversaryAction) -> Result<f64, GameError> {
        let v = self.raw(k, y)?;
        Ok(match self.mode {
            Mode::Loss => v,
            Mode::Reward => 1.0 - v,
        })
    }

    pub fn reward(&self, k: ExpertIndex, y: &AdversaryAction) -> Result<f64, GameError> {
        Ok(1.0 - self.loss(k, y)?)
    }

    /// Losses of every expert against one action.
    pub fn loss_column(&self, y: &AdversaryAction) -> Result<Vec<f64>, GameError> {
        (0..self.experts).map(|k| self.loss(ExpertIndex(k), y)).collect()
    }

    /// Evaluator values of every expert against one action.
    pub fn raw_column(&self, y: &AdversaryAction) -> Result<Vec<f64>, GameError> {
        (0..self.experts).map(|k| self.raw(ExpertIndex(k), y)).collect()
    }

    fn validate_actions(&self) -> Result<(), GameError> {
        if let Some(acts) = &self.actions {
            for y in acts {
                self.loss_column(y)?;
            }
        }
        Ok(())
    }
}

/// Entry `k` is `sum_t f(k, y_t)`.
pub fn cumulative_losses(game: &Game, ys: &[AdversaryAction]) -> Result<Vec<f64>, GameError> {
    let mut cum = vec![0.0; game.experts()];
    for y in ys {
        for (c, l) in cum.iter_mut().zip(game.loss_column(y)?) {
            *c += l;
        }
    }
    Ok(cum)
}

pub fn best_in_hindsight(game: &Game, ys: &[AdversaryAction]) -> Result<HindsightStats, GameError> {
    Ok(HindsightStats::from_cumulative(cumulative_losses(game, ys)?))
}

/// Index of the smallest value, ties to the lowest index.
pub fn argmin(values: impl IntoIterator<Item = f64>) -> ExpertIndex {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    ExpertIndex(best.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HindsightStats {
    pub cumulative: Vec<f64>,
    pub best_expert: ExpertIndex,
    pub best_loss: f64,
}

impl HindsightStats {
    pub fn from_cumulative(cumulative: Vec<f64>) -> Self {
        let best_expert = argmin(cumulative.iter().copied());
        let best_loss = cumulative.get(best_expert.get()).copied().unwrap_or(0.0);
        HindsightStats { cumulative, best_expert, best_loss }
    }

    /// Append one round of losses.
    pub fn push(&mut self, column: &[f64]) {
        for (c, l) in self.cumulative.iter_mut().zip(column) {
            *c += l;
        }
        self.best_expert = argmin(self.cumulative.iter().copied());
        self.best_loss = self.cumulative[self.best_expert.get()];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_by_two() -> Game {
        Game::from_matrix(vec![vec![0.3, 0.5], vec![0.7, 0.5]]).unwrap()
    }

    #[test]
    fn zero_loss_game() {
        let g = Game::from_matrix(vec![vec![0.0; 3]; 2]).unwrap();
        assert_eq!(g.loss(ExpertIndex::new(1), &AdversaryAction::column(2)).unwrap(), 0.0);
    }

    #[test]
    fn reward_mode_inverts() {
        let g = Game::matrix_with_mode(vec![vec![1.0], vec![1.0]], Mode::Reward).unwrap();
        let y = AdversaryAction::column(0);
        assert_eq!(g.loss(ExpertIndex::FIRST, &y).unwrap(), 0.0);
        assert_eq!(g.reward(ExpertIndex::FIRST, &y).unwrap(), 1.0);
    }

    #[test]
    fn expert_out_of_range() {
        let g = two_by_two();
        let err = g.loss(ExpertIndex::new(2), &AdversaryAction::column(0)).unwrap_err();
        assert!(matches!(err, GameError::ExpertOutOfRange { .. }));
    }

    #[test]
    fn out_of_range_loss_rejected() {
        assert!(matches!(
            Game::from_matrix(vec![vec![1.5]]),
            Err(GameError::OutOfRange { .. })
        ));
        let g = Game::from_matrix(vec![vec![1.0 + 1e-13]]).unwrap();
        assert_eq!(g.loss(ExpertIndex::FIRST, &AdversaryAction::column(0)).unwrap(), 1.0);
    }

    #[test]
    fn unevaluable_payload() {
        let g = two_by_two();
        let y = AdversaryAction::example(0, true);
        assert!(matches!(g.loss(ExpertIndex::FIRST, &y), Err(GameError::NotEvaluable { .. })));
    }

    #[test]
    fn duplicate_action_ids_rejected() {
        let m = LossMatrix::new(vec![vec![0.0, 1.0]]).unwrap();
        let acts = vec![AdversaryAction::column(0), AdversaryAction::column(0)];
        assert!(Game::new(1, Some(acts), Arc::new(m), Mode::Loss).is_err());
    }

    #[test]
    fn cumulative_examples() {
        let g = two_by_two();
        assert_eq!(cumulative_losses(&g, &[]).unwrap(), vec![0.0, 0.0]);
        let c = cumulative_losses(&g, &[AdversaryAction::column(0)]).unwrap();
        assert_eq!(c, vec![0.3, 0.7]);
    }

    #[test]
    fn hindsight_examples() {
        let g = two_by_two();
        let empty = best_in_hindsight(&g, &[]).unwrap();
        assert_eq!((empty.best_expert, empty.best_loss), (ExpertIndex::FIRST, 0.0));
        let one = best_in_hindsight(&g, &[AdversaryAction::column(0)]).unwrap();
        assert_eq!((one.best_expert, one.best_loss), (ExpertIndex::FIRST, 0.3));
        let tie = best_in_hindsight(&g, &[AdversaryAction::column(1)]).unwrap();
        assert_eq!(tie.best_expert, ExpertIndex::FIRST);
    }

    #[test]
    fn transductive_indicator_loss() {
        let g = Game::transductive(vec![vec![true, false]]).unwrap();
        assert_eq!(g.actions().unwrap().len(), 4);
        assert_eq!(g.loss(ExpertIndex::FIRST, &AdversaryAction::example(0, true)).unwrap(), 0.0);
        assert_eq!(g.loss(ExpertIndex::FIRST, &AdversaryAction::example(1, true)).unwrap(), 1.0);
    }

    #[test]
    fn display_is_one_based() {
        assert_eq!(ExpertIndex::new(0).to_string(), "1");
        assert_eq!(ExpertIndex::from_one_based(3), Some(ExpertIndex::new(2)));
        assert_eq!(ExpertIndex::from_one_based(0), None);
    }

    fn matrix_and_sequence() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
        (1usize..6, 1usize..5).prop_flat_map(|(k, d)| {
            (
                proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, d), k),
                proptest::collection::vec(0..d, 0..40),
            )
        })
    }

    proptest! {
        #[test]
        fn best_loss_is_min_of_cumulative((rows, seq) in matrix_and_sequence()) {
            let g = Game::from_matrix(rows).unwrap();
            let ys: Vec<_> = seq.iter().map(|&j| AdversaryAction::column(j)).collect();
            let cum = cumulative_losses(&g, &ys).unwrap();
            let stats = best_in_hindsight(&g, &ys).unwrap();
            let min = cum.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(stats.best_loss, min);
            prop_assert!(cum.iter().all(|&c| c <= ys.len() as f64));
        }

        #[test]
        fn appending_moves_best_by_at_most_one((rows, seq) in matrix_and_sequence()) {
            let g = Game::from_matrix(rows).unwrap();
            let mut stats = HindsightStats::from_cumulative(vec![0.0; g.experts()]);
            for &j in &seq {
                let before = stats.best_loss;
                stats.push(&g.loss_column(&AdversaryAction::column(j)).unwrap());
                prop_assert!(stats.best_loss >= before);
                prop_assert!(stats.best_loss <= before + 1.0 + 1e-12);
            }
        }

        #[test]
        fn reward_plus_loss_is_one(rows in proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, 3), 1..4)) {
            let g = Game::matrix_with_mode(rows, Mode::Reward).unwrap();
            for k in 0..g.experts() {
                for j in 0..3 {
                    let y = AdversaryAction::column(j);
                    let k = ExpertIndex::new(k);
                    let s = g.loss(k, &y).unwrap() + g.raw(k, &y).unwrap();
                    prop_assert!((s - 1.0).abs() < 1e-15);
                }
            }
        }
    }
}
