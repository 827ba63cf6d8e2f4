//! Stability probe and the closed-form counterexamples.

use serde::Serialize;

use super::SimError;
use crate::algorithms::{perturbed_leader, StepSizeSchedule};
use crate::game::{cumulative_losses, AdversaryAction, Game};
use crate::perturbation::{laplace_cdf, NoiseSpec};
use crate::ptm::Ptm;
use crate::rng::{self, Stream};

/// Fewer trials than this are rejected.
pub const MIN_TRIALS: usize = 1_000;
/// Probabilities below this are reported but not tested.
pub const MIN_TRACKED_PROBABILITY: f64 = 1e-3;
/// Monte Carlo slack in standard errors.
pub const SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpertStability {
    /// One-based.
    pub expert: usize,
    pub p_t: f64,
    pub p_t_prime: f64,
    pub ratio: f64,
    pub bound: f64,
    /// Standard error of `p_t - bound * p_t_prime`.
    pub stderr: f64,
    pub tracked: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityProbeReport {
    pub experts: Vec<ExpertStability>,
    pub trials: usize,
    pub eta: f64,
    pub gamma: f64,
    pub pass: bool,
}

/// Estimates `P[x_t = i]` (history only) and `P[x'_t = i]` (history plus
/// `y_next`, same noise) over fresh Laplace draws and checks
/// `P[x_t = i] <= exp(gamma eta_t) P[x'_t = i]` within `SIGMAS` standard errors.
pub fn stability_probe(
    game: &Game,
    ptm: &Ptm,
    history: &[AdversaryAction],
    y_next: &AdversaryAction,
    schedule: StepSizeSchedule,
    trials: usize,
    seed: u64,
) -> Result<StabilityProbeReport, SimError> {
    if trials < MIN_TRIALS {
        return Err(SimError::TooFewTrials { got: trials, min: MIN_TRIALS });
    }
    if ptm.experts() != game.experts() {
        return Err(SimError::Config(format!("PTM has {} rows, game has {} experts", ptm.experts(), game.experts())));
    }
    let cum = cumulative_losses(game, history)?;
    let extended: Vec<f64> = cum.iter().zip(game.loss_column(y_next)?).map(|(c, l)| c + l).collect();
    let l_star = cum.iter().copied().fold(f64::INFINITY, f64::min);
    let eta = schedule.eta(l_star)?;
    let spec = NoiseSpec::laplace(ptm.columns())?;
    let mut rng = rng::stream(seed, Stream::Probe);
    let k = game.experts();
    let (mut hits, mut hits_prime) = (vec![0usize; k], vec![0usize; k]);
    for _ in 0..trials {
        let alpha: Vec<f64> = spec.draw(&mut rng).into_iter().map(|a| a / eta).collect();
        hits[perturbed_leader(&cum, ptm, &alpha).get()] += 1;
        hits_prime[perturbed_leader(&extended, ptm, &alpha).get()] += 1;
    }
    let bound = (schedule.gamma * eta).exp();
    let n = trials as f64;
    let experts: Vec<ExpertStability> = (0..k)
        .map(|i| {
            let p = hits[i] as f64 / n;
            let q = hits_prime[i] as f64 / n;
            let stderr = (p * (1.0 - p) / n + bound * bound * q * (1.0 - q) / n).sqrt();
            let tracked = p >= MIN_TRACKED_PROBABILITY;
            let ratio = if q > 0.0 {
                p / q
            } else if p > 0.0 {
                f64::INFINITY
            } else {
                1.0
            };
            let ok = !tracked || p <= bound * q + SIGMAS * stderr;
            ExpertStability { expert: i + 1, p_t: p, p_t_prime: q, ratio, bound, stderr, tracked, ok }
        })
        .collect();
    let pass = experts.iter().all(|e| e.ok);
    Ok(StabilityProbeReport { experts, trials, eta, gamma: schedule.gamma, pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Counterexample {
    pub p_t: f64,
    pub p_t1: f64,
    /// `p_t / p_t1`; infinite when only `p_t1` vanishes, NaN when both do.
    pub ratio: f64,
}

impl Counterexample {
    fn new(p_t: f64, p_t1: f64) -> Self {
        let ratio = if p_t1 > 0.0 {
            p_t / p_t1
        } else if p_t > 0.0 {
            f64::INFINITY
        } else {
            f64::NAN
        };
        Counterexample { p_t, p_t1, ratio }
    }
}

/// Two experts, `Gamma = [0; 1]`, noise uniform on `[0, beta]`: expert 2 is
/// chosen with probability `clamp((beta - delta) / beta, 0, 1)` when it trails
/// by `delta`.
pub fn counterexample_uniform(beta: f64, delta_t: f64, delta_t1: f64) -> Result<Counterexample, SimError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(SimError::Config(format!("beta must be positive, got {beta}")));
    }
    let p = |d: f64| ((beta - d) / beta).clamp(0.0, 1.0);
    Ok(Counterexample::new(p(delta_t), p(delta_t1)))
}

/// Three experts, `Gamma = [0, 0.5, 1]`, standard Laplace noise. Expert 2 wins
/// iff `2 d23 <= alpha <= 2 d12` with `d12 = L1 - L2`, `d23 = L2 - L3`.
pub fn counterexample_laplace(d12: f64, d23: f64, next_losses: [f64; 3]) -> Counterexample {
    let p = |d12: f64, d23: f64| {
        let (lo, hi) = (2.0 * d23, 2.0 * d12);
        if hi > lo {
            laplace_cdf(hi) - laplace_cdf(lo)
        } else {
            0.0
        }
    };
    let [l1, l2, l3] = next_losses;
    Counterexample::new(p(d12, d23), p(d12 + l1 - l2, d23 + l2 - l3))
}
