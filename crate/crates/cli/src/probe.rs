//! `probe`: stability, expected-maximum and counterexample reports.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use gftpl::algorithms::StepSizeSchedule;
use gftpl::game::AdversaryAction;
use gftpl::perturbation::{max_row_product_bound, mc_expected_max, NoiseSpec};
use gftpl::ptm::{binary_rep_ptm, min_gamma, MinGamma};
use gftpl::simulation::{counterexample_laplace, counterexample_uniform, stability_probe, Counterexample, MIN_TRIALS, SIGMAS};

use crate::error::CliError;
use crate::inputs::{GameFile, PtmFile};
use crate::io::{emit, num, read_toml};

#[derive(Debug, Subcommand)]
pub enum Probe {
    /// Monte Carlo check of `P[x_t = i] <= exp(gamma eta) P[x'_t = i]`.
    Stability(StabilityArgs),
    /// Monte Carlo `E[max_k <Gamma_k, alpha>]` for a binary PTM against its bound.
    MaxNoise(MaxNoiseArgs),
    /// Two experts, uniform noise.
    CounterexampleUniform(UniformArgs),
    /// Three experts, Laplace noise, `Gamma = [0, 0.5, 1]`.
    CounterexampleLaplace(LaplaceArgs),
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Probe description (TOML): `game`, `ptm`, `history`, `y_next`, optional `c`, `gamma`.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the file's and the PTM's constant.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilityFile {
    game: GameFile,
    ptm: PtmFile,
    /// Indices into the game's action list.
    history: Vec<usize>,
    y_next: usize,
    #[serde(default = "one")]
    c: f64,
    #[serde(default)]
    gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MaxNoiseArgs {
    #[arg(long)]
    pub experts: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UniformArgs {
    /// Noise is uniform on `[0, beta]`.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Cumulative-loss gap before round t.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_t: f64,
    /// Gap before round t + 1.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_t1: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LaplaceArgs {
    /// `L1 - L2` before round t.
    #[arg(long, allow_hyphen_values = true)]
    pub d12: f64,
    /// `L2 - L3` before round t.
    #[arg(long, allow_hyphen_values = true)]
    pub d23: f64,
    /// Round-t losses of the three experts, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub losses: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn counterexample_json(c: &Counterexample) -> Value {
    json!({ "p_t": num(c.p_t), "p_t1": num(c.p_t1), "ratio": num(c.ratio) })
}

/// Returns whether the probe's verdict (if it has one) passed.
pub fn probe(p: &Probe) -> Result<bool, CliError> {
    match p {
        Probe::Stability(a) => stability(a),
        Probe::MaxNoise(a) => max_noise(a),
        Probe::CounterexampleUniform(a) => {
            let c = counterexample_uniform(a.beta, a.delta_t, a.delta_t1)?;
            let mut r = counterexample_json(&c);
            r["beta"] = num(a.beta);
            emit(&r, a.out.as_deref())?;
            Ok(true)
        }
        Probe::CounterexampleLaplace(a) => {
            let losses: [f64; 3] = a
                .losses
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Usage("--losses takes exactly three values".into()))?;
            let r = counterexample_json(&counterexample_laplace(a.d12, a.d23, losses));
            emit(&r, a.out.as_deref())?;
            Ok(true)
        }
    }
}

fn stability(a: &StabilityArgs) -> Result<bool, CliError> {
    if a.trials < MIN_TRIALS {
        return Err(CliError::Usage(format!("--trials {} is below the floor of {MIN_TRIALS}", a.trials)));
    }
    let file: StabilityFile = read_toml(&a.config)?;
    let game = file.game.build()?;
    let ptm = file.ptm.build(&game)?;
    let actions = game.actions().ok_or_else(|| CliError::Usage("stability probe needs a finite action list".into()))?;
    let action = |j: usize| -> Result<AdversaryAction, CliError> {
        actions.get(j).cloned().ok_or_else(|| CliError::Usage(format!("action {j} outside 0..{}", actions.len())))
    };
    let history = file.history.iter().map(|&j| action(j)).collect::<Result<Vec<_>, _>>()?;
    let y_next = action(file.y_next)?;
    let gamma = match a.gamma.or(file.gamma).or(ptm.declared_gamma()) {
        Some(g) => g,
        None => match min_gamma(&ptm, &game)? {
            MinGamma::Finite(g) => g.max(f64::MIN_POSITIVE),
            MinGamma::Infeasible { expert, action } => {
                return Err(CliError::Usage(format!(
                    "PTM is not approximable (expert {}, action {action}); pass --gamma",
                    expert.one_based()
                )))
            }
        },
    };
    let schedule = StepSizeSchedule::new(gamma, file.c)?;
    let rep = stability_probe(&game, &ptm, &history, &y_next, schedule, a.trials, a.seed)?;
    let experts: Vec<Value> = rep
        .experts
        .iter()
        .map(|e| {
            json!({
                "expert": e.expert,
                "p_t": num(e.p_t),
                "p_t_prime": num(e.p_t_prime),
                "ratio": num(e.ratio),
                "bound": num(e.bound),
                "stderr": num(e.stderr),
                "tracked": e.tracked,
                "ok": e.ok,
            })
        })
        .collect();
    let r = json!({
        "trials": rep.trials,
        "seed": a.seed,
        "gamma": num(rep.gamma),
        "c": num(file.c),
        "eta": num(rep.eta),
        "sigmas": SIGMAS,
        "experts": experts,
        "pass": rep.pass,
    });
    emit(&r, a.out.as_deref())?;
    Ok(rep.pass)
}

fn max_noise(a: &MaxNoiseArgs) -> Result<bool, CliError> {
    if a.trials < 2 {
        return Err(CliError::Usage("--trials must be at least 2".into()));
    }
    let ptm = binary_rep_ptm(a.experts)?;
    let n = ptm.columns();
    let est = mc_expected_max(&ptm, &NoiseSpec::laplace(n)?, a.trials, a.seed)?;
    let bound = max_row_product_bound(a.experts, n)?;
    let pass = est.mean <= bound + SIGMAS * est.stderr;
    let r = json!({
        "experts": a.experts,
        "columns": n,
        "trials": a.trials,
        "seed": a.seed,
        "mean": num(est.mean),
        "stderr": num(est.stderr),
        "bound": num(bound),
        "pass": pass,
    });
    emit(&r, a.out.as_deref())?;
    Ok(pass)
}
