//! `run`: every (algorithm, seed) pair of an experiment config.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use gftpl::simulation::{aggregate, AlgorithmSpec, BoundContext, ExperimentConfig, RegretTrace};

use crate::error::CliError;
use crate::io::{read_seeds, read_toml, to_json, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Run this single seed instead of the config's list.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// File of seeds replacing the config's list.
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Written next to the outputs so a run can be replayed exactly.
#[derive(Debug, Serialize)]
struct ResolvedRun<'a> {
    format: Format,
    jobs: usize,
    #[serde(flatten)]
    experiment: &'a ExperimentConfig,
}

pub const TRACE_DIR: &str = "traces";
pub const RESOLVED_CONFIG: &str = "resolved-config.toml";

pub fn summary_name(config: &ExperimentConfig, algorithm: usize) -> String {
    format!("summary-{}-{}-{}.json", config.name, algorithm, config.algorithms[algorithm].label())
}

/// Loads the config and applies seed overrides; nothing runs if this fails.
pub fn resolve(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut config: ExperimentConfig = read_toml(&args.config)?;
    if let Some(seed) = args.seed {
        config.seeds = vec![seed];
    } else if let Some(path) = &args.seeds {
        config.seeds = read_seeds(path)?;
    }
    config.validate()?;
    Ok(config)
}

fn bound_context(config: &ExperimentConfig, algorithm: usize) -> Result<Option<BoundContext>, CliError> {
    let spec = &config.algorithms[algorithm];
    if !spec.uses_ptm() {
        return Ok(None);
    }
    let scenario = config.environment.generate(1, config.seeds[0])?;
    let ptm = config.ptm.build(&scenario.game, &config.environment)?;
    let gamma = spec.resolve_gamma(&ptm, &scenario.game)?;
    let c = match spec {
        AlgorithmSpec::Gftpl { c, .. } => *c,
        _ => 1.0,
    };
    Ok(Some(BoundContext { experts: ptm.experts(), columns: ptm.columns(), gamma, c }))
}

fn trace_bytes(trace: &RegretTrace, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => trace.to_csv().into_bytes(),
        Format::Json => to_json(trace).into_bytes(),
    }
}

/// Returns the number of trace files written.
pub fn run(args: &RunArgs) -> Result<usize, CliError> {
    let config = Arc::new(resolve(args)?);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    let jobs: Vec<(usize, u64)> = (0..config.algorithms.len())
        .flat_map(|a| config.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let out: &Path = &args.out;
    let traces: Vec<RegretTrace> = pool.install(|| {
        jobs.par_iter()
            .map(|&(a, seed)| {
                let trace = config.run_one(a, seed)?;
                let path = out.join(TRACE_DIR).join(format!("{}.{}", trace.run_id, args.format.extension()));
                write_atomic(&path, &trace_bytes(&trace, args.format))?;
                Ok(trace)
            })
            .collect::<Result<_, CliError>>()
    })?;

    for a in 0..config.algorithms.len() {
        let mine: Vec<RegretTrace> =
            jobs.iter().zip(&traces).filter(|((alg, _), _)| *alg == a).map(|(_, t)| t.clone()).collect();
        let summary = aggregate(&mine, bound_context(&config, a)?)?;
        write_atomic(&out.join(summary_name(&config, a)), to_json(&summary).as_bytes())?;
    }
    let resolved = ResolvedRun { format: args.format, jobs: args.jobs, experiment: &config };
    let text = toml::to_string(&resolved).map_err(|e| CliError::Usage(format!("cannot serialize config: {e}")))?;
    write_atomic(&out.join(RESOLVED_CONFIG), text.as_bytes())?;
    Ok(traces.len())
}
