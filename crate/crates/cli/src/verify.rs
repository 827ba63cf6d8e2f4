//! `verify-ptm`: admissibility, approximability and both implementability
//! checks for a PTM against a game.

use std::path::PathBuf;

use clap::Args;
use serde_json::{json, Value};

use gftpl::game::Game;
use gftpl::oracle::{implementability_check, negative_implementability_check, ImplementabilityReport, OracleError, IMPL_TOL};
use gftpl::ptm::{admissibility_delta, approximability_check, min_gamma, negative_flip_datasets, MinGamma, Ptm, PtmError};

use crate::error::CliError;
use crate::inputs::{GameFile, PtmFile};
use crate::io::{emit, num, read_toml};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// PTM description (TOML).
    #[arg(long)]
    pub ptm: PathBuf,
    /// Game description (TOML).
    #[arg(long)]
    pub game: PathBuf,
    /// Budget to certify; defaults to the PTM's declared constant, else the
    /// smallest feasible one is computed.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn verify(args: &VerifyArgs) -> Result<bool, CliError> {
    let game = read_toml::<GameFile>(&args.game)?.build()?;
    let ptm = read_toml::<PtmFile>(&args.ptm)?.build(&game)?;
    if let Some(g) = args.gamma {
        if g.is_nan() || g <= 0.0 {
            return Err(CliError::Usage(format!("--gamma must be positive, got {g}")));
        }
    }
    let (report, pass) = verify_pair(&ptm, &game, args.gamma)?;
    emit(&report, args.out.as_deref())?;
    Ok(pass)
}

fn impl_section(result: Result<ImplementabilityReport, OracleError>) -> Result<(Value, bool), CliError> {
    match result {
        Ok(r) => Ok((
            json!({
                "status": if r.pass { "pass" } else { "fail" },
                "tolerance": IMPL_TOL,
                "max_residual": num(r.max_residual),
                "worst_column": r.worst_column.map(|c| c + 1),
            }),
            r.pass,
        )),
        Err(OracleError::MissingDatasets) => Ok((json!({ "status": "skipped", "reason": "PTM has no datasets" }), true)),
        Err(e) => Err(e.into()),
    }
}

pub fn verify_pair(ptm: &Ptm, game: &Game, gamma: Option<f64>) -> Result<(Value, bool), CliError> {
    if ptm.experts() != game.experts() {
        return Err(PtmError::RowMismatch { game: game.experts(), ptm: ptm.experts() }.into());
    }
    let adm = admissibility_delta(ptm);
    let admissibility = json!({
        "admissible": adm.admissible,
        "delta": num(adm.delta),
        "violating_pair": adm.violating_pair.map(|(a, b)| [a.one_based(), b.one_based()]),
    });

    let budget = gamma.or(ptm.declared_gamma());
    let (approximability, approx_ok) = match budget {
        Some(g) => {
            let r = approximability_check(ptm, game, g)?;
            let infeasible = r.infeasible_pair.map(|(k, y)| json!({ "expert": k.one_based(), "action": y }));
            (
                json!({
                    "gamma": num(g),
                    "feasible": r.feasible,
                    "gamma_star": r.gamma_star.map(num),
                    "infeasible": infeasible,
                }),
                r.feasible,
            )
        }
        None => match min_gamma(ptm, game)? {
            MinGamma::Finite(g) => (json!({ "gamma": null, "feasible": true, "gamma_star": num(g) }), true),
            MinGamma::Infeasible { expert, action } => (
                json!({
                    "gamma": null,
                    "feasible": false,
                    "gamma_star": null,
                    "infeasible": { "expert": expert.one_based(), "action": action },
                }),
                false,
            ),
        },
    };

    let (implementability, impl_ok) = impl_section(implementability_check(ptm, game, IMPL_TOL))?;
    let (negative, neg_ok) = match negative_flip_datasets(ptm, game) {
        Ok(flipped) => impl_section(negative_implementability_check(ptm, &flipped, game, IMPL_TOL))?,
        Err(PtmError::Unsupported) => (json!({ "status": "skipped", "reason": "no negative flip for this PTM" }), true),
        Err(e) => return Err(e.into()),
    };

    let pass = adm.admissible && approx_ok && impl_ok && neg_ok;
    let report = json!({
        "experts": ptm.experts(),
        "columns": ptm.columns(),
        "admissibility": admissibility,
        "approximability": approximability,
        "implementability": implementability,
        "negative_implementability": negative,
        "pass": pass,
    });
    Ok((report, pass))
}
