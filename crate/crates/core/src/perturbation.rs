//! Noise families for the perturbed leaders and the expected-maximum bound.
//!
//! * `Laplace`: `N` independent draws with density `exp(-|x|) / 2`.
//! * `Lp { p }`: density proportional to `exp(-||x||_p)`. Sampled as a radius
//!   `R ~ Gamma(N, 1)` times a direction `g / ||g||_p`, where each coordinate
//!   of `g` has density proportional to `exp(-|x|^p)`. For `p = 1` this is
//!   exactly the Laplace family.
//! * `NegExponential`: `N` independent `-Exp(1)` draws.

use rand::distr::{Distribution, Open01};
use rand::Rng as _;
use rand_distr::{Exp1, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ptm::Ptm;
use crate::rng::{self, Rng, Stream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("noise dimension must be at least 1")]
    ZeroDimension,
    #[error("lp noise needs p >= 1, got {0}")]
    BadP(f64),
    #[error("the expected-max bound needs K >= 2, got {0}")]
    TooFewExperts(usize),
    #[error("need at least 2 Monte Carlo trials")]
    TooFewTrials,
    #[error("noise dimension {noise} does not match {columns} PTM columns")]
    Dimension { noise: usize, columns: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseFamily {
    Laplace,
    Lp { p: f64 },
    NegExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub family: NoiseFamily,
    pub dimension: usize,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, dimension: usize) -> Result<Self, NoiseError> {
        let spec = NoiseSpec { family, dimension };
        spec.validate()?;
        Ok(spec)
    }

    pub fn laplace(dimension: usize) -> Result<Self, NoiseError> {
        Self::new(NoiseFamily::Laplace, dimension)
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if self.dimension == 0 {
            return Err(NoiseError::ZeroDimension);
        }
        if let NoiseFamily::Lp { p } = self.family {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(NoiseError::BadP(p));
            }
        }
        Ok(())
    }

    /// One draw from `rng`; used directly by Monte Carlo loops.
    pub fn draw(&self, rng: &mut Rng) -> Vec<f64> {
        let n = self.dimension;
        match self.family {
            NoiseFamily::Laplace => (0..n).map(|_| laplace(rng)).collect(),
            NoiseFamily::NegExponential => (0..n).map(|_| -rng.sample::<f64, _>(Exp1)).collect::<Vec<f64>>(),
            NoiseFamily::Lp { p } => {
                let shape = Gamma::new(1.0 / p, 1.0).expect("p >= 1 gives a valid shape");
                let g: Vec<f64> = (0..n)
                    .map(|_| {
                        let mag: f64 = shape.sample(rng).powf(1.0 / p);
                        if rng.random::<bool>() {
                            mag
                        } else {
                            -mag
                        }
                    })
                    .collect();
                let norm = g.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
                let radius: f64 = Gamma::new(n as f64, 1.0).expect("n >= 1").sample(rng);
                if norm == 0.0 {
                    return vec![0.0; n];
                }
                g.iter().map(|v| radius * v / norm).collect()
            }
        }
    }
}

/// Standard Laplace by inverse CDF.
pub fn laplace(rng: &mut Rng) -> f64 {
    let u: f64 = Open01.sample(rng);
    if u < 0.5 {
        (2.0 * u).ln()
    } else {
        -(2.0 * (1.0 - u)).ln()
    }
}

/// CDF of the standard Laplace distribution.
pub fn laplace_cdf(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * x.exp()
    } else {
        1.0 - 0.5 * (-x).exp()
    }
}

/// The base noise vector of one run. It is drawn once and only rescaled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseVector {
    pub alpha: Vec<f64>,
    pub seed: u64,
    pub family: NoiseFamily,
}

impl NoiseVector {
    pub fn dimension(&self) -> usize {
        self.alpha.len()
    }

    /// `alpha / eta`.
    pub fn scaled(&self, eta: f64) -> Vec<f64> {
        self.alpha.iter().map(|a| a / eta).collect()
    }
}

pub fn sample(spec: &NoiseSpec, seed: u64) -> Result<NoiseVector, NoiseError> {
    spec.validate()?;
    let mut rng = rng::stream(seed, Stream::Noise);
    Ok(NoiseVector { alpha: spec.draw(&mut rng), seed, family: spec.family })
}

/// `sqrt(2) max{2 ln K, sqrt(N ln K)}`.
pub fn max_row_product_bound(k: usize, n: usize) -> Result<f64, NoiseError> {
    Ok(std::f64::consts::SQRT_2 * max_term(k, n)?)
}

/// `max{2 ln K, sqrt(N ln K)}`, shared by every bound formula.
pub fn max_term(k: usize, n: usize) -> Result<f64, NoiseError> {
    if k < 2 {
        return Err(NoiseError::TooFewExperts(k));
    }
    if n == 0 {
        return Err(NoiseError::ZeroDimension);
    }
    let ln_k = (k as f64).ln();
    Ok((2.0 * ln_k).max((n as f64 * ln_k).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        if xs.len() < 2 {
            return Estimate { mean, stderr: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Estimate { mean, stderr: (var / n).sqrt() }
    }
}

/// Monte Carlo estimate of `E[max_k <Gamma_k, alpha>]`.
pub fn mc_expected_max(ptm: &Ptm, spec: &NoiseSpec, trials: usize, seed: u64) -> Result<Estimate, NoiseError> {
    spec.validate()?;
    if trials < 2 {
        return Err(NoiseError::TooFewTrials);
    }
    if spec.dimension != ptm.columns() {
        return Err(NoiseError::Dimension { noise: spec.dimension, columns: ptm.columns() });
    }
    let mut rng = rng::stream(seed, Stream::Probe);
    let samples: Vec<f64> = (0..trials)
        .map(|_| {
            let a = spec.draw(&mut rng);
            (0..ptm.experts()).map(|k| ptm.dot(k, &a)).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}
