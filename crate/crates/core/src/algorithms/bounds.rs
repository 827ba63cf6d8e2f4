//! Closed-form regret bounds.
//!
//! With `M = max{2 ln K, sqrt(N ln K)}` and `L = L* + 1`:
//!
//! * upper bound: `(4 sqrt2 M / c + 2 gamma (c + 1/c)) sqrt(L)
//!   + 8 gamma ln(sqrt(L)/c + gamma) + 2 gamma^2 + 4 sqrt2 M gamma`;
//! * lower bound: `-2 sqrt2 M (gamma + sqrt(L)/c)`;
//! * the OFF estimate `U_gftpl` is the upper bound at `c = 1`, and the switch
//!   slack is `tau = 4 sqrt2 M + 12 gamma`.

use std::f64::consts::SQRT_2;

use super::AlgoError;
use crate::perturbation::max_term;

fn check(l_star: f64, c: f64) -> Result<(), AlgoError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(AlgoError::BadSchedule { gamma: f64::NAN, c });
    }
    if l_star.is_nan() || l_star < 0.0 {
        return Err(AlgoError::NegativeLoss(l_star));
    }
    Ok(())
}

pub fn regret_upper_bound(k: usize, n: usize, gamma: f64, c: f64, l_star: f64) -> Result<f64, AlgoError> {
    check(l_star, c)?;
    let m = max_term(k, n)?;
    let root = (l_star + 1.0).sqrt();
    Ok((4.0 * SQRT_2 * m / c + 2.0 * gamma * (c + 1.0 / c)) * root
        + 8.0 * gamma * (root / c + gamma).ln()
        + 2.0 * gamma * gamma
        + 4.0 * SQRT_2 * m * gamma)
}

pub fn lower_bound(k: usize, n: usize, gamma: f64, c: f64, l_star: f64) -> Result<f64, AlgoError> {
    check(l_star, c)?;
    let m = max_term(k, n)?;
    Ok(-2.0 * SQRT_2 * m * (gamma + (l_star + 1.0).sqrt() / c))
}

pub fn u_hat_gftpl(l_hat_star: f64, k: usize, n: usize, gamma: f64) -> Result<f64, AlgoError> {
    check(l_hat_star, 1.0)?;
    let m = max_term(k, n)?;
    let root = (l_hat_star + 1.0).sqrt();
    Ok((4.0 * SQRT_2 * m + 4.0 * gamma) * root
        + 8.0 * gamma * (root + gamma).ln()
        + 2.0 * gamma * gamma
        + 4.0 * SQRT_2 * m * gamma)
}

pub fn tau(k: usize, n: usize, gamma: f64) -> Result<f64, AlgoError> {
    Ok(4.0 * SQRT_2 * max_term(k, n)? + 12.0 * gamma)
}
