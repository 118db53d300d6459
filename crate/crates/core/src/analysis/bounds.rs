//! Dimension thresholds below which the extremal solution is bounded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_admissible(beta_minus: f64, beta_plus: f64) -> Result<()> {
    if beta_minus > 0.5 && beta_minus <= beta_plus && beta_plus.is_finite() {
        Ok(())
    } else {
        Err(Error::precondition(format!(
            "need 1/2 < beta_minus <= beta_plus < inf, got ({beta_minus}, {beta_plus})"
        )))
    }
}

/// `4 + 4((2β₊−1)/(2β₊) + √((2β₋−1)/β₊))`.
pub fn dim_bound_general(beta_minus: f64, beta_plus: f64) -> Result<f64> {
    check_admissible(beta_minus, beta_plus)?;
    Ok(4.0
        + 4.0 * ((2.0 * beta_plus - 1.0) / (2.0 * beta_plus)
            + ((2.0 * beta_minus - 1.0) / beta_plus).sqrt()))
}

/// `6 + 4/(2β₊−1)·(1 − β₊ + √(β₊(2β₋−1)))`, valid for `β₊ < 1`.
pub fn dim_bound_subunit(beta_minus: f64, beta_plus: f64) -> Result<f64> {
    check_admissible(beta_minus, beta_plus)?;
    if beta_plus >= 1.0 {
        return Err(Error::precondition(format!(
            "subunit bound needs beta_plus < 1, got {beta_plus}"
        )));
    }
    Ok(6.0
        + 4.0 / (2.0 * beta_plus - 1.0)
            * (1.0 - beta_plus + (beta_plus * (2.0 * beta_minus - 1.0)).sqrt()))
}

/// Integrability exponents from the proof of the main bound.
///
/// `gamma` is the exponent with `f(u)^γ ∈ L¹` for fixed `(β₁, β₃)`;
/// `gamma_1` and `gamma_2` are the limiting exponents behind the general
/// and subunit thresholds. In each case boundedness follows for `n < 2·exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaExponents {
    pub gamma: f64,
    pub gamma_1: f64,
    pub gamma_2: Option<f64>,
}

pub fn gamma_exponents(beta_1: f64, beta_3: f64) -> Result<GammaExponents> {
    check_admissible(beta_1, beta_3)?;
    let ratio = (2.0 * beta_1 - 1.0) / beta_3;
    let gamma = 2.0 + ratio + 2.0 * ratio.sqrt();
    let gamma_1 = 0.5 * dim_bound_general(beta_1, beta_3)?;
    let gamma_2 = (beta_3 < 1.0).then(|| beta_3 / (2.0 * beta_3 - 1.0) * gamma_1);
    Ok(GammaExponents { gamma, gamma_1, gamma_2 })
}

/// Largest integer dimension strictly below `bound`.
pub fn max_integer_dimension(bound: f64) -> i64 {
    (bound - 1e-12).floor() as i64
}
