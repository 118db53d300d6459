//! Sampled checks of the two growth conditions on `β(t) − 1/2`.

use serde::{Deserialize, Serialize};

use super::indicators::beta_at;
use crate::error::{Error, Result};
use crate::nonlinearity::{increasing_block_minima, Nonlinearity};

/// Sampling density used by both checks.
pub const CONDITION_SAMPLES_PER_DECADE: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub holds: bool,
    /// First sample where the inequality (or the growth trend) fails.
    pub witness: Option<f64>,
    pub samples: usize,
    /// Smallest `β(t) − rhs(t)` seen.
    pub min_margin: f64,
    /// Growth premise `f(t)/t^{2−δ} → ∞`; only set by the L∞ check.
    pub growth_trend: Option<bool>,
}

fn sample_grid(t0: f64, t_max: f64) -> Vec<f64> {
    let decades = (t_max / t0).log10();
    let k = ((CONDITION_SAMPLES_PER_DECADE as f64) * decades).ceil().max(1.0) as usize;
    (0..=k)
        .map(|i| if i == k { t_max } else { t0 * (t_max / t0).powf(i as f64 / k as f64) })
        .collect()
}

fn check_window(t0: f64, t_max: f64) -> Result<()> {
    if t0 > 0.0 && t_max > t0 && t_max.is_finite() {
        Ok(())
    } else {
        Err(Error::precondition(format!("need 0 < t0 < t_max, got [{t0}, {t_max}]")))
    }
}

fn check_inequality<R>(nl: &Nonlinearity, grid: &[f64], rhs: R) -> Result<ConditionCheck>
where
    R: Fn(f64, f64) -> f64,
{
    let mut witness = None;
    let mut min_margin = f64::INFINITY;
    for &t in grid {
        let margin = beta_at(nl, t)? - rhs(t, nl.f(t)?);
        min_margin = min_margin.min(margin);
        if margin < 0.0 && witness.is_none() {
            witness = Some(t);
        }
    }
    Ok(ConditionCheck {
        holds: witness.is_none(),
        witness,
        samples: grid.len(),
        min_margin,
        growth_trend: None,
    })
}

/// `β(t) ≥ 1/2 + ε t / f(t)` on `[t0, t_max]`.
pub fn check_h1_condition(
    nl: &Nonlinearity,
    epsilon: f64,
    t0: f64,
    t_max: f64,
) -> Result<ConditionCheck> {
    if !(epsilon > 0.0) {
        return Err(Error::precondition("epsilon must be positive"));
    }
    check_window(t0, t_max)?;
    check_inequality(nl, &sample_grid(t0, t_max), |t, f| 0.5 + epsilon * t / f)
}

/// `β(t) ≥ 1/2 + t^{δ−2}` on `[t0, t_max]`, together with the trend
/// `f(t)/t^{2−δ}` increasing over the last decade of samples.
pub fn check_linfty_condition(
    nl: &Nonlinearity,
    delta: f64,
    t0: f64,
    t_max: f64,
) -> Result<ConditionCheck> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::precondition(format!("delta must lie in (0, 1], got {delta}")));
    }
    check_window(t0, t_max)?;
    let grid = sample_grid(t0, t_max);
    let mut report = check_inequality(nl, &grid, |t, _| 0.5 + t.powf(delta - 2.0))?;

    let tail_start = (t_max / 10.0).max(t0);
    let tail: Vec<(f64, f64)> = grid
        .iter()
        .filter(|&&t| t >= tail_start)
        .map(|&t| nl.f(t).map(|f| (t, f / t.powf(2.0 - delta))))
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = tail.iter().map(|&(_, r)| r).collect();
    let trend = increasing_block_minima(&ratios, 4);
    report.growth_trend = Some(trend);
    if !trend {
        report.holds = false;
        report.witness = report.witness.or(tail.first().map(|&(t, _)| t));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nl(name: &str, params: &[f64]) -> Nonlinearity {
        Nonlinearity::builtin(name, params).unwrap()
    }

    #[test]
    fn h1_condition_exp() {
        let report = check_h1_condition(&nl("exp", &[]), 0.5, 2.0, 50.0).unwrap();
        assert!(report.holds, "{report:?}");
        assert!(report.samples >= 64);
    }

    #[test]
    fn h1_condition_exp_fails_at_one() {
        // β(1) = 1 − 1/e ≈ 0.632 while 1/2 + 0.5/e ≈ 0.684.
        let report = check_h1_condition(&nl("exp", &[]), 0.5, 1.0, 50.0).unwrap();
        assert!(!report.holds);
        assert_eq!(report.witness, Some(1.0));
    }

    #[test]
    fn h1_condition_linear_fails() {
        let linear = Nonlinearity::parse("1+t").unwrap();
        let report = check_h1_condition(&linear, 0.1, 1.0, 1e4).unwrap();
        assert!(!report.holds);
        assert!(report.witness.is_some());
    }

    #[test]
    fn h1_condition_power() {
        assert!(check_h1_condition(&nl("power", &[2.0]), 0.1, 10.0, 1e5).unwrap().holds);
    }

    #[test]
    fn linfty_condition_examples() {
        let r = check_linfty_condition(&nl("exp", &[]), 1.0, 5.0, 60.0).unwrap();
        assert!(r.holds, "{r:?}");
        assert_eq!(r.growth_trend, Some(true));
        assert!(check_linfty_condition(&nl("power", &[2.0]), 1.0, 10.0, 1e4).unwrap().holds);
    }

    #[test]
    fn linfty_condition_needs_growth() {
        // β ≡ 1 for f = e^t is fine, but f = (1+t)^1.5 grows slower than t^{2-δ} for small δ.
        let r = check_linfty_condition(&nl("power", &[1.5]), 0.1, 10.0, 1e4).unwrap();
        assert_eq!(r.growth_trend, Some(false));
        assert!(!r.holds);
    }

    #[test]
    fn preconditions() {
        let exp = nl("exp", &[]);
        assert!(check_linfty_condition(&exp, 0.0, 1.0, 10.0).is_err());
        assert!(check_linfty_condition(&exp, 1.5, 1.0, 10.0).is_err());
        assert!(check_h1_condition(&exp, 0.0, 1.0, 10.0).is_err());
        assert!(check_h1_condition(&exp, 0.5, 10.0, 1.0).is_err());
    }
}
