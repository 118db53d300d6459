use serde::Serialize;

use super::profile::{CertificateOptions, CertificateProfile};
use super::xi::{TestFunctionXi, XiKind};
use crate::analysis::{beta_at, gamma_exponents};
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

/// Relative slack in the log-scale comparisons of the chain.
pub const CHAIN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub holds: bool,
    pub first_failure: Option<f64>,
    /// Smallest `lhs − rhs` seen (in the units of the check).
    pub min_margin: f64,
}

impl InequalityCheck {
    fn new() -> Self {
        InequalityCheck { holds: true, first_failure: None, min_margin: f64::INFINITY }
    }

    /// Records `lhs ≥ rhs` up to `slack·scale`.
    fn record(&mut self, t: f64, lhs: f64, rhs: f64, scale: f64) {
        let margin = lhs - rhs;
        self.min_margin = self.min_margin.min(margin);
        if margin < -CHAIN_SLACK * scale.abs().max(1.0) && self.holds {
            self.holds = false;
            self.first_failure = Some(t);
        }
    }
}

/// Per-sample verification of the growth chain for `ξ = β₁ f/F`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub beta_1: f64,
    pub beta_3: f64,
    /// Smallest sampled `β` on the window, used in the constant for `E`.
    pub beta_2: f64,
    pub t0: f64,
    pub t_max: f64,
    pub samples: usize,
    pub gamma: f64,
    /// `ξ′ + ξ² ≥ (2β₁−1) f′/F`.
    pub discriminant_lower: InequalityCheck,
    /// `(2β₁−1) f′/F ≥ ((2β₁−1)/β₃) (f′/f)²`.
    pub discriminant_upper: InequalityCheck,
    /// `F ≥ C₄ f^{1/β₃}`.
    pub antiderivative_lower: InequalityCheck,
    pub c4: f64,
    /// `E ≥ C₃ F^{2β₁−1} f^{2+2√((2β₁−1)/β₃)}`.
    pub energy_lower: InequalityCheck,
    pub c3: f64,
    /// `E ≥ C₅ f^γ` with `C₅ = C₃ C₄^{2β₁−1}`.
    pub energy_power: InequalityCheck,
    pub c5: f64,
    pub e_over_f_increasing: bool,
    pub e_over_f_end: f64,
}

impl ChainReport {
    pub fn all_hold(&self) -> bool {
        self.discriminant_lower.holds
            && self.discriminant_upper.holds
            && self.antiderivative_lower.holds
            && self.energy_lower.holds
            && self.energy_power.holds
    }
}

pub fn verify_growth_chain(xi: &TestFunctionXi, beta_3: f64, t_max: f64) -> Result<ChainReport> {
    verify_growth_chain_with(xi, beta_3, t_max, CertificateOptions::default())
}

pub fn verify_growth_chain_with(
    xi: &TestFunctionXi,
    beta_3: f64,
    t_max: f64,
    options: CertificateOptions,
) -> Result<ChainReport> {
    let beta_1 = match xi.kind() {
        XiKind::Thm11 { beta_1 } => beta_1,
        XiKind::Thm12Half => {
            return Err(Error::precondition("the growth chain needs xi = beta_1 f/F"))
        }
    };
    let gammas = gamma_exponents(beta_1, beta_3)?;
    let nl = xi.nonlinearity();
    let t0 = xi.t0();

    let profile = CertificateProfile::build(xi, t_max, options)?;
    let mut beta_2 = f64::INFINITY;
    for &t in &profile.grid {
        let beta = beta_at(nl, t)?;
        if !(beta > beta_1 && beta < beta_3) {
            return Err(Error::precondition_at(
                format!("beta({t}) = {beta} leaves ({beta_1}, {beta_3})"),
                t,
            ));
        }
        beta_2 = beta_2.min(beta);
    }

    let a = 2.0 * beta_1 - 1.0;
    let s = (a / beta_3).sqrt();
    let big_f0 = nl.F(t0)?;
    let f0 = profile.f[0];
    let ln_c4 = big_f0.ln() - f0.ln() / beta_3;
    let ln_c3 = (beta_2 - beta_1).ln() - 2.0 * beta_1 * big_f0.ln() - 2.0 * s * f0.ln();
    let ln_c5 = ln_c3 + a * ln_c4;

    let mut report = ChainReport {
        beta_1,
        beta_3,
        beta_2,
        t0,
        t_max,
        samples: profile.len(),
        gamma: gammas.gamma,
        discriminant_lower: InequalityCheck::new(),
        discriminant_upper: InequalityCheck::new(),
        antiderivative_lower: InequalityCheck::new(),
        c4: ln_c4.exp(),
        energy_lower: InequalityCheck::new(),
        c3: ln_c3.exp(),
        energy_power: InequalityCheck::new(),
        c5: ln_c5.exp(),
        e_over_f_increasing: true,
        e_over_f_end: f64::NAN,
    };

    let mut previous_ratio = f64::NEG_INFINITY;
    for (i, &t) in profile.grid.iter().enumerate() {
        let (f, fp) = nl.f_and_fprime(t)?;
        let big_f = nl.F(t)?;
        let d = xi.discriminant_at(t)?;
        let middle = a * fp / big_f;
        let right = a / beta_3 * (fp / f) * (fp / f);
        report.discriminant_lower.record(t, d, middle, middle);
        report.discriminant_upper.record(t, middle, right, middle);

        let (ln_f, ln_big_f) = (f.ln(), big_f.ln());
        report
            .antiderivative_lower
            .record(t, ln_big_f, ln_c4 + ln_f / beta_3, ln_big_f);
        let e = profile.E[i];
        let ln_e = if e > 0.0 { e.ln() } else { f64::NEG_INFINITY };
        report
            .energy_lower
            .record(t, ln_e, ln_c3 + a * ln_big_f + (2.0 + 2.0 * s) * ln_f, ln_e);
        report
            .energy_power
            .record(t, ln_e, ln_c5 + gammas.gamma * ln_f, ln_e);

        let ratio = e / f;
        if ratio < previous_ratio {
            report.e_over_f_increasing = false;
        }
        previous_ratio = ratio;
        report.e_over_f_end = ratio;
    }
    Ok(report)
}

/// Smallest point of a geometric grid (64 per decade, starting at
/// `t_min`) after which `β` stays inside `(β₁, β₃)` for a full decade.
pub fn select_t0(
    nl: &Nonlinearity,
    beta_1: f64,
    beta_3: f64,
    t_min: f64,
    t_search_max: f64,
) -> Result<f64> {
    const PER_DECADE: usize = 64;
    if !(t_min > 0.0 && t_search_max > t_min) {
        return Err(Error::precondition("need 0 < t_min < t_search_max"));
    }
    let steps = ((PER_DECADE as f64) * (t_search_max / t_min).log10()).ceil() as usize;
    let grid: Vec<f64> = (0..=steps + PER_DECADE)
        .map(|k| t_min * 10f64.powf(k as f64 / PER_DECADE as f64))
        .collect();
    let mut inside = Vec::with_capacity(grid.len());
    for &t in &grid {
        match beta_at(nl, t) {
            Ok(b) => inside.push(b > beta_1 && b < beta_3),
            Err(Error::Overflow { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    // Length of the run of `true` values starting at each index.
    let mut run = vec![0usize; inside.len()];
    for i in (0..inside.len()).rev() {
        if inside[i] {
            run[i] = 1 + run.get(i + 1).copied().unwrap_or(0);
        }
    }
    (0..=steps.min(run.len().saturating_sub(1)))
        .find(|&i| run[i] > PER_DECADE)
        .map(|i| grid[i])
        .ok_or_else(|| {
            Error::precondition(format!(
                "beta does not stay inside ({beta_1}, {beta_3}) for a decade below t = {t_search_max}"
            ))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp() -> Nonlinearity {
        Nonlinearity::builtin("exp", &[]).unwrap()
    }

    #[test]
    fn exp_chain_holds() {
        let xi = TestFunctionXi::thm11(&exp(), 0.9, 5.0).unwrap();
        let report = verify_growth_chain(&xi, 1.1, 25.0).unwrap();
        assert!(report.all_hold(), "{report:#?}");
        assert!(report.e_over_f_increasing);
        assert!(report.e_over_f_end > 1e3);
    }

    #[test]
    fn beta_3_below_one_violates_precondition() {
        let xi = TestFunctionXi::thm11(&exp(), 0.8, 5.0).unwrap();
        let err = verify_growth_chain(&xi, 0.9, 25.0).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated { witness: Some(_), .. }), "{err:?}");
    }

    #[test]
    fn select_t0_exp() {
        // β(t) = 1 − e^{−t} > 0.9 exactly when t > ln 10.
        let t0 = select_t0(&exp(), 0.9, 1.1, 0.01, 1e3).unwrap();
        assert!(t0 > 10f64.ln() && t0 < 10f64.ln() * 10f64.powf(1.0 / 64.0), "{t0}");
    }

    #[test]
    fn select_t0_reports_failure() {
        assert!(select_t0(&exp(), 0.9, 0.95, 0.01, 100.0).is_err());
    }

    #[test]
    fn example_1_1_chain() {
        let nl = Nonlinearity::builtin("example_1_1", &[]).unwrap();
        let t0 = select_t0(&nl, 0.6, 0.7, 0.1, 1e4).unwrap();
        let xi = TestFunctionXi::thm11(&nl, 0.6, t0).unwrap();
        let report = verify_growth_chain(&xi, 0.7, 20.0 * t0).unwrap();
        assert!(report.all_hold(), "{report:#?}");
    }
}
