use serde::{Deserialize, Serialize};

use crate::analysis::beta_at;
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum XiKind {
    /// `ξ = β₁ f/F` with `1/2 < β₁ < β₋`.
    Thm11 { beta_1: f64 },
    /// `ξ = f/(2F)`.
    Thm12Half,
}

impl XiKind {
    pub fn coefficient(self) -> f64 {
        match self {
            XiKind::Thm11 { beta_1 } => beta_1,
            XiKind::Thm12Half => 0.5,
        }
    }
}

/// Multiplies the coefficient of `ξ` by `factor` for `t > after`.
///
/// Only used as a negative control: the result is no longer the
/// derivative-consistent pair the identities rely on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub factor: f64,
    pub after: f64,
}

/// The test function `ξ(t) = c·f(t)/F(t)` on `t ≥ t0`.
#[derive(Debug, Clone)]
pub struct TestFunctionXi {
    kind: XiKind,
    t0: f64,
    nl: Nonlinearity,
    perturbation: Option<Perturbation>,
}

/// Sampled construction-time checks of `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiValidation {
    pub samples: usize,
    /// First sample where `ξ′ + ξ² < 0`.
    pub negative_discriminant_at: Option<f64>,
    /// First sample where `ξ > f′/f`.
    pub exceeds_log_derivative_at: Option<f64>,
}

impl XiValidation {
    pub fn passed(&self) -> bool {
        self.negative_discriminant_at.is_none() && self.exceeds_log_derivative_at.is_none()
    }
}

impl TestFunctionXi {
    pub fn new(nl: &Nonlinearity, kind: XiKind, t0: f64) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::precondition(format!("t0 must be positive, got {t0}")));
        }
        if let XiKind::Thm11 { beta_1 } = kind {
            if !(beta_1 > 0.5 && beta_1 < 1.0) {
                return Err(Error::precondition(format!(
                    "beta_1 must lie in (1/2, 1), got {beta_1}"
                )));
            }
            if let Some(pair) = nl.analytic_beta() {
                if beta_1 >= pair.lower {
                    return Err(Error::precondition(format!(
                        "beta_1 = {beta_1} must be below beta_minus = {}",
                        pair.lower
                    )));
                }
            }
        }
        Ok(TestFunctionXi { kind, t0, nl: nl.clone(), perturbation: None })
    }

    pub fn thm11(nl: &Nonlinearity, beta_1: f64, t0: f64) -> Result<Self> {
        Self::new(nl, XiKind::Thm11 { beta_1 }, t0)
    }

    pub fn thm12_half(nl: &Nonlinearity, t0: f64) -> Result<Self> {
        Self::new(nl, XiKind::Thm12Half, t0)
    }

    pub fn perturbed(&self, factor: f64, after: f64) -> Self {
        let mut copy = self.clone();
        copy.perturbation = Some(Perturbation { factor, after });
        copy
    }

    pub fn kind(&self) -> XiKind {
        self.kind
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nl
    }
    pub fn perturbation(&self) -> Option<Perturbation> {
        self.perturbation
    }

    /// Points where `ξ` is discontinuous (only the perturbation switch).
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        self.perturbation.map(|p| p.after).into_iter().collect()
    }

    fn coefficient_at(&self, t: f64) -> f64 {
        let c = self.kind.coefficient();
        match self.perturbation {
            Some(p) if t > p.after => c * p.factor,
            _ => c,
        }
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if t >= self.t0 * (1.0 - 1e-15) {
            Ok(())
        } else {
            Err(Error::domain(t, format!("xi is defined for t >= t0 = {}", self.t0)))
        }
    }

    /// `(f/F, β(t))` at `t`.
    fn ratios(&self, t: f64) -> Result<(f64, f64)> {
        let f = self.nl.f(t)?;
        let big_f = self.nl.F(t)?;
        if !(big_f > 0.0) {
            return Err(Error::domain(t, "F(t) must be positive"));
        }
        Ok((f / big_f, beta_at(&self.nl, t)?))
    }

    pub fn xi_at(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let (q, _) = self.ratios(t)?;
        Ok(self.coefficient_at(t) * q)
    }

    /// `ξ′ = c (f/F)² (β − 1)`.
    pub fn xi_prime_at(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let (q, beta) = self.ratios(t)?;
        Ok(self.coefficient_at(t) * q * q * (beta - 1.0))
    }

    /// `ξ′ + ξ² = c (f/F)² (β − (1 − c))`, formed without cancellation.
    pub fn discriminant_at(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let (q, beta) = self.ratios(t)?;
        let c = self.coefficient_at(t);
        Ok(c * q * q * (beta - (1.0 - c)))
    }

    /// `(ξ, ψ)` with `ψ = ξ + √(ξ′ + ξ²) = (ln g)′`.
    pub fn xi_and_psi(&self, t: f64) -> Result<(f64, f64)> {
        self.check_t(t)?;
        let (q, beta) = self.ratios(t)?;
        let c = self.coefficient_at(t);
        let d = c * q * q * (beta - (1.0 - c));
        if d < 0.0 {
            return Err(Error::NegativeDiscriminant { t, value: d });
        }
        Ok((c * q, c * q + d.sqrt()))
    }

    pub fn validate(&self, t_max: f64, samples: usize) -> Result<XiValidation> {
        let samples = samples.max(2);
        let mut report = XiValidation {
            samples,
            negative_discriminant_at: None,
            exceeds_log_derivative_at: None,
        };
        for i in 0..samples {
            let t = self.t0 + (t_max - self.t0) * i as f64 / (samples - 1) as f64;
            if report.negative_discriminant_at.is_none() && self.discriminant_at(t)? < 0.0 {
                report.negative_discriminant_at = Some(t);
            }
            let (f, fp) = self.nl.f_and_fprime(t)?;
            if report.exceeds_log_derivative_at.is_none() && self.xi_at(t)? > fp / f {
                report.exceeds_log_derivative_at = Some(t);
            }
        }
        Ok(report)
    }
}
