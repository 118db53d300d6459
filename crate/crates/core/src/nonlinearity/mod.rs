//! The scalar nonlinearity `f`, its derivatives and its antiderivative `F`.

pub mod dual;
pub mod expr;
pub mod quadrature;

mod hypothesis;

use serde::{Deserialize, Serialize};

pub use dual::{Dual, DualScalar, Real};
pub use expr::ScalarExpression;
pub use hypothesis::{validate_hypothesis_h, HypothesisReport};
pub(crate) use hypothesis::increasing_block_minima;
pub use quadrature::{
    integrate, integrate_simpson, integrate_with, CumulativeIntegral, Integral, QuadratureRule, Tolerance,
};

use crate::error::{Error, Result};

/// Per-unit-length absolute tolerance used for `F` by quadrature.
pub const ANTIDERIVATIVE_TOLERANCE: f64 = 1e-10;

/// Closed-form catalog entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Builtin {
    /// `e^t`
    Exp,
    /// `(1+t)^p`, `p > 1`
    Power { p: f64 },
    /// `t² + 3t + 3cos t + 4`
    Example11,
    /// `e^t (3 + 2cos t)`
    Example12,
}

impl Builtin {
    pub fn eval<T: Real>(&self, t: T) -> T {
        let c = T::constant;
        match *self {
            Builtin::Exp => t.exp(),
            Builtin::Power { p } => (c(1.0) + t).powf(p),
            Builtin::Example11 => t * t + c(3.0) * t + c(3.0) * t.cos() + c(4.0),
            Builtin::Example12 => t.exp() * (c(3.0) + c(2.0) * t.cos()),
        }
    }

    /// Hand-differentiated `f′`.
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Builtin::Exp => t.exp(),
            Builtin::Power { p } => p * (1.0 + t).powf(p - 1.0),
            Builtin::Example11 => 2.0 * t + 3.0 - 3.0 * t.sin(),
            Builtin::Example12 => t.exp() * (3.0 + 2.0 * t.cos() - 2.0 * t.sin()),
        }
    }

    /// Hand-differentiated `f″`.
    pub fn second_derivative(&self, t: f64) -> f64 {
        match *self {
            Builtin::Exp => t.exp(),
            Builtin::Power { p } => p * (p - 1.0) * (1.0 + t).powf(p - 2.0),
            Builtin::Example11 => 2.0 - 3.0 * t.cos(),
            Builtin::Example12 => t.exp() * (3.0 - 4.0 * t.sin()),
        }
    }

    /// Closed-form `F(t) = ∫_0^t f`.
    pub fn antiderivative(&self, t: f64) -> f64 {
        match *self {
            Builtin::Exp => t.exp_m1(),
            Builtin::Power { p } => ((1.0 + t).powf(p + 1.0) - 1.0) / (p + 1.0),
            Builtin::Example11 => t * t * t / 3.0 + 1.5 * t * t + 3.0 * t.sin() + 4.0 * t,
            Builtin::Example12 => t.exp() * (3.0 + t.cos() + t.sin()) - 4.0,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Builtin::Exp => "exp".into(),
            Builtin::Power { p } => format!("power(p={p})"),
            Builtin::Example11 => "example_1_1".into(),
            Builtin::Example12 => "example_1_2".into(),
        }
    }

    pub fn expression_text(&self) -> String {
        match *self {
            Builtin::Exp => "exp(t)".into(),
            Builtin::Power { p } => format!("(1+t)^{p}"),
            Builtin::Example11 => "t^2 + 3*t + 3*cos(t) + 4".into(),
            Builtin::Example12 => "exp(t)*(3+2*cos(t))".into(),
        }
    }
}

/// How trustworthy a catalog `(lower, upper)` limit pair is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitQuality {
    Exact,
    /// Quoted to a few digits; numeric estimates may override it.
    Approximate,
}

/// A catalog value for `(lim inf, lim sup)` of an indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitPair {
    pub lower: f64,
    pub upper: f64,
    pub quality: LimitQuality,
}

impl LimitPair {
    pub fn exact(lower: f64, upper: f64) -> Self {
        LimitPair { lower, upper, quality: LimitQuality::Exact }
    }

    pub fn approximate(lower: f64, upper: f64) -> Self {
        LimitPair { lower, upper, quality: LimitQuality::Approximate }
    }
}

#[derive(Debug, Clone)]
pub enum Form {
    Builtin(Builtin),
    Parsed(ScalarExpression),
}

#[derive(Debug, Clone)]
enum Antiderivative {
    Closed,
    Quadrature(CumulativeIntegral),
}

/// An evaluable nonlinearity with `f`, `f′`, `f″` and `F`.
///
/// Immutable after construction apart from the quadrature checkpoint cache
/// used for `F` when no closed form is registered.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    name: String,
    form: Form,
    antiderivative: Antiderivative,
    analytic_beta: Option<LimitPair>,
    analytic_tau: Option<LimitPair>,
}

impl Nonlinearity {
    /// Catalog lookup: `exp`, `power` (one parameter `p > 1`), `example_1_1`,
    /// `example_1_2`.
    pub fn builtin(name: &str, params: &[f64]) -> Result<Self> {
        let (builtin, beta, tau) = match name {
            "exp" => {
                no_params(name, params)?;
                (Builtin::Exp, LimitPair::exact(1.0, 1.0), Some(LimitPair::exact(1.0, 1.0)))
            }
            "power" => {
                let p = match params {
                    [p] => *p,
                    _ => return Err(Error::BadParameter("power expects exactly one parameter p".into())),
                };
                if !(p > 1.0) || !p.is_finite() {
                    return Err(Error::BadParameter(format!("power requires p > 1, got {p}")));
                }
                let b = p / (p + 1.0);
                let tau = (p - 1.0) / p;
                (Builtin::Power { p }, LimitPair::exact(b, b), Some(LimitPair::exact(tau, tau)))
            }
            "example_1_1" => {
                no_params(name, params)?;
                (Builtin::Example11, LimitPair::exact(2.0 / 3.0, 2.0 / 3.0), None)
            }
            "example_1_2" => {
                no_params(name, params)?;
                (Builtin::Example12, LimitPair::approximate(0.786244, 2.08846), None)
            }
            other => return Err(Error::UnknownName(other.to_string())),
        };
        Ok(Nonlinearity {
            name: builtin.label(),
            form: Form::Builtin(builtin),
            antiderivative: Antiderivative::Closed,
            analytic_beta: Some(beta),
            analytic_tau: tau,
        })
    }

    /// A nonlinearity from a parsed expression; `F` by cached quadrature.
    pub fn from_expression(expression: ScalarExpression, name: impl Into<String>) -> Self {
        Nonlinearity {
            name: name.into(),
            form: Form::Parsed(expression),
            antiderivative: Antiderivative::Quadrature(CumulativeIntegral::new(ANTIDERIVATIVE_TOLERANCE)),
            analytic_beta: None,
            analytic_tau: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::from_expression(ScalarExpression::parse(text)?, text.trim()))
    }

    /// Catalog name if it is one, otherwise an expression.
    pub fn from_spec(spec: &str, params: &[f64]) -> Result<Self> {
        match spec.trim() {
            "exp" | "power" | "example_1_1" | "example_1_2" => Self::builtin(spec.trim(), params),
            text => {
                if !params.is_empty() {
                    return Err(Error::BadParameter("parameters apply to catalog entries only".into()));
                }
                Self::parse(text)
            }
        }
    }

    /// The same `f` with `F` forced through quadrature (closed forms dropped).
    pub fn with_quadrature_antiderivative(&self) -> Self {
        let mut copy = self.clone();
        copy.antiderivative = Antiderivative::Quadrature(CumulativeIntegral::new(ANTIDERIVATIVE_TOLERANCE));
        copy
    }

    /// A copy whose quadrature cache starts empty, so results do not depend
    /// on which queries ran before.
    pub fn fresh(&self) -> Self {
        match self.antiderivative {
            Antiderivative::Closed => self.clone(),
            Antiderivative::Quadrature(ref q) => {
                let mut copy = self.clone();
                copy.antiderivative = Antiderivative::Quadrature(CumulativeIntegral::new(q.per_unit_tolerance()));
                copy
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn builtin_kind(&self) -> Option<Builtin> {
        match self.form {
            Form::Builtin(b) => Some(b),
            Form::Parsed(_) => None,
        }
    }

    pub fn expression_text(&self) -> String {
        match &self.form {
            Form::Builtin(b) => b.expression_text(),
            Form::Parsed(e) => e.to_string(),
        }
    }

    pub fn analytic_beta(&self) -> Option<LimitPair> {
        self.analytic_beta
    }

    pub fn analytic_tau(&self) -> Option<LimitPair> {
        self.analytic_tau
    }

    pub fn has_closed_antiderivative(&self) -> bool {
        matches!(self.antiderivative, Antiderivative::Closed)
    }

    /// Generic evaluation over `f64` or dual numbers.
    pub fn eval_generic<T: Real>(&self, t: T) -> Result<T> {
        let x = t.real();
        if x < 0.0 || x.is_nan() {
            return Err(Error::domain(x, "nonlinearity is defined for t >= 0 only"));
        }
        let out = match &self.form {
            Form::Builtin(b) => b.eval(t),
            Form::Parsed(e) => e.eval(t)?,
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::Overflow { t: x })
        }
    }

    pub fn f(&self, t: f64) -> Result<f64> {
        self.eval_generic(t)
    }

    pub fn fprime(&self, t: f64) -> Result<f64> {
        Ok(self.f_and_fprime(t)?.1)
    }

    pub fn f_and_fprime(&self, t: f64) -> Result<(f64, f64)> {
        let d = self.eval_generic(Dual::variable(t))?;
        Ok((d.value, d.derivative))
    }

    /// `(f, f′, f″)` via nested dual numbers.
    pub fn second_order(&self, t: f64) -> Result<(f64, f64, f64)> {
        let x = Dual::new(Dual::variable(t), Dual::new(1.0, 0.0));
        let d = self.eval_generic(x)?;
        let out = (d.value.value, d.value.derivative, d.derivative.derivative);
        if out.2.is_finite() {
            Ok(out)
        } else {
            Err(Error::SecondDerivativeUnavailable(format!("f'' is not finite at t = {t}")))
        }
    }

    #[allow(non_snake_case)]
    pub fn F(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::domain(t, "antiderivative is defined for t >= 0 only"));
        }
        let value = match (&self.antiderivative, &self.form) {
            (Antiderivative::Closed, Form::Builtin(b)) => b.antiderivative(t),
            (Antiderivative::Quadrature(cache), _) => {
                let mut failure: Option<Error> = None;
                let value = cache.evaluate(
                    |s| match self.f(s) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            f64::NAN
                        }
                    },
                    t,
                );
                if let Some(e) = failure {
                    return Err(e);
                }
                value?
            }
            (Antiderivative::Closed, Form::Parsed(_)) => unreachable!("parsed forms use quadrature"),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Overflow { t })
        }
    }
}

fn no_params(name: &str, params: &[f64]) -> Result<()> {
    if params.is_empty() {
        Ok(())
    } else {
        Err(Error::BadParameter(format!("{name} takes no parameters")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn eval_f_examples() {
        assert_eq!(Nonlinearity::builtin("exp", &[]).unwrap().f(0.0).unwrap(), 1.0);
        assert_eq!(Nonlinearity::builtin("example_1_1", &[]).unwrap().f(0.0).unwrap(), 7.0);
        assert_eq!(Nonlinearity::builtin("power", &[2.0]).unwrap().f(1.0).unwrap(), 4.0);
    }

    #[test]
    fn eval_fprime_examples() {
        let exp = Nonlinearity::builtin("exp", &[]).unwrap();
        assert!(rel(exp.fprime(2.0).unwrap(), E * E) < 1e-15);
        assert_eq!(Nonlinearity::builtin("example_1_1", &[]).unwrap().fprime(0.0).unwrap(), 3.0);
        assert_eq!(Nonlinearity::builtin("power", &[3.0]).unwrap().fprime(0.0).unwrap(), 3.0);
    }

    #[test]
    fn eval_antiderivative_examples() {
        let exp = Nonlinearity::builtin("exp", &[]).unwrap();
        assert!(rel(exp.F(1.0).unwrap(), E - 1.0) < 1e-15);
        for nl in [exp.clone(), exp.with_quadrature_antiderivative()] {
            assert_eq!(nl.F(0.0).unwrap(), 0.0);
        }
        let ex11 = Nonlinearity::builtin("example_1_1", &[]).unwrap();
        let closed = ex11.F(10.0).unwrap();
        let hand = 1000.0 / 3.0 + 150.0 + 3.0 * 10f64.sin() + 40.0;
        assert!(rel(closed, hand) < 1e-15);
        let quad = Nonlinearity::parse("t^2 + 3*t + 3*cos(t) + 4").unwrap();
        assert!(rel(quad.F(10.0).unwrap(), hand) < 1e-8);
    }

    #[test]
    fn builtin_metadata() {
        let exp = Nonlinearity::builtin("exp", &[]).unwrap();
        assert_eq!(exp.analytic_beta(), Some(LimitPair::exact(1.0, 1.0)));
        let pw = Nonlinearity::builtin("power", &[2.0]).unwrap();
        let b = pw.analytic_beta().unwrap();
        assert_eq!((b.lower, b.upper), (2.0 / 3.0, 2.0 / 3.0));
        let ex = Nonlinearity::builtin("example_1_1", &[]).unwrap();
        assert_eq!(ex.analytic_beta().unwrap().upper, 2.0 / 3.0);
        let ex2 = Nonlinearity::builtin("example_1_2", &[]).unwrap();
        assert_eq!(ex2.analytic_beta().unwrap().quality, LimitQuality::Approximate);
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!(Nonlinearity::builtin("gelfand", &[]), Err(Error::UnknownName(_))));
        assert!(matches!(Nonlinearity::builtin("power", &[1.0]), Err(Error::BadParameter(_))));
        assert!(matches!(Nonlinearity::builtin("power", &[]), Err(Error::BadParameter(_))));
        assert!(matches!(Nonlinearity::builtin("exp", &[2.0]), Err(Error::BadParameter(_))));
    }

    #[test]
    fn negative_arguments_are_domain_errors() {
        let exp = Nonlinearity::builtin("exp", &[]).unwrap();
        assert!(matches!(exp.f(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(exp.F(-1.0), Err(Error::Domain { .. })));
        let parsed = Nonlinearity::parse("1+t^2").unwrap();
        assert!(matches!(parsed.fprime(-0.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn overflow_is_reported() {
        let exp = Nonlinearity::builtin("exp", &[]).unwrap();
        assert!(matches!(exp.f(800.0), Err(Error::Overflow { .. })));
    }

    #[test]
    fn second_derivatives_match_hand_forms() {
        for spec in [("exp", vec![]), ("power", vec![2.5]), ("example_1_1", vec![]), ("example_1_2", vec![])] {
            let nl = Nonlinearity::builtin(spec.0, &spec.1).unwrap();
            let b = nl.builtin_kind().unwrap();
            for t in [0.0, 0.3, 2.0, PI, 7.5] {
                let (_, d1, d2) = nl.second_order(t).unwrap();
                assert!(rel(d1, b.derivative(t)) < 1e-13, "{} f' at {t}", spec.0);
                assert!(rel(d2, b.second_derivative(t)) < 1e-12, "{} f'' at {t}", spec.0);
            }
        }
    }

    #[test]
    fn fresh_copy_drops_cache() {
        let nl = Nonlinearity::parse("exp(t)").unwrap();
        nl.F(3.0).unwrap();
        let copy = nl.fresh();
        assert!((copy.F(3.0).unwrap() - 3f64.exp_m1()).abs() < 1e-9);
    }
}
