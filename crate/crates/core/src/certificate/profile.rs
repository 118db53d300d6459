use serde::Serialize;

use super::xi::{TestFunctionXi, XiKind};
use crate::error::{Error, Result};
use crate::nonlinearity::{integrate_with, QuadratureRule, Tolerance};

pub const DEFAULT_CERTIFICATE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateOptions {
    /// Quadrature tolerance: absolute per unit length for `ln g`, relative
    /// for `G`.
    pub tolerance: f64,
    pub samples: usize,
    pub rule: QuadratureRule,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            tolerance: DEFAULT_CERTIFICATE_TOLERANCE,
            samples: 401,
            rule: QuadratureRule::GaussKronrod,
        }
    }
}

/// Runs the integrator on a fallible integrand, surfacing the integrand's
/// own error rather than the integrator's generic one.
fn integral<F>(rule: QuadratureRule, mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut failure = None;
    let out = integrate_with(
        rule,
        |s| match f(s) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        tol,
    );
    match (failure, out) {
        (Some(e), _) => Err(e),
        (None, r) => r.map(|i| i.value),
    }
}

/// Running values of `ln g` and `G` from `t0` forward.
struct Walker<'a> {
    xi: &'a TestFunctionXi,
    tolerance: f64,
    rule: QuadratureRule,
    t: f64,
    ln_g: f64,
    big_g: f64,
}

impl<'a> Walker<'a> {
    fn new(xi: &'a TestFunctionXi, tolerance: f64, rule: QuadratureRule) -> Self {
        Walker { xi, tolerance, rule, t: xi.t0(), ln_g: 0.0, big_g: 0.0 }
    }

    fn psi(&self, s: f64) -> Result<f64> {
        self.xi.xi_and_psi(s).map(|(_, psi)| psi)
    }

    fn ln_g_tolerance(&self, len: f64) -> Tolerance {
        Tolerance::new(self.tolerance * len.abs(), self.tolerance)
    }

    fn panel(&mut self, b: f64) -> Result<()> {
        let a = self.t;
        if b <= a {
            return Ok(());
        }
        let increment = integral(self.rule, |s| self.psi(s), a, b, self.ln_g_tolerance(b - a))?;
        // G(b) − G(a) = g(a)² ∫ (ψ(s) e^{L(s)})² ds with L(s) = ∫_a^s ψ.
        let scaled = integral(
            self.rule,
            |s| {
                let local = integral(self.rule, |r| self.psi(r), a, s, self.ln_g_tolerance(s - a))?;
                let gp = self.psi(s)? * local.exp();
                Ok(gp * gp)
            },
            a,
            b,
            Tolerance::new(f64::MIN_POSITIVE, self.tolerance),
        )?;
        self.ln_g += increment;
        self.big_g += (2.0 * self.ln_g - 2.0 * increment).exp() * scaled;
        self.t = b;
        if !(self.ln_g.is_finite() && self.big_g.is_finite()) {
            return Err(Error::Overflow { t: b });
        }
        Ok(())
    }

    /// Advances to `to` in panels no wider than `max_panel`, splitting at
    /// discontinuities of `ξ`.
    fn advance(&mut self, to: f64, max_panel: f64) -> Result<()> {
        let mut stops: Vec<f64> = self
            .xi
            .breakpoints()
            .into_iter()
            .filter(|&p| p > self.t && p < to)
            .collect();
        stops.push(to);
        for stop in stops {
            let pieces = ((stop - self.t) / max_panel).ceil().max(1.0) as usize;
            let start = self.t;
            for k in 1..=pieces {
                let b = if k == pieces { stop } else { start + (stop - start) * k as f64 / pieces as f64 };
                self.panel(b)?;
            }
        }
        Ok(())
    }
}

const STANDALONE_PANEL: f64 = 1.0;

fn walk_to(xi: &TestFunctionXi, t: f64) -> Result<(f64, f64)> {
    if t < xi.t0() {
        return Err(Error::domain(t, format!("certificate functions start at t0 = {}", xi.t0())));
    }
    let mut w = Walker::new(xi, DEFAULT_CERTIFICATE_TOLERANCE, QuadratureRule::GaussKronrod);
    w.advance(t, STANDALONE_PANEL)?;
    Ok((w.ln_g, w.big_g))
}

/// `g(t) = exp ∫_{t0}^t (ξ + √(ξ′ + ξ²))`, so `g(t0) = 1`.
pub fn g_at(xi: &TestFunctionXi, t: f64) -> Result<f64> {
    walk_to(xi, t).map(|(ln_g, _)| ln_g.exp())
}

/// `G(t) = ∫_{t0}^t g′²`.
#[allow(non_snake_case)]
pub fn G_at(xi: &TestFunctionXi, t: f64) -> Result<f64> {
    walk_to(xi, t).map(|(_, big_g)| big_g)
}

/// `H = g² f′ − G f`.
#[allow(non_snake_case)]
pub fn H_at(xi: &TestFunctionXi, t: f64) -> Result<f64> {
    let (ln_g, big_g) = walk_to(xi, t)?;
    let (f, fp) = xi.nonlinearity().f_and_fprime(t)?;
    Ok((2.0 * ln_g).exp() * fp - big_g * f)
}

/// `E = f (f′/f − ξ) g²`.
#[allow(non_snake_case)]
pub fn E_at(xi: &TestFunctionXi, t: f64) -> Result<f64> {
    let (ln_g, _) = walk_to(xi, t)?;
    let (f, fp) = xi.nonlinearity().f_and_fprime(t)?;
    Ok((fp - xi.xi_at(t)? * f) * (2.0 * ln_g).exp())
}

/// `C0 = G(t0) − ξ(t0) g(t0)²`, which is `−ξ(t0)` with `g(t0) = 1` and
/// `G(t0) = 0`.
pub fn first_integral_constant(xi: &TestFunctionXi) -> Result<f64> {
    Ok(-xi.xi_at(xi.t0())?)
}

/// Sampled certificate functions on `[t0, t_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct CertificateProfile {
    pub kind: XiKind,
    pub t0: f64,
    pub grid: Vec<f64>,
    pub xi: Vec<f64>,
    pub xi_prime: Vec<f64>,
    pub g: Vec<f64>,
    pub g_prime: Vec<f64>,
    pub G: Vec<f64>,
    pub H: Vec<f64>,
    pub E: Vec<f64>,
    pub f: Vec<f64>,
    pub C0: f64,
    /// Per sample `|G − ξg² − C0| / max(1, |G|)`.
    pub first_integral_residuals: Vec<f64>,
    pub first_integral_residual: f64,
    /// Max of `|H − E + C0 f| / max(1, |E|)`.
    pub identity_residual: f64,
}

pub const PROFILE_CSV_HEADER: &str = "t,xi,g,G,H,E,residual";

fn sample_grid(xi: &TestFunctionXi, t_max: f64, samples: usize) -> Vec<f64> {
    let t0 = xi.t0();
    let n = samples.max(2) - 1;
    let geometric = t_max / t0 > 10.0;
    let mut grid: Vec<f64> = (0..=n)
        .map(|i| {
            let s = i as f64 / n as f64;
            if i == n {
                t_max
            } else if geometric {
                t0 * (t_max / t0).powf(s)
            } else {
                t0 + (t_max - t0) * s
            }
        })
        .collect();
    grid.extend(xi.breakpoints().into_iter().filter(|&p| p > t0 && p < t_max));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

impl CertificateProfile {
    pub fn build(xi: &TestFunctionXi, t_max: f64, options: CertificateOptions) -> Result<Self> {
        let t0 = xi.t0();
        if !(t_max > t0 && t_max.is_finite()) {
            return Err(Error::precondition(format!("need t_max > t0 = {t0}, got {t_max}")));
        }
        let grid = sample_grid(xi, t_max, options.samples);
        let c0 = first_integral_constant(xi)?;
        let nl = xi.nonlinearity();
        let mut walker = Walker::new(xi, options.tolerance, options.rule);
        let mut profile = CertificateProfile {
            kind: xi.kind(),
            t0,
            grid: grid.clone(),
            xi: Vec::new(),
            xi_prime: Vec::new(),
            g: Vec::new(),
            g_prime: Vec::new(),
            G: Vec::new(),
            H: Vec::new(),
            E: Vec::new(),
            f: Vec::new(),
            C0: c0,
            first_integral_residuals: Vec::new(),
            first_integral_residual: 0.0,
            identity_residual: 0.0,
        };
        for &t in &grid {
            walker.advance(t, f64::INFINITY)?;
            let (xi_t, psi) = xi.xi_and_psi(t)?;
            let g = walker.ln_g.exp();
            let big_g = walker.big_g;
            let (f, fp) = nl.f_and_fprime(t)?;
            let h = g * g * fp - big_g * f;
            let e = (fp - xi_t * f) * g * g;
            let fi = (big_g - xi_t * g * g - c0).abs() / big_g.abs().max(1.0);
            let id = (h - e + c0 * f).abs() / e.abs().max(1.0);
            profile.first_integral_residual = profile.first_integral_residual.max(fi);
            profile.identity_residual = profile.identity_residual.max(id);
            profile.xi.push(xi_t);
            profile.xi_prime.push(xi.xi_prime_at(t)?);
            profile.g.push(g);
            profile.g_prime.push(psi * g);
            profile.G.push(big_g);
            profile.H.push(h);
            profile.E.push(e);
            profile.f.push(f);
            profile.first_integral_residuals.push(fi);
        }
        Ok(profile)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(PROFILE_CSV_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                self.grid[i],
                self.xi[i],
                self.g[i],
                self.G[i],
                self.H[i],
                self.E[i],
                self.first_integral_residuals[i]
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstIntegralReport {
    pub c0: f64,
    pub residual: f64,
    /// Sample where the residual is largest.
    pub worst_t: f64,
    pub samples: usize,
}

pub fn verify_first_integral(xi: &TestFunctionXi, t_max: f64) -> Result<FirstIntegralReport> {
    verify_first_integral_with(xi, t_max, CertificateOptions::default())
}

pub fn verify_first_integral_with(
    xi: &TestFunctionXi,
    t_max: f64,
    options: CertificateOptions,
) -> Result<FirstIntegralReport> {
    let profile = CertificateProfile::build(xi, t_max, options)?;
    let (worst, residual) = profile
        .first_integral_residuals
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });
    Ok(FirstIntegralReport {
        c0: profile.C0,
        residual,
        worst_t: profile.grid[worst],
        samples: profile.len(),
    })
}
