//! Integral identities and norms evaluated on computed branch points.
//!
//! All integrals use the finite-volume weights of the grid: `Σ V_i w_i`
//! for `∫ w r^{n−1} dr` and `Σ A_j (Δw)_j²` for `∫ |w′|² r^{n−1} dr`. With
//! these sums the energy identity is exact up to the Newton residual.

use serde::{Deserialize, Serialize};

use super::continuation::{Branch, SolutionPoint};
use super::problem::RadialProblem;
use crate::certificate::CertificateProfile;
use crate::error::{Error, Result};
use crate::nonlinearity::{integrate, Dual, ScalarExpression, Tolerance};

/// Both sides of `∫ g′(u)² |u′|² = λ ∫ G(u) f(u)` with `G(t) = ∫₀ᵗ g′²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / max(|lhs|, |rhs|)`, zero when both vanish.
    pub relative_mismatch: f64,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let relative_mismatch = if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 };
        IdentityCheck { lhs, rhs, relative_mismatch }
    }
}

/// `∫ |u′|² r^{n−1} = λ ∫ u f(u) r^{n−1}` from the stored point sums.
pub fn energy_identity(point: &SolutionPoint) -> IdentityCheck {
    IdentityCheck::new(point.dirichlet_energy, point.lambda * point.uf_integral)
}

fn g_values(g: &ScalarExpression, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut values = Vec::with_capacity(u.len());
    let mut slopes = Vec::with_capacity(u.len());
    for &t in u {
        let d = g.eval(Dual::variable(t))?;
        values.push(d.value);
        slopes.push(d.derivative);
    }
    Ok((values, slopes))
}

/// `G(u_i) = ∫₀^{u_i} g′(s)² ds` for every node, integrating between
/// consecutive sorted values.
fn big_g_values(g: &ScalarExpression, u: &[f64]) -> Result<Vec<f64>> {
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| u[a].total_cmp(&u[b]));
    let slope_sq = |s: f64| -> f64 {
        g.eval(Dual::variable(s)).map(|d| d.derivative * d.derivative).unwrap_or(f64::NAN)
    };
    let mut out = vec![0.0; u.len()];
    let mut running = 0.0;
    let mut at = 0.0f64;
    for &i in &order {
        let target = u[i].max(0.0);
        if target > at {
            let piece = integrate(slope_sq, at, target, Tolerance::new(1e-15, 1e-13))?;
            running += piece.value;
            at = target;
        }
        out[i] = running;
    }
    Ok(out)
}

fn require_g_vanishes(g: &ScalarExpression) -> Result<()> {
    let g0 = g.value(0.0)?;
    if g0.abs() > 1e-14 {
        return Err(Error::precondition(format!("g(0) must vanish, got {g0}")));
    }
    Ok(())
}

/// Checks `∫ |(g∘u)′|² r^{n−1} = λ ∫ G(u) f(u) r^{n−1}` on a converged point.
pub fn stability_identity_check(
    problem: &RadialProblem,
    point: &SolutionPoint,
    g: &ScalarExpression,
) -> Result<IdentityCheck> {
    require_g_vanishes(g)?;
    let grid = problem.grid();
    let (phi, _) = g_values(g, &point.u)?;
    let big_g = big_g_values(g, &point.u)?;
    let lhs = grid.dirichlet_energy(&phi);
    let mut rhs = 0.0;
    for (i, &v) in grid.volumes.iter().enumerate() {
        rhs += v * big_g[i] * problem.f_pair(point.u[i])?.0;
    }
    Ok(IdentityCheck::new(lhs, point.lambda * rhs))
}

/// The discrete stability form `Σ A (Δφ)² − λ Σ V f′(u) φ²` at `φ = g(u)`,
/// divided by `Σ A (Δφ)²`. Nonnegative on a semi-stable point.
pub fn stability_form(problem: &RadialProblem, point: &SolutionPoint, g: &ScalarExpression) -> Result<f64> {
    require_g_vanishes(g)?;
    let grid = problem.grid();
    let (phi, _) = g_values(g, &point.u)?;
    let gradient = grid.dirichlet_energy(&phi);
    let mut potential = 0.0;
    for (i, &v) in grid.volumes.iter().enumerate() {
        potential += v * problem.f_pair(point.u[i])?.1 * phi[i] * phi[i];
    }
    let q = gradient - point.lambda * potential;
    Ok(if gradient > 0.0 { q / gradient } else { q })
}

/// Norms of one branch point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub lambda: f64,
    pub sup_norm: f64,
    /// `∫ f(u)^γ r^{n−1} dr`.
    pub f_power: f64,
    /// `∫ (f(u) − f(0))^γ max(u, h²)^{−σ} r^{n−1} dr`.
    pub singular: f64,
    /// `∫_{u ≥ t0} E(u) r^{n−1} dr`, when a certificate covering the
    /// point's range is attached.
    pub e_norm: Option<f64>,
}

pub const NORM_CSV_HEADER: &str = "lambda,sup_norm,f_power,singular,e_norm";

impl NormRow {
    pub fn csv_row(&self) -> String {
        let e = self.e_norm.map_or_else(|| "nan".to_string(), |x| format!("{x:e}"));
        format!("{:e},{:e},{:e},{:e},{e}", self.lambda, self.sup_norm, self.f_power, self.singular)
    }
}

/// `E(t)` by log-linear interpolation of a certificate profile; `None`
/// past its end.
fn interpolate_e(profile: &CertificateProfile, t: f64) -> Option<f64> {
    let grid = &profile.grid;
    if t < profile.t0 {
        return Some(0.0);
    }
    let k = grid.partition_point(|&s| s <= t);
    if k == 0 || k >= grid.len() {
        return (t == *grid.last()?).then(|| *profile.E.last().unwrap());
    }
    let (a, b) = (grid[k - 1], grid[k]);
    let (ea, eb) = (profile.E[k - 1], profile.E[k]);
    let w = (t - a) / (b - a);
    if ea > 0.0 && eb > 0.0 {
        Some((ea.ln() + w * (eb.ln() - ea.ln())).exp())
    } else {
        Some(ea + w * (eb - ea))
    }
}

/// Per-point norms along `branch`. `γ = σ = 0` gives `1/n`, the weighted
/// volume of the unit ball.
pub fn track_norms(
    problem: &RadialProblem,
    branch: &Branch,
    gamma: f64,
    sigma: f64,
    certificate: Option<&CertificateProfile>,
) -> Result<Vec<NormRow>> {
    if !(sigma >= 0.0 && sigma <= gamma && gamma.is_finite()) {
        return Err(Error::precondition(format!("need 0 <= sigma <= gamma, got sigma = {sigma}, gamma = {gamma}")));
    }
    let grid = problem.grid();
    let floor = grid.nominal_spacing().powi(2);
    let f0 = problem.f_pair(0.0)?.0;
    let mut rows = Vec::with_capacity(branch.points.len());
    for point in &branch.points {
        let mut f_power = 0.0;
        let mut singular = 0.0;
        let mut e_norm = certificate.map(|_| 0.0);
        for (i, &v) in grid.volumes.iter().enumerate() {
            let u = point.u[i];
            let f = problem.f_pair(u)?.0;
            f_power += v * f.powf(gamma);
            let excess = (f - f0).max(0.0);
            singular += v * excess.powf(gamma) * u.max(floor).powf(-sigma);
            if let (Some(profile), Some(acc)) = (certificate, e_norm.as_mut()) {
                match interpolate_e(profile, u) {
                    Some(e) => *acc += v * e,
                    None => e_norm = None,
                }
            }
        }
        rows.push(NormRow { lambda: point.lambda, sup_norm: point.sup_norm, f_power, singular, e_norm });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Nonlinearity;
    use crate::radial::{continue_branch, ContinuationConfig};

    fn exp_branch(n: f64, nodes: usize) -> (RadialProblem, Branch) {
        let exp = Nonlinearity::builtin("exp", &[]).unwrap();
        let problem = RadialProblem::new(&exp, n, nodes).unwrap();
        let branch = continue_branch(&problem, &ContinuationConfig::default()).unwrap();
        (problem, branch)
    }

    #[test]
    fn identities_hold_on_exp_branch() {
        let (problem, branch) = exp_branch(3.0, 257);
        let t = ScalarExpression::variable();
        let t2 = ScalarExpression::parse("t^2").unwrap();
        for p in &branch.points {
            assert!(energy_identity(p).relative_mismatch < 1e-6);
            assert!(stability_identity_check(&problem, p, &t).unwrap().relative_mismatch < 1e-6);
            assert!(stability_form(&problem, p, &t).unwrap() > -1e-8);
            assert!(stability_form(&problem, p, &t2).unwrap() > -1e-8);
        }
        let near_zero = &branch.points[0];
        let check = stability_identity_check(&problem, near_zero, &t2).unwrap();
        assert!(check.lhs < 1e-6 && check.rhs < 1e-6);
    }

    #[test]
    fn zeroth_norm_is_ball_factor() {
        let (problem, branch) = exp_branch(4.0, 129);
        for row in track_norms(&problem, &branch, 0.0, 0.0, None).unwrap() {
            assert!((row.f_power - 0.25).abs() < 1e-13);
        }
        assert!(track_norms(&problem, &branch, 1.0, 2.0, None).is_err());
    }

    #[test]
    fn g_must_vanish_at_zero() {
        let (problem, branch) = exp_branch(2.0, 129);
        let g = ScalarExpression::parse("t + 1").unwrap();
        assert!(stability_identity_check(&problem, &branch.points[0], &g).is_err());
    }
}
