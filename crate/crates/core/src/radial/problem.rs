use serde::{Deserialize, Serialize};

use super::grid::{GridKind, RadialGrid};
use super::linalg::SymTridiagonal;
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

/// Tuning of Newton, the eigen-solver and the continuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationConfig {
    pub lambda_initial_step: f64,
    pub lambda_min_step: f64,
    /// Bound on the componentwise backward error of the discrete equation.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub sup_norm_cap: f64,
    pub eigen_tol: f64,
    pub lambda_cap: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            lambda_initial_step: 0.05,
            lambda_min_step: 1e-7,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            sup_norm_cap: 50.0,
            eigen_tol: 1e-8,
            lambda_cap: 1e4,
        }
    }
}

impl ContinuationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_initial_step", self.lambda_initial_step),
            ("lambda_min_step", self.lambda_min_step),
            ("newton_tol", self.newton_tol),
            ("sup_norm_cap", self.sup_norm_cap),
            ("eigen_tol", self.eigen_tol),
            ("lambda_cap", self.lambda_cap),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::BadParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.newton_max_iter == 0 {
            return Err(Error::BadParameter("newton_max_iter must be positive".into()));
        }
        if self.lambda_min_step >= self.lambda_initial_step {
            return Err(Error::BadParameter("lambda_min_step must be below lambda_initial_step".into()));
        }
        Ok(())
    }
}

/// `−u″ − ((n−1)/r) u′ = λ f(u)` on `(0, 1)`, `u′(0) = 0`, `u(1) = 0`.
#[derive(Debug, Clone)]
pub struct RadialProblem {
    nl: Nonlinearity,
    grid: RadialGrid,
    f_zero: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub u: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub mu: f64,
    /// Nodal eigenfunction, positive, scaled to unit maximum; zero at `r = 1`.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Multiple of machine epsilon allowed per term when forming a residual.
const ROUNDING_ALLOWANCE: f64 = 8.0;
/// Level solves may take this many times `newton_max_iter` bracketing steps.
const LEVEL_ITER_FACTOR: usize = 4;

pub const EIGEN_MAX_ITER: usize = 1000;
const LINE_SEARCH_HALVINGS: usize = 30;

impl RadialProblem {
    pub fn new(nl: &Nonlinearity, dimension: f64, nodes: usize) -> Result<Self> {
        Self::with_grid(nl, dimension, nodes, GridKind::default())
    }

    pub fn with_grid(nl: &Nonlinearity, dimension: f64, nodes: usize, kind: GridKind) -> Result<Self> {
        let grid = RadialGrid::new(nodes, dimension, kind)?;
        let f_zero = nl.f_and_fprime(0.0)?;
        if !(f_zero.0 > 0.0) {
            return Err(Error::BadParameter(format!("f(0) must be positive, got {}", f_zero.0)));
        }
        Ok(RadialProblem { nl: nl.fresh(), grid, f_zero })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nl
    }
    pub fn dimension(&self) -> f64 {
        self.grid.dimension
    }
    pub fn len(&self) -> usize {
        self.grid.len()
    }
    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `(f, f′)` at `t`, extended linearly below zero so Newton iterates
    /// may dip under the axis.
    pub fn f_pair(&self, t: f64) -> Result<(f64, f64)> {
        if t >= 0.0 {
            self.nl.f_and_fprime(t)
        } else {
            Ok((self.f_zero.0 + self.f_zero.1 * t, self.f_zero.1))
        }
    }

    fn f_values(&self, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut f = Vec::with_capacity(u.len());
        let mut fp = Vec::with_capacity(u.len());
        for &t in u {
            let (a, b) = self.f_pair(t)?;
            f.push(a);
            fp.push(b);
        }
        Ok((f, fp))
    }

    /// Discrete `−Δu` at interior nodes; the last entry is the Dirichlet
    /// row `u_{N−1}`.
    pub fn apply_operator(&self, u: &[f64]) -> Vec<f64> {
        let ku = self.grid.stiffness_apply(u);
        let m = self.grid.interior();
        let mut out: Vec<f64> = (0..m).map(|i| ku[i] / self.grid.volumes[i]).collect();
        out.push(u[m]);
        out
    }

    /// `F_i = (K u)_i − λ V_i f(u_i)` on the interior nodes, plus the
    /// backward error `max_i (|F_i| − ρ_i)₊ / (|A_{i−1} Δu| + |A_i Δu| + λ V_i |f_i|)`.
    /// `ρ_i` bounds the rounding committed in forming `F_i`: near the centre
    /// of a fine grid `u_i − u_{i+1}` is below the resolution of `u_i`, and
    /// only the excess over that bound is charged.
    fn weak_residual(&self, lambda: f64, u: &[f64], f: &[f64]) -> (Vec<f64>, f64) {
        let m = self.grid.interior();
        let a = &self.grid.conductances;
        let v = &self.grid.volumes;
        let mut residual = vec![0.0; m];
        let mut worst: f64 = 0.0;
        for i in 0..m {
            let left = if i > 0 { a[i - 1] * (u[i] - u[i - 1]) } else { 0.0 };
            let right = a[i] * (u[i] - u[i + 1]);
            let source = lambda * v[i] * f[i];
            residual[i] = left + right - source;
            let magnitude = left.abs() + right.abs() + source.abs();
            let spread = if i > 0 { a[i - 1] * (u[i].abs() + u[i - 1].abs()) } else { 0.0 }
                + a[i] * (u[i].abs() + u[i + 1].abs());
            let rounding = ROUNDING_ALLOWANCE * f64::EPSILON * (spread + magnitude);
            let excess = (residual[i].abs() - rounding).max(0.0);
            if excess > 0.0 {
                worst = worst.max(if magnitude > 0.0 { excess / magnitude } else { f64::INFINITY });
            }
        }
        (residual, worst)
    }

    /// Componentwise backward error of `u` as a solution at `λ`.
    pub fn residual(&self, lambda: f64, u: &[f64]) -> Result<f64> {
        let (f, _) = self.f_values(u)?;
        Ok(self.weak_residual(lambda, u, &f).1)
    }

    /// `V^{-1/2} (K − λ V diag f′(u)) V^{-1/2}` on the interior nodes.
    pub fn scaled_jacobian(&self, lambda: f64, fprime: &[f64]) -> SymTridiagonal {
        let m = self.grid.interior();
        let a = &self.grid.conductances;
        let v = &self.grid.volumes;
        let diag = (0..m)
            .map(|i| {
                let k = a[i] + if i > 0 { a[i - 1] } else { 0.0 };
                k / v[i] - lambda * fprime[i]
            })
            .collect();
        let off = (0..m - 1).map(|i| -a[i] / (v[i] * v[i + 1]).sqrt()).collect();
        SymTridiagonal { diag, off }
    }

    fn scale_down(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.grid.volumes).map(|(x, v)| x / v.sqrt()).collect()
    }

    fn merit(&self, residual: &[f64]) -> f64 {
        self.scale_down(residual).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn finish(&self, mut u: Vec<f64>, lambda: f64) -> Result<Vec<f64>> {
        let m = self.grid.interior();
        u[m] = 0.0;
        let floor = -1e-12 * u.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        for x in &mut u {
            if *x < 0.0 {
                if *x < floor {
                    return Err(Error::NoConvergence {
                        lambda,
                        reason: format!("converged iterate is negative ({x:e})"),
                    });
                }
                *x = 0.0;
            }
        }
        Ok(u)
    }

    /// Damped Newton on the discrete equation with a backtracking line
    /// search on the scaled residual norm.
    pub fn newton_solve(&self, lambda: f64, u_init: &[f64], config: &ContinuationConfig) -> Result<NewtonOutcome> {
        if !(lambda > 0.0) {
            return Err(Error::precondition(format!("lambda must be positive, got {lambda}")));
        }
        if u_init.len() != self.len() {
            return Err(Error::BadParameter(format!("initial guess has {} values, grid has {}", u_init.len(), self.len())));
        }
        let fail = |reason: String| Error::NoConvergence { lambda, reason };
        let m = self.grid.interior();
        let mut u = u_init.to_vec();
        u[m] = 0.0;
        let (mut f, mut fp) = self.f_values(&u).map_err(|e| fail(e.to_string()))?;
        let (mut res, mut backward) = self.weak_residual(lambda, &u, &f);
        let mut merit = self.merit(&res);
        for iteration in 0..=config.newton_max_iter {
            if backward <= config.newton_tol {
                let (u, backward) = self.polish(lambda, u, &res, &fp, backward);
                return Ok(NewtonOutcome { u: self.finish(u, lambda)?, iterations: iteration, residual: backward });
            }
            if iteration == config.newton_max_iter {
                break;
            }
            let jac = self.scaled_jacobian(lambda, &fp);
            let rhs: Vec<f64> = self.scale_down(&res).iter().map(|x| -x).collect();
            let step = self.scale_down(&jac.solve(&rhs).map_err(|e| fail(e.to_string()))?);

            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..LINE_SEARCH_HALVINGS {
                let trial: Vec<f64> = (0..=m)
                    .map(|i| if i < m { u[i] + alpha * step[i] } else { 0.0 })
                    .collect();
                if let Ok((tf, tfp)) = self.f_values(&trial) {
                    let (tres, tback) = self.weak_residual(lambda, &trial, &tf);
                    let tmerit = self.merit(&tres);
                    if tmerit.is_finite() && (tmerit < (1.0 - 1e-4 * alpha) * merit || tback <= config.newton_tol) {
                        u = trial;
                        f = tf;
                        fp = tfp;
                        res = tres;
                        backward = tback;
                        merit = tmerit;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                return Err(fail(format!("line search failed at iteration {iteration} (backward error {backward:e})")));
            }
        }
        let _ = f;
        Err(fail(format!("iteration cap {} reached (backward error {backward:e})", config.newton_max_iter)))
    }

    /// One more full Newton step on a converged iterate, kept when it does
    /// not raise the backward error. The tolerance test can pass while the
    /// residual is still well above rounding; integral identities need the
    /// extra digits.
    fn polish(&self, lambda: f64, u: Vec<f64>, res: &[f64], fp: &[f64], backward: f64) -> (Vec<f64>, f64) {
        let m = self.grid.interior();
        let jac = self.scaled_jacobian(lambda, fp);
        let rhs: Vec<f64> = self.scale_down(res).iter().map(|x| -x).collect();
        let Ok(step) = jac.solve(&rhs) else { return (u, backward) };
        let step = self.scale_down(&step);
        let trial: Vec<f64> = (0..=m).map(|i| if i < m { u[i] + step[i] } else { 0.0 }).collect();
        match self.f_values(&trial) {
            Ok((tf, _)) => {
                let tback = self.weak_residual(lambda, &trial, &tf).1;
                if tback <= backward {
                    (trial, tback)
                } else {
                    (u, backward)
                }
            }
            Err(_) => (u, backward),
        }
    }

    /// Marches the discrete equation outward from `u_0 = level`. Summing
    /// the rows `0..=i` telescopes to `A_i (u_i − u_{i+1}) = λ Σ_{k≤i} V_k f(u_k)`,
    /// so each node follows from the ones inside it. Returns the nodal
    /// values and `∂u_{N−1}/∂λ`.
    fn shoot(&self, level: f64, lambda: f64) -> Result<(Vec<f64>, f64)> {
        let m = self.grid.interior();
        let a = &self.grid.conductances;
        let v = &self.grid.volumes;
        let mut u = vec![level; m + 1];
        let (mut w, mut source, mut tangent) = (0.0, 0.0, 0.0);
        for i in 0..m {
            let (f, fp) = self.f_pair(u[i])?;
            source += v[i] * f;
            tangent += v[i] * fp * w;
            u[i + 1] = u[i] - lambda * source / a[i];
            w -= (source + lambda * tangent) / a[i];
            if !u[i + 1].is_finite() || !w.is_finite() {
                return Err(Error::Overflow { t: u[i] });
            }
        }
        Ok((u, w))
    }

    /// The solution with `u(0) = level` and its `λ`, found as the root of
    /// `λ ↦ u_{N−1}(λ)` for the outward march. That map starts at `level`
    /// for `λ = 0` and decreases, so the root is bracketed and unique;
    /// Newton steps are used while they stay inside the bracket. The
    /// iterate passes through folds, where natural continuation in `λ`
    /// breaks down.
    pub fn solve_at_level(
        &self,
        level: f64,
        u_init: &[f64],
        lambda_init: f64,
        config: &ContinuationConfig,
    ) -> Result<(NewtonOutcome, f64)> {
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::precondition(format!("level must be positive, got {level}")));
        }
        if u_init.len() != self.len() {
            return Err(Error::BadParameter(format!("initial guess has {} values, grid has {}", u_init.len(), self.len())));
        }
        let fail = |lambda: f64, reason: String| Error::NoConvergence { lambda, reason };
        let m = self.grid.interior();
        let max_iter = LEVEL_ITER_FACTOR * config.newton_max_iter;
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let mut lambda = if lambda_init > 0.0 { lambda_init } else { 1.0 };
        for iteration in 0..max_iter {
            let (u, slope) = match self.shoot(level, lambda) {
                Ok(found) => found,
                Err(_) => {
                    hi = lambda;
                    lambda = 0.5 * (lo + hi);
                    continue;
                }
            };
            let g = u[m];
            if g > 0.0 {
                lo = lambda;
            } else {
                hi = lambda;
            }
            let newton = lambda - g / slope;
            let done = g == 0.0 || (hi.is_finite() && hi - lo <= 2.0 * f64::EPSILON * hi) || (newton - lambda).abs() <= f64::EPSILON * lambda;
            if done {
                let backward = self.residual(lambda, &u).map_err(|e| fail(lambda, e.to_string()))?;
                let u = self.finish(u, lambda)?;
                return Ok((NewtonOutcome { u, iterations: iteration + 1, residual: backward }, lambda));
            }
            lambda = if newton > lo && newton < hi && slope < 0.0 {
                newton
            } else if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * lambda
            };
        }
        Err(fail(lambda, format!("iteration cap {max_iter} reached at u(0) = {level}")))
    }

    /// Smallest eigenvalue `μ₁` of `K − λ V diag f′(u)` relative to `V`,
    /// by inverse iteration at shift zero with a Sturm-count safeguard.
    pub fn smallest_eigenvalue(&self, lambda: f64, u: &[f64], eigen_tol: f64) -> Result<Eigenpair> {
        let m = self.grid.interior();
        let (_, fp) = self.f_values(&u[..m])?;
        let jac = self.scaled_jacobian(lambda, &fp);
        let v = &self.grid.volumes;
        let r = &self.grid.nodes;
        let mut x: Vec<f64> = (0..m).map(|i| v[i].sqrt() * (1.0 - r[i] * r[i])).collect();
        normalize(&mut x);

        let (mut mu, mut x, iterations) = match inverse_iteration(&jac, 0.0, x.clone(), eigen_tol) {
            Ok(found) => found,
            Err(Error::Failure(_)) => inverse_iteration(&jac, -1e-12 * jac.gershgorin().1.abs(), x.clone(), eigen_tol)?,
            Err(e) => return Err(e),
        };
        if jac.count_below(mu - 1e-6 * mu.abs().max(1e-12)) > 0 {
            // Inverse iteration settled on an eigenvalue other than the lowest.
            let lowest = jac.eigenvalue_by_bisection(0, 1e-14);
            let shift = lowest - 1e-9 * lowest.abs().max(1e-12);
            let found = inverse_iteration(&jac, shift, x, eigen_tol)?;
            mu = lowest;
            x = found.1;
        }
        let mut phi: Vec<f64> = (0..m).map(|i| x[i] / v[i].sqrt()).collect();
        let peak = phi.iter().copied().fold(0.0f64, |s, y| if y.abs() > s.abs() { y } else { s });
        for y in &mut phi {
            *y /= peak;
        }
        phi.push(0.0);
        Ok(Eigenpair { mu, vector: phi, iterations })
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|y| y * y).sum::<f64>().sqrt();
    for y in x {
        *y /= norm;
    }
}

fn inverse_iteration(
    jac: &SymTridiagonal,
    shift: f64,
    mut x: Vec<f64>,
    eigen_tol: f64,
) -> Result<(f64, Vec<f64>, usize)> {
    let shifted = SymTridiagonal {
        diag: jac.diag.iter().map(|d| d - shift).collect(),
        off: jac.off.clone(),
    };
    let mut mu_prev = f64::NAN;
    for k in 1..=EIGEN_MAX_ITER {
        let mut y = shifted.solve(&x)?;
        normalize(&mut y);
        x = y;
        let ax = jac.apply(&x);
        let mu: f64 = x.iter().zip(&ax).map(|(p, q)| p * q).sum();
        if k > 1 && (mu - mu_prev).abs() <= eigen_tol * mu.abs().max(eigen_tol) {
            return Ok((mu, x, k));
        }
        mu_prev = mu;
    }
    Err(Error::IterationCap(EIGEN_MAX_ITER))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn exp() -> Nonlinearity {
        Nonlinearity::builtin("exp", &[]).unwrap()
    }

    #[test]
    fn quadratic_is_exact() {
        for kind in [GridKind::Uniform, GridKind::default()] {
            let p = RadialProblem::with_grid(&exp(), 3.0, 129, kind).unwrap();
            let u: Vec<f64> = p.grid().nodes.iter().map(|r| 1.0 - r * r).collect();
            let lu = p.apply_operator(&u);
            for (i, value) in lu.iter().enumerate().take(p.len() - 1) {
                assert!((value - 6.0).abs() < 1e-9, "node {i}: {value}");
            }
            assert_eq!(lu[p.len() - 1], 0.0);
        }
    }

    #[test]
    fn zero_is_not_a_solution() {
        let p = RadialProblem::new(&exp(), 3.0, 65).unwrap();
        let zero = vec![0.0; 65];
        assert!(p.apply_operator(&zero).iter().all(|&x| x == 0.0));
        assert!(p.residual(0.5, &zero).unwrap() > 0.5);
    }

    #[test]
    fn laplacian_eigenvalues() {
        let p = RadialProblem::with_grid(&exp(), 3.0, 513, GridKind::Uniform).unwrap();
        let zero = vec![0.0; 513];
        let e = p.smallest_eigenvalue(0.0, &zero, 1e-10).unwrap();
        assert!((e.mu / (PI * PI) - 1.0).abs() < 1e-3, "{}", e.mu);
        assert!(e.vector.iter().all(|&x| x >= 0.0));

        let p = RadialProblem::with_grid(&exp(), 1.0, 513, GridKind::Uniform).unwrap();
        let e = p.smallest_eigenvalue(0.0, &zero, 1e-10).unwrap();
        assert!((e.mu / (PI * PI / 4.0) - 1.0).abs() < 1e-3, "{}", e.mu);
    }

    #[test]
    fn newton_small_lambda_is_linear() {
        let p = RadialProblem::new(&exp(), 3.0, 257).unwrap();
        let lambda = 1e-6;
        let out = p.newton_solve(lambda, &vec![0.0; 257], &ContinuationConfig::default()).unwrap();
        let expected = lambda / 6.0;
        assert!((out.u[0] / expected - 1.0).abs() < 1e-3);
    }

    #[test]
    fn newton_fails_beyond_fold() {
        let p = RadialProblem::new(&exp(), 2.0, 257).unwrap();
        let err = p.newton_solve(2.5, &vec![0.0; 257], &ContinuationConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }), "{err:?}");
    }

    #[test]
    fn level_solve_reaches_upper_branch() {
        // n = 2: λ(b) = 8b/(1+b)², u(0) = ln(8b/λ) = 2 ln(1 + b).
        let p = RadialProblem::new(&exp(), 2.0, 1025).unwrap();
        let config = ContinuationConfig::default();
        let low = p.newton_solve(1.0, &vec![0.0; 1025], &config).unwrap();
        let mut u = low.u;
        let mut lambda = 1.0;
        let mut level = u[0];
        while level < 3.0 {
            level = (level + 0.1).min(3.0);
            let (out, l) = p.solve_at_level(level, &u, lambda, &config).unwrap();
            u = out.u;
            lambda = l;
        }
        let b = 1.5f64.exp() - 1.0;
        let exact = 8.0 * b / (1.0 + b).powi(2);
        assert!((lambda - exact).abs() < 1e-4, "{lambda} {exact}");
    }

    #[test]
    fn config_validation() {
        assert!(ContinuationConfig::default().validate().is_ok());
        let bad = ContinuationConfig { lambda_min_step: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ContinuationConfig { newton_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
