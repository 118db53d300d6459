//! Symmetric tridiagonal kernels.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < m {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Thomas elimination without pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let m = self.len();
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        let mut pivot = self.diag[0];
        for i in 0..m {
            if i > 0 {
                pivot = self.diag[i] - self.off[i - 1] * c[i - 1];
            }
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::Failure(format!("singular tridiagonal pivot at row {i}")));
            }
            c[i] = if i + 1 < m { self.off[i] / pivot } else { 0.0 };
            d[i] = if i == 0 { rhs[0] / pivot } else { (rhs[i] - self.off[i - 1] * d[i - 1]) / pivot };
        }
        for i in (0..m.saturating_sub(1)).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let coupling = if i > 0 { self.off[i - 1] * self.off[i - 1] } else { 0.0 };
            q = self.diag[i] - x - if i > 0 { coupling / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let m = self.len();
        (0..m).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let radius = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < m { self.off[i].abs() } else { 0.0 };
            (lo.min(self.diag[i] - radius), hi.max(self.diag[i] + radius))
        })
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection on the Sturm count.
    pub fn eigenvalue_by_bisection(&self, k: usize, rel_tol: f64) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(m: usize) -> SymTridiagonal {
        SymTridiagonal { diag: vec![2.0; m], off: vec![-1.0; m - 1] }
    }

    #[test]
    fn solve_round_trip() {
        let a = SymTridiagonal {
            diag: vec![4.0, 5.0, 6.0, 7.0],
            off: vec![1.0, -2.0, 0.5],
        };
        let x = vec![1.0, -2.0, 3.0, 0.25];
        let b = a.apply(&x);
        let y = a.solve(&b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn sturm_matches_known_spectrum() {
        // Eigenvalues 2 − 2cos(kπ/(m+1)).
        let m = 50;
        let a = laplacian(m);
        for k in [0usize, 1, 10, 49] {
            let exact = 2.0 - 2.0 * (((k + 1) as f64) * std::f64::consts::PI / (m + 1) as f64).cos();
            let got = a.eigenvalue_by_bisection(k, 1e-14);
            assert!((got - exact).abs() < 1e-12, "{k}: {got} {exact}");
        }
        assert_eq!(a.count_below(0.0), 0);
        assert_eq!(a.count_below(4.0), m);
    }

    #[test]
    fn singular_pivot_reported() {
        let a = SymTridiagonal { diag: vec![0.0, 1.0], off: vec![1.0] };
        assert!(a.solve(&[1.0, 1.0]).is_err());
    }
}
