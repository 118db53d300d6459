use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 64;
pub const DEFAULT_NODES: usize = 2049;
pub const DEFAULT_GRADING: f64 = 3.0;

/// Node placement on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridKind {
    /// `r_i = i/(N−1)`.
    Uniform,
    /// `r_i = (i/(N−1))^exponent`, refining towards the centre where
    /// nearly singular solutions concentrate.
    Graded { exponent: f64 },
}

impl Default for GridKind {
    fn default() -> Self {
        GridKind::Graded { exponent: DEFAULT_GRADING }
    }
}

/// Finite-volume geometry of the radial Laplacian in dimension `n`.
///
/// Cell `i` spans `[e_i, e_{i+1}]` with `e_0 = 0`, interior faces at the
/// node midpoints and `e_N = 1`. `volumes[i] = (e_{i+1}^n − e_i^n)/n` is
/// `∫ r^{n−1}` over the cell and `conductances[j] = face_j^{n−1}/(r_{j+1} − r_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub kind: GridKind,
    pub dimension: f64,
    pub nodes: Vec<f64>,
    pub faces: Vec<f64>,
    pub volumes: Vec<f64>,
    pub conductances: Vec<f64>,
}

impl RadialGrid {
    pub fn new(nodes: usize, dimension: f64, kind: GridKind) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::BadParameter(format!("grid needs at least {MIN_NODES} nodes, got {nodes}")));
        }
        if !(dimension >= 1.0 && dimension.is_finite()) {
            return Err(Error::BadParameter(format!("dimension must be >= 1, got {dimension}")));
        }
        if let GridKind::Graded { exponent } = kind {
            if !(exponent >= 1.0 && exponent.is_finite()) {
                return Err(Error::BadParameter(format!("grading exponent must be >= 1, got {exponent}")));
            }
        }
        let last = (nodes - 1) as f64;
        let r: Vec<f64> = (0..nodes)
            .map(|i| {
                let s = i as f64 / last;
                match kind {
                    _ if i == nodes - 1 => 1.0,
                    GridKind::Uniform => s,
                    GridKind::Graded { exponent } => s.powf(exponent),
                }
            })
            .collect();
        let faces: Vec<f64> = r.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let n = dimension;
        let edge = |i: usize| -> f64 {
            if i == 0 {
                0.0
            } else if i == nodes {
                1.0
            } else {
                faces[i - 1]
            }
        };
        let volumes = (0..nodes)
            .map(|i| (edge(i + 1).powf(n) - edge(i).powf(n)) / n)
            .collect();
        let conductances = (0..nodes - 1)
            .map(|j| faces[j].powf(n - 1.0) / (r[j + 1] - r[j]))
            .collect();
        Ok(RadialGrid { kind, dimension, nodes: r, faces, volumes, conductances })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of unknowns (all nodes but the Dirichlet node at `r = 1`).
    pub fn interior(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Nominal spacing `1/(N−1)`.
    pub fn nominal_spacing(&self) -> f64 {
        1.0 / (self.len() - 1) as f64
    }

    /// `(K u)_i = Σ_faces A (u_i − u_neighbour)`, the flux form of
    /// `−(r^{n−1} u′)′` integrated over cell `i`.
    pub fn stiffness_apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for (j, &a) in self.conductances.iter().enumerate() {
            let flux = a * (u[j] - u[j + 1]);
            out[j] += flux;
            out[j + 1] -= flux;
        }
        out
    }

    /// `Σ_faces A (Δu)²`, the discrete `∫ |u′|² r^{n−1} dr`.
    pub fn dirichlet_energy(&self, u: &[f64]) -> f64 {
        self.conductances
            .iter()
            .enumerate()
            .map(|(j, &a)| a * (u[j] - u[j + 1]).powi(2))
            .sum()
    }

    /// `Σ V_i w_i`, the discrete `∫ w r^{n−1} dr`.
    pub fn integrate(&self, w: impl Fn(usize) -> f64) -> f64 {
        self.volumes.iter().enumerate().map(|(i, &v)| v * w(i)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes_sum_to_ball_factor() {
        for n in [1.0, 2.0, 3.0, 7.5, 10.0] {
            for kind in [GridKind::Uniform, GridKind::default()] {
                let g = RadialGrid::new(129, n, kind).unwrap();
                let total: f64 = g.volumes.iter().sum();
                assert!((total - 1.0 / n).abs() < 1e-14, "{n} {kind:?}");
            }
        }
    }

    #[test]
    fn centre_row_is_symmetric_limit() {
        let g = RadialGrid::new(65, 3.0, GridKind::Uniform).unwrap();
        let h = g.nominal_spacing();
        let mut u = vec![0.0; 65];
        u[0] = 1.0;
        let ku = g.stiffness_apply(&u);
        let row = ku[0] / g.volumes[0];
        assert!((row - 2.0 * 3.0 / (h * h)).abs() < 1e-8 * row);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RadialGrid::new(32, 3.0, GridKind::Uniform).is_err());
        assert!(RadialGrid::new(64, 0.5, GridKind::Uniform).is_err());
        assert!(RadialGrid::new(64, 3.0, GridKind::Graded { exponent: 0.5 }).is_err());
    }
}
