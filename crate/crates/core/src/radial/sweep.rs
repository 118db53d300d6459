//! Dimension sweeps and tabular export of branches.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::continuation::{continue_branch, Branch, Termination};
use super::grid::GridKind;
use super::problem::{ContinuationConfig, RadialProblem};
use crate::nonlinearity::Nonlinearity;

pub const BRANCH_CSV_HEADER: &str = "lambda,sup_norm,mu1,dirichlet_energy,uf_integral,residual";
pub const SWEEP_CSV_HEADER: &str =
    "n,fold_detected,termination,lambda_star,bracket_lo,bracket_hi,last_lambda,sup_norm,mu1_first,mu1_last,points,error";

impl Branch {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(BRANCH_CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e}\n",
                p.lambda, p.sup_norm, p.mu1, p.dirichlet_energy, p.uf_integral, p.residual
            ));
        }
        out
    }

    /// Run description without the nodal vectors.
    pub fn metadata(&self) -> serde_json::Value {
        json!({
            "nonlinearity": self.nonlinearity,
            "dimension": self.dimension,
            "grid": { "nodes": self.nodes, "kind": self.grid },
            "config": self.config,
            "mu1_at_zero": self.mu1_at_zero,
            "points": self.points.len(),
            "lambda_star": self.lambda_star,
            "lambda_star_bracket": self.lambda_star_bracket,
            "fold_detected": self.fold_detected,
            "termination": self.termination,
            "last_lambda": self.last().map(|p| p.lambda),
            "last_sup_norm": self.last().map(|p| p.sup_norm),
            "notes": self.notes,
        })
    }
}

/// One dimension of a sweep. A failed continuation leaves the numeric
/// fields empty and records the error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: f64,
    pub fold_detected: bool,
    pub termination: Termination,
    pub lambda_star: Option<f64>,
    pub lambda_star_bracket: Option<(f64, f64)>,
    pub last_lambda: Option<f64>,
    /// Sup norm at the last stable point.
    pub sup_norm: Option<f64>,
    /// `(λ, μ₁)` at every stored point.
    pub mu1_trace: Vec<(f64, f64)>,
    pub error: Option<String>,
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:e}"))
}

impl SweepRow {
    pub fn from_branch(branch: &Branch) -> Self {
        SweepRow {
            n: branch.dimension,
            fold_detected: branch.fold_detected,
            termination: branch.termination,
            lambda_star: branch.lambda_star,
            lambda_star_bracket: branch.lambda_star_bracket,
            last_lambda: branch.last().map(|p| p.lambda),
            sup_norm: branch.last().map(|p| p.sup_norm),
            mu1_trace: branch.points.iter().map(|p| (p.lambda, p.mu1)).collect(),
            error: None,
        }
    }

    pub fn failed(n: f64, error: String) -> Self {
        SweepRow {
            n,
            fold_detected: false,
            termination: Termination::Failure,
            lambda_star: None,
            lambda_star_bracket: None,
            last_lambda: None,
            sup_norm: None,
            mu1_trace: Vec::new(),
            error: Some(error),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.error.is_some()
    }

    pub fn csv_row(&self) -> String {
        let (lo, hi) = self.lambda_star_bracket.unzip();
        let error = self.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        format!(
            "{:e},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.fold_detected,
            self.termination,
            opt(self.lambda_star),
            opt(lo),
            opt(hi),
            opt(self.last_lambda),
            opt(self.sup_norm),
            opt(self.mu1_trace.first().map(|p| p.1)),
            opt(self.mu1_trace.last().map(|p| p.1)),
            self.mu1_trace.len(),
            error
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_row());
        out.push('\n');
    }
    out
}

/// Continues the minimal branch in dimension `n`, folding any error into the row.
pub fn sweep_row(nl: &Nonlinearity, n: f64, nodes: usize, kind: GridKind, config: &ContinuationConfig) -> SweepRow {
    RadialProblem::with_grid(nl, n, nodes, kind)
        .and_then(|problem| continue_branch(&problem, config))
        .map_or_else(|e| SweepRow::failed(n, e.to_string()), |b| SweepRow::from_branch(&b))
}

/// One row per dimension, in input order. Rows are independent; callers
/// wanting parallelism can map [`sweep_row`] themselves.
pub fn sweep_dimension(
    nl: &Nonlinearity,
    n_values: &[f64],
    nodes: usize,
    kind: GridKind,
    config: &ContinuationConfig,
) -> Vec<SweepRow> {
    n_values.iter().map(|&n| sweep_row(nl, n, nodes, kind, config)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_rows_are_recorded() {
        let exp = Nonlinearity::builtin("exp", &[]).unwrap();
        let rows = sweep_dimension(&exp, &[0.5, 2.0], 129, GridKind::default(), &ContinuationConfig::default());
        assert!(rows[0].is_failure());
        assert!(!rows[1].is_failure() && rows[1].fold_detected);
        let csv = sweep_csv(&rows);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().all(|l| l.split(',').count() == 12));
    }

    #[test]
    fn branch_csv_has_one_line_per_point() {
        let exp = Nonlinearity::builtin("exp", &[]).unwrap();
        let problem = RadialProblem::new(&exp, 2.0, 129).unwrap();
        let branch = continue_branch(&problem, &ContinuationConfig::default()).unwrap();
        let csv = branch.to_csv();
        assert_eq!(csv.lines().count(), branch.points.len() + 1);
        assert!(branch.metadata()["lambda_star"].as_f64().is_some());
    }
}
