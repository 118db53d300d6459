//! Radial solutions of `−Δu = λ f(u)` on the unit ball in real dimension
//! `n ≥ 1`, followed along the minimal branch.

mod continuation;
mod diagnostics;
mod grid;
mod linalg;
mod problem;
mod sweep;

pub use continuation::{continue_branch, Branch, SolutionPoint, Termination, FOLD_DROP};
pub use diagnostics::{
    energy_identity, stability_form, stability_identity_check, track_norms, IdentityCheck, NormRow, NORM_CSV_HEADER,
};
pub use grid::{GridKind, RadialGrid, DEFAULT_GRADING, DEFAULT_NODES, MIN_NODES};
pub use linalg::SymTridiagonal;
pub use problem::{ContinuationConfig, Eigenpair, NewtonOutcome, RadialProblem, EIGEN_MAX_ITER};
pub use sweep::{sweep_csv, sweep_dimension, sweep_row, SweepRow, BRANCH_CSV_HEADER, SWEEP_CSV_HEADER};
