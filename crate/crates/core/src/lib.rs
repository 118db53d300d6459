//! Numerical laboratory for the extremal solution of `-Δu = λ f(u)` on the
//! unit ball with zero Dirichlet data.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod certificate;
pub mod error;
pub mod nonlinearity;
pub mod radial;

pub use error::{Error, Result};
pub use nonlinearity::{Builtin, LimitPair, LimitQuality, Nonlinearity, ScalarExpression};
