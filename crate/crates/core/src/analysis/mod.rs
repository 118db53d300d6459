//! Growth indicators of `f`, dimension thresholds and regularity verdicts.

mod bounds;
mod indicators;
mod conditions;
mod verdict;

pub use bounds::{
    dim_bound_general, dim_bound_subunit, gamma_exponents, max_integer_dimension, GammaExponents,
};
pub use indicators::{
    beta_at, estimate_beta_limits, estimate_limits, estimate_tau_limits, tau_at, BetaEstimate,
    ConvergenceFlag, LimitEstimate, TailWindow, TauEstimate, TauRelation,
    MIN_SAMPLES_PER_DECADE, SETTLE_TOLERANCE, TAU_RELATION_TOLERANCE,
};
pub use conditions::{
    check_h1_condition, check_linfty_condition, ConditionCheck, CONDITION_SAMPLES_PER_DECADE,
};
pub use verdict::{
    classify_regularity, classify_with_evidence, BetaInput, BetaSource, Conclusion,
    GrowthEvidence, RegularityVerdict, EQUALITY_TOLERANCE, SMALL_BETA_PLUS, VERDICT_CSV_HEADER,
};
