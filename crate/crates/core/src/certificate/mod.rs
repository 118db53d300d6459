//! The test function `ξ` and the derived `g`, `G`, `H`, `E` used to turn
//! semi-stability into integral bounds, with numerical checks of their
//! identities and growth inequalities.

mod chain;
mod profile;
mod xi;

pub use chain::{
    select_t0, verify_growth_chain, verify_growth_chain_with, ChainReport, InequalityCheck,
    CHAIN_SLACK,
};
pub use profile::{
    first_integral_constant, g_at, verify_first_integral, verify_first_integral_with, CertificateOptions,
    CertificateProfile, FirstIntegralReport, DEFAULT_CERTIFICATE_TOLERANCE, E_at, G_at, H_at,
    PROFILE_CSV_HEADER,
};
pub use xi::{Perturbation, TestFunctionXi, XiKind, XiValidation};
