//! Closed-form short-maturity expansions, the skew estimator and its
//! power-law fit, and distributional checks.

mod expansions;
mod ks;
mod skew;

pub use expansions::{
    correlation_level, f_theta, rough_skew_coefficient, theorem1_price, theorem1_terms, theorem2_iv, theorem3_terms, theorem4_coefficient,
    theorem4_iv, Theorem1Terms, Theorem3Terms, F_THETA_SPAN,
};
pub use ks::{ks_two_sample, KsResult, MIN_KS_SAMPLE};
pub use skew::{
    cross_moment, fit_power_law, skew_estimate, skew_from_terminals, PowerLawFit, SkewEstimate, MAX_REL_STDERR,
};
