//! Fractional Brownian motion as a superposition of Ornstein–Uhlenbeck
//! processes driven by a single Brownian motion.
//!
//! `W^H_t = c ∫ β^{-1/2-H} (Z^β_t − Z^β_0) dβ` with `dZ^β = −β Z^β dt + dW`.
//! The β-integral is discretized on a geometric ladder ([`BetaQuadrature`]);
//! the resulting finite family of OU values ([`OuBank`]) is advanced by exact
//! joint Gaussian steps, so the only approximation is the quadrature itself.
//! [`sample_fbm_exact`] is an independent dense-Cholesky sampler used as an
//! oracle.

mod bank;
mod driver;
mod exact;
mod quadrature;

pub use bank::{init_bank_stationary, step_bank, wh_from_bank, BankStep, OuBank, StepKernel, StepScratch};
pub use driver::{simulate_drivers, DriverPath};
pub use exact::{exact_factor, fbm_covariance, lemma1_decomposition_check, sample_fbm_exact, MAX_EXACT_GRID};
pub use quadrature::{BetaQuadrature, DEFAULT_BETA_MAX, DEFAULT_BETA_MIN, DEFAULT_NODES};

use crate::error::{Error, Result};

/// Hurst exponent restricted to the rough regime `0 < H < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Hurst(f64);

impl Hurst {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h < 0.5 {
            Ok(Self(h))
        } else {
            Err(Error::Domain(format!("Hurst exponent must lie in (0, 1/2), got {h}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}
