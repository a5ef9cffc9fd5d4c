//! Short-maturity implied volatility skew laboratory.
//!
//! Two model families are simulated side by side: a regular local-stochastic
//! volatility (LSV) diffusion, whose at-the-money skew converges to a constant,
//! and a rough fractional volatility model whose volatility factor is driven
//! by a fractional Brownian motion `W^H` with `H < 1/2`, built as a
//! superposition of Ornstein–Uhlenbeck processes all driven by one Brownian
//! motion. The OU family is a finite-dimensional Markov state, so the rough
//! model can be restarted at any time from `(S, Y, {Z^β})`.
//!
//! Module map:
//! - [`numerics`]: special functions, dense factorizations, OLS, RNG streams.
//! - [`fbm`]: β-quadrature, the OU bank and its exact Gaussian stepping, the
//!   exact-covariance fBm oracle sampler.
//! - [`models`]: the model zoo and path simulation.
//! - [`pricing`]: Black–Scholes puts, implied volatility, Monte Carlo puts.
//! - [`asymptotics`]: closed-form expansions, skew estimator, power-law fit,
//!   Kolmogorov–Smirnov test.
//! - [`harness`]: experiment configuration, orchestration and reports.

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod fbm;
pub mod harness;
pub mod models;
pub mod numerics;
pub mod pricing;

pub use asymptotics::{PowerLawFit, SkewEstimate};
pub use error::{Error, Result};
pub use fbm::{BetaQuadrature, DriverPath, Hurst, OuBank};
pub use harness::{ExperimentConfig, RunReport};
pub use models::{MarketState, ModelSpec, PathBundle};
pub use numerics::{LinFit, RngStream};
pub use pricing::{IvPoint, PutQuote};
