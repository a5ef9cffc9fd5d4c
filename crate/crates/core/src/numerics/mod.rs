//! Scalar special functions, dense factorizations, least squares and the
//! seeded random streams every simulation draws from.

mod linalg;
mod normal;
mod regression;
mod rng;
mod summation;

pub use linalg::{cholesky, pivoted_cholesky, LowRankFactor, LowerTriangular, SpdMatrix};
pub use normal::{gamma_fn, inv_norm_cdf, norm_cdf, norm_pdf};
pub use regression::{least_squares_line, LinFit};
pub use rng::{Antithetic, NormalSource, RngStream, Spliced};
pub use summation::{mean_and_stderr, pairwise_sum, sample_covariance, MeanSe};
