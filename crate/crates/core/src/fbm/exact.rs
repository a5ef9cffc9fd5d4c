use std::sync::Arc;

use super::bank::{wh_from_bank, OuBank, StepScratch};
use super::quadrature::BetaQuadrature;
use super::Hurst;
use crate::error::{Error, Result};
use crate::numerics::{cholesky, LowerTriangular, NormalSource, SpdMatrix};

/// Largest grid the dense oracle sampler accepts.
pub const MAX_EXACT_GRID: usize = 2000;

/// `Cov(W^H_s, W^H_t) = ½(s^{2H} + t^{2H} − |t − s|^{2H})`.
pub fn fbm_covariance(h: Hurst, s: f64, t: f64) -> f64 {
    let e = 2.0 * h.value();
    0.5 * (s.abs().powf(e) + t.abs().powf(e) - (t - s).abs().powf(e))
}

/// One exact fBm sample on `times` by dense Cholesky of the covariance.
pub fn sample_fbm_exact<R: NormalSource + ?Sized>(h: Hurst, times: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let l = exact_factor(h, times)?;
    let z: Vec<f64> = (0..times.len()).map(|_| rng.normal()).collect();
    let mut out = vec![0.0; times.len()];
    l.mul_vec(&z, &mut out);
    Ok(out)
}

/// Cholesky factor of the fBm covariance on `times`; reuse it for many draws.
pub fn exact_factor(h: Hurst, times: &[f64]) -> Result<LowerTriangular> {
    if times.len() > MAX_EXACT_GRID {
        return Err(Error::GridTooLong { len: times.len(), max: MAX_EXACT_GRID });
    }
    if times.is_empty() || !(times[0] > 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("exact fBm grid must be non-empty, strictly increasing and start after 0".into()));
    }
    let cov = SpdMatrix::from_fn(times.len(), |i, j| fbm_covariance(h, times[i], times[j]))?;
    cholesky(&cov)
}

/// Evaluates both sides of the one-step history/innovation decomposition of
/// `W^H_t − W^H_s` given the bank at time `s`.
///
/// `lhs` is the increment read off the advanced bank; `rhs` is the history
/// term `Σ c w β^{-1/2-H}(e^{-β(t-s)} − 1) Z^β_s` plus the innovation term
/// built from the same Gaussian draws.
pub fn lemma1_decomposition_check<R: NormalSource + ?Sized>(
    q: &Arc<BetaQuadrature>,
    bank_s: &OuBank,
    s: f64,
    t: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if !bank_s.quadrature().same_as(q) {
        return Err(Error::QuadratureMismatch);
    }
    if !(t >= s) {
        return Err(Error::Domain(format!("need t >= s, got s = {s}, t = {t}")));
    }
    if t == s {
        return Ok((0.0, 0.0));
    }
    let kernel = q.step_kernel(t - s)?;
    let mut scratch = StepScratch::default();
    let mut joint = vec![0.0; q.len() + 1];
    kernel.sample_innovations(rng, &mut scratch, &mut joint);
    let history = kernel.history_term(bank_s.values());
    let innovation: f64 = q.loadings().iter().zip(&joint[1..]).map(|(k, i)| k * i).sum();
    let z_t: Vec<f64> = bank_s
        .values()
        .iter()
        .zip(kernel.decay())
        .zip(&joint[1..])
        .map(|((z, d), i)| d * z + i)
        .collect();
    let bank_t = OuBank::from_values(Arc::clone(q), z_t, t)?;
    let lhs = wh_from_bank(&bank_t, bank_s)?;
    Ok((lhs, history + innovation))
}
