use super::black_scholes::{bs_put, bs_vega};
use crate::error::{Error, Result};

pub const IV_MIN: f64 = 1e-8;
pub const IV_MAX: f64 = 10.0;
pub const MAX_IV_ITERATIONS: usize = 200;
/// Relative tolerance on the out-of-the-money price.
const PRICE_TOL: f64 = 1e-12;

/// Spot-normalized put price with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PutQuote {
    pub k: f64,
    pub theta: f64,
    pub price: f64,
    pub mc_stderr: f64,
}

impl PutQuote {
    pub fn exact(k: f64, theta: f64, price: f64) -> Self {
        Self { k, theta, price, mc_stderr: 0.0 }
    }
}

/// Implied volatility at rescaled log-moneyness `z = k/√θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvPoint {
    pub z: f64,
    pub theta: f64,
    pub iv: f64,
    pub iv_stderr: f64,
    /// Black–Scholes vega at the solution.
    pub vega: f64,
}

/// Inverts the Black–Scholes put formula.
///
/// In-the-money puts are converted to the out-of-the-money call via parity
/// (`C(k) = e^k P(−k)`), so the solver always works on an OTM price, whose
/// logarithm is close to linear in `σ`. Newton on the log-price is kept
/// inside a shrinking bisection bracket on `[1e-8, 10]`.
pub fn implied_vol(q: &PutQuote) -> Result<IvPoint> {
    let PutQuote { k, theta, price, .. } = *q;
    if !(theta > 0.0 && theta.is_finite()) || !k.is_finite() || !price.is_finite() {
        return Err(Error::Domain(format!("invalid quote k = {k}, θ = {theta}, price = {price}")));
    }
    let intrinsic = k.exp_m1().max(0.0);
    let upper = k.exp();
    if price <= intrinsic {
        return Err(Error::BelowIntrinsic { price, bound: intrinsic });
    }
    if price >= upper {
        return Err(Error::AboveUpperBound { price, bound: upper });
    }
    let (kk, target, scale) = if k > 0.0 { (-k, (price - intrinsic) * (-k).exp(), upper) } else { (k, price, 1.0) };
    if !(target > 0.0) {
        return Err(Error::BelowIntrinsic { price, bound: intrinsic });
    }
    let f = |s: f64| bs_put(kk, theta, s).expect("validated inputs");
    let (mut lo, mut hi) = (IV_MIN, IV_MAX);
    if f(hi) <= target {
        return Err(Error::NoConvergence { iterations: 0, lo, hi, residual: (f(hi) - target) * scale });
    }
    if f(lo) >= target {
        return Err(Error::NoConvergence { iterations: 0, lo, hi, residual: (f(lo) - target) * scale });
    }
    let tol = PRICE_TOL * target;
    let mut sigma = if k == 0.0 {
        price * (2.0 * std::f64::consts::PI / theta).sqrt()
    } else {
        (2.0 * k.abs() / theta).sqrt()
    }
    .clamp(2.0 * IV_MIN, 0.5 * IV_MAX);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_IV_ITERATIONS {
        let p = f(sigma);
        residual = p - target;
        if residual < 0.0 {
            lo = lo.max(sigma);
        } else {
            hi = hi.min(sigma);
        }
        if residual.abs() <= tol {
            return Ok(point(q, sigma));
        }
        let vega = bs_vega(kk, theta, sigma).expect("validated inputs");
        let newton = if p > 0.0 && vega > 0.0 { sigma - (p.ln() - target.ln()) * p / vega } else { f64::NAN };
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else if hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if (next - sigma).abs() <= 4.0 * f64::EPSILON * sigma || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(point(q, next));
        }
        sigma = next;
    }
    Err(Error::NoConvergence { iterations: MAX_IV_ITERATIONS, lo, hi, residual: residual * scale })
}

fn point(q: &PutQuote, iv: f64) -> IvPoint {
    let vega = bs_vega(q.k, q.theta, iv).unwrap_or(0.0);
    let iv_stderr = if q.mc_stderr == 0.0 { 0.0 } else { q.mc_stderr / vega };
    IvPoint { z: q.k / q.theta.sqrt(), theta: q.theta, iv, iv_stderr, vega }
}
