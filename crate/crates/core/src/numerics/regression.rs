use crate::error::{Error, Result};

/// Ordinary least-squares line `y = intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Fits a straight line by ordinary least squares.
///
/// Standard errors use the residual variance with `n - 2` degrees of freedom
/// and are zero for two points.
pub fn least_squares_line(x: &[f64], y: &[f64]) -> Result<LinFit> {
    if x.len() != y.len() {
        return Err(Error::DegenerateFit(format!("x has {} points, y has {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::DegenerateFit(format!("need at least 2 points, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit("non-finite input".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let spread = x.iter().fold(0.0_f64, |m, v| m.max((v - mx).abs()));
    if !(sxx > 0.0) || spread <= 1e-12 * mx.abs().max(1.0) {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let (slope_se, intercept_se) = if n > 2 {
        let s2 = rss / (nf - 2.0);
        ((s2 / sxx).sqrt(), (s2 * (1.0 / nf + mx * mx / sxx)).sqrt())
    } else {
        (0.0, 0.0)
    };
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    Ok(LinFit { slope, intercept, slope_se, intercept_se, r_squared, n })
}
