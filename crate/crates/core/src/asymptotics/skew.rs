use crate::error::{Error, Result};
use crate::models::{MarketState, ModelSpec};
use crate::numerics::{least_squares_line, mean_and_stderr, LinFit, MeanSe};
use crate::pricing::{implied_vol, simulate_terminals, IvPoint, McParams, TerminalSet};

/// Points whose relative standard error exceeds this are left out of power-law fits.
pub const MAX_REL_STDERR: f64 = 0.2;

/// Finite-difference ATM skew `(σ(z) − σ(ζ)) / (√θ (z − ζ))` from one set of paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewEstimate {
    pub theta: f64,
    pub z: f64,
    pub zeta: f64,
    pub value: f64,
    pub stderr: f64,
    pub iv_z: IvPoint,
    pub iv_zeta: IvPoint,
}

/// Skew from already simulated terminals. Both strikes share the paths, so the
/// standard error comes from the per-group difference of vega-scaled residuals.
pub fn skew_from_terminals(set: &TerminalSet, z: f64, zeta: f64) -> Result<SkewEstimate> {
    if !(z.is_finite() && zeta.is_finite()) || z == zeta {
        return Err(Error::Config(format!("skew strikes must differ, got z={z} zeta={zeta}")));
    }
    let theta = set.theta;
    let root = theta.sqrt();
    let (qz, rz) = set.put_with_residuals(root * z)?;
    let (qq, rq) = set.put_with_residuals(root * zeta)?;
    let iv_z = implied_vol(&qz).map_err(|e| e.context(format!("implied vol at z={z}, θ={theta}")))?;
    let iv_zeta = implied_vol(&qq).map_err(|e| e.context(format!("implied vol at z={zeta}, θ={theta}")))?;
    let scale = root * (z - zeta);
    let diff: Vec<f64> = rz.iter().zip(&rq).map(|(a, b)| a / iv_z.vega - b / iv_zeta.vega).collect();
    let MeanSe { se, .. } = mean_and_stderr(&diff);
    Ok(SkewEstimate {
        theta,
        z,
        zeta,
        value: (iv_z.iv - iv_zeta.iv) / scale,
        stderr: se / scale.abs(),
        iv_z,
        iv_zeta,
    })
}

pub fn skew_estimate(
    spec: &ModelSpec,
    init: &MarketState,
    z: f64,
    zeta: f64,
    theta: f64,
    params: &McParams,
) -> Result<SkewEstimate> {
    let set = simulate_terminals(spec, init, theta, params)?;
    skew_from_terminals(&set, z, zeta)
}

/// Mean of `B_θ W^H_θ` across paths, with standard error.
pub fn cross_moment(set: &TerminalSet) -> Result<MeanSe> {
    if set.outcomes.is_empty() {
        return Err(Error::SampleSize("no paths".into()));
    }
    let g: Vec<f64> = set
        .outcomes
        .chunks(set.group_size)
        .map(|c| c.iter().map(|o| o.totals.b * o.totals.wh).sum::<f64>() / c.len() as f64)
        .collect();
    Ok(mean_and_stderr(&g))
}

/// Fit of `|skew| = |A| θ^{slope}` in log-log coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    pub slope: f64,
    pub slope_se: f64,
    /// Signed prefactor `A`.
    pub prefactor: f64,
    pub line: LinFit,
    pub used: Vec<f64>,
    pub excluded: Vec<f64>,
}

pub fn fit_power_law(points: &[SkewEstimate]) -> Result<PowerLawFit> {
    let (good, bad): (Vec<&SkewEstimate>, Vec<&SkewEstimate>) = points
        .iter()
        .partition(|p| p.value != 0.0 && p.value.is_finite() && p.stderr <= MAX_REL_STDERR * p.value.abs());
    if good.len() < 4 {
        return Err(Error::PowerLaw(format!(
            "{} of {} points have relative standard error within {MAX_REL_STDERR}; need 4",
            good.len(),
            points.len()
        )));
    }
    let sign = good[0].value.signum();
    if let Some(p) = good.iter().find(|p| p.value.signum() != sign) {
        return Err(Error::PowerLaw(format!("skew changes sign on the grid (θ={}, value {})", p.theta, p.value)));
    }
    let lx: Vec<f64> = good.iter().map(|p| p.theta.ln()).collect();
    let lo = lx.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lx.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo) / std::f64::consts::LN_10 < 2.0 - 1e-9 {
        return Err(Error::PowerLaw(format!(
            "usable maturities span {:.2} decades; need 2",
            (hi - lo) / std::f64::consts::LN_10
        )));
    }
    let ly: Vec<f64> = good.iter().map(|p| p.value.abs().ln()).collect();
    let line = least_squares_line(&lx, &ly)?;
    Ok(PowerLawFit {
        slope: line.slope,
        slope_se: line.slope_se,
        prefactor: sign * line.intercept.exp(),
        line,
        used: good.iter().map(|p| p.theta).collect(),
        excluded: bad.iter().map(|p| p.theta).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::model_zoo;
    use std::collections::BTreeMap;

    fn iv(theta: f64) -> IvPoint {
        IvPoint { z: 0.0, theta, iv: 0.2, iv_stderr: 0.0, vega: 1.0 }
    }

    fn point(theta: f64, value: f64, stderr: f64) -> SkewEstimate {
        SkewEstimate { theta, z: 0.1, zeta: -0.1, value, stderr, iv_z: iv(theta), iv_zeta: iv(theta) }
    }

    fn grid() -> Vec<f64> {
        (0..8).map(|i| 10f64.powf(-4.0 + 3.0 * i as f64 / 7.0)).collect()
    }

    #[test]
    fn synthetic_power_law() {
        let pts: Vec<_> = grid().into_iter().map(|t| point(t, -2.0 * t.powf(-0.4), 0.0)).collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.slope + 0.4).abs() < 1e-12);
        assert!((f.prefactor + 2.0).abs() < 1e-12);
        assert!((f.line.intercept - 2f64.ln()).abs() < 1e-12);
        assert!(f.excluded.is_empty());
    }

    #[test]
    fn constant_values_give_zero_slope() {
        let pts: Vec<_> = grid().into_iter().map(|t| point(t, 0.3, 0.01)).collect();
        let f = fit_power_law(&pts).unwrap();
        assert!(f.slope.abs() < 1e-12);
    }

    #[test]
    fn noisy_points_are_excluded_and_counted() {
        let mut pts: Vec<_> = grid().into_iter().map(|t| point(t, t.powf(-0.2), 0.0)).collect();
        pts[3].stderr = pts[3].value;
        let f = fit_power_law(&pts).unwrap();
        assert_eq!(f.excluded, vec![pts[3].theta]);
        assert_eq!(f.used.len(), 7);
    }

    #[test]
    fn fit_rejections() {
        let mut pts: Vec<_> = grid().into_iter().map(|t| point(t, t.powf(-0.2), 0.0)).collect();
        pts[5].value = -pts[5].value;
        assert!(matches!(fit_power_law(&pts), Err(Error::PowerLaw(_))));
        let few: Vec<_> = grid()[..3].iter().map(|&t| point(t, 1.0, 0.0)).collect();
        assert!(matches!(fit_power_law(&few), Err(Error::PowerLaw(_))));
        let narrow: Vec<_> = (0..6).map(|i| point(1e-3 * (1.0 + i as f64), 1.0, 0.0)).collect();
        assert!(matches!(fit_power_law(&narrow), Err(Error::PowerLaw(_))));
    }

    #[test]
    fn equal_strikes_rejected() {
        let spec = model_zoo("bs", &BTreeMap::new()).unwrap();
        let st = spec.initial_state(None).unwrap();
        let p = McParams { n_paths: 200, n_steps: 2, ..McParams::default() };
        assert!(matches!(skew_estimate(&spec, &st, 0.1, 0.1, 0.01, &p), Err(Error::Config(_))));
    }

    #[test]
    fn black_scholes_skew_is_zero() {
        let spec = model_zoo("bs", &BTreeMap::new()).unwrap();
        let st = spec.initial_state(None).unwrap();
        let p = McParams { n_paths: 2000, n_steps: 5, ..McParams::default() };
        let s = skew_estimate(&spec, &st, 0.1, -0.1, 0.01, &p).unwrap();
        assert!(s.value.abs() < 1e-9, "{}", s.value);
        assert!((s.iv_z.iv - 0.2).abs() < 1e-10);
    }

    #[test]
    fn lsv_skew_near_regular_limit() {
        let spec = model_zoo("lsv-linear", &BTreeMap::new()).unwrap();
        let st = spec.initial_state(None).unwrap();
        let p = McParams { n_paths: 20_000, n_steps: 20, ..McParams::default() };
        let s = skew_estimate(&spec, &st, 0.1, -0.1, 1e-2, &p).unwrap();
        // Limit −0.175, first-order correction is a few percent at θ = 0.01.
        assert!(s.stderr > 0.0 && s.stderr < 0.02, "se {}", s.stderr);
        assert!((s.value + 0.175).abs() < 0.02 + 3.0 * s.stderr, "{} ± {}", s.value, s.stderr);
    }

    #[test]
    fn cross_moment_zero_without_correlation() {
        let spec = model_zoo("bs", &BTreeMap::new()).unwrap();
        let st = spec.initial_state(None).unwrap();
        let set = simulate_terminals(&spec, &st, 0.1, &McParams { n_paths: 200, n_steps: 2, ..Default::default() }).unwrap();
        let m = cross_moment(&set).unwrap();
        assert_eq!(m.mean, 0.0);
    }
}
