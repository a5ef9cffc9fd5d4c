//! Reusable numerical suites behind `validate` and the acceptance tests.
//! Each returns raw statistics; callers decide pass or fail.

use std::sync::Arc;

use rayon::prelude::*;

use crate::asymptotics::{
    correlation_level, cross_moment, f_theta, ks_two_sample, theorem1_terms, theorem2_iv, KsResult,
};
use crate::error::{Error, Result};
use crate::fbm::{fbm_covariance, simulate_drivers, BetaQuadrature, OuBank};
use crate::models::model_zoo;
use crate::numerics::{least_squares_line, mean_and_stderr, RngStream};
use crate::pricing::{bs_put, bs_vega, implied_vol, simulate_terminals, McParams, PutQuote};

/// Log-moneyness, maturity and volatility axes of the inversion grid.
pub const IV_GRID_K: [f64; 7] = [-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3];
pub const IV_GRID_THETA: [f64; 5] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];
pub const IV_GRID_SIGMA: [f64; 6] = [0.05, 0.1, 0.2, 0.3, 0.5, 1.0];

/// A point is identifiable when a volatility change of 1e-10
/// moves its price by at least this many ulps.
pub const IDENTIFIABLE_ULPS: f64 = 1e3;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IvGridSummary {
    pub points: usize,
    pub identifiable: usize,
    pub max_err_identifiable: f64,
    /// Largest `|σ̂ − σ|` over every point that inverted without error.
    pub max_err_all: f64,
    /// Unidentifiable points that inverted to a volatility repricing the quote.
    pub reprice_ok: usize,
    /// Unidentifiable points rejected with a price-bound error.
    pub bound_errors: usize,
    pub failures: Vec<String>,
}

/// Round trip `σ → bs_put → implied_vol` over the fixed grid.
pub fn iv_round_trip_grid() -> IvGridSummary {
    let mut out = IvGridSummary::default();
    for &k in &IV_GRID_K {
        for &theta in &IV_GRID_THETA {
            for &sigma in &IV_GRID_SIGMA {
                out.points += 1;
                let p = bs_put(k, theta, sigma).expect("grid is valid");
                let vega = bs_vega(k, theta, sigma).expect("grid is valid");
                let identifiable = vega * 1e-10 >= IDENTIFIABLE_ULPS * f64::EPSILON * p && p > 0.0;
                let r = implied_vol(&PutQuote::exact(k, theta, p));
                let at = format!("k={k} θ={theta} σ={sigma}");
                if identifiable {
                    out.identifiable += 1;
                    match r {
                        Ok(iv) => {
                            out.max_err_identifiable = out.max_err_identifiable.max((iv.iv - sigma).abs());
                            out.max_err_all = out.max_err_all.max((iv.iv - sigma).abs());
                        }
                        Err(e) => out.failures.push(format!("{at}: {e}")),
                    }
                    continue;
                }
                match r {
                    Ok(iv) => {
                        out.max_err_all = out.max_err_all.max((iv.iv - sigma).abs());
                        let back = bs_put(k, theta, iv.iv).expect("solver output is valid");
                        if (back - p).abs() <= IDENTIFIABLE_ULPS * f64::EPSILON * p {
                            out.reprice_ok += 1;
                        } else {
                            out.failures.push(format!("{at}: σ̂={} reprices to {back} vs {p}", iv.iv));
                        }
                    }
                    Err(Error::BelowIntrinsic { .. } | Error::AboveUpperBound { .. }) => out.bound_errors += 1,
                    Err(e) => out.failures.push(format!("{at}: {e}")),
                }
            }
        }
    }
    out
}

/// Worst case of `|σ_imp(price expansion) − IV expansion| / θ` over the
/// regular zoo models and a small `(θ, z)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencySummary {
    pub worst_ratio: f64,
    pub worst_at: String,
}

pub fn theorem1_consistency(flip_alpha: bool) -> Result<ConsistencySummary> {
    let mut worst = ConsistencySummary { worst_ratio: 0.0, worst_at: String::new() };
    for name in ["bs", "lsv-linear"] {
        let spec = model_zoo(name, &Default::default())?;
        let st = spec.initial_state(None)?;
        for theta in [1e-4, 1e-3] {
            for z in [-0.5, -0.25, 0.25, 0.5] {
                let mut t = theorem1_terms(&spec, &st, z, theta)?;
                if flip_alpha {
                    t.alpha = -t.alpha;
                }
                let price = t.price() * theta.sqrt();
                let iv = implied_vol(&PutQuote::exact(theta.sqrt() * z, theta, price))?.iv;
                let ratio = (iv - theorem2_iv(&spec, &st, z, theta)?).abs() / theta;
                if ratio > worst.worst_ratio || worst.worst_at.is_empty() {
                    worst = ConsistencySummary { worst_ratio: ratio, worst_at: format!("{name} θ={theta} z={z}") };
                }
            }
        }
    }
    Ok(worst)
}

/// Entrywise comparison of simulated and exact fBm covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSummary {
    pub n_paths: usize,
    /// Largest `|empirical − exact| / max(rel_tol·|exact|, 3 SE)` over entries.
    pub worst_ratio: f64,
    pub worst_entry: (f64, f64),
    pub max_rel_err: f64,
}

/// Simulates `W^H` from stationary banks on `t = 0.1, …, 1.0`.
pub fn fbm_covariance_mc(quad: &Arc<BetaQuadrature>, n_paths: usize, seed: u64, rel_tol: f64) -> Result<CovarianceSummary> {
    let times: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let paths: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = RngStream::new(seed, p);
            let bank = OuBank::stationary(Arc::clone(quad), &mut rng)?;
            Ok(simulate_drivers(bank, &times, &mut rng, false)?.wh)
        })
        .collect::<Result<_>>()?;
    let h = quad.hurst();
    let mut out = CovarianceSummary { n_paths, worst_ratio: 0.0, worst_entry: (0.0, 0.0), max_rel_err: 0.0 };
    for i in 1..times.len() {
        for j in i..times.len() {
            let prod: Vec<f64> = paths.iter().map(|w| w[i] * w[j]).collect();
            let m = mean_and_stderr(&prod);
            let exact = fbm_covariance(h, times[i], times[j]);
            let err = (m.mean - exact).abs();
            let ratio = err / (rel_tol * exact.abs()).max(3.0 * m.se);
            out.max_rel_err = out.max_rel_err.max(err / exact.abs());
            if ratio > out.worst_ratio {
                out.worst_ratio = ratio;
                out.worst_entry = (times[i], times[j]);
            }
        }
    }
    Ok(out)
}

/// Empirical `E[B_θ W^H_θ]` against `ρ c Γ(1/2−H)/(1/2+H) θ^{H+1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationLawSummary {
    pub slope: f64,
    pub slope_se: f64,
    pub level_theory: f64,
    /// `(θ, E[B W^H]/θ^{H+1/2}, its standard error)`.
    pub levels: Vec<(f64, f64, f64)>,
    /// Largest `|level − theory| / SE` over the grid.
    pub max_z: f64,
}

pub fn correlation_law(quad: &Arc<BetaQuadrature>, rho: f64, thetas: &[f64], n_paths: usize, seed: u64) -> Result<CorrelationLawSummary> {
    let h = quad.hurst().value();
    let params = [("hurst".to_string(), h), ("rho".to_string(), rho)].into_iter().collect();
    let spec = model_zoo("bs", &params)?;
    let init = spec.initial_state(Some(quad))?;
    let theory = correlation_level(quad, rho)?;
    let mut levels = Vec::with_capacity(thetas.len());
    let mut max_z: f64 = 0.0;
    for (i, &theta) in thetas.iter().enumerate() {
        let mc = McParams { n_paths, n_steps: 1, seed: seed.wrapping_add(i as u64), antithetic: false, control_variate: false };
        let m = cross_moment(&simulate_terminals(&spec, &init, theta, &mc)?)?;
        let scale = theta.powf(h + 0.5);
        let (lvl, se) = (m.mean / scale, m.se / scale);
        max_z = max_z.max((lvl - theory).abs() / se);
        levels.push((theta, lvl, se));
    }
    if levels.iter().any(|l| l.1 == 0.0 || l.1.signum() != levels[0].1.signum()) {
        return Err(Error::PowerLaw("cross moment changes sign across maturities".into()));
    }
    let lx: Vec<f64> = thetas.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = levels.iter().map(|(t, l, _)| (l.abs() * t.powf(h + 0.5)).ln()).collect();
    let fit = least_squares_line(&lx, &ly)?;
    Ok(CorrelationLawSummary { slope: fit.slope, slope_se: fit.slope_se, level_theory: theory, levels, max_z })
}

/// `n` draws of `F^θ` from independent stationary banks on streams `first_stream..`.
pub fn f_theta_samples(quad: &Arc<BetaQuadrature>, theta: f64, n: usize, seed: u64, first_stream: u64) -> Result<Vec<f64>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, first_stream + i);
            f_theta(&OuBank::stationary(Arc::clone(quad), &mut rng)?, theta)
        })
        .collect()
}

/// Two-sample KS test of `F^{θ_a}` against `F^{θ_b}` on disjoint streams.
pub fn f_theta_ks(quad: &Arc<BetaQuadrature>, theta_a: f64, theta_b: f64, n: usize, seed: u64) -> Result<KsResult> {
    let a = f_theta_samples(quad, theta_a, n, seed, 0)?;
    let b = f_theta_samples(quad, theta_b, n, seed, n as u64)?;
    ks_two_sample(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{Hurst, DEFAULT_BETA_MAX, DEFAULT_BETA_MIN, DEFAULT_NODES};

    fn quad(h: f64) -> Arc<BetaQuadrature> {
        BetaQuadrature::build(Hurst::new(h).unwrap(), DEFAULT_NODES, DEFAULT_BETA_MIN, DEFAULT_BETA_MAX).unwrap()
    }

    #[test]
    fn iv_grid_accounts_for_every_point() {
        let s = iv_round_trip_grid();
        assert_eq!(s.points, 7 * 5 * 6);
        assert_eq!(s.identifiable + s.reprice_ok + s.bound_errors + s.failures.len(), s.points);
        assert!(s.failures.is_empty(), "{:?}", s.failures);
        assert!(s.identifiable > s.points / 2);
        assert!(s.max_err_identifiable <= 1e-10, "{}", s.max_err_identifiable);
    }

    #[test]
    fn consistency_detects_sign_flip() {
        let good = theorem1_consistency(false).unwrap();
        assert!(good.worst_ratio <= 1.0, "{good:?}");
        let bad = theorem1_consistency(true).unwrap();
        assert!(bad.worst_ratio > 2.0, "{bad:?}");
    }

    #[test]
    fn small_covariance_run() {
        let s = fbm_covariance_mc(&quad(0.3), 4000, 5, 0.01).unwrap();
        assert!(s.worst_ratio < 1.5, "{s:?}");
    }

    #[test]
    fn correlation_law_small_run() {
        let s = correlation_law(&quad(0.3), -0.7, &[1e-3, 1e-2, 1e-1], 20_000, 3).unwrap();
        assert!(s.level_theory < 0.0);
        assert!((s.slope - 0.8).abs() < 0.05, "{s:?}");
        assert!(s.max_z < 4.0, "{s:?}");
    }

    #[test]
    fn f_theta_samples_are_reproducible() {
        let q = quad(0.1);
        let a = f_theta_samples(&q, 1e-2, 150, 4, 0).unwrap();
        assert_eq!(a, f_theta_samples(&q, 1e-2, 150, 4, 0).unwrap());
        let r = f_theta_ks(&q, 1e-3, 1e-1, 400, 4).unwrap();
        assert!(r.p_value > 1e-3, "{r:?}");
    }
}
