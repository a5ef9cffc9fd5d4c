use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use super::commands::cmd_skew_term_structure;
use super::config::{mix_seed, ExperimentConfig};
use super::report::RunReport;
use super::suites::{correlation_law, f_theta_ks, fbm_covariance_mc, iv_round_trip_grid, theorem1_consistency};
use crate::asymptotics::{skew_estimate, theorem3_terms};
use crate::error::{Error, Result};
use crate::fbm::{fbm_covariance, BetaQuadrature, Hurst, OuBank};
use crate::models::{model_zoo, ZOO_NAMES};
use crate::numerics::RngStream;
use crate::pricing::{bs_put, mc_put, McParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationLevel {
    /// Deterministic and analytic invariants.
    Quick,
    /// Quick plus the statistical suites.
    Full,
}

impl FromStr for ValidationLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Self::Quick),
            "full" => Ok(Self::Full),
            _ => Err(Error::Config(format!("validation level must be 'quick' or 'full', got '{s}'"))),
        }
    }
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn run(r: &mut RunReport, name: &str, body: impl FnOnce() -> Result<(bool, String)>) {
    match body() {
        Ok((ok, detail)) => r.check(name, ok, detail),
        Err(e) => r.check(name, false, format!("error: {e}")),
    }
}

fn quad(cfg: &ExperimentConfig, h: f64) -> Result<Arc<BetaQuadrature>> {
    cfg.quadrature(Hurst::new(h)?)
}

fn quick_suite(cfg: &ExperimentConfig, r: &mut RunReport) {
    run(r, "iv-round-trip", || {
        let s = iv_round_trip_grid();
        let ok = s.failures.is_empty() && s.max_err_identifiable <= 1e-10;
        Ok((
            ok,
            format!(
                "{} points: {} identifiable (max error {}), {} reprice within rounding, {} bound errors, {} failures{}",
                s.points,
                s.identifiable,
                f(s.max_err_identifiable),
                s.reprice_ok,
                s.bound_errors,
                s.failures.len(),
                s.failures.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
            ),
        ))
    });
    run(r, "theorem1-consistency", || {
        let s = theorem1_consistency(cfg.mutate_alpha_sign)?;
        Ok((
            s.worst_ratio <= 1.0,
            format!("max |iv(price expansion) − iv expansion| / θ = {} at {}", f(s.worst_ratio), s.worst_at),
        ))
    });
    run(r, "quadrature-variance", || {
        let mut worst: f64 = 0.0;
        for h in [0.1, 0.3] {
            let q = quad(cfg, h)?;
            for e in -4..=1 {
                let t = 10f64.powi(e);
                worst = worst.max((q.wh_variance(t) / t.powf(2.0 * h) - 1.0).abs());
            }
        }
        Ok((worst <= 0.01, format!("max |Var(W^H_t)/t^(2H) − 1| = {} over t ∈ [1e-4, 10]", f(worst))))
    });
    run(r, "fbm-covariance-quadrature", || {
        let mut worst: f64 = 0.0;
        for h in [0.1, 0.3] {
            let q = quad(cfg, h)?;
            for i in 1..=10 {
                for j in i..=10 {
                    let (s, t) = (i as f64 / 10.0, j as f64 / 10.0);
                    let exact = fbm_covariance(q.hurst(), s, t);
                    worst = worst.max((q.wh_covariance(s, t) - exact).abs() / exact.abs());
                }
            }
        }
        Ok((worst <= 0.01, format!("max relative covariance error {} on the 10-point grid", f(worst))))
    });
    run(r, "f-term-cancellation", || {
        let q = quad(cfg, 0.1)?;
        let spec = model_zoo("rough-bounded", &Default::default())?;
        let mut st = spec.initial_state(Some(&q))?;
        st.bank = Some(OuBank::stationary(Arc::clone(&q), &mut RngStream::new(cfg.seed, 0))?);
        let theta = 1e-2;
        let a = theorem3_terms(&spec, &st, 0.5, theta)?;
        let b = theorem3_terms(&spec, &st, -0.5, theta)?;
        let skew = (a.iv() - b.iv()) / theta.sqrt();
        let pure = a.skew_coeff * theta.powf(a.hurst - 0.5);
        let rel = (skew - pure).abs() / pure.abs();
        Ok((rel <= 1e-12 && a.f_part == b.f_part, format!("relative F-dependence of the skew {}", f(rel))))
    });
    run(r, "snapshot-round-trip", || {
        let q = quad(cfg, 0.3)?;
        let b = OuBank::stationary(Arc::clone(&q), &mut RngStream::new(cfg.seed, 1))?;
        let back = OuBank::from_snapshot(&b.to_snapshot())?;
        Ok((back.values() == b.values(), "bank values restored bit-for-bit".into()))
    });
    run(r, "bs-control-variate", || {
        let spec = model_zoo("bs", &Default::default())?;
        let st = spec.initial_state(None)?;
        let mut worst: f64 = 0.0;
        for (z, theta) in [(0.0, 1e-2), (0.5, 1e-3), (-1.0, 0.1)] {
            let p = McParams { n_paths: 1000, n_steps: 4, seed: cfg.seed, ..McParams::default() };
            let q = mc_put(&spec, &st, z, theta, &p)?;
            worst = worst.max((q.price - bs_put(theta.sqrt() * z, theta, 0.2)?).abs());
        }
        Ok((worst <= 1e-12, format!("max |mc_put − bs_put| = {}", f(worst))))
    });
    run(r, "zoo-derivatives", || {
        for name in ZOO_NAMES {
            model_zoo(name, &Default::default()).map_err(|e| e.context(name.to_string()))?;
        }
        Ok((true, format!("{} models pass finite-difference derivative checks", ZOO_NAMES.len())))
    });
}

fn full_suite(cfg: &ExperimentConfig, r: &mut RunReport) {
    run(r, "fbm-covariance-mc", || {
        let mut worst: f64 = 0.0;
        for (i, h) in [0.1, 0.3].into_iter().enumerate() {
            let s = fbm_covariance_mc(&quad(cfg, h)?, 20_000, mix_seed(cfg.seed, 100 + i as u64), 0.01)?;
            worst = worst.max(s.worst_ratio);
        }
        Ok((worst <= 1.0, format!("max |error| / max(1%, 3 SE) = {} (20000 paths, H = 0.1, 0.3)", f(worst))))
    });
    run(r, "lsv-skew-limit", || {
        let spec = model_zoo("lsv-linear", &Default::default())?;
        let st = spec.initial_state(None)?;
        let theta = 1e-2;
        let p = McParams { n_paths: 100_000, n_steps: 50, seed: mix_seed(cfg.seed, 200), ..McParams::default() };
        let e = skew_estimate(&spec, &st, cfg.z, cfg.zeta, theta, &p)?;
        let budget = (3.0 * e.stderr).max(0.1 * theta.sqrt());
        let dev = (e.value + 0.175).abs();
        Ok((dev <= budget, format!("skew {} ± {} vs −0.175, budget {}", f(e.value), f(e.stderr), f(budget))))
    });
    run(r, "bs-zero-skew", || {
        let spec = model_zoo("bs", &Default::default())?;
        let st = spec.initial_state(None)?;
        let mut worst: f64 = 0.0;
        for (i, theta) in [1e-4, 1e-2, 1.0].into_iter().enumerate() {
            let p = McParams { n_paths: 20_000, n_steps: 10, seed: mix_seed(cfg.seed, 300 + i as u64), ..McParams::default() };
            let e = skew_estimate(&spec, &st, cfg.z, cfg.zeta, theta, &p)?;
            worst = worst.max(e.value.abs() / (3.0 * e.stderr + 1e-10));
        }
        Ok((worst <= 1.0, format!("max |skew| / (3 SE + 1e-10) = {}", f(worst))))
    });
    run(r, "correlation-law", || {
        let h = 0.1;
        let s = correlation_law(&quad(cfg, h)?, -0.7, &[1e-3, 1e-2, 1e-1], 100_000, mix_seed(cfg.seed, 400))?;
        let ok = (s.slope - (h + 0.5)).abs() <= 0.05 && s.max_z <= 3.0;
        Ok((ok, format!("slope {} (expected {}), max level z-score {}", f(s.slope), f(h + 0.5), f(s.max_z))))
    });
    run(r, "f-theta-invariance", || {
        let k = f_theta_ks(&quad(cfg, 0.1)?, 1e-3, 1e-1, 10_000, mix_seed(cfg.seed, 500))?;
        Ok((k.p_value >= 0.01, format!("KS D = {}, p = {}", f(k.statistic), f(k.p_value))))
    });
    run(r, "rough-slope", || {
        let mut c = ExperimentConfig { n_paths: 20_000, seed: mix_seed(cfg.seed, 600), ..ExperimentConfig::default() };
        c.model = "rough-bounded".into();
        let rep = cmd_skew_term_structure(&c)?;
        let slope = rep.checks.iter().find(|c| c.name == "slope").cloned();
        Ok(match slope {
            Some(s) => (s.passed, s.detail),
            None => (false, "no slope check produced".into()),
        })
    });
}

/// Runs the invariant suites; failures are report content.
pub fn cmd_validate(cfg: &ExperimentConfig, level: ValidationLevel) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut r = RunReport::new("validate", cfg.to_text());
    r.note("level", if level == ValidationLevel::Quick { "quick" } else { "full" });
    if cfg.mutate_alpha_sign {
        r.note("mutation", "sign of the regular price-expansion coefficient flipped");
    }
    quick_suite(cfg, &mut r);
    if level == ValidationLevel::Full {
        full_suite(cfg, &mut r);
    }
    r.elapsed = start.elapsed();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_passes_and_mutation_fails() {
        let cfg = ExperimentConfig::default();
        let r = cmd_validate(&cfg, ValidationLevel::Quick).unwrap();
        assert!(r.passed(), "{}", r.render());
        let m = ExperimentConfig { mutate_alpha_sign: true, ..cfg };
        let r = cmd_validate(&m, ValidationLevel::Quick).unwrap();
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        assert_eq!(failed, ["theorem1-consistency"]);
    }

    #[test]
    fn level_parsing() {
        assert_eq!("quick".parse::<ValidationLevel>().unwrap(), ValidationLevel::Quick);
        assert_eq!("full".parse::<ValidationLevel>().unwrap(), ValidationLevel::Full);
        assert!("fast".parse::<ValidationLevel>().is_err());
    }
}
