use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{mix_seed, ExperimentConfig};
use super::report::RunReport;
use crate::asymptotics::{
    fit_power_law, ks_two_sample, rough_skew_coefficient, skew_estimate, theorem1_price, theorem2_iv, theorem3_terms,
};
use crate::error::{Error, Result};
use crate::fbm::{simulate_drivers, OuBank};
use crate::models::{evolve, MarketState, ModelKind, ModelSpec, PathTrace};
use crate::numerics::RngStream;
use crate::pricing::{implied_vol, mc_put};

/// Stream tags separating the auxiliary simulations of a run from its sweep.
const TAG_RESTART: u64 = 0x5245_5354;
const TAG_KS_CONTINUOUS: u64 = 0x4b53_4331;
const TAG_KS_FIRST: u64 = 0x4b53_5231;
const TAG_KS_SECOND: u64 = 0x4b53_5232;
const TAG_FBM: u64 = 0x4642_4d00;

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Sweeps the maturity grid from `init`; failures are recorded per θ.
fn sweep(cfg: &ExperimentConfig, spec: &ModelSpec, init: &MarketState, r: &mut RunReport) {
    for (i, theta) in cfg.theta_grid().into_iter().enumerate() {
        match skew_estimate(spec, init, cfg.z, cfg.zeta, theta, &cfg.mc_params(i)) {
            Ok(e) => r.skew.push(e),
            Err(e) => r.errors.push(format!("θ={}: {e}", f(theta))),
        }
        r.paths_simulated += cfg.n_paths;
    }
}

fn zero_skew_check(r: &mut RunReport) {
    let worst = r
        .skew
        .iter()
        .map(|e| e.value.abs() / (3.0 * e.stderr + 1e-10))
        .fold(0.0, f64::max);
    r.check(
        "zero-skew",
        worst <= 1.0 && !r.skew.is_empty(),
        format!("max |skew| / (3 SE + 1e-10) = {}", f(worst)),
    );
}

/// Fits the power law and compares it with the expansion at `init`.
fn assess(cfg: &ExperimentConfig, spec: &ModelSpec, init: &MarketState, r: &mut RunReport) -> Result<()> {
    match fit_power_law(&r.skew) {
        Ok(fit) => {
            r.note("fitted slope", format!("{} ± {}", f(fit.slope), f(fit.slope_se)));
            r.note("fitted prefactor", f(fit.prefactor));
            r.note("points used", format!("{} (excluded {})", fit.used.len(), fit.excluded.len()));
            r.fit = Some(fit);
        }
        Err(e) => {
            r.note("fit", format!("none ({e})"));
            r.fit_error = Some(e.to_string());
        }
    }
    let (expected_slope, expected_prefactor, regime) = match &spec.kind {
        ModelKind::Rough(m) => {
            let h = m.hurst().value();
            (h - 0.5, rough_skew_coefficient(spec, init)?, format!("rough, H = {}", f(h)))
        }
        ModelKind::Lsv(m) => (0.0, 0.5 * m.regular_skew_numerator(init.s, &init.y, init.t), "regular".to_string()),
    };
    r.note("regime", &regime);
    r.note("expected slope", f(expected_slope));
    r.note("expected prefactor", f(expected_prefactor));
    if expected_prefactor.abs() < 1e-12 {
        r.note("leading skew", "zero: flat smile expected");
        zero_skew_check(r);
        return Ok(());
    }
    let Some(fit) = r.fit.clone() else {
        r.check("slope", false, format!("no power-law fit: {}", r.fit_error.clone().unwrap_or_default()));
        return Ok(());
    };
    let dev = (fit.slope - expected_slope).abs();
    r.check(
        "slope",
        dev <= cfg.slope_tol,
        format!("|{} − {}| = {} (tolerance {})", f(fit.slope), f(expected_slope), f(dev), f(cfg.slope_tol)),
    );
    if spec.is_rough() {
        if let Some(first) = r.skew.iter().min_by(|a, b| a.theta.total_cmp(&b.theta)) {
            let ratio = first.value / (expected_prefactor * first.theta.powf(expected_slope));
            r.note("skew / leading term at smallest θ", f(ratio));
        }
        let rel = (fit.prefactor - expected_prefactor).abs() / expected_prefactor.abs();
        r.check(
            "prefactor",
            rel <= cfg.prefactor_rel_tol,
            format!(
                "fitted {} vs {}: relative gap {} (tolerance {})",
                f(fit.prefactor),
                f(expected_prefactor),
                f(rel),
                f(cfg.prefactor_rel_tol)
            ),
        );
    }
    Ok(())
}

fn describe(r: &mut RunReport, spec: &ModelSpec, cfg: &ExperimentConfig) {
    r.note("model", &spec.name);
    r.note("compliance", &spec.compliance);
    r.note("strikes", format!("z = {}, zeta = {}", f(cfg.z), f(cfg.zeta)));
    r.note("paths per maturity", cfg.n_paths.to_string());
    r.note("steps per maturity", cfg.n_steps.to_string());
}

/// Skew term structure over the configured maturity grid, with a power-law fit.
pub fn cmd_skew_term_structure(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let (spec, init) = cfg.model_and_state()?;
    let mut r = RunReport::new("skew-term-structure", cfg.to_text());
    describe(&mut r, &spec, cfg);
    sweep(cfg, &spec, &init, &mut r);
    assess(cfg, &spec, &init, &mut r)?;
    r.elapsed = start.elapsed();
    Ok(r)
}

/// `S_{t+θ}/S_t` sampled two ways: one uninterrupted simulation, and a
/// simulation stopped at `t`, serialized, restored and continued on fresh
/// random numbers.
fn restart_samples(cfg: &ExperimentConfig, spec: &ModelSpec, init: &MarketState) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let (t, n1) = (cfg.restart_t, cfg.restart_steps);
    let dt = t / n1 as f64;
    let n2 = ((cfg.ks_theta / dt).round() as usize).max(1);
    let theta = n2 as f64 * dt;
    let quad = Arc::clone(init.bank.as_ref().ok_or(Error::MissingBank)?.quadrature());
    let continuous: Vec<f64> = (0..cfg.ks_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut st = init.clone();
            let mut tr = PathTrace::default();
            let mut rng = RngStream::new(mix_seed(cfg.seed, TAG_KS_CONTINUOUS), p);
            evolve(spec, &mut st, t + theta, n1 + n2, &mut rng, Some(&mut tr))?;
            Ok(tr.s[n1 + n2] / tr.s[n1])
        })
        .collect::<Result<_>>()?;
    let restarted: Vec<f64> = (0..cfg.ks_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut st = init.clone();
            evolve(spec, &mut st, t, n1, &mut RngStream::new(mix_seed(cfg.seed, TAG_KS_FIRST), p), None)?;
            let text = st.bank.as_ref().ok_or(Error::MissingBank)?.to_snapshot();
            st.bank = Some(OuBank::from_snapshot_on(Arc::clone(&quad), &text)?);
            let s_t = st.s;
            evolve(spec, &mut st, theta, n2, &mut RngStream::new(mix_seed(cfg.seed, TAG_KS_SECOND), p), None)?;
            Ok(st.s / s_t)
        })
        .collect::<Result<_>>()?;
    Ok((continuous, restarted, theta))
}

/// Simulates one path to `restart.t`, restarts from its serialized Markov
/// state and re-runs the skew term structure conditionally on it.
pub fn cmd_dynamic_consistency(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let (spec, init) = cfg.model_and_state()?;
    if !spec.is_rough() {
        return Err(Error::Config(format!(
            "dynamic consistency needs a rough model; '{}' is LSV, its Markov state is (S, Y) alone and carries no \
             OU bank to snapshot",
            spec.name
        )));
    }
    if cfg.restart_t == 0.0 {
        let mut r = cmd_skew_term_structure(cfg)?;
        r.command = "dynamic-consistency".into();
        r.note("restart", "t = 0: unconditional term structure");
        return Ok(r);
    }
    let start = Instant::now();
    let mut r = RunReport::new("dynamic-consistency", cfg.to_text());
    describe(&mut r, &spec, cfg);

    let mut state = init.clone();
    let mut rng = RngStream::new(mix_seed(cfg.seed, TAG_RESTART), 0);
    evolve(&spec, &mut state, cfg.restart_t, cfg.restart_steps, &mut rng, None)?;
    r.paths_simulated += 1;
    let bank = state.bank.take().ok_or(Error::MissingBank)?;
    let snapshot = bank.to_snapshot();
    let restored = OuBank::from_snapshot_on(Arc::clone(bank.quadrature()), &snapshot)?;
    r.check(
        "snapshot",
        restored.values() == bank.values() && restored.time() == bank.time(),
        "bank restored bit-for-bit from its text snapshot",
    );
    state.bank = Some(restored);
    let mut st = String::new();
    let _ = writeln!(st, "t = {}\ns = {}\ny = {}", f(state.t), f(state.s), f(state.y[0]));
    r.files.push(("restart_state.txt".into(), st));
    r.files.push(("bank_snapshot.txt".into(), snapshot));
    r.note("restart time", f(state.t));
    r.note("restart state", format!("S = {}, Y = {}, v = {}", f(state.s), f(state.y[0]), f(spec.vol(&state))));
    r.note("prefactor at t = 0", f(rough_skew_coefficient(&spec, &init)?));

    sweep(cfg, &spec, &state, &mut r);
    assess(cfg, &spec, &state, &mut r)?;

    let (a, b, theta) = restart_samples(cfg, &spec, &init)?;
    r.paths_simulated += a.len() + b.len();
    let ks = ks_two_sample(&a, &b)?;
    r.check(
        "restart-ks",
        ks.p_value >= cfg.ks_level,
        format!(
            "S(t+θ)/S(t), θ = {}: D = {}, p = {} (level {}, {} paths each)",
            f(theta),
            f(ks.statistic),
            f(ks.p_value),
            f(cfg.ks_level),
            a.len()
        ),
    );
    r.elapsed = start.elapsed();
    Ok(r)
}

/// Writes `fbm.n_paths` driver paths (`t, W, W_perp, WH`) on a uniform grid.
pub fn cmd_simulate_fbm(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let spec = cfg.spec()?;
    let h = spec
        .hurst()
        .ok_or_else(|| Error::Config(format!("simulate-fbm needs a rough model or model.hurst; '{}' has none", spec.name)))?;
    let quad = cfg.quadrature(h)?;
    let mut r = RunReport::new("simulate-fbm", cfg.to_text());
    r.note("hurst", f(h.value()));
    r.note("quadrature", format!("{} nodes, c_hat = {}", quad.len(), f(quad.c_hat())));
    r.note("initial bank", if cfg.fbm_stationary { "stationary" } else { "zero" });
    let n = cfg.fbm_steps;
    let times: Vec<f64> = (0..=n).map(|i| cfg.fbm_horizon * i as f64 / n as f64).collect();
    for p in 0..cfg.fbm_paths {
        let mut rng = RngStream::new(mix_seed(cfg.seed, TAG_FBM), p as u64);
        let bank = if cfg.fbm_stationary {
            OuBank::stationary(Arc::clone(&quad), &mut rng)?
        } else {
            OuBank::zeros(Arc::clone(&quad))
        };
        let path = simulate_drivers(bank, &times, &mut rng, false)?;
        r.files.push((format!("fbm_path_{p:04}.csv"), path.to_csv()));
    }
    r.paths_simulated = cfg.fbm_paths;
    r.elapsed = start.elapsed();
    Ok(r)
}

/// One Monte Carlo put and its implied volatility at `(price.z, price.theta)`.
pub fn cmd_price(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let (spec, init) = cfg.model_and_state()?;
    let (z, theta) = (cfg.price_z, cfg.price_theta);
    let mut r = RunReport::new("price", cfg.to_text());
    describe(&mut r, &spec, cfg);
    let q = mc_put(&spec, &init, z, theta, &cfg.mc_params(0))?;
    r.paths_simulated = cfg.n_paths;
    let iv = implied_vol(&q).map_err(|e| e.context(format!("implied vol at z={z}, θ={theta}")))?;
    let csv = format!(
        "theta,z,price,se,iv,iv_se\n{},{},{},{},{},{}\n",
        f(theta),
        f(z),
        f(q.price),
        f(q.mc_stderr),
        f(iv.iv),
        f(iv.iv_stderr)
    );
    r.note("price", format!("{} ± {}", f(q.price), f(q.mc_stderr)));
    r.note("implied vol", format!("{} ± {}", f(iv.iv), f(iv.iv_stderr)));
    let root = theta.sqrt();
    if spec.is_rough() {
        if let Ok(t) = theorem3_terms(&spec, &init, z, theta) {
            r.note("expansion price", f(t.price() * root));
            r.note("expansion iv", f(t.iv()));
        }
    } else {
        r.note("expansion price", f(theorem1_price(&spec, &init, z, theta)? * root));
        r.note("expansion iv", f(theorem2_iv(&spec, &init, z, theta)?));
    }
    r.files.push(("quote.csv".into(), csv));
    r.elapsed = start.elapsed();
    Ok(r)
}
