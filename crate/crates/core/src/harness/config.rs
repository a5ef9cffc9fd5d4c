use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fbm::{BetaQuadrature, Hurst, DEFAULT_BETA_MAX, DEFAULT_BETA_MIN, DEFAULT_NODES};
use crate::models::{model_zoo, MarketState, ModelSpec};
use crate::pricing::{McParams, MIN_PATHS};

/// Experiment configuration, read from flat `section.key = value` text.
///
/// Every field has a default. Keys under `model.` other than `model.name`
/// are passed to the model zoo as parameters (including `model.hurst`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: String,
    pub model_params: BTreeMap<String, f64>,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_count: usize,
    pub z: f64,
    pub zeta: f64,
    pub n_paths: usize,
    /// Steps per maturity; every θ gets the same relative step size.
    pub n_steps: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub control_variate: bool,
    pub n_nodes: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub slope_tol: f64,
    pub prefactor_rel_tol: f64,
    pub restart_t: f64,
    pub restart_steps: usize,
    pub ks_paths: usize,
    pub ks_theta: f64,
    pub ks_level: f64,
    pub price_z: f64,
    pub price_theta: f64,
    pub fbm_horizon: f64,
    pub fbm_steps: usize,
    pub fbm_paths: usize,
    pub fbm_stationary: bool,
    pub mutate_alpha_sign: bool,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: "rough-bounded".into(),
            model_params: BTreeMap::new(),
            theta_min: 1e-4,
            theta_max: 1e-1,
            theta_count: 8,
            z: 0.1,
            zeta: -0.1,
            n_paths: 40_000,
            n_steps: 50,
            seed: 20_240_601,
            antithetic: true,
            control_variate: true,
            n_nodes: DEFAULT_NODES,
            beta_min: DEFAULT_BETA_MIN,
            beta_max: DEFAULT_BETA_MAX,
            slope_tol: 0.05,
            prefactor_rel_tol: 0.15,
            restart_t: 0.5,
            restart_steps: 500,
            ks_paths: 2000,
            ks_theta: 0.1,
            ks_level: 0.01,
            price_z: 0.0,
            price_theta: 0.01,
            fbm_horizon: 1.0,
            fbm_steps: 100,
            fbm_paths: 1,
            fbm_stationary: true,
            mutate_alpha_sign: false,
            out_dir: PathBuf::from("roughskew-out"),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Config(format!("{key}: '{v}' is not a number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.fract() == 0.0 && *x >= 0.0 && *x <= usize::MAX as f64)
        .map(|x| x as usize)
        .ok_or_else(|| Error::Config(format!("{key}: '{v}' is not a non-negative integer")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: '{v}' is not a boolean"))),
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

impl ExperimentConfig {
    /// Parses config text on top of the defaults and validates the result.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value', got '{line}'", n + 1)))?;
            self.set(k.trim(), v.trim()).map_err(|e| e.context(format!("line {}", n + 1)))?;
        }
        Ok(())
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "model.name" => self.model = v.to_string(),
            "theta.min" => self.theta_min = parse_f64(key, v)?,
            "theta.max" => self.theta_max = parse_f64(key, v)?,
            "theta.count" => self.theta_count = parse_usize(key, v)?,
            "strikes.z" => self.z = parse_f64(key, v)?,
            "strikes.zeta" => self.zeta = parse_f64(key, v)?,
            "mc.n_paths" => self.n_paths = parse_usize(key, v)?,
            "mc.n_steps" => self.n_steps = parse_usize(key, v)?,
            "mc.seed" => {
                self.seed = v.parse().map_err(|_| Error::Config(format!("{key}: '{v}' is not a u64")))?
            }
            "mc.antithetic" => self.antithetic = parse_bool(key, v)?,
            "mc.control_variate" => self.control_variate = parse_bool(key, v)?,
            "quadrature.n_nodes" => self.n_nodes = parse_usize(key, v)?,
            "quadrature.beta_min" => self.beta_min = parse_f64(key, v)?,
            "quadrature.beta_max" => self.beta_max = parse_f64(key, v)?,
            "tolerance.slope" => self.slope_tol = parse_f64(key, v)?,
            "tolerance.prefactor_rel" => self.prefactor_rel_tol = parse_f64(key, v)?,
            "restart.t" => self.restart_t = parse_f64(key, v)?,
            "restart.n_steps" => self.restart_steps = parse_usize(key, v)?,
            "restart.ks_paths" => self.ks_paths = parse_usize(key, v)?,
            "restart.ks_theta" => self.ks_theta = parse_f64(key, v)?,
            "restart.ks_level" => self.ks_level = parse_f64(key, v)?,
            "price.z" => self.price_z = parse_f64(key, v)?,
            "price.theta" => self.price_theta = parse_f64(key, v)?,
            "fbm.horizon" => self.fbm_horizon = parse_f64(key, v)?,
            "fbm.n_steps" => self.fbm_steps = parse_usize(key, v)?,
            "fbm.n_paths" => self.fbm_paths = parse_usize(key, v)?,
            "fbm.stationary" => self.fbm_stationary = parse_bool(key, v)?,
            "validate.mutate_alpha_sign" => self.mutate_alpha_sign = parse_bool(key, v)?,
            "output.dir" => self.out_dir = PathBuf::from(v),
            _ => match key.strip_prefix("model.") {
                Some(p) if !p.is_empty() => {
                    self.model_params.insert(p.to_string(), parse_f64(key, v)?);
                }
                _ => return Err(Error::Config(format!("unknown key '{key}'"))),
            },
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let pos = |name: &str, x: f64| -> Result<()> {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {x}")))
            }
        };
        pos("theta.min", self.theta_min)?;
        pos("theta.max", self.theta_max)?;
        if self.theta_count == 0 {
            return bad("theta.count must be at least 1".into());
        }
        if self.theta_min > self.theta_max || (self.theta_count > 1 && self.theta_min == self.theta_max) {
            return bad(format!(
                "theta.min ({}) must be below theta.max ({}) for a {}-point grid",
                self.theta_min, self.theta_max, self.theta_count
            ));
        }
        if !(self.z.is_finite() && self.zeta.is_finite()) || self.z == self.zeta {
            return bad(format!("strikes.z and strikes.zeta must differ, got {} and {}", self.z, self.zeta));
        }
        if self.n_paths < MIN_PATHS {
            return bad(format!("mc.n_paths must be at least {MIN_PATHS}, got {}", self.n_paths));
        }
        if self.n_steps == 0 || self.restart_steps == 0 || self.fbm_steps == 0 {
            return bad("step counts must be at least 1".into());
        }
        if self.n_nodes < 2 {
            return bad(format!("quadrature.n_nodes must be at least 2, got {}", self.n_nodes));
        }
        pos("quadrature.beta_min", self.beta_min)?;
        pos("quadrature.beta_max", self.beta_max)?;
        if self.beta_min >= self.beta_max {
            return bad("quadrature.beta_min must be below quadrature.beta_max".into());
        }
        pos("tolerance.slope", self.slope_tol)?;
        pos("tolerance.prefactor_rel", self.prefactor_rel_tol)?;
        if !(self.restart_t >= 0.0 && self.restart_t.is_finite()) {
            return bad(format!("restart.t must be non-negative, got {}", self.restart_t));
        }
        if self.ks_paths < crate::asymptotics::MIN_KS_SAMPLE {
            return bad(format!(
                "restart.ks_paths must be at least {}, got {}",
                crate::asymptotics::MIN_KS_SAMPLE,
                self.ks_paths
            ));
        }
        pos("restart.ks_theta", self.ks_theta)?;
        if !(self.ks_level > 0.0 && self.ks_level < 1.0) {
            return bad(format!("restart.ks_level must lie in (0, 1), got {}", self.ks_level));
        }
        if !self.price_z.is_finite() {
            return bad("price.z must be finite".into());
        }
        pos("price.theta", self.price_theta)?;
        pos("fbm.horizon", self.fbm_horizon)?;
        if self.fbm_paths == 0 {
            return bad("fbm.n_paths must be at least 1".into());
        }
        self.spec()?;
        Ok(())
    }

    pub fn spec(&self) -> Result<ModelSpec> {
        model_zoo(&self.model, &self.model_params)
    }

    /// Quadrature for the given Hurst index on the configured node ladder.
    pub fn quadrature(&self, h: Hurst) -> Result<Arc<BetaQuadrature>> {
        BetaQuadrature::build(h, self.n_nodes, self.beta_min, self.beta_max)
    }

    /// Model and its initial state (a zero bank for rough models).
    pub fn model_and_state(&self) -> Result<(ModelSpec, MarketState)> {
        let spec = self.spec()?;
        let quad = spec.hurst().map(|h| self.quadrature(h)).transpose()?;
        let state = spec.initial_state(quad.as_ref())?;
        Ok((spec, state))
    }

    /// Geometric maturity grid with exact endpoints.
    pub fn theta_grid(&self) -> Vec<f64> {
        let n = self.theta_count;
        if n == 1 {
            return vec![self.theta_min];
        }
        let (a, b) = (self.theta_min.ln(), self.theta_max.ln());
        (0..n)
            .map(|i| match i {
                0 => self.theta_min,
                _ if i == n - 1 => self.theta_max,
                _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
            })
            .collect()
    }

    /// Monte Carlo settings for the `i`-th maturity of a sweep.
    pub fn mc_params(&self, i: usize) -> McParams {
        McParams {
            n_paths: self.n_paths,
            n_steps: self.n_steps,
            seed: mix_seed(self.seed, i as u64),
            antithetic: self.antithetic,
            control_variate: self.control_variate,
        }
    }

    /// Resolved configuration in the same format [`ExperimentConfig::from_text`] reads.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<(String, String)> = vec![
            ("model.name".into(), self.model.clone()),
            ("theta.min".into(), fmt_f(self.theta_min)),
            ("theta.max".into(), fmt_f(self.theta_max)),
            ("theta.count".into(), self.theta_count.to_string()),
            ("strikes.z".into(), fmt_f(self.z)),
            ("strikes.zeta".into(), fmt_f(self.zeta)),
            ("mc.n_paths".into(), self.n_paths.to_string()),
            ("mc.n_steps".into(), self.n_steps.to_string()),
            ("mc.seed".into(), self.seed.to_string()),
            ("mc.antithetic".into(), self.antithetic.to_string()),
            ("mc.control_variate".into(), self.control_variate.to_string()),
            ("quadrature.n_nodes".into(), self.n_nodes.to_string()),
            ("quadrature.beta_min".into(), fmt_f(self.beta_min)),
            ("quadrature.beta_max".into(), fmt_f(self.beta_max)),
            ("tolerance.slope".into(), fmt_f(self.slope_tol)),
            ("tolerance.prefactor_rel".into(), fmt_f(self.prefactor_rel_tol)),
            ("restart.t".into(), fmt_f(self.restart_t)),
            ("restart.n_steps".into(), self.restart_steps.to_string()),
            ("restart.ks_paths".into(), self.ks_paths.to_string()),
            ("restart.ks_theta".into(), fmt_f(self.ks_theta)),
            ("restart.ks_level".into(), fmt_f(self.ks_level)),
            ("price.z".into(), fmt_f(self.price_z)),
            ("price.theta".into(), fmt_f(self.price_theta)),
            ("fbm.horizon".into(), fmt_f(self.fbm_horizon)),
            ("fbm.n_steps".into(), self.fbm_steps.to_string()),
            ("fbm.n_paths".into(), self.fbm_paths.to_string()),
            ("fbm.stationary".into(), self.fbm_stationary.to_string()),
            ("validate.mutate_alpha_sign".into(), self.mutate_alpha_sign.to_string()),
            ("output.dir".into(), self.out_dir.display().to_string()),
        ];
        if let Ok(spec) = self.spec() {
            for (k, v) in &spec.params {
                lines.push((format!("model.{k}"), fmt_f(*v)));
            }
        } else {
            for (k, v) in &self.model_params {
                lines.push((format!("model.{k}"), fmt_f(*v)));
            }
        }
        lines.sort();
        lines.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// SplitMix64 finalizer applied to `seed + index`; spreads per-maturity seeds.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut x = seed.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
