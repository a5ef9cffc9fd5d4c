use std::collections::BTreeMap;
use std::sync::Arc;

use super::{check_derivatives, LsvModel, ModelKind, ModelSpec, RoughModel};
use crate::error::{Error, Result};
use crate::fbm::Hurst;

pub const ZOO_NAMES: [&str; 5] = ["bs", "lsv-linear", "heston-like", "rough-bounded", "rough-exp"];

/// Floor applied inside `√y` for the Heston-like entry.
const HESTON_FLOOR: f64 = 1e-8;

/// `v = σ₀(1 + a tanh y)`, `dY = −κY dt + ν dW`, constant `ρ`.
#[derive(Debug, Clone)]
pub struct TanhLsv {
    pub sigma0: f64,
    pub a: f64,
    pub kappa: f64,
    pub nu: f64,
    pub rho: f64,
}

impl LsvModel for TanhLsv {
    fn dim(&self) -> usize {
        1
    }
    fn n_drivers(&self) -> usize {
        1
    }
    fn v(&self, _s: f64, y: &[f64], _t: f64) -> f64 {
        self.sigma0 * (1.0 + self.a * y[0].tanh())
    }
    fn dv_ds(&self, _s: f64, _y: &[f64], _t: f64) -> f64 {
        0.0
    }
    fn grad_y_v(&self, _s: f64, y: &[f64], _t: f64, out: &mut [f64]) {
        let th = y[0].tanh();
        out[0] = self.sigma0 * self.a * (1.0 - th * th);
    }
    fn drift(&self, _s: f64, y: &[f64], _t: f64, out: &mut [f64]) {
        out[0] = -self.kappa * y[0];
    }
    fn diffusion(&self, _s: f64, _y: &[f64], _t: f64, out: &mut [f64]) {
        out[0] = self.nu;
    }
    fn rho(&self, _s: f64, _y: &[f64], _t: f64, out: &mut [f64]) {
        out[0] = self.rho;
    }
}

/// `v = √(y ∨ ε)`, `dY = κ(θ̄ − Y)dt + ν√(Y ∨ ε) dW`, constant `ρ`.
#[derive(Debug, Clone)]
pub struct HestonLike {
    pub kappa: f64,
    pub mean: f64,
    pub nu: f64,
    pub rho: f64,
}

impl LsvModel for HestonLike {
    fn dim(&self) -> usize {
        1
    }
    fn n_drivers(&self) -> usize {
        1
    }
    fn v(&self, _s: f64, y: &[f64], _t: f64) -> f64 {
        y[0].max(HESTON_FLOOR).sqrt()
    }
    fn dv_ds(&self, _s: f64, _y: &[f64], _t: f64) -> f64 {
        0.0
    }
    fn grad_y_v(&self, _s: f64, y: &[f64], _t: f64, out: &mut [f64]) {
        out[0] = if y[0] > HESTON_FLOOR { 0.5 / y[0].sqrt() } else { 0.0 };
    }
    fn drift(&self, _s: f64, y: &[f64], _t: f64, out: &mut [f64]) {
        out[0] = self.kappa * (self.mean - y[0]);
    }
    fn diffusion(&self, _s: f64, y: &[f64], _t: f64, out: &mut [f64]) {
        out[0] = self.nu * y[0].max(HESTON_FLOOR).sqrt();
    }
    fn rho(&self, _s: f64, _y: &[f64], _t: f64, out: &mut [f64]) {
        out[0] = self.rho;
    }
    fn probe_box(&self) -> (f64, f64) {
        (1e-3, 1.0)
    }
}

/// `v = σ₀(1 + a tanh y)`, `b = −κy`, constant `ρ`, fBm factor.
#[derive(Debug, Clone)]
pub struct TanhRough {
    pub sigma0: f64,
    pub a: f64,
    pub kappa: f64,
    pub rho: f64,
    pub hurst: Hurst,
}

impl RoughModel for TanhRough {
    fn hurst(&self) -> Hurst {
        self.hurst
    }
    fn v(&self, _s: f64, y: f64, _t: f64) -> f64 {
        self.sigma0 * (1.0 + self.a * y.tanh())
    }
    fn dv_ds(&self, _s: f64, _y: f64, _t: f64) -> f64 {
        0.0
    }
    fn dv_dy(&self, _s: f64, y: f64, _t: f64) -> f64 {
        let th = y.tanh();
        self.sigma0 * self.a * (1.0 - th * th)
    }
    fn drift(&self, y: f64) -> f64 {
        -self.kappa * y
    }
    fn drift_lipschitz(&self) -> f64 {
        self.kappa.abs()
    }
    fn rho(&self, _y: f64) -> f64 {
        self.rho
    }
}

/// `v = σ₀ e^y`, `b = −κy`, constant `ρ`, fBm factor.
#[derive(Debug, Clone)]
pub struct ExpRough {
    pub sigma0: f64,
    pub kappa: f64,
    pub rho: f64,
    pub hurst: Hurst,
}

impl RoughModel for ExpRough {
    fn hurst(&self) -> Hurst {
        self.hurst
    }
    fn v(&self, _s: f64, y: f64, _t: f64) -> f64 {
        self.sigma0 * y.exp()
    }
    fn dv_ds(&self, _s: f64, _y: f64, _t: f64) -> f64 {
        0.0
    }
    fn dv_dy(&self, _s: f64, y: f64, _t: f64) -> f64 {
        self.sigma0 * y.exp()
    }
    fn drift(&self, y: f64) -> f64 {
        -self.kappa * y
    }
    fn drift_lipschitz(&self) -> f64 {
        self.kappa.abs()
    }
    fn rho(&self, _y: f64) -> f64 {
        self.rho
    }
}

struct Params {
    name: &'static str,
    values: BTreeMap<String, f64>,
}

impl Params {
    fn resolve(name: &'static str, defaults: &[(&str, f64)], optional: &[&str], given: &BTreeMap<String, f64>) -> Result<Self> {
        let mut values: BTreeMap<String, f64> = defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in given {
            if !values.contains_key(k) && !optional.contains(&k.as_str()) {
                let mut known: Vec<&str> = defaults.iter().map(|(k, _)| *k).collect();
                known.extend_from_slice(optional);
                return Err(Error::Config(format!(
                    "model '{name}' has no parameter '{k}' (known: {})",
                    known.join(", ")
                )));
            }
            if !v.is_finite() {
                return Err(Error::Config(format!("parameter '{k}' of model '{name}' must be finite")));
            }
            values.insert(k.clone(), *v);
        }
        Ok(Self { name, values })
    }

    fn get(&self, k: &str) -> f64 {
        self.values[k]
    }

    fn require(&self, k: &str, ok: bool, what: &str) -> Result<f64> {
        if ok {
            Ok(self.get(k))
        } else {
            Err(Error::Config(format!(
                "parameter '{k}' of model '{}' must be {what}, got {}",
                self.name,
                self.get(k)
            )))
        }
    }

    fn positive(&self, k: &str) -> Result<f64> {
        self.require(k, self.get(k) > 0.0, "positive")
    }

    fn non_negative(&self, k: &str) -> Result<f64> {
        self.require(k, self.get(k) >= 0.0, "non-negative")
    }

    fn correlation(&self, k: &str) -> Result<f64> {
        self.require(k, self.get(k).abs() <= 1.0, "in [-1, 1]")
    }

    fn below_one(&self, k: &str) -> Result<f64> {
        self.require(k, self.get(k).abs() < 1.0, "in (-1, 1)")
    }

    fn hurst(&self) -> Result<Hurst> {
        Hurst::new(self.get("hurst")).map_err(|e| e.context(format!("model '{}'", self.name)))
    }
}

/// Builds a named zoo entry, applying defaults and running the derivative checks.
///
/// | name | v | Y dynamics | notes |
/// |---|---|---|---|
/// | `bs` | `σ₀` | none | rough constant-vol model when `hurst` is given |
/// | `lsv-linear` | `σ₀(1 + a tanh y)` | `−κY dt + ν dW` | regular LSV |
/// | `heston-like` | `√(y ∨ 1e-8)` | `κ(θ̄ − Y)dt + ν√(Y ∨ 1e-8) dW` | floor breaks smoothness at 0 |
/// | `rough-bounded` | `σ₀(1 + a tanh y)` | `−κY dt + dW^H` | rough |
/// | `rough-exp` | `σ₀ eʸ` | `−κY dt + dW^H` | desk-scale only: not of linear growth |
pub fn model_zoo(name: &str, params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    let spec = match name {
        "bs" => {
            let p = Params::resolve("bs", &[("sigma0", 0.2), ("rho", 0.0)], &["hurst"], params)?;
            let sigma0 = p.positive("sigma0")?;
            let rho = p.correlation("rho")?;
            if p.values.contains_key("hurst") {
                let hurst = p.hurst()?;
                let m = TanhRough { sigma0, a: 0.0, kappa: 0.0, rho, hurst };
                spec("bs", p.values, ModelKind::Rough(Arc::new(m)), 0.0, "constant volatility (rough driver carried but inert)")
            } else {
                let m = TanhLsv { sigma0, a: 0.0, kappa: 0.0, nu: 0.0, rho };
                spec("bs", p.values, ModelKind::Lsv(Arc::new(m)), 0.0, "constant volatility")
            }
        }
        "lsv-linear" => {
            let p = Params::resolve(
                "lsv-linear",
                &[("sigma0", 0.2), ("a", 0.5), ("kappa", 1.0), ("nu", 1.0), ("rho", -0.7), ("y0", 0.0)],
                &[],
                params,
            )?;
            let m = TanhLsv {
                sigma0: p.positive("sigma0")?,
                a: p.below_one("a")?,
                kappa: p.non_negative("kappa")?,
                nu: p.non_negative("nu")?,
                rho: p.correlation("rho")?,
            };
            let y0 = p.get("y0");
            spec("lsv-linear", p.values, ModelKind::Lsv(Arc::new(m)), y0, "regular LSV: all four regularity conditions hold")
        }
        "heston-like" => {
            let p = Params::resolve(
                "heston-like",
                &[("kappa", 1.0), ("theta", 0.04), ("nu", 0.3), ("rho", -0.7), ("y0", 0.04)],
                &[],
                params,
            )?;
            let m = HestonLike {
                kappa: p.non_negative("kappa")?,
                mean: p.positive("theta")?,
                nu: p.non_negative("nu")?,
                rho: p.correlation("rho")?,
            };
            let y0 = p.positive("y0")?;
            spec(
                "heston-like",
                p.values,
                ModelKind::Lsv(Arc::new(m)),
                y0,
                "v = sqrt(max(y, 1e-8)); not differentiable at the floor, gradient growth violates the polynomial bound near 0",
            )
        }
        "rough-bounded" => {
            let p = Params::resolve(
                "rough-bounded",
                &[("sigma0", 0.2), ("a", 0.5), ("kappa", 1.0), ("rho", -0.7), ("hurst", 0.1), ("y0", 0.0)],
                &[],
                params,
            )?;
            let m = TanhRough {
                sigma0: p.positive("sigma0")?,
                a: p.below_one("a")?,
                kappa: p.non_negative("kappa")?,
                rho: p.correlation("rho")?,
                hurst: p.hurst()?,
            };
            let y0 = p.get("y0");
            spec("rough-bounded", p.values, ModelKind::Rough(Arc::new(m)), y0, "rough model: all five regularity conditions hold")
        }
        "rough-exp" => {
            let p = Params::resolve(
                "rough-exp",
                &[("sigma0", 0.2), ("kappa", 1.0), ("rho", -0.7), ("hurst", 0.1), ("y0", 0.0)],
                &[],
                params,
            )?;
            let m = ExpRough {
                sigma0: p.positive("sigma0")?,
                kappa: p.non_negative("kappa")?,
                rho: p.correlation("rho")?,
                hurst: p.hurst()?,
            };
            let y0 = p.get("y0");
            spec("rough-exp", p.values, ModelKind::Rough(Arc::new(m)), y0, "desk-scale only: v is not of linear growth in y")
        }
        other => {
            return Err(Error::UnknownModel { name: other.to_string(), available: ZOO_NAMES.join(", ") });
        }
    };
    check_derivatives(&spec)?;
    Ok(spec)
}

fn spec(name: &str, params: BTreeMap<String, f64>, kind: ModelKind, y0: f64, compliance: &str) -> ModelSpec {
    ModelSpec { name: name.to_string(), params, kind, y0: vec![y0], compliance: compliance.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn every_entry_builds_with_defaults() {
        for name in ZOO_NAMES {
            let s = model_zoo(name, &empty()).unwrap();
            assert_eq!(s.name, name);
            assert!(!s.compliance.is_empty());
        }
        assert!(model_zoo("rough-exp", &empty()).unwrap().compliance.contains("desk-scale only"));
    }

    #[test]
    fn unknown_name_lists_entries() {
        match model_zoo("sabr", &empty()) {
            Err(Error::UnknownModel { available, .. }) => {
                for n in ZOO_NAMES {
                    assert!(available.contains(n));
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_parameters_rejected() {
        let mut p = empty();
        p.insert("rho".into(), -1.5);
        assert!(model_zoo("lsv-linear", &p).is_err());
        let mut p = empty();
        p.insert("hurst".into(), 0.7);
        assert!(model_zoo("rough-bounded", &p).is_err());
        let mut p = empty();
        p.insert("gamma".into(), 1.0);
        assert!(matches!(model_zoo("bs", &p), Err(Error::Config(_))));
    }

    #[test]
    fn bs_has_zero_derivatives() {
        let s = model_zoo("bs", &empty()).unwrap();
        match &s.kind {
            ModelKind::Lsv(m) => {
                let mut g = [1.0];
                m.grad_y_v(1.0, &[0.3], 0.0, &mut g);
                assert_eq!(g[0], 0.0);
                assert_eq!(m.dv_ds(1.0, &[0.3], 0.0), 0.0);
                assert_eq!(m.v(1.3, &[5.0], 2.0), 0.2);
            }
            _ => panic!("bs without hurst is LSV"),
        }
        let mut p = empty();
        p.insert("hurst".into(), 0.1);
        let r = model_zoo("bs", &p).unwrap();
        assert!(r.is_rough());
        if let ModelKind::Rough(m) = &r.kind {
            assert_eq!(m.dv_dy(1.0, 0.4, 0.0), 0.0);
        }
    }

    #[test]
    fn log_derivative_values() {
        let s = model_zoo("lsv-linear", &empty()).unwrap();
        if let ModelKind::Lsv(m) = &s.kind {
            let mut g = [0.0];
            m.grad_y_v(1.0, &[0.0], 0.0, &mut g);
            assert!((g[0] / m.v(1.0, &[0.0], 0.0) - 0.5).abs() < 1e-15);
            assert!((m.regular_skew_numerator(1.0, &[0.0], 0.0) - (-0.35)).abs() < 1e-15);
        }
        let r = model_zoo("rough-bounded", &empty()).unwrap();
        if let ModelKind::Rough(m) = &r.kind {
            let y = 0.3;
            let analytic = m.dlogv_dy(1.0, y, 0.0);
            let h = 1e-6;
            let fd = ((m.v(1.0, y + h, 0.0)).ln() - (m.v(1.0, y - h, 0.0)).ln()) / (2.0 * h);
            assert!((analytic - fd).abs() < 1e-8);
            assert!((analytic - 0.399_394_197_393_029_7).abs() < 1e-12);
        }
    }
}
