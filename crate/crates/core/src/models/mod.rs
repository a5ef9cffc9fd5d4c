//! Model specifications, the model zoo and path simulation.
//!
//! Two families share one interface: regular local-stochastic volatility
//! models ([`LsvModel`]) with a finite-dimensional Itô factor `Y`, and rough
//! models ([`RoughModel`]) whose scalar factor is `Y_t = Y_0 + ∫ b(Y) du + W^H_t`.

mod bundle;
mod checks;
mod simulate;
mod zoo;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

pub use bundle::PathBundle;
pub use checks::{check_derivatives, check_lipschitz, DERIVATIVE_PROBES};
pub use simulate::{condition_and_restart, evolve, simulate_lsv, simulate_rough, DriverTotals, PathTrace};
pub use zoo::{model_zoo, ZOO_NAMES};

use crate::error::{Error, Result};
use crate::fbm::{BetaQuadrature, Hurst, OuBank};

/// Regular local-stochastic volatility coefficients.
///
/// `dS = S v dB`, `dY^i = b^i dt + Σ_j c^i_j dW^j` with `d⟨B, W^j⟩ = ρ^j dt`.
pub trait LsvModel: Debug + Send + Sync {
    /// Dimension `d` of `Y`.
    fn dim(&self) -> usize;
    /// Number `k` of Brownian drivers of `Y`.
    fn n_drivers(&self) -> usize;
    fn v(&self, s: f64, y: &[f64], t: f64) -> f64;
    fn dv_ds(&self, s: f64, y: &[f64], t: f64) -> f64;
    fn grad_y_v(&self, s: f64, y: &[f64], t: f64, out: &mut [f64]);
    fn drift(&self, s: f64, y: &[f64], t: f64, out: &mut [f64]);
    /// Row-major `d × k`.
    fn diffusion(&self, s: f64, y: &[f64], t: f64, out: &mut [f64]);
    fn rho(&self, s: f64, y: &[f64], t: f64, out: &mut [f64]);
    /// Box `(y_lo, y_hi)` on which derivative callbacks are probed.
    fn probe_box(&self) -> (f64, f64) {
        (-2.0, 2.0)
    }

    /// `η = c ρ`.
    fn eta(&self, s: f64, y: &[f64], t: f64) -> Vec<f64> {
        let (d, k) = (self.dim(), self.n_drivers());
        let mut c = vec![0.0; d * k];
        let mut rho = vec![0.0; k];
        self.diffusion(s, y, t, &mut c);
        self.rho(s, y, t, &mut rho);
        (0..d).map(|i| (0..k).map(|l| c[i * k + l] * rho[l]).sum()).collect()
    }

    /// `S ∂_s v + η · ∇_y log v`, twice the limiting ATM skew.
    fn regular_skew_numerator(&self, s: f64, y: &[f64], t: f64) -> f64 {
        let v = self.v(s, y, t);
        let mut g = vec![0.0; self.dim()];
        self.grad_y_v(s, y, t, &mut g);
        let eta = self.eta(s, y, t);
        s * self.dv_ds(s, y, t) + eta.iter().zip(&g).map(|(e, g)| e * g / v).sum::<f64>()
    }
}

/// Rough fractional volatility coefficients with scalar factor `Y`.
pub trait RoughModel: Debug + Send + Sync {
    fn hurst(&self) -> Hurst;
    fn v(&self, s: f64, y: f64, t: f64) -> f64;
    fn dv_ds(&self, s: f64, y: f64, t: f64) -> f64;
    fn dv_dy(&self, s: f64, y: f64, t: f64) -> f64;
    fn drift(&self, y: f64) -> f64;
    /// Declared Lipschitz constant of [`RoughModel::drift`].
    fn drift_lipschitz(&self) -> f64;
    fn rho(&self, y: f64) -> f64;
    fn probe_box(&self) -> (f64, f64) {
        (-2.0, 2.0)
    }

    fn dlogv_dy(&self, s: f64, y: f64, t: f64) -> f64 {
        self.dv_dy(s, y, t) / self.v(s, y, t)
    }
}

#[derive(Debug, Clone)]
pub enum ModelKind {
    Lsv(Arc<dyn LsvModel>),
    Rough(Arc<dyn RoughModel>),
}

/// A named, parameterized model with its default initial factor value.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub kind: ModelKind,
    pub y0: Vec<f64>,
    /// Regularity status as documented by the zoo.
    pub compliance: String,
}

impl ModelSpec {
    pub fn is_rough(&self) -> bool {
        matches!(self.kind, ModelKind::Rough(_))
    }

    pub fn hurst(&self) -> Option<Hurst> {
        match &self.kind {
            ModelKind::Rough(m) => Some(m.hurst()),
            ModelKind::Lsv(_) => None,
        }
    }

    /// Volatility at a state.
    pub fn vol(&self, state: &MarketState) -> f64 {
        match &self.kind {
            ModelKind::Lsv(m) => m.v(state.s, &state.y, state.t),
            ModelKind::Rough(m) => m.v(state.s, state.y[0], state.t),
        }
    }

    /// `S = 1`, `Y = y0`, time 0; rough models get an all-zero bank on `quad`.
    pub fn initial_state(&self, quad: Option<&Arc<BetaQuadrature>>) -> Result<MarketState> {
        let bank = match (&self.kind, quad) {
            (ModelKind::Rough(m), Some(q)) => {
                if q.hurst() != m.hurst() {
                    return Err(Error::Config(format!(
                        "quadrature built for H = {} but model has H = {}",
                        q.hurst().value(),
                        m.hurst().value()
                    )));
                }
                Some(OuBank::zeros(Arc::clone(q)))
            }
            (ModelKind::Rough(_), None) => return Err(Error::MissingBank),
            (ModelKind::Lsv(_), _) => None,
        };
        Ok(MarketState { t: 0.0, s: 1.0, y: self.y0.clone(), bank })
    }
}

/// Full Markov state: spot, factor, time and (rough models) the OU bank.
#[derive(Debug, Clone)]
pub struct MarketState {
    pub t: f64,
    pub s: f64,
    pub y: Vec<f64>,
    pub bank: Option<OuBank>,
}
