use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::bank::StepKernel;
use super::Hurst;
use crate::error::{Error, Result};
use crate::numerics::{pivoted_cholesky, LowRankFactor, SpdMatrix};

pub const DEFAULT_NODES: usize = 129;
pub const DEFAULT_BETA_MIN: f64 = 1e-16;
pub const DEFAULT_BETA_MAX: f64 = 1e16;

/// Nodes closer than this (relative) are merged before any Gram factorization.
const THIN_SPACING: f64 = 1e-10;
/// Correlation-scale stopping tolerance of the low-rank Gram factors.
pub(crate) const GRAM_TOL: f64 = 1e-14;

/// Discretization of the β-integral on a geometric ladder.
///
/// Weights are trapezoid-in-log-β (`w_j = β_j · Δlog β`, halved at the ends)
/// and `c_hat` is fixed so that the discrete engine started from a stationary
/// bank has `Var(W^H_1) = 1` exactly. Factorizations of the stationary Gram
/// matrix and of the per-`dt` step covariance are computed lazily and cached.
pub struct BetaQuadrature {
    hurst: Hurst,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    c_hat: f64,
    loadings: Vec<f64>,
    stationary: OnceLock<std::result::Result<Arc<LowRankFactor>, Error>>,
    kernels: Mutex<HashMap<u64, Arc<StepKernel>>>,
}

impl std::fmt::Debug for BetaQuadrature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BetaQuadrature")
            .field("hurst", &self.hurst.value())
            .field("n_nodes", &self.nodes.len())
            .field("beta_min", &self.beta_min())
            .field("beta_max", &self.beta_max())
            .field("c_hat", &self.c_hat)
            .finish()
    }
}

impl BetaQuadrature {
    /// Geometric ladder of `n_nodes` nodes on `[beta_min, beta_max]`.
    pub fn build(h: Hurst, n_nodes: usize, beta_min: f64, beta_max: f64) -> Result<Arc<Self>> {
        if n_nodes < 2 {
            return Err(Error::Config(format!("quadrature needs at least 2 nodes, got {n_nodes}")));
        }
        if !(beta_min > 0.0 && beta_max > beta_min && beta_max.is_finite()) {
            return Err(Error::Config(format!(
                "quadrature range must satisfy 0 < beta_min < beta_max, got [{beta_min}, {beta_max}]"
            )));
        }
        let (lmin, lmax) = (beta_min.ln(), beta_max.ln());
        let step = (lmax - lmin) / (n_nodes - 1) as f64;
        let mut nodes: Vec<f64> = (0..n_nodes).map(|i| (lmin + step * i as f64).exp()).collect();
        nodes[0] = beta_min;
        nodes[n_nodes - 1] = beta_max;
        let nodes = thin(nodes);
        let weights = log_trapezoid(&nodes);
        Self::from_parts(h, nodes, weights)
    }

    /// Quadrature from explicit nodes and weights; `c_hat` is recomputed.
    pub fn from_parts(h: Hurst, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Arc<Self>> {
        if nodes.len() < 2 || nodes.len() != weights.len() {
            return Err(Error::Config(format!(
                "need at least 2 nodes with one weight each, got {} nodes and {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || !(nodes[0] > 0.0) {
            return Err(Error::Config("quadrature nodes must be positive and strictly increasing".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::Config("quadrature weights must be positive and finite".into()));
        }
        let e = -0.5 - h.value();
        let raw: Vec<f64> = nodes.iter().zip(&weights).map(|(b, w)| w * b.powf(e)).collect();
        let var1 = increment_form(&nodes, &raw, 1.0);
        if !(var1 > 0.0 && var1.is_finite()) {
            return Err(Error::Config(format!("discrete Var(W^H_1) is {var1}; cannot normalize")));
        }
        let c_hat = 1.0 / var1.sqrt();
        let loadings = raw.iter().map(|r| c_hat * r).collect();
        Ok(Arc::new(Self {
            hurst: h,
            nodes,
            weights,
            c_hat,
            loadings,
            stationary: OnceLock::new(),
            kernels: Mutex::new(HashMap::new()),
        }))
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn beta_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn beta_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Normalizing constant, the discrete stand-in for `c_H`.
    pub fn c_hat(&self) -> f64 {
        self.c_hat
    }

    /// Per-node coefficients `c_hat · w_j · β_j^{-1/2-H}` of the `W^H` functional.
    pub fn loadings(&self) -> &[f64] {
        &self.loadings
    }

    /// Same ladder, weights and Hurst exponent.
    pub fn same_as(&self, other: &BetaQuadrature) -> bool {
        std::ptr::eq(self, other)
            || (self.hurst == other.hurst && self.nodes == other.nodes && self.weights == other.weights)
    }

    /// `Var(W^H_t)` of the discrete engine from a stationary bank.
    pub fn wh_variance(&self, t: f64) -> f64 {
        increment_form(&self.nodes, &self.loadings, t)
    }

    /// `Cov(W^H_s, W^H_t)` of the discrete engine from a stationary bank.
    pub fn wh_covariance(&self, s: f64, t: f64) -> f64 {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let n = self.nodes.len();
        let mut acc = 0.0;
        for i in 0..n {
            let bi = self.nodes[i];
            for j in 0..n {
                let bj = self.nodes[j];
                // E[(Z^i_s − Z^i_0)(Z^j_t − Z^j_0)] with s ≤ t under stationarity.
                let k = ((-bj * (t - s)).exp_m1() - (-bi * s).exp_m1() - (-bj * t).exp_m1()) / (bi + bj);
                acc += self.loadings[i] * self.loadings[j] * k;
            }
        }
        acc
    }

    /// `Cov(W_θ − W_0, W^H_θ − W^H_0)` of the discrete engine (any initial bank).
    pub fn driver_covariance(&self, theta: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.loadings)
            .map(|(b, k)| k * (-(-b * theta).exp_m1()) / b)
            .sum()
    }

    /// Low-rank factor of the stationary Gram matrix `1/(β_i + β_j)`.
    pub fn stationary_factor(&self) -> Result<Arc<LowRankFactor>> {
        self.stationary
            .get_or_init(|| {
                let b = &self.nodes;
                let gram = SpdMatrix::from_fn(b.len(), |i, j| 1.0 / (b[i] + b[j]))
                    .map_err(|e| Error::GramFactorization(e.to_string()))?;
                pivoted_cholesky(&gram, GRAM_TOL)
                    .map(Arc::new)
                    .map_err(|e| Error::GramFactorization(e.to_string()))
            })
            .clone()
    }

    /// Exact step kernel for time step `dt`, built once per distinct `dt`.
    pub fn step_kernel(&self, dt: f64) -> Result<Arc<StepKernel>> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        let key = dt.to_bits();
        if let Some(k) = self.kernels.lock().expect("kernel cache poisoned").get(&key) {
            return Ok(Arc::clone(k));
        }
        let kernel = Arc::new(StepKernel::new(&self.nodes, &self.loadings, dt)?);
        let mut cache = self.kernels.lock().expect("kernel cache poisoned");
        Ok(Arc::clone(cache.entry(key).or_insert(kernel)))
    }
}

/// `Σ a_i a_j (2 − e^{-β_i t} − e^{-β_j t}) / (β_i + β_j)`.
fn increment_form(nodes: &[f64], a: &[f64], t: f64) -> f64 {
    let m: Vec<f64> = nodes.iter().map(|b| -(-b * t).exp_m1()).collect();
    let mut acc = 0.0;
    for i in 0..nodes.len() {
        let mut row = 0.0;
        for j in 0..nodes.len() {
            row += a[j] * (m[i] + m[j]) / (nodes[i] + nodes[j]);
        }
        acc += a[i] * row;
    }
    acc
}

fn thin(nodes: Vec<f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(nodes.len());
    for b in nodes {
        match out.last() {
            Some(&prev) if (b - prev) / prev < THIN_SPACING => {}
            _ => out.push(b),
        }
    }
    out
}

fn log_trapezoid(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let gaps: Vec<f64> = nodes.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    (0..n)
        .map(|j| {
            let left = if j > 0 { gaps[j - 1] } else { 0.0 };
            let right = if j + 1 < n { gaps[j] } else { 0.0 };
            nodes[j] * 0.5 * (left + right)
        })
        .collect()
}
