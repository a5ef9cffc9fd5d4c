use rayon::prelude::*;

use super::black_scholes::bs_put;
use super::implied::PutQuote;
use crate::error::{Error, Result};
use crate::models::{evolve, DriverTotals, MarketState, ModelSpec};
use crate::numerics::{pairwise_sum, Antithetic, NormalSource, RngStream};

/// Fewest paths for which a standard error is reported.
pub const MIN_PATHS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McParams {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub control_variate: bool,
}

impl Default for McParams {
    fn default() -> Self {
        Self { n_paths: 40_000, n_steps: 50, seed: 20_240_601, antithetic: true, control_variate: true }
    }
}

/// Terminal quantities of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    /// `S_{t+θ} / S_t`.
    pub ratio: f64,
    /// Black–Scholes terminal ratio `exp(σB_θ − σ²θ/2)` with `σ = v(initial state)`.
    pub cv: f64,
    pub totals: DriverTotals,
}

/// Simulated terminals shared by every strike priced from them.
///
/// Paths come in groups (antithetic pairs, or singletons); group `g` draws
/// from stream `g` of the seed, so the set does not depend on thread count.
#[derive(Debug, Clone)]
pub struct TerminalSet {
    pub theta: f64,
    pub sigma_cv: f64,
    pub group_size: usize,
    pub outcomes: Vec<PathOutcome>,
    pub control_variate: bool,
}

fn run_path<R: NormalSource>(
    spec: &ModelSpec,
    init: &MarketState,
    theta: f64,
    n_steps: usize,
    sigma: f64,
    rng: &mut R,
) -> Result<PathOutcome> {
    let mut state = init.clone();
    let totals = evolve(spec, &mut state, theta, n_steps, rng, None)?;
    Ok(PathOutcome {
        ratio: state.s / init.s,
        cv: (sigma * totals.b - 0.5 * sigma * sigma * theta).exp(),
        totals,
    })
}

/// Simulates `n_paths` terminals at maturity `θ` from `init`.
pub fn simulate_terminals(spec: &ModelSpec, init: &MarketState, theta: f64, params: &McParams) -> Result<TerminalSet> {
    if params.n_paths < MIN_PATHS {
        return Err(Error::SampleSize(format!(
            "Monte Carlo needs at least {MIN_PATHS} paths, got {}",
            params.n_paths
        )));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("maturity must be positive, got {theta}")));
    }
    if spec.is_rough() && init.bank.is_none() {
        return Err(Error::MissingBank);
    }
    let sigma = spec.vol(init);
    let group_size = if params.antithetic { 2 } else { 1 };
    let n_groups = params.n_paths.div_ceil(group_size);
    let groups: Vec<Vec<PathOutcome>> = (0..n_groups as u64)
        .into_par_iter()
        .map(|g| {
            let mut out = Vec::with_capacity(group_size);
            let mut rng = RngStream::new(params.seed, g);
            out.push(run_path(spec, init, theta, params.n_steps, sigma, &mut rng)?);
            if params.antithetic {
                let mut anti = Antithetic(RngStream::new(params.seed, g));
                out.push(run_path(spec, init, theta, params.n_steps, sigma, &mut anti)?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(TerminalSet {
        theta,
        sigma_cv: sigma,
        group_size,
        outcomes: groups.into_iter().flatten().collect(),
        control_variate: params.control_variate,
    })
}

impl TerminalSet {
    pub fn n_groups(&self) -> usize {
        self.outcomes.len() / self.group_size
    }

    fn group_means(&self, f: impl Fn(&PathOutcome) -> f64) -> Vec<f64> {
        self.outcomes
            .chunks(self.group_size)
            .map(|g| g.iter().map(&f).sum::<f64>() / g.len() as f64)
            .collect()
    }

    /// Put price at log-moneyness `k` together with the per-group centred
    /// residuals of the estimator, whose covariance across strikes gives
    /// common-random-number standard errors.
    pub fn put_with_residuals(&self, k: f64) -> Result<(PutQuote, Vec<f64>)> {
        let strike = k.exp();
        let y = self.group_means(|o| (strike - o.ratio).max(0.0));
        let n = y.len() as f64;
        let (beta, x, ex) = if self.control_variate {
            let x = self.group_means(|o| (strike - o.cv).max(0.0));
            let ex = bs_put(k, self.theta, self.sigma_cv)?;
            let mx = pairwise_sum(&x) / n;
            let my = pairwise_sum(&y) / n;
            let sxx = pairwise_sum(&x.iter().map(|v| (v - mx) * (v - mx)).collect::<Vec<_>>());
            let sxy = pairwise_sum(&x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).collect::<Vec<_>>());
            // A degenerate control (all payoffs equal) falls back to the plain difference estimator.
            let beta = if sxx > 0.0 { sxy / sxx } else { 1.0 };
            (beta, x, ex)
        } else {
            (0.0, vec![0.0; y.len()], 0.0)
        };
        let adjusted: Vec<f64> = y.iter().zip(&x).map(|(yy, xx)| yy - beta * (xx - ex)).collect();
        let price = pairwise_sum(&adjusted) / n;
        let resid: Vec<f64> = adjusted.iter().map(|a| a - price).collect();
        let var = pairwise_sum(&resid.iter().map(|r| r * r).collect::<Vec<_>>()) / (n - 1.0);
        let quote = PutQuote { k, theta: self.theta, price, mc_stderr: (var / n).sqrt() };
        Ok((quote, resid))
    }

    pub fn put(&self, k: f64) -> Result<PutQuote> {
        self.put_with_residuals(k).map(|(q, _)| q)
    }
}

/// Monte Carlo estimate of `E[(S_t e^{√θ z} − S_{t+θ})₊ | F_t] / S_t`.
pub fn mc_put(spec: &ModelSpec, init: &MarketState, z: f64, theta: f64, params: &McParams) -> Result<PutQuote> {
    simulate_terminals(spec, init, theta, params)?.put(theta.sqrt() * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::model_zoo;
    use std::collections::BTreeMap;

    fn params(n: usize) -> McParams {
        McParams { n_paths: n, n_steps: 20, seed: 7, ..McParams::default() }
    }

    #[test]
    fn refuses_tiny_samples() {
        let spec = model_zoo("bs", &BTreeMap::new()).unwrap();
        let init = spec.initial_state(None).unwrap();
        assert!(matches!(mc_put(&spec, &init, 0.0, 0.1, &params(99)), Err(Error::SampleSize(_))));
    }

    #[test]
    fn constant_vol_control_variate_is_exact() {
        let spec = model_zoo("bs", &BTreeMap::new()).unwrap();
        let init = spec.initial_state(None).unwrap();
        for (z, theta) in [(0.0, 0.01), (0.5, 0.1), (-1.0, 1e-3f64)] {
            let q = mc_put(&spec, &init, z, theta, &params(1000)).unwrap();
            let exact = bs_put(theta.sqrt() * z, theta, 0.2).unwrap();
            assert!((q.price - exact).abs() <= 1e-12, "{} vs {exact}", q.price);
        }
    }

    #[test]
    fn plain_estimator_within_three_se() {
        let spec = model_zoo("bs", &BTreeMap::new()).unwrap();
        let init = spec.initial_state(None).unwrap();
        let p = McParams { control_variate: false, ..params(20_000) };
        let q = mc_put(&spec, &init, 0.3, 0.05, &p).unwrap();
        let exact = bs_put(0.05f64.sqrt() * 0.3, 0.05, 0.2).unwrap();
        assert!((q.price - exact).abs() < 3.0 * q.mc_stderr, "{} ± {} vs {exact}", q.price, q.mc_stderr);
    }

    #[test]
    fn deep_otm_goes_to_zero() {
        let spec = model_zoo("lsv-linear", &BTreeMap::new()).unwrap();
        let init = spec.initial_state(None).unwrap();
        let q = mc_put(&spec, &init, -40.0, 0.01, &params(200)).unwrap();
        assert_eq!(q.price, 0.0);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let spec = model_zoo("lsv-linear", &BTreeMap::new()).unwrap();
        let init = spec.initial_state(None).unwrap();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_put(&spec, &init, 0.2, 0.01, &params(2000)).unwrap())
        };
        let (a, b) = (run(1), run(3));
        assert_eq!(a.price.to_bits(), b.price.to_bits());
        assert_eq!(a.mc_stderr.to_bits(), b.mc_stderr.to_bits());
    }
}
