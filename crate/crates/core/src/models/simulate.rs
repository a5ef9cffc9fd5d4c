use std::sync::Arc;

use super::{LsvModel, MarketState, ModelKind, ModelSpec, PathBundle, RoughModel};
use crate::error::{Error, Result};
use crate::fbm::StepScratch;
use crate::numerics::NormalSource;

/// Accumulated driver increments over one [`evolve`] call.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DriverTotals {
    /// `B_T − B_0` of the asset driver.
    pub b: f64,
    /// `W_T − W_0` of the first factor driver.
    pub w: f64,
    /// `W^H_T − W^H_0` (zero for LSV models).
    pub wh: f64,
}

/// Recorded grid values of a simulated path.
#[derive(Debug, Clone, Default)]
pub struct PathTrace {
    pub times: Vec<f64>,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub wh: Vec<f64>,
}

impl PathTrace {
    fn push(&mut self, state: &MarketState, wh: f64) {
        self.times.push(state.t);
        self.s.push(state.s);
        self.y.push(state.y[0]);
        self.wh.push(wh);
    }
}

/// Advances `state` in place over `horizon` with `n_steps` equal steps.
///
/// Log-Euler for `S`, Euler for `Y`, coefficients frozen at the left end of
/// each step. Rough models advance the OU bank exactly and read `ΔW^H` off
/// it. A zero horizon is a no-op that draws nothing.
pub fn evolve<R: NormalSource + ?Sized>(
    spec: &ModelSpec,
    state: &mut MarketState,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
    mut trace: Option<&mut PathTrace>,
) -> Result<DriverTotals> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("horizon must be non-negative, got {horizon}")));
    }
    if n_steps == 0 {
        return Err(Error::Domain("need at least one time step".into()));
    }
    if let Some(tr) = trace.as_deref_mut() {
        if tr.times.is_empty() {
            tr.push(state, 0.0);
        }
    }
    if horizon == 0.0 {
        return Ok(DriverTotals::default());
    }
    match &spec.kind {
        ModelKind::Lsv(m) => evolve_lsv(m.as_ref(), state, horizon, n_steps, rng, trace),
        ModelKind::Rough(m) => evolve_rough(m.as_ref(), state, horizon, n_steps, rng, trace),
    }
}

fn check_vol(v: f64, state: &MarketState) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Simulation {
            t: state.t,
            s: state.s,
            y: state.y.clone(),
            reason: format!("volatility evaluated to {v}"),
        })
    }
}

fn log_euler(state: &mut MarketState, v: f64, db: f64, dt: f64) -> Result<()> {
    let s = state.s * (v * db - 0.5 * v * v * dt).exp();
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Simulation {
            t: state.t,
            s: state.s,
            y: state.y.clone(),
            reason: format!("spot update produced {s}"),
        });
    }
    state.s = s;
    Ok(())
}

fn evolve_lsv<R: NormalSource + ?Sized>(
    m: &dyn LsvModel,
    state: &mut MarketState,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
    mut trace: Option<&mut PathTrace>,
) -> Result<DriverTotals> {
    let (d, k) = (m.dim(), m.n_drivers());
    if state.y.len() != d {
        return Err(Error::Config(format!("state has {} factors, model expects {d}", state.y.len())));
    }
    let dt = horizon / n_steps as f64;
    let sq = dt.sqrt();
    let t0 = state.t;
    let mut drift = vec![0.0; d];
    let mut diff = vec![0.0; d * k];
    let mut rho = vec![0.0; k];
    let mut dw = vec![0.0; k];
    let mut totals = DriverTotals::default();
    for i in 0..n_steps {
        let (s, t) = (state.s, state.t);
        let v = m.v(s, &state.y, t);
        check_vol(v, state)?;
        m.drift(s, &state.y, t, &mut drift);
        m.diffusion(s, &state.y, t, &mut diff);
        m.rho(s, &state.y, t, &mut rho);
        let r2: f64 = rho.iter().map(|r| r * r).sum();
        if r2 > 1.0 + 1e-12 {
            return Err(Error::Simulation { t, s, y: state.y.clone(), reason: format!("|ρ|² = {r2} exceeds 1") });
        }
        for x in dw.iter_mut() {
            *x = sq * rng.normal();
        }
        let dperp = sq * rng.normal();
        let db = rho.iter().zip(&dw).map(|(r, w)| r * w).sum::<f64>() + (1.0 - r2).max(0.0).sqrt() * dperp;
        for (j, yj) in state.y.iter_mut().enumerate() {
            *yj += drift[j] * dt + diff[j * k..(j + 1) * k].iter().zip(&dw).map(|(c, w)| c * w).sum::<f64>();
        }
        log_euler(state, v, db, dt)?;
        state.t = t0 + horizon * (i + 1) as f64 / n_steps as f64;
        totals.b += db;
        totals.w += dw.first().copied().unwrap_or(0.0);
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(state, 0.0);
        }
    }
    Ok(totals)
}

fn evolve_rough<R: NormalSource + ?Sized>(
    m: &dyn RoughModel,
    state: &mut MarketState,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
    mut trace: Option<&mut PathTrace>,
) -> Result<DriverTotals> {
    if state.y.len() != 1 {
        return Err(Error::Config(format!("rough models have one factor, state has {}", state.y.len())));
    }
    let mut bank = state.bank.take().ok_or(Error::MissingBank)?;
    if bank.quadrature().hurst() != m.hurst() {
        state.bank = Some(bank);
        return Err(Error::QuadratureMismatch);
    }
    let dt = horizon / n_steps as f64;
    let sq = dt.sqrt();
    let t0 = state.t;
    let kernel = match bank.quadrature().step_kernel(dt) {
        Ok(k) => k,
        Err(e) => {
            state.bank = Some(bank);
            return Err(e);
        }
    };
    let kernel = Arc::clone(&kernel);
    let mut scratch = StepScratch::default();
    let mut totals = DriverTotals::default();
    let mut result = Ok(());
    let wh_start = trace.as_deref().and_then(|tr| tr.wh.last().copied()).unwrap_or(0.0);
    for i in 0..n_steps {
        let (s, y, t) = (state.s, state.y[0], state.t);
        let v = m.v(s, y, t);
        if let Err(e) = check_vol(v, state) {
            result = Err(e);
            break;
        }
        let rho = m.rho(y);
        let b = m.drift(y);
        let step = bank.step_with(&kernel, rng, &mut scratch);
        let dperp = sq * rng.normal();
        let db = rho * step.dw + (1.0 - rho * rho).max(0.0).sqrt() * dperp;
        state.y[0] = y + b * dt + step.dwh;
        if let Err(e) = log_euler(state, v, db, dt) {
            result = Err(e);
            break;
        }
        state.t = t0 + horizon * (i + 1) as f64 / n_steps as f64;
        totals.b += db;
        totals.w += step.dw;
        totals.wh += step.dwh;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(state, wh_start + totals.wh);
        }
    }
    bank.set_time(state.t);
    state.bank = Some(bank);
    result.map(|_| totals)
}

/// Simulates an LSV model and records the path.
pub fn simulate_lsv<R: NormalSource + ?Sized>(
    spec: &ModelSpec,
    init: &MarketState,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<PathBundle> {
    if spec.is_rough() {
        return Err(Error::Config(format!("'{}' is a rough model; use simulate_rough", spec.name)));
    }
    simulate(spec, init, horizon, n_steps, rng)
}

/// Simulates a rough model from a state carrying an OU bank.
pub fn simulate_rough<R: NormalSource + ?Sized>(
    spec: &ModelSpec,
    init: &MarketState,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<PathBundle> {
    if !spec.is_rough() {
        return Err(Error::Config(format!("'{}' is not a rough model; use simulate_lsv", spec.name)));
    }
    if init.bank.is_none() {
        return Err(Error::MissingBank);
    }
    simulate(spec, init, horizon, n_steps, rng)
}

fn simulate<R: NormalSource + ?Sized>(
    spec: &ModelSpec,
    init: &MarketState,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<PathBundle> {
    let mut state = init.clone();
    let mut trace = PathTrace::default();
    let totals = evolve(spec, &mut state, horizon, n_steps, rng, Some(&mut trace))?;
    Ok(PathBundle::new(trace, state, totals, spec.is_rough()))
}

/// Continues a simulated path from its terminal Markov state.
///
/// The returned bundle covers only the new segment; its `W^H` column
/// continues from the previous segment's last value.
pub fn condition_and_restart<R: NormalSource + ?Sized>(
    bundle: &PathBundle,
    spec: &ModelSpec,
    horizon2: f64,
    n_steps2: usize,
    rng: &mut R,
) -> Result<PathBundle> {
    if spec.is_rough() && bundle.terminal.bank.is_none() {
        return Err(Error::MissingBank);
    }
    let mut state = bundle.terminal.clone();
    let mut trace = PathTrace::default();
    trace.push(&state, bundle.wh.as_ref().and_then(|w| w.last().copied()).unwrap_or(0.0));
    let totals = evolve(spec, &mut state, horizon2, n_steps2, rng, Some(&mut trace))?;
    Ok(PathBundle::new(trace, state, totals, spec.is_rough()))
}
