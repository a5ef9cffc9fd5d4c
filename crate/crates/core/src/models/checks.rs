use super::{LsvModel, ModelKind, ModelSpec, RoughModel};
use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// Probe points per derivative-consistency check.
pub const DERIVATIVE_PROBES: usize = 100;
const REL_TOL: f64 = 1e-6;
const PROBE_SEED: u64 = 0xd1ff_c4ec;

/// Compares the analytic derivative callbacks of a spec with central finite
/// differences of `v` at pseudo-random probe points, and checks `v > 0`.
pub fn check_derivatives(spec: &ModelSpec) -> Result<()> {
    let mut rng = RngStream::new(PROBE_SEED, 0);
    match &spec.kind {
        ModelKind::Lsv(m) => (0..DERIVATIVE_PROBES).try_for_each(|_| probe_lsv(m.as_ref(), &mut rng)),
        ModelKind::Rough(m) => (0..DERIVATIVE_PROBES).try_for_each(|_| probe_rough(m.as_ref(), &mut rng)),
    }
    .map_err(|e| e.context(format!("model '{}'", spec.name)))
}

/// Difference-quotient bound on the rough drift over its probe box.
pub fn check_lipschitz(m: &dyn RoughModel) -> Result<()> {
    let (lo, hi) = m.probe_box();
    let n = 200;
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let bound = m.drift_lipschitz();
    for w in grid.windows(2) {
        let q = (m.drift(w[1]) - m.drift(w[0])).abs() / (w[1] - w[0]);
        if q > bound * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::Config(format!(
                "drift difference quotient {q} on [{}, {}] exceeds the declared Lipschitz constant {bound}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

fn probe(rng: &mut RngStream, (lo, hi): (f64, f64)) -> (f64, f64, f64) {
    let s = (0.5 + 1.5 * rng.uniform()).max(1e-3);
    let y = lo + (hi - lo) * rng.uniform();
    let t = rng.uniform();
    (s, y, t)
}

fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5 * (1.0 + x.abs());
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn compare(what: &str, analytic: f64, fd: f64, scale: f64, at: (f64, f64, f64)) -> Result<()> {
    if (analytic - fd).abs() > REL_TOL * analytic.abs().max(scale) {
        return Err(Error::Config(format!(
            "{what} callback {analytic} disagrees with finite difference {fd} at (s, y, t) = {at:?}"
        )));
    }
    Ok(())
}

fn positive(v: f64, at: (f64, f64, f64)) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("v = {v} is not positive at (s, y, t) = {at:?}")))
    }
}

fn probe_lsv(m: &dyn LsvModel, rng: &mut RngStream) -> Result<()> {
    let (s, y0, t) = probe(rng, m.probe_box());
    let d = m.dim();
    let (lo, hi) = m.probe_box();
    let mut y: Vec<f64> = (0..d).map(|_| lo + (hi - lo) * rng.uniform()).collect();
    y[0] = y0;
    let at = (s, y0, t);
    let v = m.v(s, &y, t);
    positive(v, at)?;
    compare("dv/ds", m.dv_ds(s, &y, t), central(|x| m.v(x, &y, t), s), v, at)?;
    let mut grad = vec![0.0; d];
    m.grad_y_v(s, &y, t, &mut grad);
    for i in 0..d {
        let fd = central(
            |x| {
                let mut yy = y.clone();
                yy[i] = x;
                m.v(s, &yy, t)
            },
            y[i],
        );
        compare("dv/dy", grad[i], fd, v, at)?;
    }
    let mut rho = vec![0.0; m.n_drivers()];
    m.rho(s, &y, t, &mut rho);
    let norm2: f64 = rho.iter().map(|r| r * r).sum();
    if norm2 > 1.0 + 1e-12 {
        return Err(Error::Config(format!("|ρ|² = {norm2} exceeds 1 at {at:?}")));
    }
    Ok(())
}

fn probe_rough(m: &dyn RoughModel, rng: &mut RngStream) -> Result<()> {
    let at = probe(rng, m.probe_box());
    let (s, y, t) = at;
    let v = m.v(s, y, t);
    positive(v, at)?;
    compare("dv/ds", m.dv_ds(s, y, t), central(|x| m.v(x, y, t), s), v, at)?;
    compare("dv/dy", m.dv_dy(s, y, t), central(|x| m.v(s, x, t), y), v, at)?;
    if m.rho(y).abs() > 1.0 {
        return Err(Error::Config(format!("|ρ| = {} exceeds 1 at {at:?}", m.rho(y).abs())));
    }
    check_lipschitz(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::Hurst;
    use crate::models::ModelKind;
    use std::collections::BTreeMap;
    use std::sync::Arc;

    /// Deliberately wrong derivative.
    #[derive(Debug)]
    struct Broken;

    impl RoughModel for Broken {
        fn hurst(&self) -> Hurst {
            Hurst::new(0.1).unwrap()
        }
        fn v(&self, _s: f64, y: f64, _t: f64) -> f64 {
            0.2 * (1.0 + 0.5 * y.tanh())
        }
        fn dv_ds(&self, _s: f64, _y: f64, _t: f64) -> f64 {
            0.0
        }
        fn dv_dy(&self, _s: f64, y: f64, _t: f64) -> f64 {
            0.1 * y.tanh()
        }
        fn drift(&self, y: f64) -> f64 {
            -3.0 * y
        }
        fn drift_lipschitz(&self) -> f64 {
            1.0
        }
        fn rho(&self, _y: f64) -> f64 {
            -0.5
        }
    }

    #[test]
    fn detects_wrong_derivative_and_lipschitz() {
        let spec = ModelSpec {
            name: "broken".into(),
            params: BTreeMap::new(),
            kind: ModelKind::Rough(Arc::new(Broken)),
            y0: vec![0.0],
            compliance: String::new(),
        };
        assert!(check_derivatives(&spec).is_err());
        assert!(check_lipschitz(&Broken).is_err());
    }
}
