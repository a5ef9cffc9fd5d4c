use std::fmt::Write as _;
use std::sync::Arc;

use super::bank::{OuBank, StepScratch};
use crate::error::{Error, Result};
use crate::numerics::NormalSource;

/// Driver increments on a time grid: `W`, an independent `W^⊥`, and `W^H`.
#[derive(Debug, Clone)]
pub struct DriverPath {
    pub times: Vec<f64>,
    pub dw: Vec<f64>,
    pub dw_perp: Vec<f64>,
    /// `W^H` on the grid, `wh[0] = 0`.
    pub wh: Vec<f64>,
    pub bank_trace: Option<Vec<OuBank>>,
}

impl DriverPath {
    /// CSV with columns `t,W,W_perp,WH`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,W,W_perp,WH\n");
        let (mut w, mut wp) = (0.0, 0.0);
        for i in 0..self.times.len() {
            if i > 0 {
                w += self.dw[i - 1];
                wp += self.dw_perp[i - 1];
            }
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", self.times[i], w, wp, self.wh[i]);
        }
        s
    }
}

/// Runs the bank along `times` (which must start at the bank's time).
///
/// Each step draws the bank's joint innovations first and then one normal
/// for `ΔW^⊥`, the same order the rough model simulator uses.
pub fn simulate_drivers<R: NormalSource + ?Sized>(
    mut bank: OuBank,
    times: &[f64],
    rng: &mut R,
    keep_trace: bool,
) -> Result<DriverPath> {
    if times.len() < 2 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("driver grid needs at least two strictly increasing times".into()));
    }
    let m = times.len() - 1;
    let mut path = DriverPath {
        times: times.to_vec(),
        dw: Vec::with_capacity(m),
        dw_perp: Vec::with_capacity(m),
        wh: Vec::with_capacity(m + 1),
        bank_trace: keep_trace.then(|| vec![bank.clone()]),
    };
    path.wh.push(0.0);
    bank.set_time(times[0]);
    let quad = Arc::clone(bank.quadrature());
    let mut scratch = StepScratch::default();
    for i in 0..m {
        let dt = times[i + 1] - times[i];
        let k = quad.step_kernel(dt)?;
        let step = bank.step_with(&k, rng, &mut scratch);
        bank.set_time(times[i + 1]);
        path.dw.push(step.dw);
        path.dw_perp.push(rng.normal() * dt.sqrt());
        let last = path.wh[i];
        path.wh.push(last + step.dwh);
        if let Some(trace) = path.bank_trace.as_mut() {
            trace.push(bank.clone());
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{BetaQuadrature, Hurst};
    use crate::numerics::RngStream;

    #[test]
    fn path_shape_and_trace() {
        let q = BetaQuadrature::build(Hurst::new(0.2).unwrap(), 30, 1e-4, 1e4).unwrap();
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let mut rng = RngStream::new(1, 1);
        let p = simulate_drivers(OuBank::zeros(Arc::clone(&q)), &times, &mut rng, true).unwrap();
        assert_eq!(p.wh.len(), 11);
        assert_eq!(p.dw.len(), 10);
        assert_eq!(p.wh[0], 0.0);
        let trace = p.bank_trace.as_ref().unwrap();
        assert_eq!(trace.len(), 11);
        let direct = crate::fbm::wh_from_bank(&trace[10], &trace[0]).unwrap();
        assert!((direct - p.wh[10]).abs() < 1e-12);
        assert!((trace[10].time() - 1.0).abs() < 1e-12);
        let csv = p.to_csv();
        assert!(csv.starts_with("t,W,W_perp,WH\n"));
        assert_eq!(csv.lines().count(), 12);
    }

    #[test]
    fn rejects_bad_grid() {
        let q = BetaQuadrature::build(Hurst::new(0.2).unwrap(), 10, 1e-2, 1e2).unwrap();
        let mut rng = RngStream::new(1, 1);
        assert!(simulate_drivers(OuBank::zeros(Arc::clone(&q)), &[0.0], &mut rng, false).is_err());
        assert!(simulate_drivers(OuBank::zeros(q), &[0.0, 0.0], &mut rng, false).is_err());
    }
}
