use std::fmt::Write as _;

use super::simulate::{DriverTotals, PathTrace};
use super::MarketState;

/// A recorded trajectory with its terminal Markov state.
#[derive(Debug, Clone)]
pub struct PathBundle {
    pub times: Vec<f64>,
    pub s: Vec<f64>,
    /// First factor component.
    pub y: Vec<f64>,
    /// `W^H` on the grid; `None` for LSV models.
    pub wh: Option<Vec<f64>>,
    pub terminal: MarketState,
    pub totals: DriverTotals,
}

impl PathBundle {
    pub(crate) fn new(trace: PathTrace, terminal: MarketState, totals: DriverTotals, rough: bool) -> Self {
        Self {
            times: trace.times,
            s: trace.s,
            y: trace.y,
            wh: rough.then_some(trace.wh),
            terminal,
            totals,
        }
    }

    /// CSV with columns `t,S,Y,WH`; the `WH` field is empty for LSV paths.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,S,Y,WH\n");
        for i in 0..self.times.len() {
            let wh = match &self.wh {
                Some(w) => format!("{:.16e}", w[i]),
                None => String::new(),
            };
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{wh}", self.times[i], self.s[i], self.y[i]);
        }
        out
    }
}
