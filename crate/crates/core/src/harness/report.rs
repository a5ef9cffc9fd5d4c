use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use crate::asymptotics::{PowerLawFit, SkewEstimate};
use crate::error::Result;

/// One pass/fail line of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Outcome of a harness command.
///
/// Everything except `elapsed` is a deterministic function of the config,
/// so `report.txt`, `skew.csv` and `fit.txt` are byte-reproducible.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub command: String,
    pub config_echo: String,
    pub summary: Vec<(String, String)>,
    pub checks: Vec<Check>,
    pub errors: Vec<String>,
    pub skew: Vec<SkewEstimate>,
    pub fit: Option<PowerLawFit>,
    pub fit_error: Option<String>,
    /// Additional output files as `(name, contents)`.
    pub files: Vec<(String, String)>,
    pub paths_simulated: usize,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn new(command: &str, config_echo: String) -> Self {
        Self { command: command.into(), config_echo, ..Default::default() }
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.summary.push((key.into(), value.into()));
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// CSV with columns `theta,z,zeta,skew,skew_se`.
    pub fn skew_csv(&self) -> String {
        let mut s = String::from("theta,z,zeta,skew,skew_se\n");
        for e in &self.skew {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", e.theta, e.z, e.zeta, e.value, e.stderr);
        }
        s
    }

    /// Fit summary with `slope, slope_se, intercept, r2` first.
    pub fn fit_text(&self) -> String {
        match (&self.fit, &self.fit_error) {
            (Some(f), _) => {
                let mut s = String::new();
                let _ = writeln!(s, "slope = {:.16e}", f.slope);
                let _ = writeln!(s, "slope_se = {:.16e}", f.slope_se);
                let _ = writeln!(s, "intercept = {:.16e}", f.line.intercept);
                let _ = writeln!(s, "r2 = {:.16e}", f.line.r_squared);
                let _ = writeln!(s, "prefactor = {:.16e}", f.prefactor);
                let _ = writeln!(s, "points_used = {}", f.used.len());
                let list = |v: &[f64]| v.iter().map(|t| format!("{t:.16e}")).collect::<Vec<_>>().join(" ");
                let _ = writeln!(s, "excluded_thetas = {}", list(&f.excluded));
                s
            }
            (None, Some(e)) => format!("no fit: {e}\n"),
            (None, None) => "no fit\n".into(),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command: {}", self.command);
        for (k, v) in &self.summary {
            let _ = writeln!(s, "{k}: {v}");
        }
        let _ = writeln!(s, "paths simulated: {}", self.paths_simulated);
        for e in &self.errors {
            let _ = writeln!(s, "ERROR {e}");
        }
        for c in &self.checks {
            let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let _ = writeln!(s, "overall: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }

    /// Writes `config.txt`, `skew.csv`, `fit.txt`, `report.txt`, `timing.txt`
    /// and any extra files into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("config.txt"), &self.config_echo)?;
        std::fs::write(dir.join("skew.csv"), self.skew_csv())?;
        std::fs::write(dir.join("fit.txt"), self.fit_text())?;
        std::fs::write(dir.join("report.txt"), self.render())?;
        std::fs::write(dir.join("timing.txt"), format!("wall_clock_seconds = {:.3}\n", self.elapsed.as_secs_f64()))?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}
