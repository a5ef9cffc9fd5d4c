use std::fmt::Write as _;
use std::sync::Arc;

use super::quadrature::{BetaQuadrature, GRAM_TOL};
use super::Hurst;
use crate::error::{Error, Result};
use crate::numerics::{pivoted_cholesky, LowRankFactor, NormalSource, SpdMatrix};

const SNAPSHOT_HEADER: &str = "roughskew-oubank v1";

/// Exact joint Gaussian transition of `(W, {Z^β})` over one step `dt`.
///
/// With `I^β = ∫ e^{-β(dt-u)} dW_u`, the update is `Z^β ← e^{-β dt} Z^β + I^β`
/// and `(dW, I^β)` is jointly Gaussian with `Var dW = dt`,
/// `Cov(dW, I^β) = (1 − e^{-β dt})/β`, `Cov(I^β, I^γ) = (1 − e^{-(β+γ)dt})/(β+γ)`.
/// The joint covariance is numerically low-rank and is stored as a pivoted
/// Cholesky factor.
#[derive(Debug)]
pub struct StepKernel {
    dt: f64,
    decay: Vec<f64>,
    history: Vec<f64>,
    /// Rows: dW first, then one row per node.
    factor: LowRankFactor,
    /// `Σ_j loading_j · factor[j+1, ·]`, the innovation part of `ΔW^H`.
    wh_row: Vec<f64>,
}

/// Increments produced by one bank step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BankStep {
    pub dw: f64,
    pub dwh: f64,
}

/// Reusable buffers for [`StepKernel::advance`].
#[derive(Debug, Clone, Default)]
pub struct StepScratch {
    normals: Vec<f64>,
    joint: Vec<f64>,
}

impl StepKernel {
    pub(crate) fn new(nodes: &[f64], loadings: &[f64], dt: f64) -> Result<Self> {
        let n = nodes.len();
        let cov = SpdMatrix::from_fn(n + 1, |i, j| match (i, j) {
            (0, 0) => dt,
            (0, k) | (k, 0) => -(-nodes[k - 1] * dt).exp_m1() / nodes[k - 1],
            (a, b) => {
                let s = nodes[a - 1] + nodes[b - 1];
                -(-s * dt).exp_m1() / s
            }
        })
        .map_err(|e| Error::GramFactorization(e.to_string()))?;
        let factor = pivoted_cholesky(&cov, GRAM_TOL).map_err(|e| Error::GramFactorization(e.to_string()))?;
        let decay: Vec<f64> = nodes.iter().map(|b| (-b * dt).exp()).collect();
        let history = nodes
            .iter()
            .zip(loadings)
            .map(|(b, k)| k * (-b * dt).exp_m1())
            .collect();
        let mut wh_row = vec![0.0; factor.rank()];
        for (j, k) in loadings.iter().enumerate() {
            for (acc, g) in wh_row.iter_mut().zip(factor.row(j + 1)) {
                *acc += k * g;
            }
        }
        Ok(Self { dt, decay, history, factor, wh_row })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of standard normals consumed per step.
    pub fn rank(&self) -> usize {
        self.factor.rank()
    }

    /// `e^{-β_j dt}` per node.
    pub fn decay(&self) -> &[f64] {
        &self.decay
    }

    /// Draws `(dW, I^{β_1}, …, I^{β_n})` into `out` (length `n + 1`).
    pub fn sample_innovations<R: NormalSource + ?Sized>(&self, rng: &mut R, scratch: &mut StepScratch, out: &mut [f64]) {
        scratch.normals.resize(self.rank(), 0.0);
        for v in scratch.normals.iter_mut() {
            *v = rng.normal();
        }
        self.factor.mul_vec(&scratch.normals, out);
    }

    /// The history term `Σ_j c w_j β_j^{-1/2-H} (e^{-β_j dt} − 1) Z_j`.
    pub fn history_term(&self, z: &[f64]) -> f64 {
        self.history.iter().zip(z).map(|(h, z)| h * z).sum()
    }

    /// Advances bank values `z` in place and returns `(ΔW, ΔW^H)`.
    pub fn advance<R: NormalSource + ?Sized>(&self, z: &mut [f64], rng: &mut R, scratch: &mut StepScratch) -> BankStep {
        debug_assert_eq!(z.len(), self.decay.len());
        let mut joint = std::mem::take(&mut scratch.joint);
        joint.resize(z.len() + 1, 0.0);
        self.sample_innovations(rng, scratch, &mut joint);
        let innovation: f64 = self.wh_row.iter().zip(&scratch.normals).map(|(a, b)| a * b).sum();
        let dwh = self.history_term(z) + innovation;
        for ((zj, d), i) in z.iter_mut().zip(&self.decay).zip(&joint[1..]) {
            *zj = d * *zj + i;
        }
        let dw = joint[0];
        scratch.joint = joint;
        BankStep { dw, dwh }
    }
}

/// Discretized OU family `{Z^{β_j}}` at a point in time: the Markov state
/// carrying the entire history of `W^H`.
#[derive(Debug, Clone)]
pub struct OuBank {
    quad: Arc<BetaQuadrature>,
    z: Vec<f64>,
    time: f64,
}

impl OuBank {
    /// All-zero bank at time 0 (no accumulated history).
    pub fn zeros(quad: Arc<BetaQuadrature>) -> Self {
        let n = quad.len();
        Self { quad, z: vec![0.0; n], time: 0.0 }
    }

    /// Draw from the stationary law, `Cov(Z^β, Z^γ) = 1/(β+γ)`.
    pub fn stationary<R: NormalSource + ?Sized>(quad: Arc<BetaQuadrature>, rng: &mut R) -> Result<Self> {
        let g = quad.stationary_factor()?;
        let normals: Vec<f64> = (0..g.rank()).map(|_| rng.normal()).collect();
        let mut z = vec![0.0; quad.len()];
        g.mul_vec(&normals, &mut z);
        Ok(Self { quad, z, time: 0.0 })
    }

    pub fn from_values(quad: Arc<BetaQuadrature>, z: Vec<f64>, time: f64) -> Result<Self> {
        if z.len() != quad.len() {
            return Err(Error::QuadratureMismatch);
        }
        if z.iter().any(|v| !v.is_finite()) || !time.is_finite() {
            return Err(Error::Domain("bank values and time must be finite".into()));
        }
        Ok(Self { quad, z, time })
    }

    pub fn quadrature(&self) -> &Arc<BetaQuadrature> {
        &self.quad
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.z
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    /// `Σ_j c w_j β_j^{-1/2-H} Z_j`; differences of this level are `W^H` increments.
    pub fn wh_level(&self) -> f64 {
        self.quad.loadings().iter().zip(&self.z).map(|(k, z)| k * z).sum()
    }

    /// Exact step of length `dt` using the quadrature's cached kernel.
    pub fn step<R: NormalSource + ?Sized>(&mut self, dt: f64, rng: &mut R) -> Result<BankStep> {
        let kernel = self.quad.step_kernel(dt)?;
        let mut scratch = StepScratch::default();
        Ok(self.step_with(&kernel, rng, &mut scratch))
    }

    /// Step with a caller-held kernel and scratch; the hot-loop entry point.
    #[inline]
    pub fn step_with<R: NormalSource + ?Sized>(&mut self, kernel: &StepKernel, rng: &mut R, scratch: &mut StepScratch) -> BankStep {
        let out = kernel.advance(&mut self.z, rng, scratch);
        self.time += kernel.dt();
        out
    }

    /// Versioned plain-text snapshot: a header, then `node weight z` per line.
    pub fn to_snapshot(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{SNAPSHOT_HEADER}");
        let _ = writeln!(s, "hurst {:.16e}", self.quad.hurst().value());
        let _ = writeln!(s, "time {:.16e}", self.time);
        let _ = writeln!(s, "c_hat {:.16e}", self.quad.c_hat());
        let _ = writeln!(s, "nodes {}", self.z.len());
        for ((b, w), z) in self.quad.nodes().iter().zip(self.quad.weights()).zip(&self.z) {
            let _ = writeln!(s, "{b:.16e} {w:.16e} {z:.16e}");
        }
        s
    }

    /// Restores a snapshot, rebuilding its quadrature.
    pub fn from_snapshot(text: &str) -> Result<Self> {
        let parsed = Snapshot::parse(text)?;
        let quad = BetaQuadrature::from_parts(parsed.hurst, parsed.nodes, parsed.weights)?;
        if (quad.c_hat() / parsed.c_hat - 1.0).abs() > 1e-10 {
            return Err(Error::Snapshot(format!(
                "recorded c_hat {} disagrees with recomputed {}",
                parsed.c_hat,
                quad.c_hat()
            )));
        }
        Self::from_values(quad, parsed.z, parsed.time)
    }

    /// Restores a snapshot onto an existing quadrature, which must match it.
    pub fn from_snapshot_on(quad: Arc<BetaQuadrature>, text: &str) -> Result<Self> {
        let parsed = Snapshot::parse(text)?;
        if parsed.hurst != quad.hurst() || parsed.nodes != quad.nodes() || parsed.weights != quad.weights() {
            return Err(Error::QuadratureMismatch);
        }
        Self::from_values(quad, parsed.z, parsed.time)
    }
}

struct Snapshot {
    hurst: Hurst,
    time: f64,
    c_hat: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    z: Vec<f64>,
}

impl Snapshot {
    fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == SNAPSHOT_HEADER => {}
            Some(h) => return Err(Error::Snapshot(format!("unsupported header '{}'", h.trim()))),
            None => return Err(Error::Snapshot("empty snapshot".into())),
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| Error::Snapshot(format!("missing '{name}' line")))?;
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some(k), Some(v), None) if k == name => Ok(v.to_string()),
                _ => Err(Error::Snapshot(format!("expected '{name} <value>', got '{line}'"))),
            }
        };
        let num = |s: String, name: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Snapshot(format!("bad {name} value '{s}'")))
        };
        let hurst = Hurst::new(num(field("hurst")?, "hurst")?)?;
        let time = num(field("time")?, "time")?;
        let c_hat = num(field("c_hat")?, "c_hat")?;
        let n_str = field("nodes")?;
        let n: usize = n_str.parse().map_err(|_| Error::Snapshot(format!("bad node count '{n_str}'")))?;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Snapshot(format!("unparseable node line {}: '{line}'", i + 1)))?;
            if vals.len() != 3 {
                return Err(Error::Snapshot(format!("node line {} needs 3 fields: '{line}'", i + 1)));
            }
            nodes.push(vals[0]);
            weights.push(vals[1]);
            z.push(vals[2]);
        }
        if nodes.len() != n {
            return Err(Error::Snapshot(format!("header announces {n} nodes, found {}", nodes.len())));
        }
        Ok(Self { hurst, time, c_hat, nodes, weights, z })
    }
}

/// Stationary bank draw.
pub fn init_bank_stationary<R: NormalSource + ?Sized>(q: &Arc<BetaQuadrature>, rng: &mut R) -> Result<OuBank> {
    OuBank::stationary(Arc::clone(q), rng)
}

/// Advances `bank` by `dt` and returns the driver increments.
pub fn step_bank<R: NormalSource + ?Sized>(bank: &mut OuBank, dt: f64, rng: &mut R) -> Result<BankStep> {
    bank.step(dt, rng)
}

/// `W^H` increment between two banks on the same quadrature.
pub fn wh_from_bank(now: &OuBank, start: &OuBank) -> Result<f64> {
    if !now.quad.same_as(&start.quad) {
        return Err(Error::QuadratureMismatch);
    }
    Ok(now
        .quad
        .loadings()
        .iter()
        .zip(now.z.iter().zip(&start.z))
        .map(|(k, (a, b))| k * (a - b))
        .sum())
}
