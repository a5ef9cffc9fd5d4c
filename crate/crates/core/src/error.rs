use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("matrix is not positive definite: pivot {index} is {pivot:e} (threshold {threshold:e})")]
    NotPositiveDefinite {
        index: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("degenerate regression: {0}")]
    DegenerateFit(String),

    #[error("put price {price:e} is at or below the intrinsic value {bound:e}")]
    BelowIntrinsic { price: f64, bound: f64 },

    #[error("put price {price:e} is at or above the upper bound {bound:e}")]
    AboveUpperBound { price: f64, bound: f64 },

    #[error(
        "implied volatility did not converge after {iterations} iterations \
         (bracket [{lo:e}, {hi:e}], last residual {residual:e})"
    )]
    NoConvergence {
        iterations: usize,
        lo: f64,
        hi: f64,
        residual: f64,
    },

    #[error("OU banks were built on different quadratures")]
    QuadratureMismatch,

    #[error("OU-bank Gram factorization failed ({0}); thin the β-ladder (fewer nodes or a narrower range)")]
    GramFactorization(String),

    #[error(
        "β-ladder [{have_min:e}, {have_max:e}] is too narrow for this maturity; \
         need at least [{need_min:e}, {need_max:e}]"
    )]
    NodeRange {
        have_min: f64,
        have_max: f64,
        need_min: f64,
        need_max: f64,
    },

    #[error("exact fBm sampler accepts at most {max} grid points, got {len}; use the OU engine")]
    GridTooLong { len: usize, max: usize },

    #[error("unknown model '{name}'; available: {available}")]
    UnknownModel { name: String, available: String },

    #[error("rough model state carries no OU bank")]
    MissingBank,

    #[error("simulation aborted at t = {t}: {reason} (s = {s}, y = {y:?})")]
    Simulation {
        t: f64,
        s: f64,
        y: Vec<f64>,
        reason: String,
    },

    #[error("sample too small: {0}")]
    SampleSize(String),

    #[error("power-law fit: {0}")]
    PowerLaw(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
