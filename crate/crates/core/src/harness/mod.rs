//! Experiment configuration, the command implementations behind the CLI,
//! run reports, and the validation suites.

mod commands;
mod config;
mod report;
pub mod suites;
mod validate;

pub use commands::{cmd_dynamic_consistency, cmd_price, cmd_simulate_fbm, cmd_skew_term_structure};
pub use config::{mix_seed, ExperimentConfig};
pub use report::{Check, RunReport};
pub use validate::{cmd_validate, ValidationLevel};

use crate::error::{Error, Result};

/// Runs `job` on a dedicated pool of `threads` workers, or on the global
/// pool when `threads` is `None`. Results do not depend on the worker count.
pub fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(0) => Err(Error::Config("thread count must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(job))
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}"))),
    }
}
