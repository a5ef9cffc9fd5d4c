use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use roughskew::harness::{
    cmd_dynamic_consistency, cmd_price, cmd_simulate_fbm, cmd_skew_term_structure, cmd_validate, with_threads,
    ExperimentConfig, RunReport, ValidationLevel,
};

#[derive(Parser)]
#[command(name = "roughskew", version, about = "Short-maturity implied-volatility skew experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat `section.key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `mc.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results are identical for any count.
    #[arg(long, env = "ROUGHSKEW_THREADS")]
    threads: Option<usize>,
    /// Extra `key=value` overrides applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Skew over the maturity grid and its power-law fit.
    SkewTermStructure(Common),
    /// Invariant suites; exits nonzero on any failure.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "quick", value_parser = ["quick", "full"])]
        level: String,
        /// Flip the sign of the regular expansion coefficient to check that the suite notices.
        #[arg(long)]
        mutate_alpha_sign: bool,
    },
    /// Restart from a simulated Markov state and re-fit the term structure.
    DynamicConsistency {
        #[command(flatten)]
        common: Common,
        /// Overrides `restart.t`.
        #[arg(long)]
        t_restart: Option<f64>,
    },
    /// Dump driver paths (t, W, W_perp, WH) as CSV.
    SimulateFbm(Common),
    /// One Monte Carlo put price and its implied volatility.
    Price(Common),
}

fn load(common: &Common, extra: &[(&str, String)]) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_text(&text).with_context(|| format!("in {}", path.display()))?;
    }
    for kv in &common.overrides {
        let Some((k, v)) = kv.split_once('=') else {
            bail!("--set expects KEY=VALUE, got '{kv}'");
        };
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    for (k, v) in extra {
        cfg.set(k, v)?;
    }
    cfg.validate().context("invalid configuration")?;
    Ok(cfg)
}

#[derive(Clone, Copy)]
enum Job {
    Skew,
    Validate(ValidationLevel),
    Dynamic,
    Fbm,
    Price,
}

fn run_job(job: Job, cfg: &ExperimentConfig) -> roughskew::Result<RunReport> {
    match job {
        Job::Skew => cmd_skew_term_structure(cfg),
        Job::Validate(level) => cmd_validate(cfg, level),
        Job::Dynamic => cmd_dynamic_consistency(cfg),
        Job::Fbm => cmd_simulate_fbm(cfg),
        Job::Price => cmd_price(cfg),
    }
}

/// Runs the command, writes its output directory and returns whether every check passed.
fn execute(cli: Cli) -> Result<bool> {
    let (common, job, extra) = match cli.command {
        Command::SkewTermStructure(c) => (c, Job::Skew, vec![]),
        Command::Validate { common, level, mutate_alpha_sign } => {
            let extra = if mutate_alpha_sign { vec![("validate.mutate_alpha_sign", "true".to_string())] } else { vec![] };
            (common, Job::Validate(level.parse()?), extra)
        }
        Command::DynamicConsistency { common, t_restart } => {
            (common, Job::Dynamic, t_restart.map(|t| vec![("restart.t", t.to_string())]).unwrap_or_default())
        }
        Command::SimulateFbm(c) => (c, Job::Fbm, vec![]),
        Command::Price(c) => (c, Job::Price, vec![]),
    };
    let cfg = load(&common, &extra)?;
    let report = with_threads(common.threads, || run_job(job, &cfg))??;
    report.write_to(&cfg.out_dir).with_context(|| format!("writing {}", cfg.out_dir.display()))?;
    print!("{}", report.render());
    if let Some((_, quote)) = report.files.iter().find(|(n, _)| n == "quote.csv") {
        print!("{quote}");
    }
    println!("output: {}", cfg.out_dir.display());
    Ok(report.passed())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
