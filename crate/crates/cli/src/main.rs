use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;

use sfbm_cli::config::key_reference;
use sfbm_cli::output::write_outputs;
use sfbm_cli::{run_experiment, CliError, Document, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "sfbm",
    version,
    about = "Singular fBm-driven equations: simulation and verification experiments"
)]
#[command(after_long_help = key_reference())]
struct Cli {
    #[command(subcommand)]
    experiment: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sample fBm and check its covariance and the two samplers against each other.
    FbmSample,
    /// Solve the equation: positivity, closed form, step halving, comparison.
    Simulate,
    /// Audit the a-priori sup-norm bound on solution paths.
    VerifyBound,
    /// Negative moments of the solution with drift K/x.
    NegMoments,
    /// Self-similarity of solutions under time scaling.
    Scaling,
    /// Malliavin derivative against finite differences.
    Malliavin,
    /// Square-root equation through the quadratic transform.
    Cir,
    /// Stability of empirical sup-norm moments.
    Moments,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::FbmSample => "fbm-sample",
            Self::Simulate => "simulate",
            Self::VerifyBound => "verify-bound",
            Self::NegMoments => "neg-moments",
            Self::Scaling => "scaling",
            Self::Malliavin => "malliavin",
            Self::Cir => "cir",
            Self::Moments => "moments",
        }
    }
}

#[derive(Args)]
struct Common {
    /// Configuration document.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Base seed; overrides the document and the SEED environment variable.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override any key, e.g. `--set fbm.hurst=0.6`. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, global = true)]
    output_dir: Option<String>,
    #[arg(long, global = true)]
    n_paths: Option<String>,
    #[arg(long, global = true)]
    hurst: Option<String>,
    #[arg(long, global = true)]
    horizon: Option<String>,
    #[arg(long, global = true)]
    n_steps: Option<String>,
    /// circulant | cholesky
    #[arg(long, global = true)]
    method: Option<String>,
    /// reciprocal | power | bessel | zero
    #[arg(long, global = true)]
    drift: Option<String>,
    #[arg(long, global = true)]
    x0: Option<String>,
    #[arg(long, global = true)]
    beta: Option<String>,
    #[arg(long, global = true)]
    gamma: Option<String>,
    /// none | wide | per_path
    #[arg(long, global = true)]
    csv: Option<String>,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let c = &cli.common;
    let mut doc = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            Document::parse(&text)?
        }
        None => Document::default(),
    };
    for item in &c.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{item}`")))?;
        doc.set(k.trim(), v.trim())?;
    }
    let mirrors = [
        ("run.output_dir", &c.output_dir),
        ("run.n_paths", &c.n_paths),
        ("run.csv", &c.csv),
        ("fbm.hurst", &c.hurst),
        ("fbm.horizon", &c.horizon),
        ("fbm.n_steps", &c.n_steps),
        ("fbm.method", &c.method),
        ("drift.family", &c.drift),
        ("drift.x0", &c.x0),
        ("bound.beta", &c.beta),
        ("bound.gamma", &c.gamma),
    ];
    for (key, value) in mirrors {
        if let Some(v) = value {
            doc.set(key, v.as_str())?;
        }
    }
    if let Some(seed) = c.seed {
        doc.set("run.seed", seed.to_string())?;
    } else if let Ok(seed) = std::env::var("SEED") {
        doc.set("run.seed", seed)?;
    }
    doc.set("run.experiment", cli.experiment.name())?;
    ExperimentConfig::from_document(&doc)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let config = resolve(cli)?;
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    info!("running {} with seed {}", config.experiment, config.seed);
    let start = Instant::now();
    let mut output = run_experiment(&config)?;
    output.report.wall_clock_s = Some(start.elapsed().as_secs_f64());
    write_outputs(&config.output_dir, &mut output, config.csv)?;
    println!("{}", output.report.summary_line());
    Ok(output.report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
