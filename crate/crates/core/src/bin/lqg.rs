use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lqg::experiment::{parse_manifold, run, ExperimentConfig, ExperimentKind, RunMetadata};
use lqg::Result;

#[derive(Parser)]
#[command(name = "lqg", version, about = "Run spectral LQG experiments")]
struct Cli {
    /// Print the experiment catalog and exit.
    #[arg(long)]
    list: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    KernelResidual(Opts),
    FieldCovariance(Opts),
    GmcMass(Opts),
    Martingale(Opts),
    ConformalMeasure(Opts),
    BallScaling(Opts),
    LbmRevuz(Opts),
    RandomOperator(Opts),
    Polyakov(Opts),
    Anomaly(Opts),
}

/// Flags override values from `--config`.
#[derive(Args)]
struct Opts {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; the summary goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// s2, s4, s6, t2, t4 or s2xs2.
    #[arg(long)]
    manifold: Option<String>,
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, short = 'n')]
    samples: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
}

impl Command {
    fn split(&self) -> (ExperimentKind, &Opts) {
        use Command::*;
        match self {
            KernelResidual(o) => (ExperimentKind::KernelResidual, o),
            FieldCovariance(o) => (ExperimentKind::FieldCovariance, o),
            GmcMass(o) => (ExperimentKind::GmcMass, o),
            Martingale(o) => (ExperimentKind::Martingale, o),
            ConformalMeasure(o) => (ExperimentKind::ConformalMeasure, o),
            BallScaling(o) => (ExperimentKind::BallScaling, o),
            LbmRevuz(o) => (ExperimentKind::LbmRevuz, o),
            RandomOperator(o) => (ExperimentKind::RandomOperator, o),
            Polyakov(o) => (ExperimentKind::Polyakov, o),
            Anomaly(o) => (ExperimentKind::Anomaly, o),
        }
    }
}

fn build_config(kind: ExperimentKind, o: &Opts) -> Result<ExperimentConfig> {
    let mut c = match &o.config {
        Some(p) => {
            let c = ExperimentConfig::load(p)?;
            if c.kind != kind {
                return Err(lqg::LqgError::Config(format!(
                    "config is for `{}`, subcommand is `{kind}`",
                    c.kind
                )));
            }
            c
        }
        None => ExperimentConfig::new(kind),
    };
    if let Some(m) = &o.manifold {
        c.manifold = parse_manifold(m)?;
    }
    c.seed = o.seed.unwrap_or(c.seed);
    c.threads = o.threads.or(c.threads);
    c.out = o.out.clone().or(c.out);
    c.cutoff = o.cutoff.or(c.cutoff);
    c.ell = o.ell.or(c.ell);
    c.gamma = o.gamma.or(c.gamma);
    c.samples = o.samples.or(c.samples);
    c.resolution = o.resolution.or(c.resolution);
    Ok(c)
}

fn execute(kind: ExperimentKind, o: &Opts) -> Result<bool> {
    let config = build_config(kind, o)?;
    let start = Instant::now();
    let result = run(&config)?;
    let meta = RunMetadata {
        wall_time_s: start.elapsed().as_secs_f64(),
        threads: config.threads.unwrap_or_else(rayon::current_num_threads),
    };
    match &config.out {
        Some(dir) => result.write_to(dir, &meta)?,
        None => print!("{}", result.summary_json()?),
    }
    for c in &result.checks {
        eprintln!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    Ok(result.pass)
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for failed verdicts
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.list {
        for k in ExperimentKind::ALL {
            println!("{:<18} {}", k.name(), k.description());
        }
        return ExitCode::SUCCESS;
    }
    let Some(cmd) = cli.command else {
        eprintln!("no experiment given; try --list");
        return ExitCode::from(1);
    };
    let (kind, opts) = cmd.split();
    match execute(kind, opts) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
