use clap::{Args, Parser, Subcommand};
use growthlab::harness::{replay, run_command, CommandOutcome, ExperimentConfig, Overrides, Verb};
use growthlab::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Lattice growth experiments: IDLA and divisible sandpile ensembles checked
/// against their limiting fluctuation laws.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on a
/// configuration or runtime error.
#[derive(Parser)]
#[command(name = "growthlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// IDLA and sandpile runs per m: snapshots and fluctuation reports.
    Simulate(Common),
    /// Empirical variance of (E, u) against the fixed-time oracle.
    VerifyVariance(Common),
    /// Empirical variance of (L, u) against the lateness oracle.
    VerifyLateness(Common),
    /// Max fluctuation per m and its log-log slope (needs three m values).
    ScalingStudy(Common),
    /// Point-correlation function on a polar grid around a fixed q.
    CorrelationMap(Common),
    /// Smash sum of two overlapping squares.
    SmashDemo(Common),
    /// Re-run a recorded manifest into a new directory.
    Replay {
        /// manifest.json or the run directory holding it.
        manifest: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment description; defaults apply when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// Number of seeded runs.
    #[arg(long, short = 'n')]
    runs: Option<usize>,
    /// Lattice resolution; repeat for several.
    #[arg(long, short)]
    m: Vec<u32>,
    /// Rescaled time.
    #[arg(long, short)]
    s: Option<f64>,
    /// Root directory for run directories.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, short)]
    workers: Option<usize>,
    /// Also write SVG renderings.
    #[arg(long)]
    svg: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::from_toml("")?,
        };
        cfg.apply(&Overrides {
            base_seed: self.base_seed,
            seeds: self.runs,
            resolution: (!self.m.is_empty()).then(|| self.m.clone()),
            s: self.s,
            output: self.output.clone(),
            workers: self.workers,
        });
        cfg.output.svg |= self.svg;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<CommandOutcome, Error> {
    let (verb, common) = match cli.command {
        Command::Replay { manifest, output } => return replay(&manifest, output.as_deref()),
        Command::Simulate(c) => (Verb::Simulate, c),
        Command::VerifyVariance(c) => (Verb::VerifyVariance, c),
        Command::VerifyLateness(c) => (Verb::VerifyLateness, c),
        Command::ScalingStudy(c) => (Verb::ScalingStudy, c),
        Command::CorrelationMap(c) => (Verb::CorrelationMap, c),
        Command::SmashDemo(c) => (Verb::SmashDemo, c),
    };
    run_command(verb, &common.config()?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            for l in &out.lines {
                println!("{l}");
            }
            println!("output: {}", out.dir.display());
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
