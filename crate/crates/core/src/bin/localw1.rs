use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use localw1::bell::{write_bell_records, BellSampler};
use localw1::experiments::{self, ExperimentConfig, ExperimentKind, Overrides};
use localw1::shadows::{sample_shadows, write_shadow_records};
use localw1::states::{seeded_rng, StateSpec};

/// Local W1 distance campaigns and tomography simulators.
#[derive(Parser)]
#[command(name = "localw1", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Truncated classical-shadow estimate vs accuracy target or shadow count.
    ShadowConverge(RunArgs),
    /// Two-copy Bell-measurement estimate vs accuracy target.
    BellConverge(RunArgs),
    /// Evaluate the metric and its bounds for one pair of states.
    W1locEval(RunArgs),
    /// Property suite over random instances.
    Props(RunArgs),
    /// Gibbs-state relative-entropy identity and its bound.
    GibbsCheck(RunArgs),
    /// Run whatever experiment the config (or `--experiment`) names.
    Run(RunArgs),
    /// Write Pauli-measurement shadow records for a state.
    SampleShadows(SampleArgs),
    /// Write Bell-measurement outcome records for a state.
    SampleBell(SampleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<ExperimentKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    /// Comma-separated accuracy targets.
    #[arg(long, value_delimiter = ',')]
    w: Option<Vec<f64>>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    /// State spec such as `ghz+:3` or `haar:4:7`.
    #[arg(long)]
    state: StateSpec,
    /// Number of records.
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sink(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run_campaign(kind: Option<ExperimentKind>, args: RunArgs) -> localw1::Result<bool> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let experiment = args.experiment.or(kind).ok_or_else(|| {
                localw1::Error::InvalidParameter("`run` needs --config or --experiment".into())
            })?;
            let n = args.n.ok_or_else(|| localw1::Error::InvalidParameter("--n is required without --config".into()))?;
            ExperimentConfig::new(experiment, n)
        }
    };
    cfg.apply(&Overrides {
        experiment: kind.or(args.experiment),
        n: args.n,
        c: args.c,
        w: args.w,
        delta: args.delta,
        trials: args.trials,
        seed: args.seed,
        out: args.out,
    });
    let output = experiments::run(&cfg)?;
    let mut out = sink(cfg.out.as_ref())?;
    output.write_csv(&mut out)?;
    out.flush()?;
    for check in &output.checks {
        eprintln!("{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail);
    }
    Ok(output.passed())
}

fn sample(args: SampleArgs, bell: bool) -> localw1::Result<bool> {
    let rho = args.state.build()?;
    let mut rng = seeded_rng(args.seed);
    let mut out = sink(args.out.as_ref())?;
    if bell {
        write_bell_records(&mut out, &BellSampler::new(&rho)?.sample_many(args.count, &mut rng))?;
    } else {
        write_shadow_records(&mut out, &sample_shadows(&rho, args.count, &mut rng))?;
    }
    out.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::ShadowConverge(a) => run_campaign(Some(ExperimentKind::ShadowConverge), a),
        Command::BellConverge(a) => run_campaign(Some(ExperimentKind::BellConverge), a),
        Command::W1locEval(a) => run_campaign(Some(ExperimentKind::W1locEval), a),
        Command::Props(a) => run_campaign(Some(ExperimentKind::Props), a),
        Command::GibbsCheck(a) => run_campaign(Some(ExperimentKind::GibbsCheck), a),
        Command::Run(a) => run_campaign(None, a),
        Command::SampleShadows(a) => sample(a, false),
        Command::SampleBell(a) => sample(a, true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
