use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cutlab::estimators::RunOptions;
use fpp_cutlab::checks::{invariant_suite, oracle_suite, CheckOutcome};
use fpp_cutlab::output::write_outputs;
use fpp_cutlab::{exit, run_experiment, verify_config, CliError, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "fpp-cutlab", version, about = "Seeded max-flow / min-cut experiments on random lattice capacities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; defaults to the config's, then the working directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write rows as JSON lines.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone)]
struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in the config.
    Run(RunArgs),
    /// Validate the config and print discretization sizes without sampling.
    Verify(RunArgs),
    /// Compare max-flow values with exhaustive min-cut enumeration.
    OracleCheck(CheckArgs),
    /// Run the structural property suite.
    Invariants(CheckArgs),
    DomainFlow(RunArgs),
    CylinderTau(RunArgs),
    FlowConstant(RunArgs),
    RateCurve(RunArgs),
    CutGeometry(RunArgs),
    BallEvents(RunArgs),
    TriangleCheck(RunArgs),
    MinimalityPanel(RunArgs),
}

fn load(args: &RunArgs, kind: Option<ExperimentKind>) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(k) = kind {
        match config.experiment {
            Some(existing) if existing != k => {
                return Err(CliError::Config(format!(
                    "config is a {} experiment, not {}",
                    existing.as_str(),
                    k.as_str()
                )))
            }
            _ => config.experiment = Some(k),
        }
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if args.threads.is_some() {
        config.threads = args.threads;
    }
    Ok(config)
}

fn run(args: &RunArgs, kind: Option<ExperimentKind>) -> Result<(), CliError> {
    let config = load(args, kind)?;
    let out = run_experiment(&config)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let dir = args
        .out
        .clone()
        .or_else(|| config.output.as_ref().and_then(|o| o.dir.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    for path in write_outputs(&dir, &config, &out, args.json)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn report(outcomes: &[CheckOutcome]) -> Result<(), CliError> {
    for o in outcomes {
        println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join(", ")))
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    use ExperimentKind as K;
    match command {
        Command::Run(a) => run(&a, None),
        Command::Verify(a) => {
            for line in verify_config(&load(&a, None)?)? {
                println!("{line}");
            }
            Ok(())
        }
        Command::OracleCheck(a) => report(&oracle_suite(a.count, a.seed)?),
        Command::Invariants(a) => {
            let options = RunOptions { threads: a.threads, ..Default::default() };
            report(&invariant_suite(a.count, a.seed, &options)?)
        }
        Command::DomainFlow(a) => run(&a, Some(K::DomainFlow)),
        Command::CylinderTau(a) => run(&a, Some(K::CylinderTau)),
        Command::FlowConstant(a) => run(&a, Some(K::FlowConstant)),
        Command::RateCurve(a) => run(&a, Some(K::RateCurve)),
        Command::CutGeometry(a) => run(&a, Some(K::CutGeometry)),
        Command::BallEvents(a) => run(&a, Some(K::BallEvents)),
        Command::TriangleCheck(a) => run(&a, Some(K::TriangleCheck)),
        Command::MinimalityPanel(a) => run(&a, Some(K::MinimalityPanel)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
