use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fraclap_cli::{parse_config, run, write_report, ExperimentKind, Format};

#[derive(Parser)]
#[command(
    name = "fraclap",
    version,
    about = "Navier vs Dirichlet fractional Laplacian experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of both operators and their margins
    Spectra(RunArgs),
    /// Entrywise sign of the difference operator on nonnegative inputs
    Positivity(RunArgs),
    /// Domain-monotonicity chain on random nested masks
    Monotonicity(RunArgs),
    /// Extension energy identities and ordering
    Extension(RunArgs),
    /// Sobolev quotients against the closed-form constant
    Sobolev(RunArgs),
    /// Navier/Dirichlet form ratios over dilations
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (TOML with dotted keys)
    #[arg(long)]
    config: PathBuf,
    /// Output directory for <experiment>.csv and <experiment>.json
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_ASSERTION: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::default().default_filter_or("warn,fraclap::domain=error"),
    )
    .init();
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Spectra(a) => (ExperimentKind::Spectra, a),
        Command::Positivity(a) => (ExperimentKind::Positivity, a),
        Command::Monotonicity(a) => (ExperimentKind::Monotonicity, a),
        Command::Extension(a) => (ExperimentKind::Extension, a),
        Command::Sobolev(a) => (ExperimentKind::Sobolev, a),
        Command::Sweep(a) => (ExperimentKind::Sweep, a),
    };

    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if config.experiment != kind {
        eprintln!(
            "error: configuration describes a `{}` experiment but `{kind}` was requested",
            config.experiment
        );
        return ExitCode::from(EXIT_USAGE);
    }

    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let dir = args
        .out
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    for format in [Format::Csv, Format::Json] {
        match write_report(&report, &dir, format) {
            Ok(path) => println!("wrote {}", path.display()),
            Err(e) => {
                eprintln!("error: cannot write report into {}: {e}", dir.display());
                return ExitCode::from(EXIT_USAGE);
            }
        }
    }

    for a in &report.assertions {
        let status = if a.passed { "pass" } else { "FAIL" };
        println!(
            "{status}  {}: {:e} (threshold {:e}, margin {:e})",
            a.name, a.value, a.threshold, a.margin
        );
    }
    println!("{} in {:.2?}", kind, report.wall_time);
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ASSERTION)
    }
}
