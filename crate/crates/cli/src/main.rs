use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tripod_cli::{run, run_to_file, CliError, SweepKind, SweepSpec};

#[derive(Parser)]
#[command(name = "tripod-sta", version, about = "Tripod geometric-gate sweeps (units: Ω0/2π = 1)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parameter sweeps.
    #[command(subcommand)]
    Sweep(SweepCommand),
    /// Minimum-error gate time over a grid of dephasing rates.
    Contour(Common),
    /// Control envelopes.
    #[command(subcommand)]
    Pulses(PulsesCommand),
    /// Perturbative oracles against the numerics.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand)]
enum SweepCommand {
    /// Gate error vs gate time.
    GateError(Common),
    /// Map error under dephasing and amplitude uncertainty vs gate time.
    NoiseMap(Common),
}

#[derive(Subcommand)]
enum PulsesCommand {
    Export(Common),
}

#[derive(Subcommand)]
enum OracleCommand {
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// JSON sweep description.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV (defaults to the config's `out`, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "TRIPOD_STA_JOBS")]
    jobs: Option<usize>,
    /// Integrator relative tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

fn execute(kind: SweepKind, args: Common) -> Result<(), CliError> {
    let mut spec = SweepSpec::from_path(&args.config)?;
    if spec.kind != kind {
        return Err(CliError::Config(format!(
            "{}: kind is {}, but this subcommand runs {}",
            args.config.display(),
            spec.kind.as_str(),
            kind.as_str()
        )));
    }
    if let Some(tol) = args.tol {
        spec = spec.with_tolerance(tol);
        spec.validate()?;
    }
    let jobs = args.jobs.or(spec.jobs).unwrap_or(1);
    match args.out.or_else(|| spec.out.clone()) {
        Some(out) => run_to_file(&spec, jobs, &out),
        None => {
            let (csv, _) = run(&spec, jobs)?;
            std::io::stdout()
                .write_all(&csv)
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Sweep(SweepCommand::GateError(a)) => (SweepKind::GateTimeError, a),
        Command::Sweep(SweepCommand::NoiseMap(a)) => (SweepKind::NoiseMap, a),
        Command::Contour(a) => (SweepKind::Contour, a),
        Command::Pulses(PulsesCommand::Export(a)) => (SweepKind::PulseExport, a),
        Command::Oracle(OracleCommand::Compare(a)) => (SweepKind::OracleCompare, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
