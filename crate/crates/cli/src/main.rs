use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

#[derive(Parser)]
#[command(name = "nmrqc", version, about = "Two-spin NMR quantum computer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run classical and Deutsch experiments and classify their spectra.
    Run(RunArgs),
    /// Compile a pulse sequence and optionally check it against a target.
    Compile(CompileArgs),
    /// Calibrate a selective pulse and report its quality.
    PulseReport(PulseReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Preset {
    /// J = 7.2 Hz, 763 Hz apart, transmitter midway.
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Ideal,
    Shaped,
}

#[derive(Args)]
pub struct Common {
    /// Flat key = value configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Start from a named parameter set (the config file, if any, overrides it).
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Overrides the config's mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args)]
pub struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// classical0, classical1, deutsch or all.
    #[arg(long, default_value = "all")]
    kind: String,
    /// f00, f01, f10, f11 or all.
    #[arg(long, default_value = "all")]
    function: String,
    /// Directory for per-cell JSON results and spectrum CSVs.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Apply the cancelling readout pulse pairs in Deutsch runs instead of omitting them.
    #[arg(long)]
    explicit_readout: bool,
}

#[derive(Args)]
pub struct CompileArgs {
    #[command(flatten)]
    common: Common,
    /// Sequence file, or `builtin:NAME`.
    sequence: String,
    /// Builtin name, `identity`, or a 4x4 matrix file.
    #[arg(long, value_name = "TARGET")]
    check: Option<String>,
}

#[derive(Args)]
pub struct PulseReportArgs {
    #[command(flatten)]
    common: Common,
    /// Spin the pulse should rotate (I or S).
    #[arg(long, default_value = "I")]
    spin: String,
    /// Flip angle in degrees.
    #[arg(long, default_value_t = 90.0)]
    flip: f64,
    /// Pulse phase in degrees (0 = x, 90 = y).
    #[arg(long, default_value_t = 90.0)]
    phase: f64,
    /// Directory for the JSON report.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(args),
        Command::Compile(args) => commands::compile(args),
        Command::PulseReport(args) => commands::pulse_report(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
