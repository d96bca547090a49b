use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use nmrqc::algebra::{phase_distance, CMatrix};
use nmrqc::config::{Config, ModeName};
use nmrqc::experiments::{run_batch, BatchReport, Cell, ExperimentKind, FunctionId, RunOptions};
use nmrqc::pulse::{Spin, SpinSystem};
use nmrqc::sequence::{builtin, builtin_target, compile_detailed, parse, Mode, Sequence, BUILTIN_NAMES};
use nmrqc::shaped::{calibrate_spectator, realize, PulseShape, ShapedPulseSpec, SoftPulse};

use crate::output::{matrix_table, write_atomic, write_json};
use crate::{CompileArgs, Common, ModeArg, Preset, PulseReportArgs, RunArgs};

/// Success, check or verdict failure, bad input, degraded signal.
pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_DEGRADED: u8 = 3;

/// Distance below which an ideal-mode check passes.
const IDEAL_CHECK_TOL: f64 = 1e-6;
/// Fidelity a shaped-mode check must reach.
const SHAPED_CHECK_FIDELITY: f64 = 0.98;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Runtime(_) => EXIT_CHECK,
        }
    }
}

fn simulation(e: nmrqc::Error) -> Failure {
    use nmrqc::Error::*;
    match e {
        Aliasing { .. } | InvalidAcquisition(_) | InvalidSystem(_) | InvalidPulse(_) | ZeroCoupling
        | UnknownBuiltin(_) | InvalidSequence(_) | NotUnitary(_) | DimensionMismatch { .. } => {
            Failure::Input(e.to_string())
        }
        _ => Failure::Runtime(e.to_string()),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn load_config(common: &Common) -> Result<Config, Failure> {
    let base = match common.preset {
        Some(Preset::Paper) | None => Config::cytosine(),
    };
    let mut config = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            base.merge(&text)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        }
        None => base,
    };
    if !config.system.is_weakly_coupled() {
        eprintln!("warning: offsets closer than 10 J; the weak-coupling Hamiltonian may be inaccurate");
    }
    if let Some(mode) = common.mode {
        config.mode = match mode {
            ModeArg::Ideal => ModeName::Ideal,
            ModeArg::Shaped => ModeName::Shaped,
        };
    }
    Ok(config)
}

fn describe(config: &Config) -> String {
    let s = &config.system;
    format!(
        "nu_I = {} Hz, nu_S = {} Hz, J = {} Hz, T2* = {} s, mode = {}",
        s.nu_i,
        s.nu_s,
        s.j,
        s.t2_star,
        config.sequence_mode().name()
    )
}

fn selection<T: Copy>(value: &str, all: &[T], parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, Failure> {
    if value == "all" {
        Ok(all.to_vec())
    } else {
        parse(value).map(|v| vec![v]).map_err(Failure::Input)
    }
}

#[derive(Serialize)]
struct BatchFile<'a> {
    config: &'a Config,
    #[serde(flatten)]
    batch: &'a BatchReport,
}

fn write_batch(dir: &Path, config: &Config, report: &BatchReport) -> Result<(), Failure> {
    for cell in &report.cells {
        let stem = format!("{}_{}", cell.result.kind, cell.result.function);
        let json = dir.join(format!("{stem}.json"));
        write_json(&json, cell).map_err(|e| io_failure(&json, e))?;
        let csv = dir.join(format!("{stem}_spectrum.csv"));
        write_atomic(&csv, |w| cell.spectrum.write_csv(w)).map_err(|e| io_failure(&csv, e))?;
    }
    let path = dir.join("batch.json");
    write_json(&path, &BatchFile { config, batch: report }).map_err(|e| io_failure(&path, e))
}

fn verdict_table(report: &BatchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<11} {:<8} {:>8} {:>8} {:>5} {:>5} {:<9} {:<8} {}",
        "kind", "function", "<Ix>", "<Sx>", "bit_I", "bit_S", "verdict", "spectral", "status"
    );
    for cell in &report.cells {
        let r = &cell.result;
        let spectral = cell
            .spectral
            .map_or("none".to_string(), |s| format!("{} {}", s.bit_i, s.bit_s));
        let status = if !cell.confident() {
            "DEGRADED"
        } else if !cell.correct() {
            "WRONG"
        } else {
            "ok"
        };
        let _ = writeln!(
            out,
            "{:<11} {:<8} {:>+8.4} {:>+8.4} {:>5} {:>5} {:<9} {:<8} {}",
            r.kind.name(),
            r.function.name(),
            r.ix,
            r.sx,
            r.bit_i,
            r.bit_s,
            r.verdict.name(),
            spectral,
            status
        );
    }
    out
}

pub fn run(args: RunArgs) -> Result<u8, Failure> {
    let config = load_config(&args.common)?;
    let kinds = selection(&args.kind, &ExperimentKind::ALL, |s| s.parse())?;
    let functions = selection(&args.function, &FunctionId::ALL, |s| s.parse())?;
    let cells: Vec<Cell> = kinds
        .iter()
        .flat_map(|&kind| functions.iter().map(move |&function| Cell { kind, function }))
        .collect();
    let acq = config.acquisition().map_err(simulation)?;
    let opts = RunOptions {
        relaxation: config.relaxation,
        explicit_readout: args.explicit_readout,
    };
    let mode = config.sequence_mode();
    let report = run_batch(&cells, &config.system, &mode, &acq, &opts).map_err(simulation)?;

    println!("{}", describe(&config));
    println!(
        "acquisition: {} points, dwell {} s, receiver phase {:.4} deg",
        acq.points,
        acq.dwell,
        // round first so a tiny negative angle does not print as -0.0000
        (report.phase0.to_degrees() * 1e4).round() / 1e4 + 0.0
    );
    if let Some(worst) = report.pulses.iter().map(|p| p.report.fidelity).reduce(f64::min) {
        println!("selective pulses: {}, lowest fidelity {worst:.5}", report.pulses.len());
    }
    print!("{}", verdict_table(&report));

    if let Some(dir) = &args.out {
        write_batch(dir, &config, &report)?;
        println!("wrote {} cells to {}", report.cells.len(), dir.display());
    }

    let wrong = report.cells.iter().any(|c| c.confident() && !c.correct());
    let degraded = report.cells.iter().any(|c| !c.confident());
    Ok(if wrong {
        EXIT_CHECK
    } else if degraded {
        EXIT_DEGRADED
    } else {
        EXIT_OK
    })
}

fn load_sequence(source: &str) -> Result<Sequence, Failure> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return builtin(name).map_err(|e| {
            Failure::Input(format!("{e} (known: {})", BUILTIN_NAMES.join(", ")))
        });
    }
    let text = fs::read_to_string(source).map_err(|e| Failure::Input(format!("{source}: {e}")))?;
    parse(&text).map_err(|e| Failure::Input(format!("{source}: {e}")))
}

fn parse_entry(token: &str) -> Option<C64> {
    match token.split_once(',') {
        Some((re, im)) => Some(C64::new(re.trim().parse().ok()?, im.trim().parse().ok()?)),
        None => Some(C64::new(token.parse().ok()?, 0.0)),
    }
}

/// Four rows of four entries, each `re` or `re,im`; or the JSON
/// `[[[re, im], ...], ...]` form the reports use.
fn parse_matrix(text: &str) -> Result<CMatrix, String> {
    let entries: Vec<C64> = if text.trim_start().starts_with('[') {
        let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
            return Err("matrix must be 4x4".into());
        }
        rows.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect()
    } else {
        let mut entries = Vec::with_capacity(16);
        let mut rows = 0;
        for (idx, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let row: Vec<&str> = content.split_whitespace().collect();
            if row.len() != 4 {
                return Err(format!("line {}: expected 4 entries, found {}", idx + 1, row.len()));
            }
            for token in row {
                entries.push(
                    parse_entry(token)
                        .ok_or_else(|| format!("line {}: bad entry `{token}`", idx + 1))?,
                );
            }
            rows += 1;
        }
        if rows != 4 {
            return Err(format!("expected 4 rows, found {rows}"));
        }
        entries
    };
    CMatrix::from_rows(&entries).map_err(|e| e.to_string())
}

fn load_target(check: &str) -> Result<CMatrix, Failure> {
    if check == "identity" {
        return Ok(CMatrix::identity(4));
    }
    if BUILTIN_NAMES.contains(&check) {
        return builtin_target(check).map_err(simulation);
    }
    let text = fs::read_to_string(check).map_err(|e| {
        Failure::Input(format!(
            "{check}: {e} (expected `identity`, a builtin name or a matrix file)"
        ))
    })?;
    parse_matrix(&text).map_err(|e| Failure::Input(format!("{check}: {e}")))
}

pub fn compile(args: CompileArgs) -> Result<u8, Failure> {
    let config = load_config(&args.common)?;
    let seq = load_sequence(&args.sequence)?;
    let target = args.check.as_deref().map(load_target).transpose()?;
    let mode = config.sequence_mode();
    let compiled = compile_detailed(&seq, &config.system, &mode).map_err(simulation)?;

    println!("{}", describe(&config));
    println!("sequence `{}`: {} events", seq.name, seq.len());
    if !seq.is_empty() {
        println!("  {}", seq.dash_notation());
    }
    for p in compiled.soft_pulses() {
        println!(
            "  soft {} {} deg @ {} deg: {:.4} ms, fidelity {:.5}, spectator {:+.3e} deg",
            p.spec.target,
            p.spec.flip,
            p.spec.phase,
            p.spec.duration * 1e3,
            p.report.fidelity,
            p.report.spectator_z_residual
        );
    }
    println!("propagator:");
    print!("{}", matrix_table(&compiled.propagator));

    let Some(target) = target else {
        return Ok(EXIT_OK);
    };
    let fidelity = (target.adjoint() * compiled.propagator).trace().norm() / 4.0;
    let pass = match phase_distance(&compiled.propagator, &target) {
        Ok(pd) => {
            println!(
                "distance {:.3e}, global phase {:+.6} rad ({:+.3} deg), fidelity {:.6}",
                pd.distance,
                pd.phase,
                pd.phase.to_degrees(),
                fidelity
            );
            match mode {
                Mode::Ideal => pd.distance < IDEAL_CHECK_TOL,
                Mode::Shaped(_) => fidelity >= SHAPED_CHECK_FIDELITY,
            }
        }
        Err(nmrqc::Error::OrthogonalPropagators) => {
            println!("propagators are orthogonal: no global phase aligns them, fidelity 0");
            false
        }
        Err(e) => return Err(simulation(e)),
    };
    println!("check: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { EXIT_OK } else { EXIT_CHECK })
}

#[derive(Serialize)]
struct PulseRow {
    shape: &'static str,
    requested_duration: f64,
    pulse: SoftPulse,
}

#[derive(Serialize)]
struct PulseReportFile<'a> {
    system: &'a SpinSystem,
    target: Spin,
    flip: f64,
    phase: f64,
    rows: Vec<PulseRow>,
}

pub fn pulse_report(args: PulseReportArgs) -> Result<u8, Failure> {
    let config = load_config(&args.common)?;
    let spin: Spin = args.spin.parse().map_err(Failure::Input)?;
    if !args.flip.is_finite() || !args.phase.is_finite() {
        return Err(Failure::Input("flip and phase must be finite".into()));
    }
    let sys = &config.system;
    let gaussian = ShapedPulseSpec::gaussian(spin, args.flip, args.phase, sys, &config.pulse);
    let shapes = [gaussian, gaussian.with_shape(PulseShape::Rectangular)];

    println!("{}", describe(&config));
    println!(
        "{:<12} {:>14} {:>15} {:>10} {:>15}",
        "shape", "requested_ms", "calibrated_ms", "fidelity", "spectator_deg"
    );
    let mut rows = Vec::new();
    for spec in shapes {
        let pulse = calibrate_spectator(sys, &spec)
            .and_then(|s| realize(sys, &s))
            .map_err(|e| Failure::Runtime(format!("{} pulse: {e}", spec.shape.name())))?;
        println!(
            "{:<12} {:>14.4} {:>15.4} {:>10.5} {:>+15.3e}",
            spec.shape.name(),
            spec.duration * 1e3,
            pulse.spec.duration * 1e3,
            pulse.report.fidelity,
            pulse.report.spectator_z_residual
        );
        rows.push(PulseRow {
            shape: spec.shape.name(),
            requested_duration: spec.duration,
            pulse,
        });
    }
    if let Some(dir) = &args.out {
        let path = dir.join(format!("pulse_report_{}_{}.json", spin, args.flip));
        let file = PulseReportFile {
            system: sys,
            target: spin,
            flip: args.flip,
            phase: args.phase,
            rows,
        };
        write_json(&path, &file).map_err(|e| io_failure(&path, e))?;
        println!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}
