use rayon::prelude::*;
use serde::Serialize;

use super::readout::{
    calibrate_phase, classify, spectrum, synthesize_fid, Acquisition, ReferenceLevel,
    SpectralReadout, Spectrum,
};
use super::{run_with_oracle, ExperimentKind, ExperimentResult, FunctionId, Oracle, RunOptions};
use crate::error::{Error, Result};
use crate::pulse::SpinSystem;
use crate::sequence::Mode;
use crate::shaped::SoftPulse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cell {
    pub kind: ExperimentKind,
    pub function: FunctionId,
}

impl Cell {
    /// All twelve (kind, function) pairs, kind-major.
    pub fn all() -> Vec<Cell> {
        ExperimentKind::ALL
            .into_iter()
            .flat_map(|kind| FunctionId::ALL.into_iter().map(move |function| Cell { kind, function }))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    #[serde(flatten)]
    pub result: ExperimentResult,
    /// `None` when neither multiplet carries signal.
    pub spectral: Option<SpectralReadout>,
    #[serde(skip)]
    pub spectrum: Spectrum,
}

impl CellReport {
    pub fn confident(&self) -> bool {
        !self.result.degraded && self.spectral.is_some_and(|s| !s.degraded)
    }

    /// Both readouts agree with each other and with the function's truth table.
    pub fn correct(&self) -> bool {
        self.result.is_correct()
            && self
                .spectral
                .is_some_and(|s| (s.bit_i, s.bit_s) == (self.result.bit_i, self.result.bit_s))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchReport {
    pub mode: &'static str,
    /// Radians, from the f00 classical0 reference.
    pub phase0: f64,
    pub reference: ReferenceLevel,
    pub cells: Vec<CellReport>,
    /// Every selective pulse used by the compiled oracles.
    pub pulses: Vec<SoftPulse>,
}

fn run_cell(
    cell: Cell,
    oracle: &Oracle,
    sys: &SpinSystem,
    mode: &Mode,
    acq: &Acquisition,
    opts: &RunOptions,
) -> Result<(ExperimentResult, Spectrum)> {
    let outcome = run_with_oracle(cell.kind, oracle, sys, mode, opts)?;
    let fid = synthesize_fid(&outcome.state, sys, acq)?;
    Ok((outcome.result, spectrum(&fid, 0.0)))
}

/// Runs `cells` concurrently. The f00 classical0 run always serves as the
/// phase and intensity reference, whether or not it is requested.
pub fn run_batch(
    cells: &[Cell],
    sys: &SpinSystem,
    mode: &Mode,
    acq: &Acquisition,
    opts: &RunOptions,
) -> Result<BatchReport> {
    let oracles: Vec<Oracle> = FunctionId::ALL
        .par_iter()
        .map(|&f| Oracle::compile(f, sys, mode))
        .collect::<Result<_>>()?;
    let oracle = |f: FunctionId| &oracles[f as usize];

    let (_, ref_spec) = run_cell(
        Cell {
            kind: ExperimentKind::Classical0,
            function: FunctionId::F00,
        },
        oracle(FunctionId::F00),
        sys,
        mode,
        acq,
        opts,
    )?;
    let phase0 = calibrate_phase(&ref_spec, sys)?;
    let reference = ReferenceLevel::measure(&ref_spec, sys, phase0)?;

    let cells = cells
        .par_iter()
        .map(|&cell| {
            let (result, raw) = run_cell(cell, oracle(cell.function), sys, mode, acq, opts)?;
            let spectrum = raw.rephased(phase0);
            let spectral = match classify(&spectrum, sys, phase0, &reference) {
                Ok(r) => Some(r),
                Err(Error::Unclassifiable) => None,
                Err(e) => return Err(e),
            };
            Ok(CellReport {
                result,
                spectral,
                spectrum,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let pulses = oracles
        .iter()
        .flat_map(|o| o.compiled.soft_pulses().copied())
        .collect();
    Ok(BatchReport {
        mode: mode.name(),
        phase0,
        reference,
        cells,
        pulses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_batch_is_confident_and_correct() {
        let sys = SpinSystem::cytosine();
        let acq = Acquisition::auto(&sys).unwrap();
        let report = run_batch(&Cell::all(), &sys, &Mode::Ideal, &acq, &RunOptions::default()).unwrap();
        assert_eq!(report.cells.len(), 12);
        assert!(report.phase0.abs() < 1e-6);
        assert!(report.pulses.is_empty());
        for c in &report.cells {
            assert!(c.confident() && c.correct(), "{:?}", c.result);
        }
    }

    #[test]
    fn batch_is_deterministic() {
        let sys = SpinSystem::cytosine();
        let acq = Acquisition::auto(&sys).unwrap();
        let cells = [Cell {
            kind: ExperimentKind::Deutsch,
            function: FunctionId::F10,
        }];
        let a = run_batch(&cells, &sys, &Mode::Ideal, &acq, &RunOptions::default()).unwrap();
        let b = run_batch(&cells, &sys, &Mode::Ideal, &acq, &RunOptions::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.cells[0].spectrum, b.cells[0].spectrum);
    }
}
