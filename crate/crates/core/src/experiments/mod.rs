//! Classical and Deutsch runs on the two-spin machine, with expectation-value
//! and spectral readout.

mod batch;
mod readout;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{evolve, expectation, pure_to_density, CMatrix, DensityMatrix, PureState};
use crate::error::Result;
use crate::pulse::{dephase, hadamard_exact, hard_pulse, spin_operator, Spin, SpinSystem};
use crate::sequence::{builtin, compile_detailed, oracle_matrix, Compiled, Mode, Sequence};

pub use batch::{run_batch, BatchReport, Cell, CellReport};
pub use readout::{
    calibrate_phase, classify, multiplet_half_width, spectrum, synthesize_fid, Acquisition, Fid,
    ReferenceLevel, SpectralReadout, Spectrum, ABSENT_FRACTION, DEGRADED_FRACTION,
};

/// Magnitude an expectation value needs for a confident bit.
pub const CONFIDENT_EXPECTATION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionId {
    F00,
    F01,
    F10,
    F11,
}

impl FunctionId {
    pub const ALL: [FunctionId; 4] = [FunctionId::F00, FunctionId::F01, FunctionId::F10, FunctionId::F11];

    pub fn eval(self, x: u8) -> u8 {
        let (f0, f1) = self.table();
        if x & 1 == 0 {
            f0
        } else {
            f1
        }
    }

    /// (f(0), f(1)).
    pub fn table(self) -> (u8, u8) {
        match self {
            FunctionId::F00 => (0, 0),
            FunctionId::F01 => (0, 1),
            FunctionId::F10 => (1, 0),
            FunctionId::F11 => (1, 1),
        }
    }

    pub fn is_constant(self) -> bool {
        let (a, b) = self.table();
        a == b
    }

    pub fn name(self) -> &'static str {
        match self {
            FunctionId::F00 => "f00",
            FunctionId::F01 => "f01",
            FunctionId::F10 => "f10",
            FunctionId::F11 => "f11",
        }
    }

    /// |x⟩|y⟩ → |x⟩|y ⊕ f(x)⟩.
    pub fn oracle(self) -> CMatrix {
        let (f0, f1) = self.table();
        oracle_matrix(f0, f1)
    }

    /// Pulse sequence implementing the oracle: nothing, the echo-refocused
    /// controlled-NOTs, or a NOT on S.
    pub fn sequence(self) -> Sequence {
        let name = match self {
            FunctionId::F00 => "u00",
            FunctionId::F01 => "u01_merged",
            FunctionId::F10 => "u10_merged",
            FunctionId::F11 => "u11",
        };
        builtin(name).expect("builtin oracle")
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        FunctionId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown function `{s}` (expected f00, f01, f10 or f11)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Classical0,
    Classical1,
    Deutsch,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 3] = [
        ExperimentKind::Classical0,
        ExperimentKind::Classical1,
        ExperimentKind::Deutsch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Classical0 => "classical0",
            ExperimentKind::Classical1 => "classical1",
            ExperimentKind::Deutsch => "deutsch",
        }
    }

    /// Bits (I, S) a faultless run of `f` must read out.
    pub fn expected_bits(self, f: FunctionId) -> (u8, u8) {
        match self {
            ExperimentKind::Classical0 => (0, f.eval(0)),
            ExperimentKind::Classical1 => (1, f.eval(1)),
            ExperimentKind::Deutsch => (u8::from(!f.is_constant()), 1),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!("unknown experiment `{s}` (expected classical0, classical1 or deutsch)")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "constant")]
    Constant,
    #[serde(rename = "balanced")]
    Balanced,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Constant => "constant",
            Verdict::Balanced => "balanced",
            Verdict::NotApplicable => "n/a",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub function: FunctionId,
    pub ix: f64,
    pub sx: f64,
    #[serde(rename = "bit_I")]
    pub bit_i: u8,
    #[serde(rename = "bit_S")]
    pub bit_s: u8,
    pub verdict: Verdict,
    pub mode: &'static str,
    pub degraded: bool,
}

impl ExperimentResult {
    fn from_expectations(kind: ExperimentKind, function: FunctionId, ix: f64, sx: f64, mode: &Mode) -> Self {
        let bit_i = u8::from(ix <= 0.0);
        let verdict = match (kind, bit_i) {
            (ExperimentKind::Deutsch, 0) => Verdict::Constant,
            (ExperimentKind::Deutsch, _) => Verdict::Balanced,
            _ => Verdict::NotApplicable,
        };
        Self {
            kind,
            function,
            ix,
            sx,
            bit_i,
            bit_s: u8::from(sx <= 0.0),
            verdict,
            mode: mode.name(),
            degraded: ix.abs() < CONFIDENT_EXPECTATION || sx.abs() < CONFIDENT_EXPECTATION,
        }
    }

    /// Bits match what `function` demands for this kind of run.
    pub fn is_correct(&self) -> bool {
        (self.bit_i, self.bit_s) == self.kind.expected_bits(self.function)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    /// Apply T2* decay for the duration of every delay and soft pulse.
    pub relaxation: bool,
    /// Deutsch runs apply the cancelling 90°_{−y}/90°_y pairs instead of omitting them.
    pub explicit_readout: bool,
}

/// A compiled oracle, reusable across runs.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub function: FunctionId,
    pub compiled: Compiled,
}

impl Oracle {
    pub fn compile(function: FunctionId, sys: &SpinSystem, mode: &Mode) -> Result<Self> {
        Ok(Self {
            function,
            compiled: compile_detailed(&function.sequence(), sys, mode)?,
        })
    }

    fn apply(&self, rho: &DensityMatrix, sys: &SpinSystem, opts: &RunOptions) -> Result<DensityMatrix> {
        if !opts.relaxation {
            return evolve(rho, &self.compiled.propagator);
        }
        let mut rho = rho.clone();
        for ev in &self.compiled.events {
            rho = dephase(&evolve(&rho, &ev.propagator)?, ev.duration, sys)?;
        }
        Ok(rho)
    }
}

fn both_pulse(phase: f64) -> CMatrix {
    hard_pulse(90.0, phase, &[Spin::I, Spin::S]).expect("two targets")
}

/// Result together with the state the receiver sees.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: ExperimentResult,
    pub state: DensityMatrix,
}

pub fn run_with_oracle(
    kind: ExperimentKind,
    oracle: &Oracle,
    sys: &SpinSystem,
    mode: &Mode,
    opts: &RunOptions,
) -> Result<Outcome> {
    let excite = both_pulse(90.0);
    let state = match kind {
        ExperimentKind::Classical0 | ExperimentKind::Classical1 => {
            let input = u8::from(kind == ExperimentKind::Classical1);
            let rho = pure_to_density(&PureState::basis(input, 0));
            evolve(&oracle.apply(&rho, sys, opts)?, &excite)?
        }
        ExperimentKind::Deutsch => {
            let rho = evolve(&DensityMatrix::basis(0, 1), &excite)?;
            let rho = oracle.apply(&rho, sys, opts)?;
            if opts.explicit_readout {
                evolve(&evolve(&rho, &both_pulse(270.0))?, &excite)?
            } else {
                rho
            }
        }
    };
    let ix = expectation(&state, &spin_operator(Spin::I, 'x'))?;
    let sx = expectation(&state, &spin_operator(Spin::S, 'x'))?;
    Ok(Outcome {
        result: ExperimentResult::from_expectations(kind, oracle.function, ix, sx, mode),
        state,
    })
}

/// Prepares |input⟩|0⟩, applies U_f, excites both spins with 90°_y and reads ⟨I_x⟩, ⟨S_x⟩.
pub fn run_classical(f: FunctionId, input_bit: u8, sys: &SpinSystem, mode: &Mode) -> Result<ExperimentResult> {
    let kind = if input_bit & 1 == 0 {
        ExperimentKind::Classical0
    } else {
        ExperimentKind::Classical1
    };
    let oracle = Oracle::compile(f, sys, mode)?;
    Ok(run_with_oracle(kind, &oracle, sys, mode, &RunOptions::default())?.result)
}

/// Prepares |0⟩|1⟩, applies 90°_y to both spins, then U_f, and reads out
/// directly: the closing pseudo-Hadamards and the excitation pulses cancel.
pub fn run_deutsch(f: FunctionId, sys: &SpinSystem, mode: &Mode, opts: &RunOptions) -> Result<ExperimentResult> {
    let oracle = Oracle::compile(f, sys, mode)?;
    Ok(run_with_oracle(ExperimentKind::Deutsch, &oracle, sys, mode, opts)?.result)
}

/// Applies the exact oracle to |x⟩(|0⟩−|1⟩)/√2 and returns the sign it picks
/// up and whether the output is exactly ±input.
pub fn phase_kickback_check(f: FunctionId, x: u8) -> (i8, bool) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let control = if x & 1 == 0 {
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    } else {
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
    };
    let input = PureState::product(control, [C64::new(h, 0.0), C64::new(-h, 0.0)]).expect("normalized");
    let output = input.apply(&f.oracle()).expect("permutation is unitary");
    let sign: i8 = if input.inner(&output).re >= 0.0 { 1 } else { -1 };
    let preserved = input
        .amplitudes()
        .iter()
        .zip(output.amplitudes())
        .all(|(a, b)| (b - a * f64::from(sign)).norm() < 1e-12);
    (sign, preserved)
}

/// Deutsch's circuit with true Hadamards: |0⟩|1⟩ → H⊗H → U_f → H⊗H.
pub fn deutsch_exact_hadamard(f: FunctionId) -> PureState {
    let hh = hadamard_exact(Spin::I) * hadamard_exact(Spin::S);
    let u = hh * f.oracle() * hh;
    PureState::basis(0, 1).apply(&u).expect("unitary circuit")
}
