use std::collections::HashMap;

use super::ast::{Axis, Delay, Event, Sequence};
use crate::algebra::{phase_distance, CMatrix, PhaseDistance};
use crate::error::{Error, Result};
use crate::pulse::{couple, free_evolution, hard_pulse, z_rotation, Spin, SpinSystem};
use crate::shaped::{
    calibrated_soft_pulse, realize, PulseShape, ShapedPulseSpec, SoftPulse, SoftPulseDefaults,
};

/// How selective pulses are realized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Instantaneous pulses, exact z-rotations.
    Ideal,
    /// Single-spin pulses become calibrated Gaussian soft pulses; pulses on
    /// both spins stay hard.
    Shaped(SoftPulseDefaults),
}

impl Mode {
    pub fn shaped() -> Self {
        Mode::Shaped(SoftPulseDefaults::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Ideal => "ideal",
            Mode::Shaped(_) => "shaped",
        }
    }

    pub fn is_shaped(&self) -> bool {
        matches!(self, Mode::Shaped(_))
    }
}

/// One event lowered to its propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledEvent {
    pub propagator: CMatrix,
    /// Wall-clock length in seconds (zero for hard pulses and z-rotations).
    pub duration: f64,
    pub soft: Option<SoftPulse>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub propagator: CMatrix,
    pub events: Vec<CompiledEvent>,
}

impl Compiled {
    pub fn soft_pulses(&self) -> impl Iterator<Item = &SoftPulse> {
        self.events.iter().filter_map(|e| e.soft.as_ref())
    }

    pub fn duration(&self) -> f64 {
        self.events.iter().map(|e| e.duration).sum()
    }
}

type CalibrationKey = (Spin, u64, u64);

fn transverse_phase(axis: Axis) -> Result<f64> {
    axis.phase_degrees()
        .ok_or_else(|| Error::InvalidSequence("soft pulse about z".into()))
}

fn lower_event(
    ev: &Event,
    sys: &SpinSystem,
    mode: &Mode,
    cache: &mut HashMap<CalibrationKey, SoftPulse>,
) -> Result<CompiledEvent> {
    let instant = |propagator| CompiledEvent {
        propagator,
        duration: 0.0,
        soft: None,
    };
    let soft_event = |pulse: SoftPulse| CompiledEvent {
        propagator: pulse.propagator,
        duration: pulse.spec.duration,
        soft: Some(pulse),
    };
    match *ev {
        Event::Pulse { target, flip, axis } => match (axis.phase_degrees(), target.single(), mode) {
            (None, _, _) => {
                let theta = if axis == Axis::MinusZ { -flip } else { flip };
                Ok(instant(z_rotation(theta, target.spins())?))
            }
            (Some(phase), Some(spin), Mode::Shaped(defaults)) => {
                let key = (spin, flip.to_bits(), phase.to_bits());
                if let Some(p) = cache.get(&key) {
                    return Ok(soft_event(*p));
                }
                let p = calibrated_soft_pulse(sys, spin, flip, phase, defaults)?;
                cache.insert(key, p);
                Ok(soft_event(p))
            }
            (Some(phase), _, _) => Ok(instant(hard_pulse(flip, phase, target.spins())?)),
        },
        Event::Soft(params) => {
            let phase = transverse_phase(params.axis)?;
            match mode {
                Mode::Ideal => Ok(instant(hard_pulse(params.flip, phase, &[params.target])?)),
                Mode::Shaped(defaults) => {
                    let spec = ShapedPulseSpec {
                        target: params.target,
                        flip: params.flip,
                        phase,
                        shape: PulseShape::Gaussian {
                            truncation: params.truncation.unwrap_or(defaults.truncation),
                        },
                        duration: params.duration,
                        slices: params.slices.unwrap_or(defaults.slices),
                        ramp_offset: params.offset.unwrap_or(sys.offset(params.target)),
                    };
                    Ok(soft_event(realize(sys, &spec)?))
                }
            }
        }
        Event::Delay(delay) => {
            let t = match delay {
                Delay::Seconds(s) => s,
                Delay::PerJ(f) => {
                    if sys.j == 0.0 {
                        return Err(Error::ZeroCoupling);
                    }
                    f / sys.j.abs()
                }
            };
            Ok(CompiledEvent {
                propagator: free_evolution(sys, t)?,
                duration: t,
                soft: None,
            })
        }
        Event::Couple { fraction } => Ok(instant(couple(fraction, sys)?)),
        Event::ZRot { target, theta } => Ok(instant(z_rotation(theta, target.spins())?)),
    }
}

/// Lowers every event to its propagator, in time order.
pub fn lower(seq: &Sequence, sys: &SpinSystem, mode: &Mode) -> Result<Vec<CompiledEvent>> {
    let mut cache = HashMap::new();
    seq.events
        .iter()
        .map(|ev| lower_event(ev, sys, mode, &mut cache))
        .collect()
}

pub fn compile_detailed(seq: &Sequence, sys: &SpinSystem, mode: &Mode) -> Result<Compiled> {
    let events = lower(seq, sys, mode)?;
    let propagator = events
        .iter()
        .fold(CMatrix::identity(4), |acc, e| e.propagator * acc);
    Ok(Compiled { propagator, events })
}

/// Ordered product of the event propagators; the first event acts first.
pub fn compile(seq: &Sequence, sys: &SpinSystem, mode: &Mode) -> Result<CMatrix> {
    compile_detailed(seq, sys, mode).map(|c| c.propagator)
}

pub fn check_equivalence(
    seq: &Sequence,
    target: &CMatrix,
    sys: &SpinSystem,
    mode: &Mode,
) -> Result<PhaseDistance> {
    phase_distance(&compile(seq, sys, mode)?, target)
}
