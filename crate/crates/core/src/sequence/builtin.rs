//! Named sequences for the Deutsch oracles and single-spin gates.

use super::ast::{Axis, Delay, Event, Sequence, Target};
use crate::algebra::CMatrix;
use crate::error::{Error, Result};
use crate::pulse::{hadamard_matrix, hard_pulse, Spin};

pub const BUILTIN_NAMES: [&str; 10] = [
    "u00",
    "u01",
    "u10",
    "u11",
    "u01_merged",
    "u10_merged",
    "hadamard_I",
    "hadamard_S",
    "pseudo_h",
    "deutsch_prep",
];

fn pulse(target: Target, flip: f64, axis: Axis) -> Event {
    Event::Pulse { target, flip, axis }
}

fn zrot(target: Target, theta: f64) -> Event {
    Event::ZRot { target, theta }
}

/// 90 S_y − couple − 90 I_z − 90 S_{∓z} − 90 S_{−y}; `flip_on_one` selects the
/// controlled-NOT that flips S when I is |1⟩ (otherwise when I is |0⟩).
fn abstract_cnot(flip_on_one: bool) -> Vec<Event> {
    vec![
        pulse(Target::S, 90.0, Axis::Y),
        Event::Couple { fraction: 0.5 },
        zrot(Target::I, 90.0),
        zrot(Target::S, if flip_on_one { -90.0 } else { 90.0 }),
        pulse(Target::S, 90.0, Axis::MinusY),
    ]
}

/// The implemented form: echo-refocused coupling, composite z on I, and
/// a final S pulse whose phase selects the oracle.
fn merged_cnot(flip_on_one: bool) -> Vec<Event> {
    vec![
        pulse(Target::S, 90.0, Axis::Y),
        Event::Delay(Delay::PerJ(0.25)),
        pulse(Target::Both, 180.0, Axis::X),
        Event::Delay(Delay::PerJ(0.25)),
        pulse(Target::Both, 180.0, Axis::X),
        pulse(Target::I, 90.0, Axis::Y),
        pulse(Target::I, 90.0, Axis::X),
        pulse(Target::Both, 90.0, Axis::MinusY),
        pulse(Target::S, 90.0, if flip_on_one { Axis::X } else { Axis::MinusX }),
    ]
}

fn hadamard_sandwich(target: Target) -> Vec<Event> {
    vec![
        pulse(target, 45.0, Axis::Y),
        pulse(target, 180.0, Axis::X),
        pulse(target, 45.0, Axis::MinusY),
    ]
}

pub fn builtin(name: &str) -> Result<Sequence> {
    let events = match name {
        "u00" => Vec::new(),
        "u01" => abstract_cnot(true),
        "u10" => abstract_cnot(false),
        "u11" => vec![pulse(Target::S, 180.0, Axis::X)],
        "u01_merged" => merged_cnot(true),
        "u10_merged" => merged_cnot(false),
        "hadamard_I" => hadamard_sandwich(Target::I),
        "hadamard_S" => hadamard_sandwich(Target::S),
        "pseudo_h" => vec![pulse(Target::I, 90.0, Axis::Y)],
        "deutsch_prep" => vec![pulse(Target::Both, 90.0, Axis::Y)],
        other => return Err(Error::UnknownBuiltin(other.to_string())),
    };
    Ok(Sequence::new(name, events))
}

/// |x⟩|y⟩ → |x⟩|y ⊕ f(x)⟩ for f given by (f(0), f(1)).
pub fn oracle_matrix(f0: u8, f1: u8) -> CMatrix {
    let mut m = CMatrix::zeros(4);
    for x in 0..2u8 {
        let fx = if x == 0 { f0 } else { f1 } & 1;
        for y in 0..2u8 {
            let col = 2 * x as usize + y as usize;
            let row = 2 * x as usize + (y ^ fx) as usize;
            m[(row, col)] = num_complex::Complex64::new(1.0, 0.0);
        }
    }
    m
}

/// Reference propagator each builtin is meant to realize (up to global phase).
pub fn builtin_target(name: &str) -> Result<CMatrix> {
    Ok(match name {
        "u00" => oracle_matrix(0, 0),
        "u01" | "u01_merged" => oracle_matrix(0, 1),
        "u10" | "u10_merged" => oracle_matrix(1, 0),
        "u11" => oracle_matrix(1, 1),
        "hadamard_I" => Spin::I.embed(&hadamard_matrix()),
        "hadamard_S" => Spin::S.embed(&hadamard_matrix()),
        "pseudo_h" => hard_pulse(90.0, 90.0, &[Spin::I])?,
        "deutsch_prep" => hard_pulse(90.0, 90.0, &[Spin::I, Spin::S])?,
        other => return Err(Error::UnknownBuiltin(other.to_string())),
    })
}
