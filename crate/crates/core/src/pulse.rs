//! Ideal pulse propagators, free precession and the single-spin gate library.
//!
//! Rotation convention: a pulse of flip angle θ and phase φ applies
//! exp(−iθ(cos φ·J_x + sin φ·J_y)) with J = σ/2, z-rotations apply
//! exp(−iθJ_z). Sequences are written in time order and composed as
//! operators right to left. With this convention 90°_y takes |0⟩ to
//! (|0⟩+|1⟩)/√2 and a state-0 spin reads out as +½ I_x.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{kron, pauli, CMatrix, DensityMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    I,
    S,
}

impl Spin {
    pub fn other(self) -> Spin {
        match self {
            Spin::I => Spin::S,
            Spin::S => Spin::I,
        }
    }

    /// Lift a 2×2 operator onto this spin of the two-spin space.
    pub fn embed(self, op: &CMatrix) -> CMatrix {
        let id = CMatrix::identity(2);
        match self {
            Spin::I => kron(op, &id),
            Spin::S => kron(&id, op),
        }
        .expect("single-spin operator must be 2x2")
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::I => "I",
            Spin::S => "S",
        })
    }
}

impl FromStr for Spin {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "I" | "i" => Ok(Spin::I),
            "S" | "s" => Ok(Spin::S),
            other => Err(format!("unknown spin `{other}` (expected I or S)")),
        }
    }
}

/// Rotating-frame description of the coupled pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinSystem {
    /// Offset of spin I from the transmitter, Hz.
    pub nu_i: f64,
    /// Offset of spin S from the transmitter, Hz.
    pub nu_s: f64,
    /// Scalar coupling, Hz.
    pub j: f64,
    /// Phenomenological transverse decay time, s (may be infinite).
    pub t2_star: f64,
}

impl SpinSystem {
    pub fn new(nu_i: f64, nu_s: f64, j: f64, t2_star: f64) -> Result<Self> {
        if !(t2_star > 0.0) {
            return Err(Error::InvalidSystem(format!(
                "T2* must be positive, got {t2_star}"
            )));
        }
        if !nu_i.is_finite() || !nu_s.is_finite() || !j.is_finite() {
            return Err(Error::InvalidSystem("offsets and J must be finite".into()));
        }
        Ok(Self {
            nu_i,
            nu_s,
            j,
            t2_star,
        })
    }

    /// Cytosine H5/H6 pair: J = 7.2 Hz, 763 Hz apart, transmitter midway.
    pub fn cytosine() -> Self {
        Self {
            nu_i: 381.5,
            nu_s: -381.5,
            j: 7.2,
            t2_star: 0.3,
        }
    }

    pub fn offset(&self, spin: Spin) -> f64 {
        match spin {
            Spin::I => self.nu_i,
            Spin::S => self.nu_s,
        }
    }

    /// Copy of the system with both offsets zeroed.
    pub fn on_resonance(&self) -> Self {
        Self {
            nu_i: 0.0,
            nu_s: 0.0,
            ..*self
        }
    }

    /// True when |ν_I − ν_S| ≥ 10·|J|, the regime where the secular Hamiltonian holds.
    pub fn is_weakly_coupled(&self) -> bool {
        (self.nu_i - self.nu_s).abs() >= 10.0 * self.j.abs()
    }

    /// Diagonal of H = 2πν_I I_z + 2πν_S S_z + πJ·2I_zS_z, rad/s.
    pub fn energies(&self) -> [f64; 4] {
        let mut e = [0.0; 4];
        for (idx, slot) in e.iter_mut().enumerate() {
            let mi = if idx < 2 { 0.5 } else { -0.5 };
            let ms = if idx % 2 == 0 { 0.5 } else { -0.5 };
            *slot = 2.0 * PI * (self.nu_i * mi + self.nu_s * ms) + 2.0 * PI * self.j * mi * ms;
        }
        e
    }

    pub fn hamiltonian(&self) -> CMatrix {
        let e = self.energies();
        CMatrix::diag(&e.map(|x| C64::new(x, 0.0)))
    }
}

impl Default for SpinSystem {
    fn default() -> Self {
        Self::cytosine()
    }
}

/// exp(−iθ(cos φ J_x + sin φ J_y)) on one spin, angles in radians.
pub(crate) fn rotation_2x2(theta: f64, phase: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let (sp, cp) = phase.sin_cos();
    // −i sin(θ/2)(cos φ σx + sin φ σy)
    let off_upper = C64::new(0.0, -s) * C64::new(cp, -sp);
    let off_lower = C64::new(0.0, -s) * C64::new(cp, sp);
    CMatrix::from_rows(&[C64::new(c, 0.0), off_upper, off_lower, C64::new(c, 0.0)])
        .expect("2x2")
}

fn z_rotation_2x2(theta: f64) -> CMatrix {
    CMatrix::diag(&[
        C64::from_polar(1.0, -theta / 2.0),
        C64::from_polar(1.0, theta / 2.0),
    ])
}

fn apply_to_targets(op: &CMatrix, targets: &[Spin]) -> Result<CMatrix> {
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    let id = CMatrix::identity(2);
    let on = |s: Spin| if targets.contains(&s) { *op } else { id };
    kron(&on(Spin::I), &on(Spin::S))
}

/// Instantaneous RF pulse; angles in degrees.
pub fn hard_pulse(theta_deg: f64, phase_deg: f64, targets: &[Spin]) -> Result<CMatrix> {
    let r = rotation_2x2(theta_deg.to_radians(), phase_deg.to_radians());
    apply_to_targets(&r, targets)
}

/// exp(−iθJ_z) on each target; θ in degrees.
pub fn z_rotation(theta_deg: f64, targets: &[Spin]) -> Result<CMatrix> {
    apply_to_targets(&z_rotation_2x2(theta_deg.to_radians()), targets)
}

/// exp(−iHt) under the full Zeeman + secular coupling Hamiltonian.
pub fn free_evolution(sys: &SpinSystem, t: f64) -> Result<CMatrix> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let e = sys.energies();
    Ok(CMatrix::diag(&e.map(|x| C64::from_polar(1.0, -x * t))))
}

/// Pure J evolution for `fraction`/|J| seconds; ½ gives the CNOT coupling element.
pub fn couple(fraction: f64, sys: &SpinSystem) -> Result<CMatrix> {
    if sys.j == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    free_evolution(&sys.on_resonance(), fraction / sys.j.abs())
}

/// The 2×2 Hadamard (1/√2)[[1,1],[1,−1]].
pub fn hadamard_matrix() -> CMatrix {
    CMatrix::from_real_rows(&[1., 1., 1., -1.])
        .expect("2x2")
        .scale_real(std::f64::consts::FRAC_1_SQRT_2)
}

/// Hadamard on one spin realized as 45°_y − 180°_x − 45°_{−y}.
pub fn hadamard_exact(target: Spin) -> CMatrix {
    let t = [target];
    let first = hard_pulse(45.0, 90.0, &t).unwrap();
    let second = hard_pulse(180.0, 0.0, &t).unwrap();
    let third = hard_pulse(45.0, 270.0, &t).unwrap();
    third * second * first
}

/// 90°_y (or 90°_{−y} when `inverse`) standing in for a Hadamard.
pub fn pseudo_hadamard(target: Spin, inverse: bool) -> CMatrix {
    let phase = if inverse { 270.0 } else { 90.0 };
    hard_pulse(90.0, phase, &[target]).unwrap()
}

/// Off-diagonal decay exp(−t/T2*) in the computational basis.
pub fn dephase(rho: &DensityMatrix, t: f64, sys: &SpinSystem) -> Result<DensityMatrix> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let factor = if sys.t2_star.is_infinite() {
        1.0
    } else {
        (-t / sys.t2_star).exp()
    };
    let mut m = *rho.matrix();
    for r in 0..4 {
        for c in 0..4 {
            if r != c {
                m[(r, c)] *= factor;
            }
        }
    }
    Ok(DensityMatrix::from_trusted(m, rho.label.clone()))
}

/// J_a on the given spin as a two-spin operator.
pub fn spin_operator(spin: Spin, axis: char) -> CMatrix {
    let op = match axis {
        'x' => pauli::jx(),
        'y' => pauli::jy(),
        _ => pauli::jz(),
    };
    spin.embed(&op)
}
