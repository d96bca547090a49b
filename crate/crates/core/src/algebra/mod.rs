//! Complex matrices, two-spin states and the product-operator basis.

mod matrix;
mod product_operator;
mod state;

pub use matrix::{kron, pauli, CMatrix};
pub use product_operator::{po_compose, po_decompose, ProductOperator, ProductOperatorCoeffs};
pub use state::{
    basis_index, evolve, expectation, pure_to_density, DensityMatrix, PureState, STATE_TOL,
    UNITARY_TOL,
};

use serde::Serialize;

use crate::error::{Error, Result};

/// Distance between two propagators after removing their relative global phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseDistance {
    pub distance: f64,
    /// Radians, in (−π, π].
    pub phase: f64,
}

/// φ = arg Tr(V†U), distance = ‖U − e^{iφ}V‖_F.
pub fn phase_distance(u: &CMatrix, v: &CMatrix) -> Result<PhaseDistance> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: u.dim(),
        });
    }
    for m in [u, v] {
        let err = m.unitarity_error();
        if err > UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
    }
    let overlap = (v.adjoint() * *u).trace();
    if overlap.norm() < 1e-12 * u.dim() as f64 {
        return Err(Error::OrthogonalPropagators);
    }
    let phase = overlap.arg();
    let rotated = v.scale(num_complex::Complex64::from_polar(1.0, phase));
    Ok(PhaseDistance {
        distance: (*u - rotated).frobenius_norm(),
        phase,
    })
}
