use num_complex::Complex64 as C64;
use serde::Serialize;

use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// Tolerance for normalization, Hermiticity and trace checks.
pub const STATE_TOL: f64 = 1e-12;
/// Propagators composed from many factors are accepted at this unitarity level.
pub const UNITARY_TOL: f64 = 1e-10;
const EIGEN_FLOOR: f64 = 1e-10;

/// Two-spin pure state over |00⟩,|01⟩,|10⟩,|11⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    amplitudes: [C64; 4],
}

impl PureState {
    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state |i s⟩.
    pub fn basis(bit_i: u8, bit_s: u8) -> Self {
        let mut amplitudes = [C64::new(0.0, 0.0); 4];
        amplitudes[basis_index(bit_i, bit_s)] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// Product state |a⟩⊗|b⟩ of two normalized single-spin states.
    pub fn product(a: [C64; 2], b: [C64; 2]) -> Result<Self> {
        let mut amplitudes = [C64::new(0.0, 0.0); 4];
        for i in 0..2 {
            for s in 0..2 {
                amplitudes[2 * i + s] = a[i] * b[s];
            }
        }
        Self::new(amplitudes)
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.amplitudes
    }

    pub fn apply(&self, u: &CMatrix) -> Result<Self> {
        if u.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: u.dim(),
            });
        }
        if !u.is_unitary(UNITARY_TOL) {
            return Err(Error::NotUnitary(u.unitarity_error()));
        }
        let mut out = [C64::new(0.0, 0.0); 4];
        for (r, slot) in out.iter_mut().enumerate() {
            *slot = (0..4).map(|c| u[(r, c)] * self.amplitudes[c]).sum();
        }
        Ok(Self { amplitudes: out })
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

#[inline]
pub fn basis_index(bit_i: u8, bit_s: u8) -> usize {
    2 * (bit_i as usize & 1) + (bit_s as usize & 1)
}

/// Hermitian, unit-trace, positive semidefinite 4×4 state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMatrix {
    #[serde(skip)]
    matrix: CMatrix,
    pub label: Option<String>,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, label: Option<String>) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: matrix.dim(),
            });
        }
        let herm = matrix.hermiticity_error();
        if herm > STATE_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        if !is_positive_semidefinite(&matrix, EIGEN_FLOOR) {
            return Err(Error::InvalidDensity("negative eigenvalue".into()));
        }
        Ok(Self { matrix, label })
    }

    /// Pure basis state ρ = |i s⟩⟨i s|, labelled `rho_is`.
    pub fn basis(bit_i: u8, bit_s: u8) -> Self {
        let mut rho = pure_to_density(&PureState::basis(bit_i, bit_s));
        rho.label = Some(format!("rho_{}{}", bit_i & 1, bit_s & 1));
        rho
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Internal constructor for results of trace-preserving maps.
    pub(crate) fn from_trusted(matrix: CMatrix, label: Option<String>) -> Self {
        Self { matrix, label }
    }
}

/// ρ = |ψ⟩⟨ψ|
pub fn pure_to_density(state: &PureState) -> DensityMatrix {
    let a = state.amplitudes();
    let mut m = CMatrix::zeros(4);
    for r in 0..4 {
        for c in 0..4 {
            m[(r, c)] = a[r] * a[c].conj();
        }
    }
    DensityMatrix::from_trusted(m, None)
}

/// UρU†
pub fn evolve(rho: &DensityMatrix, u: &CMatrix) -> Result<DensityMatrix> {
    if u.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: u.dim(),
        });
    }
    let err = u.unitarity_error();
    if err > UNITARY_TOL {
        return Err(Error::NotUnitary(err));
    }
    let m = *u * *rho.matrix() * u.adjoint();
    Ok(DensityMatrix::from_trusted(m, rho.label.clone()))
}

/// Tr(ρ·O) for a Hermitian observable; the residual imaginary part is dropped.
pub fn expectation(rho: &DensityMatrix, observable: &CMatrix) -> Result<f64> {
    if observable.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: observable.dim(),
        });
    }
    let herm = observable.hermiticity_error();
    if herm > STATE_TOL {
        return Err(Error::NotHermitian(herm));
    }
    Ok((*rho.matrix() * *observable).trace().re)
}

/// Cholesky on M + floor·1; succeeds iff the smallest eigenvalue exceeds −floor.
fn is_positive_semidefinite(m: &CMatrix, floor: f64) -> bool {
    let n = m.dim();
    let mut l = [[C64::new(0.0, 0.0); 4]; 4];
    for j in 0..n {
        let mut d = m[(j, j)].re + floor;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        if d <= 0.0 {
            return false;
        }
        let djj = d.sqrt();
        l[j][j] = C64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / djj;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::product_operator::ProductOperator as P;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn rho01_matches_column_vector_outer_product() {
        let psi = PureState::new([c(0.), c(1.), c(0.), c(0.)]).unwrap();
        let rho = pure_to_density(&psi);
        for r in 0..4 {
            for col in 0..4 {
                let expected = if r == 1 && col == 1 { 1.0 } else { 0.0 };
                assert_eq!(rho.matrix()[(r, col)], c(expected));
            }
        }
    }

    #[test]
    fn rho00_is_diag_1000() {
        let rho = pure_to_density(&PureState::basis(0, 0));
        assert_eq!(*rho.matrix(), CMatrix::diag(&[c(1.), c(0.), c(0.), c(0.)]));
    }

    #[test]
    fn uniform_superposition_is_all_quarters() {
        let psi = PureState::new([c(0.5); 4]).unwrap();
        let rho = pure_to_density(&psi);
        assert!(rho.matrix().entries().iter().all(|&z| (z - c(0.25)).norm() < 1e-15));
    }

    #[test]
    fn non_normalized_is_rejected() {
        assert!(matches!(
            PureState::new([c(1.), c(1.), c(0.), c(0.)]),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn density_validation() {
        let bad_trace = CMatrix::diag(&[c(1.), c(1.), c(0.), c(0.)]);
        assert!(DensityMatrix::new(bad_trace, None).is_err());
        let negative = CMatrix::diag(&[c(1.5), c(-0.5), c(0.), c(0.)]);
        assert!(DensityMatrix::new(negative, None).is_err());
        let mixed = CMatrix::identity(4).scale_real(0.25);
        assert!(DensityMatrix::new(mixed, None).is_ok());
    }

    #[test]
    fn evolve_with_identity_is_noop() {
        let rho = DensityMatrix::basis(0, 1);
        let out = evolve(&rho, &CMatrix::identity(4)).unwrap();
        assert_eq!(out.matrix(), rho.matrix());
    }

    #[test]
    fn evolve_rejects_non_unitary() {
        let rho = DensityMatrix::basis(0, 0);
        let m = CMatrix::identity(4).scale_real(2.0);
        assert!(matches!(evolve(&rho, &m), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn expectation_eigenstates() {
        let rho00 = DensityMatrix::basis(0, 0);
        let rho01 = DensityMatrix::basis(0, 1);
        assert!((expectation(&rho00, &P::Iz.matrix()).unwrap() - 0.5).abs() < 1e-15);
        assert!((expectation(&rho01, &P::Sz.matrix()).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let rho = DensityMatrix::basis(0, 0);
        let mut m = CMatrix::zeros(4);
        m[(0, 1)] = c(1.0);
        assert!(matches!(expectation(&rho, &m), Err(Error::NotHermitian(_))));
    }
}
