//! Dense complex matrices for one spin (2×2) or the two-spin space (4×4).
//!
//! Storage is a fixed inline array, so matrices are `Copy` and never
//! allocate. Basis ordering for 4×4 operators is |00⟩,|01⟩,|10⟩,|11⟩ with
//! the first label belonging to spin I.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const MAX_DIM: usize = 4;

#[derive(Clone, Copy, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: [C64; MAX_DIM * MAX_DIM],
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "CMatrix supports dim 2 or 4, got {dim}");
        Self {
            dim,
            data: [C64::new(0.0, 0.0); MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be 4 or 16.
    pub fn from_rows(entries: &[C64]) -> Result<Self> {
        let dim = match entries.len() {
            4 => 2,
            16 => 4,
            n => {
                return Err(Error::DimensionMismatch {
                    expected: 16,
                    got: n,
                })
            }
        };
        let mut m = Self::zeros(dim);
        m.data[..entries.len()].copy_from_slice(entries);
        Ok(m)
    }

    pub fn from_real_rows(entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_rows(&c)
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data[..self.dim * self.dim]
    }

    fn entries_mut(&mut self) -> &mut [C64] {
        let n = self.dim * self.dim;
        &mut self.data[..n]
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = *self;
        out.entries_mut().iter_mut().for_each(|z| *z *= factor);
        out
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum-entry deviation of U†U from the identity.
    pub fn unitarity_error(&self) -> f64 {
        (self.adjoint() * *self - Self::identity(self.dim)).max_abs()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() < tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() < tol
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Tensor product `self ⊗ other` of two 2×2 factors.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        kron(self, other)
    }

    /// Matrix exponential by scaling and squaring of a truncated Taylor series.
    pub fn expm(&self) -> Self {
        let norm1 = (0..self.dim)
            .map(|c| (0..self.dim).map(|r| self[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut squarings = 0;
        let mut scaled = *self;
        if norm1 > 0.5 {
            squarings = (norm1 / 0.5).log2().ceil() as i32;
            scaled = self.scale_real(0.5f64.powi(squarings));
        }
        let mut term = Self::identity(self.dim);
        let mut sum = term;
        for k in 1..=30 {
            term = (term * scaled).scale_real(1.0 / k as f64);
            sum = sum + term;
            if term.max_abs() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum * sum;
        }
        sum
    }
}

/// Tensor product in |I⟩⊗|S⟩ ordering.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: m.dim,
            });
        }
    }
    let mut out = CMatrix::zeros(4);
    for ar in 0..2 {
        for ac in 0..2 {
            for br in 0..2 {
                for bc in 0..2 {
                    out[(2 * ar + br, 2 * ac + bc)] = a[(ar, ac)] * b[(br, bc)];
                }
            }
        }
    }
    Ok(out)
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.dim && c < self.dim);
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.dim && c < self.dim);
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }
}

impl Mul<&CMatrix> for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        *self * *rhs
    }
}

impl Add for CMatrix {
    type Output = CMatrix;

    fn add(mut self, rhs: CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        self.entries_mut()
            .iter_mut()
            .zip(rhs.entries())
            .for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for CMatrix {
    type Output = CMatrix;

    fn sub(mut self, rhs: CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        self.entries_mut()
            .iter_mut()
            .zip(rhs.entries())
            .for_each(|(a, b)| *a -= b);
        self
    }
}

impl Neg for CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:>10.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli matrices and single-spin angular momentum operators (σ/2).
pub mod pauli {
    use super::CMatrix;
    use num_complex::Complex64 as C64;

    const O: C64 = C64::new(0.0, 0.0);
    const ONE: C64 = C64::new(1.0, 0.0);
    const I: C64 = C64::new(0.0, 1.0);

    pub fn sigma_x() -> CMatrix {
        CMatrix::from_rows(&[O, ONE, ONE, O]).unwrap()
    }

    pub fn sigma_y() -> CMatrix {
        CMatrix::from_rows(&[O, -I, I, O]).unwrap()
    }

    pub fn sigma_z() -> CMatrix {
        CMatrix::from_rows(&[ONE, O, O, -ONE]).unwrap()
    }

    pub fn jx() -> CMatrix {
        sigma_x().scale_real(0.5)
    }

    pub fn jy() -> CMatrix {
        sigma_y().scale_real(0.5)
    }

    pub fn jz() -> CMatrix {
        sigma_z().scale_real(0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_identity() {
        let id = kron(&CMatrix::identity(2), &CMatrix::identity(2)).unwrap();
        assert_eq!(id, CMatrix::identity(4));
    }

    #[test]
    fn kron_rejects_4x4_factor() {
        let err = kron(&CMatrix::identity(4), &CMatrix::identity(2)).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                got: 4
            }
        );
    }

    #[test]
    fn kron_iz_ordering() {
        let iz = kron(&pauli::jz(), &CMatrix::identity(2)).unwrap();
        let expected = CMatrix::diag(&[c(0.5, 0.), c(0.5, 0.), c(-0.5, 0.), c(-0.5, 0.)]);
        assert_eq!(iz, expected);
    }

    #[test]
    fn kron_two_iz_sz_elementwise() {
        // Element-wise oracle: (A⊗B)[(2i+k),(2j+l)] = A[i,j] B[k,l] on diagonals.
        let a = pauli::jz();
        let b = pauli::sigma_z();
        let zz = kron(&a, &b).unwrap();
        let mut expected = CMatrix::zeros(4);
        for i in 0..2 {
            for k in 0..2 {
                expected[(2 * i + k, 2 * i + k)] = a[(i, i)] * b[(k, k)];
            }
        }
        assert_eq!(zz, expected);
        let diag: Vec<f64> = (0..4).map(|i| zz[(i, i)].re).collect();
        assert_eq!(diag, vec![0.5, -0.5, -0.5, 0.5]);
    }

    #[test]
    fn expm_of_diagonal_matches_scalar_exponentials() {
        let d = CMatrix::diag(&[c(0., -3.0), c(0., 1.2), c(0., 7.5), c(0., -0.1)]);
        let e = d.expm();
        for i in 0..4 {
            let expected = d[(i, i)].exp();
            assert!((e[(i, i)] - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn expm_rotation_is_closed_form() {
        // exp(-iθσ_y/2) = cos(θ/2) − i sin(θ/2) σ_y
        let theta = 2.3;
        let gen = pauli::jy().scale(c(0., -theta));
        let u = gen.expm();
        let expected = CMatrix::identity(2).scale_real((theta / 2.0).cos())
            + pauli::sigma_y().scale(c(0., -(theta / 2.0).sin()));
        assert!((u - expected).max_abs() < 1e-14);
        assert!(u.is_unitary(1e-14));
    }

    #[test]
    fn from_rows_rejects_bad_length() {
        assert!(CMatrix::from_rows(&[c(1., 0.); 9]).is_err());
    }
}
