//! The 16-element product-operator basis for two spins-½.
//!
//! Single-spin operators are σ/2 on one spin, bilinear terms carry the
//! factor 2 (2I_aS_b), and the unit term is ½E. With this normalization
//! every basis element has Tr(B†B) = 1.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64 as C64;

use super::matrix::{kron, pauli, CMatrix};
use super::state::STATE_TOL;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProductOperator {
    HalfE,
    Ix,
    Iy,
    Iz,
    Sx,
    Sy,
    Sz,
    IxSx,
    IxSy,
    IxSz,
    IySx,
    IySy,
    IySz,
    IzSx,
    IzSy,
    IzSz,
}

impl ProductOperator {
    pub const ALL: [ProductOperator; 16] = [
        Self::HalfE,
        Self::Ix,
        Self::Iy,
        Self::Iz,
        Self::Sx,
        Self::Sy,
        Self::Sz,
        Self::IxSx,
        Self::IxSy,
        Self::IxSz,
        Self::IySx,
        Self::IySy,
        Self::IySz,
        Self::IzSx,
        Self::IzSy,
        Self::IzSz,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::HalfE => "halfE",
            Self::Ix => "Ix",
            Self::Iy => "Iy",
            Self::Iz => "Iz",
            Self::Sx => "Sx",
            Self::Sy => "Sy",
            Self::Sz => "Sz",
            Self::IxSx => "2IxSx",
            Self::IxSy => "2IxSy",
            Self::IxSz => "2IxSz",
            Self::IySx => "2IySx",
            Self::IySy => "2IySy",
            Self::IySz => "2IySz",
            Self::IzSx => "2IzSx",
            Self::IzSy => "2IzSy",
            Self::IzSz => "2IzSz",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.name() == name)
    }

    /// The 4×4 matrix of this basis element.
    pub fn matrix(self) -> CMatrix {
        let id = CMatrix::identity(2);
        let axis = |a: usize| match a {
            0 => pauli::jx(),
            1 => pauli::jy(),
            _ => pauli::jz(),
        };
        let k = |a: &CMatrix, b: &CMatrix| kron(a, b).expect("2x2 factors");
        match self {
            Self::HalfE => CMatrix::identity(4).scale_real(0.5),
            Self::Ix => k(&axis(0), &id),
            Self::Iy => k(&axis(1), &id),
            Self::Iz => k(&axis(2), &id),
            Self::Sx => k(&id, &axis(0)),
            Self::Sy => k(&id, &axis(1)),
            Self::Sz => k(&id, &axis(2)),
            bilinear => {
                let i = (bilinear.index() - Self::IxSx.index()) / 3;
                let s = (bilinear.index() - Self::IxSx.index()) % 3;
                k(&axis(i), &axis(s)).scale_real(2.0)
            }
        }
    }
}

impl fmt::Display for ProductOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Real coefficients over the product-operator basis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProductOperatorCoeffs {
    values: [f64; 16],
}

impl ProductOperatorCoeffs {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(ProductOperator, f64)]) -> Self {
        let mut c = Self::zero();
        for &(op, v) in pairs {
            c[op] += v;
        }
        c
    }

    pub fn iter(&self) -> impl Iterator<Item = (ProductOperator, f64)> + '_ {
        ProductOperator::ALL
            .iter()
            .map(move |&op| (op, self.values[op.index()]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<ProductOperator> for ProductOperatorCoeffs {
    type Output = f64;

    fn index(&self, op: ProductOperator) -> &f64 {
        &self.values[op.index()]
    }
}

impl IndexMut<ProductOperator> for ProductOperatorCoeffs {
    fn index_mut(&mut self, op: ProductOperator) -> &mut f64 {
        &mut self.values[op.index()]
    }
}

impl fmt::Display for ProductOperatorCoeffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .iter()
            .filter(|(_, v)| v.abs() > 1e-12)
            .map(|(op, v)| format!("{v:+} {op}"))
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" "))
        }
    }
}

/// c_k = Tr(B_k†ρ) / Tr(B_k†B_k) for a Hermitian 4×4 matrix.
pub fn po_decompose(m: &CMatrix) -> Result<ProductOperatorCoeffs> {
    if m.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: m.dim(),
        });
    }
    let herm = m.hermiticity_error();
    if herm > STATE_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let mut coeffs = ProductOperatorCoeffs::zero();
    for op in ProductOperator::ALL {
        let b = op.matrix();
        let bd = b.adjoint();
        let num: C64 = (bd * *m).trace();
        let den = (bd * b).trace().re;
        coeffs[op] = num.re / den;
    }
    Ok(coeffs)
}

/// Σ c_k B_k
pub fn po_compose(coeffs: &ProductOperatorCoeffs) -> CMatrix {
    coeffs
        .iter()
        .filter(|(_, v)| *v != 0.0)
        .fold(CMatrix::zeros(4), |acc, (op, v)| acc + op.matrix().scale_real(v))
}
