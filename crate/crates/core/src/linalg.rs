//! Small dense complex operators.
//!
//! Two-level operators use the ordered basis `(|e⟩, |g⟩)`, so `σ_z = diag(1, −1)`
//! and `σ_− = |g⟩⟨e|` has its single non-zero entry at row 1, column 0.

use core::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(DMatrix<C64>);

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    /// Row-major construction; panics if `entries.len() != dim²`.
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Self {
        Self(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// `|i⟩⟨j|` in a `dim`-dimensional space.
    pub fn ket_bra(dim: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, j)] = ONE;
        Self(m)
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self(DMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.0 - self.0.adjoint()).norm() < tol
    }

    /// `(X − X†)/2i`, the Hermitian "imaginary part" of an operator.
    pub fn im_part(&self) -> Self {
        let d = &self.0 - self.0.adjoint();
        Self(d * C64::new(0.0, -0.5))
    }

    pub fn scale(&self, z: C64) -> Self {
        Self(&self.0 * z)
    }

    pub fn expect(&self, rho: &OperatorMatrix) -> C64 {
        (&rho.0 * &self.0).trace()
    }

    pub fn commutator(&self, other: &OperatorMatrix) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }
}

impl Index<(usize, usize)> for OperatorMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Add for OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(self.0 + rhs.0)
    }
}

impl AddAssign<&OperatorMatrix> for OperatorMatrix {
    fn add_assign(&mut self, rhs: &OperatorMatrix) {
        self.0 += &rhs.0;
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix(-self.0)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

impl Mul<C64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, z: C64) -> OperatorMatrix {
        OperatorMatrix(&self.0 * z)
    }
}

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, x: f64) -> OperatorMatrix {
        OperatorMatrix(&self.0 * C64::new(x, 0.0))
    }
}

/// Two-level operators in the `(e, g)` basis.
pub mod pauli {
    use super::*;

    pub fn sigma_minus() -> OperatorMatrix {
        OperatorMatrix::ket_bra(2, 1, 0)
    }

    pub fn sigma_plus() -> OperatorMatrix {
        OperatorMatrix::ket_bra(2, 0, 1)
    }

    pub fn sigma_x() -> OperatorMatrix {
        OperatorMatrix::from_row_slice(2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn sigma_y() -> OperatorMatrix {
        OperatorMatrix::from_row_slice(2, &[ZERO, -I, I, ZERO])
    }

    pub fn sigma_z() -> OperatorMatrix {
        OperatorMatrix::diag(&[ONE, -ONE])
    }

    pub fn excited() -> OperatorMatrix {
        OperatorMatrix::ket_bra(2, 0, 0)
    }

    pub fn ground() -> OperatorMatrix {
        OperatorMatrix::ket_bra(2, 1, 1)
    }
}
