//! Dense complex linear algebra for small square matrices (n <= 64).
//!
//! Everything here is written from scratch: Householder reduction to
//! Hessenberg form, shifted QR iteration to Schur form, triangular
//! back-substitution for eigenvectors and partially pivoted LU.

mod eigen;
mod lu;

use std::fmt;
use std::ops::{Index, IndexMut};

use thiserror::Error;

pub use eigen::{eig, eigenvalues, EigenDecomposition, DEFAULT_EIG_TOL, DEFECTIVE_CONDITION};
pub(crate) use eigen::{eig_unchecked, null_space};
pub use lu::{inverse, solve_linear};

/// Complex scalar. Multiplication by `i` is the planar quarter turn
/// `(x, y) -> (-y, x)`.
pub type CNum = num_complex::Complex64;

/// Largest supported matrix order.
pub const MAX_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("eigenvector matrix condition estimate {condition:.3e} exceeds {limit:.0e}; matrix is not diagonalizable")]
    DefectiveMatrix { condition: f64, limit: f64 },
    #[error("QR iteration did not converge within {sweeps} sweeps")]
    NonConvergence { sweeps: usize },
    #[error("matrix is singular at pivot {pivot}")]
    SingularMatrix { pivot: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix order {0} is outside 1..={MAX_ORDER}")]
    UnsupportedOrder(usize),
    #[error("matrix contains a non-finite entry")]
    NonFinite,
}

impl LinalgError {
    pub fn code(&self) -> &'static str {
        match self {
            LinalgError::DefectiveMatrix { .. } => "DefectiveMatrix",
            LinalgError::NonConvergence { .. } => "NonConvergence",
            LinalgError::SingularMatrix { .. } => "SingularMatrix",
            LinalgError::DimensionMismatch { .. } => "DimensionMismatch",
            LinalgError::UnsupportedOrder(_) => "UnsupportedOrder",
            LinalgError::NonFinite => "NonFinite",
        }
    }
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<CNum>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![CNum::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = CNum::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> CNum) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_diagonal(diag: &[CNum]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from rows; every row must have as many entries as there are rows.
    pub fn from_rows(rows: &[Vec<CNum>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    /// Real matrix given row by row.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let rows: Vec<Vec<CNum>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| CNum::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[CNum] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<CNum> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[CNum]) {
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn row(&self, i: usize) -> &[CNum] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn mul_vec(&self, v: &[CNum]) -> Vec<CNum> {
        assert_eq!(v.len(), self.n, "vector length must match matrix order");
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n, "matrix orders must match");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == CNum::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Symmetric permutation `P A P^T` where row `i` of the result is row `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self[(perm[i], perm[j])])
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = CNum;

    fn index(&self, (i, j): (usize, usize)) -> &CNum {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut CNum {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub(crate) fn vec_norm(v: &[CNum]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `|re| + |im|`, the cheap magnitude used in deflation tests.
#[inline]
pub(crate) fn abs1(z: CNum) -> f64 {
    z.re.abs() + z.im.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> CNum {
        CNum::new(re, im)
    }

    #[test]
    fn imaginary_unit_is_quarter_turn() {
        let z = c(1.0, 2.0);
        assert_eq!(CNum::i() * z, c(-2.0, 1.0));
    }

    #[test]
    fn from_rows_rejects_ragged_input() {
        let rows = vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(1.0, 0.0)]];
        assert!(matches!(
            CMatrix::from_rows(&rows),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn norms_of_small_matrix() {
        let m = CMatrix::from_real_rows(&[vec![1.0, -2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.norm_inf(), 7.0);
        assert_eq!(m.norm_1(), 6.0);
        assert!((m.frobenius_norm() - 30f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn matmul_identity() {
        let m = CMatrix::from_fn(3, |i, j| c(i as f64, j as f64));
        assert_eq!(m.matmul(&CMatrix::identity(3)), m);
    }
}
