//! Dense complex matrices and the bipartite operations built on them.
//!
//! Composite indices of a two-part space follow the row-major convention with
//! subsystem A as the slow index: basis state `|i⟩|j⟩` sits at `i * dim_b + j`.
//! Every bipartite routine in the crate (Kronecker products, partial traces,
//! partial transposes, Choi matrices) uses this ordering.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes,
    /// miscounted data and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty shape {rows}x{cols}")));
        }
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Shape(format!("shape {rows}x{cols} overflows")))?;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {expected} entries, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty shape {rows}x{cols}");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![ONE; n])
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        let mut m = Self::zeros(ket.len(), bra.len());
        for (i, &k) in ket.iter().enumerate() {
            for (j, &b) in bra.iter().enumerate() {
                m[(i, j)] = k * b.conj();
            }
        }
        m
    }

    /// `|psi⟩⟨psi|`.
    pub fn projector(psi: &[C64]) -> Self {
        Self::outer(psi, psi)
    }

    /// Builds a matrix entry-wise from `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> Result<C64> {
        self.require_square("trace")?;
        Ok((0..self.rows).map(|i| self[(i, i)]).sum())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other, "add")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other, "subtract")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-entry distance between two matrices of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.require_same_shape(other, "compare")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max |m_ij − conj(m_ji)|`; infinite for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(m + m†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Frobenius inner product `tr(self† other)`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.require_same_shape(other, "inner product")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn apply_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "{}x{} matrix applied to length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Tensor product `self ⊗ other` (the right factor is the fast index).
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Traces out one factor of a bipartite matrix, keeping the other.
    ///
    /// Keeping A: `out[i', i] = Σ_j m[(i', j), (i, j)]`.
    pub fn partial_trace(&self, idx: BipartiteIndex, keep: Subsystem) -> Result<Self> {
        idx.check(self)?;
        let (da, db) = (idx.dim_a, idx.dim_b);
        Ok(match keep {
            Subsystem::A => Self::from_fn(da, da, |ip, i| {
                (0..db).map(|j| self[(ip * db + j, i * db + j)]).sum()
            }),
            Subsystem::B => Self::from_fn(db, db, |jp, j| {
                (0..da).map(|i| self[(i * db + jp, i * db + j)]).sum()
            }),
        })
    }

    /// Transposes subsystem A only: `out[(i', j'), (i, j)] = m[(i, j'), (i', j)]`.
    pub fn partial_transpose(&self, idx: BipartiteIndex) -> Result<Self> {
        idx.check(self)?;
        let db = idx.dim_b;
        let n = self.rows;
        Ok(Self::from_fn(n, n, |r, c| {
            let (ip, jp) = (r / db, r % db);
            let (i, j) = (c / db, c % db);
            self[(i * db + jp, ip * db + j)]
        }))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub(crate) fn require_square(&self, what: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what} needs a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    fn require_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.rows == other.rows && self.cols == other.cols {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "cannot {what} {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )))
        }
    }
}

/// Product, adjoint of `a` and trace of `a` in one call.
pub fn multiply_adjoint_trace(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<(ComplexMatrix, ComplexMatrix, C64)> {
    let product = a.matmul(b)?;
    let trace = a.trace()?;
    Ok((product, a.adjoint(), trace))
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// Operator forms panic on shape mismatch, mirroring ndarray; the `checked_*`
// and `matmul` methods return errors instead.

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_add(rhs).expect("shape mismatch in +")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_sub(rhs).expect("shape mismatch in -")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in *")
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: C64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: f64) -> ComplexMatrix {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale(-ONE)
    }
}

/// Factorization `dim = dim_a × dim_b` of a composite space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BipartiteIndex {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl BipartiteIndex {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::Shape(format!(
                "bipartite factors must be positive, got {dim_a}x{dim_b}"
            )));
        }
        Ok(Self { dim_a, dim_b })
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub(crate) fn check(&self, m: &ComplexMatrix) -> Result<()> {
        m.require_square("bipartite operation")?;
        if m.rows() != self.dim() {
            return Err(Error::Shape(format!(
                "{}x{} factorization does not match dimension {}",
                self.dim_a,
                self.dim_b,
                m.rows()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Pauli matrices and ladder operators in the `(↑, ↓)` basis.
pub mod pauli {
    use super::{ComplexMatrix, C64};

    pub fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::new(
            2,
            2,
            vec![
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap()
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    /// `σ₋ = |↓⟩⟨↑|`.
    pub fn sigma_minus() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]).unwrap()
    }

    /// `σ₊ = |↑⟩⟨↓|`.
    pub fn sigma_plus() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap()
    }

    pub fn up() -> Vec<C64> {
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    }

    pub fn down() -> Vec<C64> {
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
    }
}
