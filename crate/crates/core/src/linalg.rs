//! Dense complex matrices for the small Hilbert spaces used here (d <= 9).
//!
//! Storage is inline for matrices with up to nine entries, so single-qubit and
//! single-qutrit arithmetic in the estimator hot loops never touches the heap.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Max-norm tolerance on `A - A^dagger` for Hermiticity checks.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-9;
/// Most negative eigenvalue accepted as rounding dust in a PSD check.
pub const PSD_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: SmallVec<[C64; 9]>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: SmallVec::from_elem(C64::new(0.0, 0.0), rows * cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `entries.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Self {
        assert_eq!(
            entries.len(),
            rows * cols,
            "entry count must equal rows*cols"
        );
        Self {
            rows,
            cols,
            data: SmallVec::from_slice(entries),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = c(d, 0.0);
        }
        m
    }

    /// The rank-one operator `|v><v|`.
    pub fn projector(ket: &[C64]) -> Self {
        let n = ket.len();
        Self::from_fn(n, n, |i, j| ket[i] * ket[j].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z *= s);
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `Tr[self * other]` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = c(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * other.data[k * other.cols + i];
            }
        }
        acc
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)].re)
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn kron(&self, other: &Self) -> Self {
        kron(self, other)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        out.data
            .iter_mut()
            .zip(rhs.data.iter())
            .for_each(|(a, b)| *a += b);
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        out.data
            .iter_mut()
            .zip(rhs.data.iter())
            .for_each(|(a, b)| *a -= b);
        out
    }
}

/// Kronecker (tensor) product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    ComplexMatrix::from_fn(rows, cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

#[derive(Clone, Debug)]
pub struct HermitianEigenSystem {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenSystem {
    /// `V diag(λ) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..self.eigenvalues.len())
                .map(|k| v[(i, k)] * self.eigenvalues[k] * v[(j, k)].conj())
                .sum()
        })
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in ascending order.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEigenSystem> {
    let deviation = a.hermiticity_defect();
    if deviation > HERMITICITY_TOL || !a.is_finite() {
        return Err(Error::NotHermitian { deviation });
    }
    let n = a.rows();
    // Symmetrize so the solver sees an exactly Hermitian input.
    let sym = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let eig = sym.to_nalgebra().symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = ComplexMatrix::from_nalgebra(&eig.eigenvectors);
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, col| vecs[(i, order[col])]);
    Ok(HermitianEigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Checks Hermiticity, unit trace and positivity; returns the spectrum.
pub fn validate_density(rho: &ComplexMatrix) -> Result<Vec<f64>> {
    if !rho.is_square() {
        return Err(Error::InvalidState(format!(
            "matrix is {}x{}, not square",
            rho.rows(),
            rho.cols()
        )));
    }
    let spectrum = eig_hermitian(rho)
        .map_err(|e| Error::InvalidState(e.to_string()))?
        .eigenvalues;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    if spectrum[0] < -PSD_TOL {
        return Err(Error::InvalidState(format!(
            "negative eigenvalue {:.3e}",
            spectrum[0]
        )));
    }
    Ok(spectrum)
}

/// Shannon entropy in bits of a probability vector, with `0 log 0 = 0`.
pub fn shannon_entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .map(|&p| p.clamp(0.0, 1.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Von Neumann entropy `-Tr[rho log2 rho]` in bits.
pub fn vn_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let spectrum = validate_density(rho)?;
    let clipped: Vec<f64> = spectrum.iter().map(|&l| l.clamp(0.0, 1.0)).collect();
    let d = rho.rows() as f64;
    Ok(shannon_entropy_bits(&clipped).min(d.log2()))
}
