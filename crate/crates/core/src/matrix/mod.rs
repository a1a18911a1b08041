//! Dense row-major matrices and the handful of primitives the meta-layer is
//! built from.
//!
//! [`Matrix`] is a general `rows × cols` matrix stored as `data[i * cols + j]`.
//! [`SymMatrix`] wraps a square matrix that is known to be symmetric; it
//! derefs to [`Matrix`] so all read-only operations are shared.
//!
//! ```
//! use isqrt_cov::matrix::{Matrix, SymMatrix};
//!
//! let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
//! let p = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
//! let ap = a.matmul(&p).unwrap();
//! assert_eq!(ap.as_slice(), &[2.0, 1.0, 4.0, 3.0]);
//!
//! let s = SymMatrix::identity(4);
//! assert_eq!(s.trace(), 4.0);
//! ```

mod eig;
pub mod io;

use std::ops::Deref;

use crate::error::{Error, Result, Shape};

pub use eig::{jacobi_eig, EigDecomposition, MAX_SWEEPS};

/// Relative tolerance of the symmetry check in [`SymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyShape(Shape(rows, cols)));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidData {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix shape must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix shape must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices, which must all have the same length.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::InvalidData {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
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
    pub fn shape(&self) -> Shape {
        Shape(self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let (n, m) = (self.rows, other.cols);
        let mut out = vec![0.0; n * m];
        // i-k-j order keeps the inner loop contiguous in both `other` and `out`.
        for i in 0..n {
            let out_row = &mut out[i * m..(i + 1) * m];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * m..(k + 1) * m];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Matrix {
            rows: n,
            cols: m,
            data: out,
        })
    }

    fn zip_with(&self, other: &Matrix, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Returns `alpha·I + beta·self` for a square matrix.
    pub fn shifted(&self, alpha: f64, beta: f64) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op: "shifted",
                shape: self.shape(),
            });
        }
        let mut out = self.scale(beta);
        for i in 0..self.rows {
            out.data[i * self.cols + i] += alpha;
        }
        Ok(out)
    }

    /// Frobenius inner product `tr(selfᵀ · other)`.
    pub fn dot(&self, other: &Matrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op: "dot",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    /// Sum of the diagonal. Non-square matrices use the leading square block.
    pub fn trace(&self) -> f64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self.data[i * self.cols + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows.min(self.cols) {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// `a · b`, see [`Matrix::matmul`].
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.matmul(b)
}

pub fn trace(m: &SymMatrix) -> f64 {
    m.trace()
}

pub fn frobenius_norm(m: &SymMatrix) -> f64 {
    m.frobenius_norm()
}

/// `(m + mᵀ) / 2`.
pub fn symmetrize(m: &Matrix) -> Result<SymMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            op: "symmetrize",
            shape: m.shape(),
        });
    }
    let n = m.rows;
    let mut out = m.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m.data[i * n + j] + m.data[j * n + i]);
            out.data[i * n + j] = v;
            out.data[j * n + i] = v;
        }
    }
    Ok(SymMatrix(out))
}

/// A square matrix satisfying `|a_ij − a_ji| ≤ 1e-12 · max(1, ‖a‖_F)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Wraps `m` after checking squareness and symmetry.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                op: "SymMatrix::new",
                shape: m.shape(),
            });
        }
        let asym = m.max_asymmetry();
        if asym > SYMMETRY_TOL * m.frobenius_norm().max(1.0) {
            return Err(Error::NotSymmetric { max_asymmetry: asym });
        }
        Ok(Self(m))
    }

    pub fn identity(d: usize) -> Self {
        Self(Matrix::identity(d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(Matrix::zeros(d, d))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self(Matrix::from_diag(diag))
    }

    /// `c · I_d`.
    pub fn scaled_identity(d: usize, c: f64) -> Self {
        Self(Matrix::identity(d).scale(c))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix(self.0.scale(s))
    }

    /// Sum of two symmetric matrices of equal size.
    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.0.add(&other.0).map(SymMatrix)
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.0.sub(&other.0).map(SymMatrix)
    }

    /// Row-major upper triangle including the diagonal, `d(d+1)/2` entries.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            out.extend_from_slice(&self.0.data[i * d + i..(i + 1) * d]);
        }
        out
    }

    /// Inverse of [`SymMatrix::upper_triangle`]: mirrors each entry into both halves.
    pub fn from_upper_triangle(d: usize, vec: &[f64]) -> Result<Self> {
        let expected = d * (d + 1) / 2;
        if vec.len() != expected {
            return Err(Error::VecLength {
                expected,
                got: vec.len(),
            });
        }
        let mut m = Matrix::zeros(d, d);
        let mut k = 0;
        for i in 0..d {
            for j in i..d {
                m.data[i * d + j] = vec[k];
                m.data[j * d + i] = vec[k];
                k += 1;
            }
        }
        Ok(Self(m))
    }
}

impl Deref for SymMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl AsRef<Matrix> for SymMatrix {
    fn as_ref(&self) -> &Matrix {
        &self.0
    }
}

impl From<SymMatrix> for Matrix {
    fn from(s: SymMatrix) -> Matrix {
        s.0
    }
}

/// Length of the upper-triangular vectorization of a `d × d` matrix.
pub const fn triu_len(d: usize) -> usize {
    d * (d + 1) / 2
}
