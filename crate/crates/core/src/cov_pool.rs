//! Second-order (covariance) pooling.
//!
//! Features are stored one per row: a [`FeatureMatrix`] is `n × d` for `n`
//! local features of dimension `d`, and the pooled descriptor is
//! `Σ = Xᵀ Ī X` with the centering matrix `Ī = (1/n)(I − (1/n)·1)`.
//! `Ī` is applied implicitly (subtract column means, divide by `n`);
//! [`centering_matrix`] materializes it for small `n` as a cross-check.

use crate::error::{Error, Result, Shape};
use crate::matrix::{Matrix, SymMatrix};

/// `n × d` matrix holding one `d`-dimensional feature per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(Matrix);

impl FeatureMatrix {
    pub fn new(values: Matrix) -> Result<Self> {
        if !values.is_finite() {
            return Err(Error::InvalidArgument("feature matrix has non-finite entries".into()));
        }
        Ok(Self(values))
    }

    /// Number of features.
    pub fn n(&self) -> usize {
        self.0.rows()
    }

    /// Feature dimension.
    pub fn d(&self) -> usize {
        self.0.cols()
    }

    pub fn values(&self) -> &Matrix {
        &self.0
    }

    pub fn into_values(self) -> Matrix {
        self.0
    }

    fn column_means(&self) -> Vec<f64> {
        let (n, d) = (self.n(), self.d());
        let mut means = vec![0.0; d];
        for i in 0..n {
            for (m, v) in means.iter_mut().zip(self.0.row(i)) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
        means
    }

    /// `Ī X`: rows minus their mean, scaled by `1/n`.
    fn centered_scaled(&self) -> Matrix {
        let (n, d) = (self.n(), self.d());
        let means = self.column_means();
        let inv_n = 1.0 / n as f64;
        Matrix::from_fn(n, d, |i, j| (self.0.get(i, j) - means[j]) * inv_n)
    }
}

/// The `n × n` centering matrix `Ī = (1/n)(I − (1/n)·1)`.
pub fn centering_matrix(n: usize) -> Matrix {
    let inv_n = 1.0 / n as f64;
    Matrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        inv_n * (delta - inv_n)
    })
}

/// `Σ = Xᵀ Ī X`, the biased sample covariance of the feature rows.
pub fn covariance_forward(x: &FeatureMatrix) -> SymMatrix {
    let (n, d) = (x.n(), x.d());
    let means = x.column_means();
    let centered = Matrix::from_fn(n, d, |i, j| x.values().get(i, j) - means[j]);
    let inv_n = 1.0 / n as f64;
    let mut sigma = Matrix::zeros(d, d);
    for i in 0..n {
        let row = centered.row(i);
        for a in 0..d {
            let ra = row[a];
            for b in a..d {
                let v = sigma.get(a, b) + ra * row[b];
                sigma.set(a, b, v);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = sigma.get(a, b) * inv_n;
            sigma.set(a, b, v);
            sigma.set(b, a, v);
        }
    }
    SymMatrix::new(sigma).expect("mirrored upper triangle is symmetric")
}

/// Same value as [`covariance_forward`], computed with an explicit `Ī`.
/// Intended for `n ≤ 64`; cost is `O(n²d)`.
pub fn covariance_forward_materialized(x: &FeatureMatrix) -> SymMatrix {
    let ibar = centering_matrix(x.n());
    let ibar_x = ibar.matmul(x.values()).expect("n × n times n × d");
    let sigma = x.values().transpose().matmul(&ibar_x).expect("d × n times n × d");
    crate::matrix::symmetrize(&sigma).expect("square")
}

/// `∂l/∂X = Ī X (G + Gᵀ)` for an upstream gradient `G = ∂l/∂Σ`, which need
/// not be symmetric.
pub fn covariance_backward(x: &FeatureMatrix, d_sigma: &Matrix) -> Result<Matrix> {
    let d = x.d();
    if d_sigma.shape() != Shape(d, d) {
        return Err(Error::DimensionMismatch {
            op: "covariance_backward",
            left: x.values().shape(),
            right: d_sigma.shape(),
        });
    }
    let g_sym = d_sigma.add(&d_sigma.transpose())?;
    x.centered_scaled().matmul(&g_sym)
}
