//! Reference computations the meta-layer is checked against.
//!
//! - [`exact_sqrt`]: eigen-decomposition square root `U diag(√λ) Uᵀ`.
//! - [`scalar_ns`]: the Newton-Schulz recurrence on plain `f64`s.
//! - [`finite_diff_grad`]: central differences of a black-box loss.
//! - [`check_gradients`]: analytic vs. numeric `∂⟨G, C(Σ(X))⟩/∂X`.
//! - [`plain_cov_head`]: the unnormalized covariance head.

use std::fmt;

use rand::Rng;

use crate::cov_pool::{covariance_backward, covariance_forward, FeatureMatrix};
use crate::error::{Error, Result};
use crate::isqrt::{backward, backward_from_c, forward, MetaLayerConfig, NormMode};
use crate::matrix::{jacobi_eig, symmetrize, triu_len, Matrix, SymMatrix};

/// Eigenvalues above `−EIG_CLAMP · ‖Σ‖_F` are treated as rounding noise and
/// clamped to zero before taking square roots.
pub const EIG_CLAMP: f64 = 1e-10;

/// Entries whose numeric derivative is at most this large are left out of
/// the relative-error comparison.
pub const GRAD_ABS_FLOOR: f64 = 1e-8;

pub const DEFAULT_GRAD_TOL: f64 = 1e-6;

/// Principal square root of a symmetric PSD matrix through [`jacobi_eig`].
pub fn exact_sqrt(sigma: &SymMatrix) -> Result<SymMatrix> {
    let eig = jacobi_eig(sigma)?;
    let floor = -EIG_CLAMP * sigma.frobenius_norm();
    let min = eig.min_eigenvalue();
    if min < floor {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min });
    }
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()))
}

/// `(y_N, z_N)` of the scalar recurrence from `y_0 = a`, `z_0 = 1`.
pub fn scalar_ns(a: f64, iterations: usize) -> (f64, f64) {
    let (mut y, mut z) = (a, 1.0);
    for _ in 0..iterations {
        let t = 3.0 - z * y;
        (y, z) = (0.5 * y * t, 0.5 * t * z);
    }
    (y, z)
}

/// `1e-5 · max(1, ‖point‖_F)`.
pub fn default_step(point: &Matrix) -> f64 {
    1e-5 * point.frobenius_norm().max(1.0)
}

/// Central-difference gradient `(l(x + h·e_ij) − l(x − h·e_ij)) / 2h`.
pub fn finite_diff_grad<F>(mut loss: F, point: &Matrix, step: f64) -> Result<Matrix>
where
    F: FnMut(&Matrix) -> Result<f64>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let mut grad = Matrix::zeros(point.rows(), point.cols());
    let mut probe = point.clone();
    for i in 0..point.rows() {
        for j in 0..point.cols() {
            let x0 = point.get(i, j);
            probe.set(i, j, x0 + step);
            let plus = loss(&probe)?;
            probe.set(i, j, x0 - step);
            let minus = loss(&probe)?;
            probe.set(i, j, x0);
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::NonFiniteLoss { i, j });
            }
            grad.set(i, j, (plus - minus) / (2.0 * step));
        }
    }
    Ok(grad)
}

/// Richardson combination `(4·D(h/2) − D(h)) / 3` of two central
/// differences, which cancels the `O(h²)` truncation term.
pub fn extrapolated_fd_grad<F>(mut loss: F, point: &Matrix, step: f64) -> Result<Matrix>
where
    F: FnMut(&Matrix) -> Result<f64>,
{
    let coarse = finite_diff_grad(&mut loss, point, step)?;
    let fine = finite_diff_grad(&mut loss, point, 0.5 * step)?;
    fine.scale(4.0 / 3.0).sub(&coarse.scale(1.0 / 3.0))
}

/// Parameters of one gradient-check cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCase {
    pub d: usize,
    pub n: usize,
    pub iterations: usize,
    pub mode: NormMode,
    pub seed: u64,
}

/// How the upstream gradient reaches the layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Probe {
    /// `l = ⟨G, C⟩` with a random symmetric `G`.
    #[default]
    Matrix,
    /// `l = ⟨g, vec(C)⟩` with a random `g` of length `d(d+1)/2`.
    Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradReport {
    pub case: GradCase,
    /// Shape of the checked parameter (`n × d`).
    pub shape: (usize, usize),
    pub max_rel_err: f64,
    pub max_abs_err: f64,
    pub worst: (usize, usize),
    pub analytic_at_worst: f64,
    pub numeric_at_worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const GRAD_CSV_HEADER: &str = "d,n,N,mode,seed,max_rel_err,max_abs_err,worst_i,worst_j,pass";

impl GradReport {
    /// Compares two gradients entrywise. Relative error is
    /// `|a − g| / max(|a|, |g|)` over entries with `|g| > GRAD_ABS_FLOOR`.
    pub fn compare(case: GradCase, analytic: &Matrix, numeric: &Matrix, tolerance: f64) -> Self {
        let mut max_rel = 0.0f64;
        let mut max_abs = 0.0f64;
        let mut worst = (0, 0);
        for i in 0..numeric.rows() {
            for j in 0..numeric.cols() {
                let (a, g) = (analytic.get(i, j), numeric.get(i, j));
                let abs = (a - g).abs();
                max_abs = max_abs.max(abs);
                if g.abs() > GRAD_ABS_FLOOR {
                    let rel = abs / a.abs().max(g.abs());
                    if rel > max_rel {
                        max_rel = rel;
                        worst = (i, j);
                    }
                }
            }
        }
        Self {
            case,
            shape: (numeric.rows(), numeric.cols()),
            max_rel_err: max_rel,
            max_abs_err: max_abs,
            worst,
            analytic_at_worst: analytic.get(worst.0, worst.1),
            numeric_at_worst: numeric.get(worst.0, worst.1),
            tolerance,
            pass: max_rel <= tolerance,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{:e},{},{},{}",
            self.case.d,
            self.case.n,
            self.case.iterations,
            self.case.mode,
            self.case.seed,
            self.max_rel_err,
            self.max_abs_err,
            self.worst.0,
            self.worst.1,
            self.pass
        )
    }
}

impl fmt::Display for GradReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "d={} n={} N={} mode={} seed={}: max rel {:.3e} at ({}, {}) [analytic {:.6e}, numeric {:.6e}] -> {}",
            self.case.d,
            self.case.n,
            self.case.iterations,
            self.case.mode,
            self.case.seed,
            self.max_rel_err,
            self.worst.0,
            self.worst.1,
            self.analytic_at_worst,
            self.numeric_at_worst,
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

/// Random `n × d` features with i.i.d. uniform `[0, 1)` entries.
pub fn random_features(n: usize, d: usize, rng: &mut impl Rng) -> FeatureMatrix {
    FeatureMatrix::new(Matrix::from_fn(n, d, |_, _| rng.random::<f64>())).expect("finite")
}

/// Random symmetric matrix with entries in `[−1, 1)`.
pub fn random_symmetric(d: usize, rng: &mut impl Rng) -> SymMatrix {
    symmetrize(&Matrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0))).expect("square")
}

/// Checks `∂⟨G, C(Σ(X))⟩/∂X` against central differences.
pub fn check_gradients(
    d: usize,
    n: usize,
    iterations: usize,
    mode: NormMode,
    seed: u64,
    tol: f64,
) -> Result<GradReport> {
    check_gradients_with(
        GradCase {
            d,
            n,
            iterations,
            mode,
            seed,
        },
        Probe::Matrix,
        tol,
    )
}

pub fn check_gradients_with(case: GradCase, probe: Probe, tol: f64) -> Result<GradReport> {
    if case.d == 0 || case.n == 0 {
        return Err(Error::InvalidArgument("d and n must be at least 1".into()));
    }
    let mut rng = crate::seeded_rng(case.seed);
    let x = random_features(case.n, case.d, &mut rng);
    let cfg = MetaLayerConfig::new(case.mode, case.iterations);

    let (loss, analytic_sigma) = match probe {
        Probe::Matrix => {
            let g = random_symmetric(case.d, &mut rng);
            let (_, tape) = forward(&covariance_forward(&x), &cfg)?;
            let d_sigma = backward_from_c(&tape, &g)?;
            let loss: Box<dyn Fn(&Matrix) -> Result<f64>> = Box::new(move |xm: &Matrix| {
                let sigma = covariance_forward(&FeatureMatrix::new(xm.clone())?);
                let (out, _) = forward(&sigma, &cfg)?;
                out.c.dot(&g)
            });
            (loss, d_sigma)
        }
        Probe::Vector => {
            let g: Vec<f64> = (0..triu_len(case.d)).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (_, tape) = forward(&covariance_forward(&x), &cfg)?;
            let d_sigma = backward(&tape, &g)?;
            let loss: Box<dyn Fn(&Matrix) -> Result<f64>> = Box::new(move |xm: &Matrix| {
                let sigma = covariance_forward(&FeatureMatrix::new(xm.clone())?);
                let (out, _) = forward(&sigma, &cfg)?;
                Ok(out.vec.iter().zip(&g).map(|(a, b)| a * b).sum())
            });
            (loss, d_sigma)
        }
    };

    let analytic = covariance_backward(&x, &analytic_sigma)?;
    let numeric = extrapolated_fd_grad(loss, x.values(), default_step(x.values()))?;
    Ok(GradReport::compare(case, &analytic, &numeric, tol))
}

/// Upper-triangular vectorization of `Σ` with no normalization.
pub fn plain_cov_head(sigma: &SymMatrix) -> Vec<f64> {
    sigma.upper_triangle()
}
