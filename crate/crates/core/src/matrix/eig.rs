use super::{Matrix, SymMatrix};
use crate::error::{Error, Result};

/// Upper bound on cyclic sweeps before [`jacobi_eig`] gives up.
pub const MAX_SWEEPS: usize = 100;

/// Sweeps stop once the off-diagonal Frobenius norm drops below this
/// fraction of the input's Frobenius norm.
const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// `m = U · diag(eigenvalues) · Uᵀ` with eigenvalues in nonincreasing order
/// and the columns of `eigenvectors` orthonormal.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigDecomposition {
    /// `U · diag(f(λ)) · Uᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let d = self.eigenvalues.len();
        let u = &self.eigenvectors;
        let mut out = Matrix::zeros(d, d);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                let ui = w * u.get(i, k);
                if ui == 0.0 {
                    continue;
                }
                let row = &mut out.as_mut_slice()[i * d..(i + 1) * d];
                for (j, o) in row.iter_mut().enumerate() {
                    *o += ui * u.get(j, k);
                }
            }
        }
        // Rank-one sums are symmetric up to rounding in the accumulation order.
        super::symmetrize(&out).expect("square by construction")
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|l| l)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // Nonincreasing order: the smallest eigenvalue is the last one.
        *self.eigenvalues.last().expect("dimension is positive")
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Cyclic-by-row Jacobi eigensolver for a symmetric matrix.
///
/// Each sweep visits every `(p, q)` pair with `p < q` and applies the plane
/// rotation that annihilates `a_pq`, accumulating the rotations into the
/// eigenvector matrix.
pub fn jacobi_eig(m: &SymMatrix) -> Result<EigDecomposition> {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut v = Matrix::identity(n);
    let threshold = OFF_DIAGONAL_TOL * m.frobenius_norm();

    let mut off = off_diagonal_norm(&a, n);
    let mut sweeps = 0;
    while off > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    0.0
                };
                if t == 0.0 {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let new_rp = c * arp - s * arq;
                    let new_rq = s * arp + c * arq;
                    a[r * n + p] = new_rp;
                    a[p * n + r] = new_rp;
                    a[r * n + q] = new_rq;
                    a[q * n + r] = new_rq;
                }
                let vd = v.as_mut_slice();
                for r in 0..n {
                    let vrp = vd[r * n + p];
                    let vrq = vd[r * n + q];
                    vd[r * n + p] = c * vrp - s * vrq;
                    vd[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a, n);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let eigenvectors = Matrix::from_fn(n, n, |r, k| v.get(r, order[k]));
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::symmetrize;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(d: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        symmetrize(&Matrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0))).unwrap()
    }

    fn orthonormality_error(u: &Matrix) -> f64 {
        u.transpose()
            .matmul(u)
            .unwrap()
            .sub(&Matrix::identity(u.rows()))
            .unwrap()
            .frobenius_norm()
    }

    #[test]
    fn diagonal_input() {
        let e = jacobi_eig(&SymMatrix::from_diag(&[1.0, 3.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);
        // Signed permutation of the identity.
        for v in e.eigenvectors.as_slice() {
            assert!(*v == 0.0 || v.abs() == 1.0);
        }
        assert_eq!(e.eigenvectors.get(1, 0).abs(), 1.0);
    }

    #[test]
    fn classic_two_by_two() {
        let m = SymMatrix::new(Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap()).unwrap();
        let e = jacobi_eig(&m).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_16() {
        let m = random_sym(16, 7);
        let e = jacobi_eig(&m).unwrap();
        let rel = e.reconstruct().sub(&m).unwrap().frobenius_norm() / m.frobenius_norm();
        assert!(rel <= 1e-12, "reconstruction error {rel:e}");
        assert!(orthonormality_error(&e.eigenvectors) <= 1e-10 * 16.0);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn trace_and_norm_match_spectrum() {
        let m = random_sym(6, 11);
        let e = jacobi_eig(&m).unwrap();
        let sum: f64 = e.eigenvalues.iter().sum();
        let sq: f64 = e.eigenvalues.iter().map(|l| l * l).sum();
        assert!((m.trace() - sum).abs() <= 1e-10 * sum.abs().max(1.0));
        assert!((m.frobenius_norm() - sq.sqrt()).abs() <= 1e-10 * sq.sqrt());
    }

    #[test]
    fn zero_and_scalar_matrices() {
        let e = jacobi_eig(&SymMatrix::zeros(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0; 3]);
        let e = jacobi_eig(&SymMatrix::scaled_identity(1, 5.0)).unwrap();
        assert_eq!(e.eigenvalues, vec![5.0]);
    }

    #[test]
    fn large_matrix_converges() {
        let m = random_sym(128, 3);
        let e = jacobi_eig(&m).unwrap();
        let rel = e.reconstruct().sub(&m).unwrap().frobenius_norm() / m.frobenius_norm();
        assert!(rel <= 1e-10, "reconstruction error {rel:e}");
        assert!(orthonormality_error(&e.eigenvectors) <= 1e-10 * 128.0);
    }
}
