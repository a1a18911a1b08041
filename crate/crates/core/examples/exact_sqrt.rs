//! Jacobi eigen-decomposition and the exact square root it yields.
//!
//! cargo run --example exact_sqrt

use isqrt_cov::harness::random_spd;
use isqrt_cov::matrix::{jacobi_eig, Matrix};
use isqrt_cov::oracle::{exact_sqrt, scalar_ns};

fn main() -> isqrt_cov::Result<()> {
    for d in [4, 16, 64] {
        let sigma = random_spd(d, 3);
        let eig = jacobi_eig(&sigma)?;
        let u = &eig.eigenvectors;
        let ortho = u.transpose().matmul(u)?.sub(&Matrix::identity(d))?.frobenius_norm();
        let root = exact_sqrt(&sigma)?;
        let residual = root.matmul(&root)?.sub(&sigma)?.frobenius_norm() / sigma.frobenius_norm();
        println!(
            "d={d:>2}: λ ∈ [{:.3e}, {:.3e}], ‖UᵀU − I‖ = {ortho:.1e}, ‖R² − Σ‖/‖Σ‖ = {residual:.1e}",
            eig.min_eigenvalue(),
            eig.max_eigenvalue()
        );
    }

    // The scalar recurrence shows why small normalized eigenvalues need more steps.
    for a in [0.5, 1.0 / 16.0, 1.0 / 64.0] {
        let errs: Vec<String> = [1, 3, 5, 7, 9]
            .iter()
            .map(|&n| format!("{:.1e}", (scalar_ns(a, n).0 - a.sqrt()).abs() / a.sqrt()))
            .collect();
        println!("a = {a:<8}: relative error at N = 1,3,5,7,9: {}", errs.join(" "));
    }
    Ok(())
}
