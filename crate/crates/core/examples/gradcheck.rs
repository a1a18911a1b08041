//! Analytic gradients of the full pooling + square root stack against
//! finite differences.
//!
//! cargo run --release --example gradcheck

use isqrt_cov::harness::{run_gradcheck, GradcheckArgs};
use isqrt_cov::isqrt::NormMode;

fn main() -> isqrt_cov::Result<()> {
    let out = run_gradcheck(&GradcheckArgs {
        ds: vec![1, 2, 4, 8],
        n: None,
        iters: vec![1, 3, 5],
        modes: NormMode::ALL.to_vec(),
        seeds: vec![1, 2, 3],
        tol: 1e-6,
    })?;
    for r in &out.reports {
        println!("{r}");
    }
    let worst = out.reports.iter().map(|r| r.max_rel_err).fold(0.0, f64::max);
    println!("{} cells, all pass: {}, worst relative error {worst:.2e}", out.reports.len(), out.all_pass());
    Ok(())
}
