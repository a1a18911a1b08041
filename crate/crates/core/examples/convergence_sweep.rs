//! Error of the layer output as the iteration count grows.
//!
//! cargo run --release --example convergence_sweep [d] [seed]

use isqrt_cov::harness::{convergence_sweep, random_spd};
use isqrt_cov::isqrt::NormMode;

fn main() -> isqrt_cov::Result<()> {
    let mut args = std::env::args().skip(1);
    let d: usize = args.next().map_or(64, |s| s.parse().expect("d"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));
    let sigma = random_spd(d, seed);

    let trace = convergence_sweep(&sigma, NormMode::Trace, 14)?;
    let frob = convergence_sweep(&sigma, NormMode::Frobenius, 14)?;
    println!("d={d} seed={seed} condition={:.2}", trace[0].condition);
    println!("{:>3}  {:>12}  {:>12}", "N", "trace", "frobenius");
    for (t, f) in trace.iter().zip(&frob) {
        println!("{:>3}  {:>12.3e}  {:>12.3e}", t.iterations, t.rel_err_exact, f.rel_err_exact);
    }
    Ok(())
}
