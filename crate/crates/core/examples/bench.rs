//! Newton-Schulz layer against the eigen-decomposition square root.
//!
//! cargo run --release --example bench [d] [repeats]

use isqrt_cov::harness::{run_bench, BenchArgs};

fn main() -> isqrt_cov::Result<()> {
    let mut args = std::env::args().skip(1);
    let d: usize = args.next().map_or(128, |s| s.parse().expect("d"));
    let repeats: usize = args.next().map_or(10, |s| s.parse().expect("repeats"));
    let out = run_bench(&BenchArgs {
        d,
        repeats,
        ..BenchArgs::default()
    })?;
    print!("{}", out.csv);
    Ok(())
}
