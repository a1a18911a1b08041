//! Save a covariance to the text format and read it back.
//!
//! cargo run --example matrix_io

use isqrt_cov::harness::random_spd;
use isqrt_cov::matrix::io::{format_matrix, load_matrix, save_matrix};
use isqrt_cov::matrix::symmetrize;

fn main() -> isqrt_cov::Result<()> {
    let sigma = random_spd(3, 2);
    print!("{}", format_matrix(&sigma));
    let path = std::env::temp_dir().join("isqrt_cov_sigma.txt");
    save_matrix(&sigma, &path)?;
    let back = symmetrize(&load_matrix(&path)?)?;
    println!("round trip exact: {}", back == sigma);
    println!("usable as: isqrt-cov converge --sigma {}", path.display());
    Ok(())
}
