//! Pool a bag of local features into a covariance and push a gradient back.
//!
//! cargo run --example covariance_pooling

use isqrt_cov::cov_pool::{covariance_backward, covariance_forward, FeatureMatrix};
use isqrt_cov::matrix::Matrix;
use isqrt_cov::oracle::random_features;

fn main() -> isqrt_cov::Result<()> {
    // Two features in three dimensions.
    let x = FeatureMatrix::new(Matrix::from_rows(&[&[1.0, 0.0, 2.0], &[3.0, 2.0, 0.0]])?)?;
    let sigma = covariance_forward(&x);
    println!("Σ for two samples:");
    for i in 0..sigma.dim() {
        println!("  {:?}", sigma.row(i));
    }

    let mut rng = isqrt_cov::seeded_rng(7);
    let x = random_features(64, 5, &mut rng);
    let sigma = covariance_forward(&x);
    println!("64 × 5 uniform features: tr(Σ) = {:.4} (population value 5/12)", sigma.trace());

    // Gradient of l = ‖Σ‖²_F / 2 with respect to the features.
    let dx = covariance_backward(&x, &sigma)?;
    let col_sums: Vec<f64> = (0..x.d()).map(|j| (0..x.n()).map(|i| dx.get(i, j)).sum()).collect();
    println!("∂l/∂X column sums (centering makes them vanish): {col_sums:?}");
    Ok(())
}
