//! Covariance pooling with iterative matrix square root normalization.
//!
//! The pipeline pools `n × d` local features into a `d × d` covariance,
//! pre-normalizes it, runs a fixed number of coupled Newton-Schulz
//! iterations to approximate its square root, compensates the scale and
//! emits the `d(d+1)/2` upper-triangular entries. Every stage has an
//! analytic backward pass.
//!
//! - [`matrix`]: dense matrices, symmetric wrapper, Jacobi eigensolver, text I/O.
//! - [`cov_pool`]: covariance forward/backward.
//! - [`isqrt`]: the meta-layer forward with tape and its backward.
//! - [`oracle`]: exact square root, scalar recurrence, finite differences.
//! - [`harness`]: gradient-check grid, convergence sweep, timing, CSV output.
//! - [`train`]: synthetic covariance-discrimination task and SGD training.

pub mod cov_pool;
pub mod error;
pub mod harness;
pub mod isqrt;
pub mod matrix;
pub mod oracle;
pub mod train;

pub use error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator used by every seeded routine in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
