//! Forward and backward through the square root layer.
//!
//! cargo run --example meta_layer

use isqrt_cov::harness::random_spd;
use isqrt_cov::isqrt::{backward, forward, tape_bytes, MetaLayerConfig, NormMode};
use isqrt_cov::oracle::exact_sqrt;

fn main() -> isqrt_cov::Result<()> {
    let d = 8;
    let sigma = random_spd(d, 1);
    let exact = exact_sqrt(&sigma)?;

    for mode in NormMode::ALL {
        for n in [1, 3, 5, 8] {
            let (out, _) = forward(&sigma, &MetaLayerConfig::new(mode, n))?;
            let err = out.c.sub(&exact)?.frobenius_norm() / exact.frobenius_norm();
            println!("{:>9} N={n}: ‖C − Σ^½‖/‖Σ^½‖ = {err:.3e}", mode.as_str());
        }
    }

    let cfg = MetaLayerConfig::default();
    let (out, tape) = forward(&sigma, &cfg)?;
    println!(
        "output vector has {} entries; tape holds {} matrices ({} bytes)",
        out.vec.len(),
        tape.stored_matrices(),
        tape_bytes(d, cfg.iterations)
    );

    // Upstream gradient of l = Σ vec_i.
    let d_sigma = backward(&tape, &vec![1.0; out.vec.len()])?;
    println!("∂l/∂Σ diagonal: {:.4?}", (0..d).map(|i| d_sigma.get(i, i)).collect::<Vec<_>>());
    Ok(())
}
