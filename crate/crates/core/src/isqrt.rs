//! The iterative matrix square root meta-layer.
//!
//! Forward: `Σ → A = Σ / s(Σ) → (Y_N, Z_N) → C = √s(Σ) · Y_N → triu(C)`,
//! where `s` is the trace or the Frobenius norm and `(Y_k, Z_k)` follow the
//! coupled Newton-Schulz recurrence
//!
//! ```text
//! T_k = 3I − Z_{k−1} Y_{k−1}
//! Y_k = ½ Y_{k−1} T_k
//! Z_k = ½ T_k Z_{k−1}
//! ```
//!
//! started from `Y_0 = A`, `Z_0 = I`. Only matrix products are involved.
//! The forward pass records every iterate in an [`IterationTape`] so that
//! [`backward`] can run the reverse recurrence.
//!
//! ```
//! use isqrt_cov::isqrt::{forward, MetaLayerConfig};
//! use isqrt_cov::matrix::SymMatrix;
//!
//! let sigma = SymMatrix::from_diag(&[9.0]);
//! let (out, _tape) = forward(&sigma, &MetaLayerConfig::default()).unwrap();
//! assert_eq!(out.vec, vec![3.0]);
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{symmetrize, triu_len, Matrix, SymMatrix};

/// How `Σ` is scaled before the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NormMode {
    #[default]
    Trace,
    Frobenius,
}

impl NormMode {
    pub const ALL: [NormMode; 2] = [NormMode::Trace, NormMode::Frobenius];

    pub fn as_str(self) -> &'static str {
        match self {
            NormMode::Trace => "trace",
            NormMode::Frobenius => "frobenius",
        }
    }

    /// `tr(Σ)` or `‖Σ‖_F`.
    pub fn normalizer(self, sigma: &SymMatrix) -> f64 {
        match self {
            NormMode::Trace => sigma.trace(),
            NormMode::Frobenius => sigma.frobenius_norm(),
        }
    }
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace" => Ok(NormMode::Trace),
            "frobenius" => Ok(NormMode::Frobenius),
            other => Err(Error::InvalidArgument(format!(
                "unknown normalization mode {other:?} (expected trace or frobenius)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaLayerConfig {
    pub mode: NormMode,
    /// Number of Newton-Schulz iterations, at least 1.
    pub iterations: usize,
    /// Smallest accepted normalizer; below it the input counts as degenerate.
    pub epsilon: f64,
}

impl Default for MetaLayerConfig {
    fn default() -> Self {
        Self {
            mode: NormMode::Trace,
            iterations: 5,
            epsilon: 1e-12,
        }
    }
}

impl MetaLayerConfig {
    pub fn new(mode: NormMode, iterations: usize) -> Self {
        Self {
            mode,
            iterations,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Newton-Schulz iterates `Y_0..Y_N` and `Z_0..Z_N`.
#[derive(Debug, Clone)]
pub struct NsIterates {
    pub ys: Vec<SymMatrix>,
    pub zs: Vec<SymMatrix>,
}

impl NsIterates {
    pub fn iterations(&self) -> usize {
        self.ys.len().saturating_sub(1)
    }

    pub fn y_last(&self) -> &SymMatrix {
        self.ys.last().expect("at least Y_0 is stored")
    }

    pub fn z_last(&self) -> &SymMatrix {
        self.zs.last().expect("at least Z_0 is stored")
    }
}

/// Everything the backward pass needs from a forward call.
#[derive(Debug, Clone)]
pub struct IterationTape {
    pub mode: NormMode,
    pub sigma: SymMatrix,
    pub normalizer: f64,
    pub iterates: NsIterates,
}

impl IterationTape {
    /// The pre-normalized input `A` (stored as `Y_0`).
    pub fn a(&self) -> &SymMatrix {
        &self.iterates.ys[0]
    }

    pub fn iterations(&self) -> usize {
        self.iterates.iterations()
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    /// Number of `d × d` matrices kept for the backward pass: `2(N+1)`.
    pub fn stored_matrices(&self) -> usize {
        self.iterates.ys.len() + self.iterates.zs.len()
    }
}

/// Bytes of `f64` storage for the `2(N+1)` tape iterates of a `d × d` input.
pub const fn tape_bytes(d: usize, iterations: usize) -> usize {
    2 * (iterations + 1) * d * d * std::mem::size_of::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerOutput {
    /// Compensated square root `C = √s(Σ) · Y_N`.
    pub c: SymMatrix,
    /// Row-major upper triangle of `c`, length `d(d+1)/2`.
    pub vec: Vec<f64>,
}

impl LayerOutput {
    fn from_c(c: SymMatrix) -> Self {
        let vec = c.upper_triangle();
        Self { c, vec }
    }
}

/// `A = Σ / s(Σ)`. Fails with [`Error::DegenerateInput`] when `s(Σ) < epsilon`.
pub fn pre_normalize(sigma: &SymMatrix, mode: NormMode, epsilon: f64) -> Result<(SymMatrix, f64)> {
    let normalizer = mode.normalizer(sigma);
    if !(normalizer >= epsilon) {
        return Err(Error::DegenerateInput { normalizer, epsilon });
    }
    let a = sigma.scale(1.0 / normalizer);
    debug_assert!(
        a.dim() > 64 || convergence_radius(&a).map_or(true, |r| r <= 1.0 + 1e-10),
        "pre-normalized matrix violates ‖A − I‖₂ ≤ 1"
    );
    Ok((a, normalizer))
}

/// `‖A − I‖₂` for symmetric `A`, via the eigen-decomposition.
pub fn convergence_radius(a: &SymMatrix) -> Result<f64> {
    let eig = crate::matrix::jacobi_eig(a)?;
    Ok(eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, &l| m.max((l - 1.0).abs())))
}

/// One Newton-Schulz step: `(Y, Z) ↦ (½ Y T, ½ T Z)` with `T = 3I − Z Y`.
fn ns_step(y: &SymMatrix, z: &SymMatrix) -> Result<(SymMatrix, SymMatrix)> {
    let t = z.matmul(y)?.shifted(3.0, -1.0)?;
    let y_next = symmetrize(&y.matmul(&t)?.scale(0.5))?;
    let z_next = symmetrize(&t.matmul(z)?.scale(0.5))?;
    Ok((y_next, z_next))
}

/// Runs `iterations` coupled Newton-Schulz steps from `Y_0 = a`, `Z_0 = I`
/// and keeps every iterate.
pub fn ns_forward(a: &SymMatrix, iterations: usize) -> Result<NsIterates> {
    let mut ys = Vec::with_capacity(iterations + 1);
    let mut zs = Vec::with_capacity(iterations + 1);
    ys.push(a.clone());
    zs.push(SymMatrix::identity(a.dim()));
    for k in 1..=iterations {
        let (y, z) = ns_step(&ys[k - 1], &zs[k - 1])?;
        if !y.is_finite() || !z.is_finite() {
            return Err(Error::Divergence { iteration: k });
        }
        ys.push(y);
        zs.push(z);
    }
    Ok(NsIterates { ys, zs })
}

/// `C = √s · Y_N` and its upper-triangular vectorization.
pub fn post_compensate(tape: &IterationTape) -> LayerOutput {
    LayerOutput::from_c(tape.iterates.y_last().scale(tape.normalizer.sqrt()))
}

/// Full forward pass, returning the output and the tape for [`backward`].
pub fn forward(sigma: &SymMatrix, cfg: &MetaLayerConfig) -> Result<(LayerOutput, IterationTape)> {
    cfg.validate()?;
    let (a, normalizer) = pre_normalize(sigma, cfg.mode, cfg.epsilon)?;
    let iterates = ns_forward(&a, cfg.iterations)?;
    let tape = IterationTape {
        mode: cfg.mode,
        sigma: sigma.clone(),
        normalizer,
        iterates,
    };
    Ok((post_compensate(&tape), tape))
}

/// Forward pass that keeps only the current iterate pair.
pub fn forward_inference(sigma: &SymMatrix, cfg: &MetaLayerConfig) -> Result<LayerOutput> {
    cfg.validate()?;
    let (mut y, normalizer) = pre_normalize(sigma, cfg.mode, cfg.epsilon)?;
    let mut z = SymMatrix::identity(sigma.dim());
    for k in 1..=cfg.iterations {
        (y, z) = ns_step(&y, &z)?;
        if !y.is_finite() || !z.is_finite() {
            return Err(Error::Divergence { iteration: k });
        }
    }
    Ok(LayerOutput::from_c(y.scale(normalizer.sqrt())))
}

/// Backward through post-compensation. Returns `(∂l/∂Y_N, ∂l/∂Σ|post)`.
pub fn backward_post(tape: &IterationTape, d_c: &SymMatrix) -> Result<(SymMatrix, SymMatrix)> {
    let y_n = tape.iterates.y_last();
    let s = tape.normalizer;
    let d_y = d_c.scale(s.sqrt());
    let inner = d_c.dot(y_n)?;
    let d_sigma_post = match tape.mode {
        NormMode::Trace => SymMatrix::scaled_identity(tape.dim(), inner / (2.0 * s.sqrt())),
        NormMode::Frobenius => tape.sigma.scale(inner / (2.0 * s.powf(1.5))),
    };
    Ok((d_y, d_sigma_post))
}

/// Reverse Newton-Schulz recurrence from `∂l/∂Y_N` (with `∂l/∂Z_N = 0`)
/// down to `∂l/∂A`.
pub fn backward_ns(iterates: &NsIterates, d_y_n: &SymMatrix) -> Result<SymMatrix> {
    let n_y = iterates.ys.len();
    if n_y < 2 || iterates.zs.len() != n_y {
        return Err(Error::TapeMismatch {
            expected: n_y.max(2),
            got: iterates.zs.len().min(n_y),
        });
    }
    let n = n_y - 1;
    let mut d_y = d_y_n.clone();
    let mut d_z: Option<SymMatrix> = None;

    for k in (2..=n).rev() {
        let y = &iterates.ys[k - 1];
        let z = &iterates.zs[k - 1];
        let yz = y.matmul(z)?;
        let zy = yz.transpose();
        let t = yz.shifted(3.0, -1.0)?;

        // ∂l/∂Y_{k−1} = ½(∂Y_k (3I − Y Z) − Z ∂Z_k Z − Z Y ∂Y_k)
        let mut gy = d_y.matmul(&t)?.sub(&zy.matmul(&d_y)?)?;
        // ∂l/∂Z_{k−1} = ½((3I − Y Z) ∂Z_k − Y ∂Y_k Y − ∂Z_k Z Y)
        let mut gz = y.matmul(&d_y)?.matmul(y)?.scale(-1.0);
        if let Some(dz) = &d_z {
            gy = gy.sub(&z.matmul(dz)?.matmul(z)?)?;
            gz = gz.add(&t.matmul(dz)?)?.sub(&dz.matmul(&zy)?)?;
        }
        d_y = symmetrize(&gy.scale(0.5))?;
        d_z = Some(symmetrize(&gz.scale(0.5))?);
    }

    // Terminal step with Y_0 = A and Z_0 = I:
    // ∂l/∂A = ½(∂Y_1 (3I − A) − ∂Z_1 − A ∂Y_1)
    let a = &iterates.ys[0];
    let mut g = d_y.matmul(&a.shifted(3.0, -1.0)?)?.sub(&a.matmul(&d_y)?)?;
    if let Some(dz) = &d_z {
        g = g.sub(dz)?;
    }
    symmetrize(&g.scale(0.5))
}

/// Backward through pre-normalization, adding the post-compensation term.
pub fn backward_pre(
    sigma: &SymMatrix,
    d_a: &SymMatrix,
    d_sigma_post: &SymMatrix,
    mode: NormMode,
) -> Result<SymMatrix> {
    let s = mode.normalizer(sigma);
    let inner = d_a.dot(sigma)?;
    let through_normalizer = match mode {
        NormMode::Trace => SymMatrix::scaled_identity(sigma.dim(), -inner / (s * s)),
        NormMode::Frobenius => sigma.scale(-inner / (s * s * s)),
    };
    through_normalizer.add(&d_a.scale(1.0 / s))?.add(d_sigma_post)
}

/// `∂l/∂Σ` from an upstream gradient on `C`.
pub fn backward_from_c(tape: &IterationTape, d_c: &SymMatrix) -> Result<SymMatrix> {
    if d_c.dim() != tape.dim() {
        return Err(Error::DimensionMismatch {
            op: "backward",
            left: tape.sigma.shape(),
            right: d_c.shape(),
        });
    }
    let (d_y_n, d_sigma_post) = backward_post(tape, d_c)?;
    let d_a = backward_ns(&tape.iterates, &d_y_n)?;
    backward_pre(&tape.sigma, &d_a, &d_sigma_post, tape.mode)
}

/// Adjoint of the upper-triangular vectorization: diagonal entries map
/// through unchanged, each off-diagonal entry is split in half between its
/// two mirror positions, so `⟨∂C, ΔC⟩ = ⟨∂vec, Δvec⟩` for symmetric `ΔC`.
pub fn scatter_vec_grad(d: usize, d_vec: &[f64]) -> Result<SymMatrix> {
    let expected = triu_len(d);
    if d_vec.len() != expected {
        return Err(Error::VecLength {
            expected,
            got: d_vec.len(),
        });
    }
    let mut m = Matrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        m.set(i, i, d_vec[k]);
        k += 1;
        for j in (i + 1)..d {
            let half = 0.5 * d_vec[k];
            m.set(i, j, half);
            m.set(j, i, half);
            k += 1;
        }
    }
    SymMatrix::new(m)
}

/// `∂l/∂Σ` from an upstream gradient on the vectorized output.
pub fn backward(tape: &IterationTape, d_vec: &[f64]) -> Result<SymMatrix> {
    let d_c = scatter_vec_grad(tape.dim(), d_vec)?;
    backward_from_c(tape, &d_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cov_pool::{covariance_forward, FeatureMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(d: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Matrix::from_fn(4 * d, d, |_, _| rng.random_range(-1.0..1.0));
        covariance_forward(&FeatureMatrix::new(x).unwrap())
    }

    fn random_sym(d: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        symmetrize(&Matrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0))).unwrap()
    }

    /// Scalar recurrence written out independently of the matrix code.
    fn scalar_ns(a: f64, n: usize) -> (f64, f64) {
        let (mut y, mut z) = (a, 1.0);
        for _ in 0..n {
            let t = 3.0 - z * y;
            (y, z) = (0.5 * y * t, 0.5 * t * z);
        }
        (y, z)
    }

    #[test]
    fn pre_normalize_scaled_identities() {
        let (a, s) = pre_normalize(&SymMatrix::identity(3), NormMode::Trace, 1e-12).unwrap();
        assert_eq!(s, 3.0);
        assert!(a.sub(&SymMatrix::scaled_identity(3, 1.0 / 3.0)).unwrap().max_abs() < 1e-16);

        let (a, s) = pre_normalize(&SymMatrix::scaled_identity(2, 4.0), NormMode::Frobenius, 1e-12).unwrap();
        assert!((s - 32f64.sqrt()).abs() < 1e-15);
        let expected = SymMatrix::scaled_identity(2, 1.0 / 2f64.sqrt());
        assert!(a.sub(&expected).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn pre_normalize_rejects_zero_covariance() {
        for mode in NormMode::ALL {
            let err = pre_normalize(&SymMatrix::zeros(4), mode, 1e-12).unwrap_err();
            assert!(matches!(err, Error::DegenerateInput { .. }));
        }
    }

    #[test]
    fn pre_normalized_spd_is_inside_convergence_region() {
        let sigma = random_spd(8, 21);
        let (a, _) = pre_normalize(&sigma, NormMode::Trace, 1e-12).unwrap();
        assert!(convergence_radius(&a).unwrap() < 1.0);
    }

    /// 16×16 pre-normalized SPD: oracle error and coupled residual both
    /// shrink with N; with trace normalization the eigenvalues average
    /// 1/16, so 1e-3 is reached at N = 7 rather than 5.
    #[test]
    fn ns_forward_approaches_exact_root() {
        let sigma = random_spd(16, 1);
        for (mode, reach) in [(NormMode::Trace, 7), (NormMode::Frobenius, 6)] {
            let (a, _) = pre_normalize(&sigma, mode, 1e-12).unwrap();
            let exact = crate::oracle::exact_sqrt(&a).unwrap();
            let it = ns_forward(&a, 10).unwrap();
            let err = |k: usize| it.ys[k].sub(&exact).unwrap().frobenius_norm() / exact.frobenius_norm();
            let coupled = |k: usize| {
                it.ys[k].matmul(&it.zs[k]).unwrap().sub(&Matrix::identity(16)).unwrap().frobenius_norm()
            };
            for k in (1..10).take_while(|&k| err(k) > 1e-10) {
                assert!(coupled(k + 1) < coupled(k), "{mode} N={k}");
                assert!(err(k + 1) < err(k), "{mode} N={k}");
            }
            assert!(err(reach) <= 1e-3, "{mode}: {:e}", err(reach));
            assert!(err(reach - 1) > 1e-3, "{mode}: {:e}", err(reach - 1));
        }
    }

    #[test]
    fn ns_identity_is_fixed_point() {
        let it = ns_forward(&SymMatrix::identity(3), 4).unwrap();
        for (y, z) in it.ys.iter().zip(&it.zs) {
            assert_eq!(y, &SymMatrix::identity(3));
            assert_eq!(z, &SymMatrix::identity(3));
        }
    }

    #[test]
    fn ns_quarter_identity_one_step() {
        let it = ns_forward(&SymMatrix::scaled_identity(2, 0.25), 1).unwrap();
        assert_eq!(it.ys[1], SymMatrix::scaled_identity(2, 11.0 / 32.0));
        assert_eq!(it.zs[1], SymMatrix::scaled_identity(2, 11.0 / 8.0));
    }

    #[test]
    fn tape_shape() {
        let (_, tape) = forward(&random_spd(5, 1), &MetaLayerConfig::default()).unwrap();
        assert_eq!(tape.iterates.ys.len(), 6);
        assert_eq!(tape.iterates.zs.len(), 6);
        assert_eq!(tape.a(), &tape.iterates.ys[0]);
        assert_eq!(tape.iterates.zs[0], SymMatrix::identity(5));
        assert_eq!(tape.stored_matrices(), 12);
        assert_eq!(tape_bytes(256, 5), 12 * 256 * 256 * 8);
    }

    #[test]
    fn post_compensate_scalar_and_identity() {
        let (out, _) = forward(&SymMatrix::from_diag(&[9.0]), &MetaLayerConfig::new(NormMode::Trace, 3)).unwrap();
        assert!((out.c.get(0, 0) - 3.0).abs() <= 1e-12);

        let (out, _) = forward(&SymMatrix::identity(4), &MetaLayerConfig::new(NormMode::Trace, 5)).unwrap();
        let (y5, _) = scalar_ns(0.25, 5);
        let expected = SymMatrix::scaled_identity(4, 2.0 * y5);
        assert_eq!(out.c, expected);
    }

    #[test]
    fn vec_length_for_d256() {
        assert_eq!(triu_len(256), 32896);
        let (out, _) = forward(&SymMatrix::identity(256), &MetaLayerConfig::new(NormMode::Trace, 1)).unwrap();
        assert_eq!(out.vec.len(), 32896);
    }

    #[test]
    fn inference_matches_taped_forward() {
        let sigma = random_spd(6, 4);
        for mode in NormMode::ALL {
            let cfg = MetaLayerConfig::new(mode, 4);
            let (out, _) = forward(&sigma, &cfg).unwrap();
            assert_eq!(forward_inference(&sigma, &cfg).unwrap(), out);
        }
    }

    #[test]
    fn scalar_chain_is_exact() {
        for mode in NormMode::ALL {
            for n in 1..=6 {
                let sigma = SymMatrix::from_diag(&[2.5]);
                let (out, tape) = forward(&sigma, &MetaLayerConfig::new(mode, n)).unwrap();
                assert!((out.vec[0] - 2.5f64.sqrt()).abs() <= 1e-12);
                let g = backward(&tape, &[0.7]).unwrap();
                assert!((g.get(0, 0) - 0.7 / (2.0 * 2.5f64.sqrt())).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn backward_zero_upstream() {
        let (_, tape) = forward(&random_spd(4, 2), &MetaLayerConfig::default()).unwrap();
        let g = backward(&tape, &vec![0.0; 10]).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        let (dy, dpost) = backward_post(&tape, &SymMatrix::zeros(4)).unwrap();
        assert_eq!(dy.max_abs() + dpost.max_abs(), 0.0);
        let z = SymMatrix::zeros(4);
        assert_eq!(backward_pre(&tape.sigma, &z, &z, NormMode::Trace).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn backward_rejects_wrong_lengths() {
        let (_, tape) = forward(&random_spd(3, 2), &MetaLayerConfig::default()).unwrap();
        assert!(matches!(
            backward(&tape, &[1.0; 5]),
            Err(Error::VecLength { expected: 6, got: 5 })
        ));
        let broken = NsIterates {
            ys: tape.iterates.ys.clone(),
            zs: tape.iterates.zs[..3].to_vec(),
        };
        assert!(matches!(
            backward_ns(&broken, &SymMatrix::identity(3)),
            Err(Error::TapeMismatch { .. })
        ));
    }

    /// At A = I every iterate is I, so the reverse recurrence collapses to
    /// dY' = ½(dY − dZ), dZ' = ½(dZ − dY) and the terminal step
    /// dA = ½(dY − dZ). Y_N is a polynomial in A, so at A = I its derivative
    /// in any direction is y_N'(1)·G = ½G, the derivative of √a at 1.
    #[test]
    fn backward_ns_at_identity_follows_linear_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_sym(3, &mut rng);
        for n in 1..=5 {
            let it = ns_forward(&SymMatrix::identity(3), n).unwrap();
            let d_a = backward_ns(&it, &g).unwrap();
            let (mut cy, mut cz) = (1.0, 0.0);
            for _ in 2..=n {
                (cy, cz) = (0.5 * (cy - cz), 0.5 * (cz - cy));
            }
            let coeff = 0.5 * (cy - cz);
            assert_eq!(coeff, 0.5);
            let expected = g.scale(coeff);
            assert!(d_a.sub(&expected).unwrap().max_abs() <= 1e-14, "N={n}");
        }
    }

    #[test]
    fn backward_ns_single_iteration_is_terminal_formula() {
        let a = pre_normalize(&random_spd(4, 5), NormMode::Trace, 1e-12).unwrap().0;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = random_sym(4, &mut rng);
        let it = ns_forward(&a, 1).unwrap();
        let d_a = backward_ns(&it, &g).unwrap();
        let three_minus_a = a.shifted(3.0, -1.0).unwrap();
        let expected = g
            .matmul(&three_minus_a)
            .unwrap()
            .sub(&a.matmul(&g).unwrap())
            .unwrap()
            .scale(0.5);
        assert!(d_a.as_matrix().sub(&expected).unwrap().max_abs() <= 1e-15);
    }

    #[test]
    fn zero_iterations_rejected() {
        let err = forward(&SymMatrix::identity(2), &MetaLayerConfig::new(NormMode::Trace, 0)).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
