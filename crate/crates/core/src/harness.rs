//! Drivers behind the `isqrt-cov` subcommands.
//!
//! Each driver returns typed records plus a CSV rendering. CSV output starts
//! with `#` provenance comments followed by the header line. Apart from the
//! benchmark, whose timing columns and timestamp vary run to run, the CSV is
//! a pure function of the arguments.

use std::fmt::Write as _;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::cov_pool::covariance_forward;
use crate::error::{Error, Result};
use crate::isqrt::{backward, forward, forward_inference, MetaLayerConfig, NormMode};
use crate::matrix::{jacobi_eig, SymMatrix};
use crate::oracle::{check_gradients, exact_sqrt, random_features, random_symmetric, GradReport, GRAD_CSV_HEADER};

// ---------------------------------------------------------------------------
// gradcheck

#[derive(Debug, Clone)]
pub struct GradcheckArgs {
    pub ds: Vec<usize>,
    /// Features per sample; `None` uses `n = 2d` for each `d`.
    pub n: Option<usize>,
    pub iters: Vec<usize>,
    pub modes: Vec<NormMode>,
    pub seeds: Vec<u64>,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct GradcheckOutcome {
    pub reports: Vec<GradReport>,
    pub csv: String,
}

impl GradcheckOutcome {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Runs [`check_gradients`] over the cross product `d × N × mode × seed`.
pub fn run_gradcheck(args: &GradcheckArgs) -> Result<GradcheckOutcome> {
    if args.ds.is_empty() || args.iters.is_empty() || args.modes.is_empty() || args.seeds.is_empty() {
        return Err(Error::InvalidArgument("every grid axis needs at least one value".into()));
    }
    if args.ds.contains(&0) || args.n == Some(0) || args.iters.contains(&0) {
        return Err(Error::InvalidArgument("d, n and N must be at least 1".into()));
    }
    let mut csv = String::new();
    let _ = writeln!(
        csv,
        "# gradcheck d={} n={} N={} mode={} seed={} tol={:e}",
        join(&args.ds),
        args.n.map_or_else(|| "2d".to_string(), |n| n.to_string()),
        join(&args.iters),
        join(&args.modes),
        join(&args.seeds),
        args.tol
    );
    csv.push_str(GRAD_CSV_HEADER);
    csv.push('\n');

    let mut reports = Vec::new();
    for &d in &args.ds {
        let n = args.n.unwrap_or(2 * d);
        for &iterations in &args.iters {
            for &mode in &args.modes {
                for &seed in &args.seeds {
                    let r = check_gradients(d, n, iterations, mode, seed, args.tol)?;
                    csv.push_str(&r.csv_row());
                    csv.push('\n');
                    reports.push(r);
                }
            }
        }
    }
    Ok(GradcheckOutcome { reports, csv })
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

// ---------------------------------------------------------------------------
// converge

#[derive(Debug, Clone)]
pub struct ConvergeArgs {
    pub d: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub mode: NormMode,
    pub identity: bool,
    /// Explicit input matrix; overrides `identity` and the random draw.
    pub sigma: Option<SymMatrix>,
}

impl Default for ConvergeArgs {
    fn default() -> Self {
        Self {
            d: 64,
            max_iters: 12,
            seed: 0,
            mode: NormMode::Trace,
            identity: false,
            sigma: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub iterations: usize,
    /// `‖C² − Σ‖_F / ‖Σ‖_F` with `C = √s · Y_N`.
    pub residual: f64,
    /// `‖C − Σ^{1/2}‖_F / ‖Σ^{1/2}‖_F` against the eigen-decomposition root.
    pub rel_err_exact: f64,
    pub condition: f64,
}

pub const CONVERGE_CSV_HEADER: &str = "N,residual,rel_err_exact,condition";

#[derive(Debug, Clone)]
pub struct ConvergeOutcome {
    pub records: Vec<ConvergenceRecord>,
    pub csv: String,
}

/// `Σ = covariance_forward(X)` for `4d × d` uniform random features.
pub fn random_spd(d: usize, seed: u64) -> SymMatrix {
    let mut rng = crate::seeded_rng(seed);
    covariance_forward(&random_features(4 * d, d, &mut rng))
}

/// Relative residual and oracle error of the layer output for
/// `N = 1..=max_iters`.
pub fn convergence_sweep(sigma: &SymMatrix, mode: NormMode, max_iters: usize) -> Result<Vec<ConvergenceRecord>> {
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max iterations must be at least 1".into()));
    }
    let eig = jacobi_eig(sigma)?;
    let condition = if eig.min_eigenvalue() > 0.0 {
        eig.max_eigenvalue() / eig.min_eigenvalue()
    } else {
        f64::INFINITY
    };
    let exact = exact_sqrt(sigma)?;
    let sigma_norm = sigma.frobenius_norm();
    let exact_norm = exact.frobenius_norm();

    // The N-step iterates are a prefix of the max-step run, so one taped
    // forward covers the whole sweep.
    let (_, tape) = forward(sigma, &MetaLayerConfig::new(mode, max_iters))?;
    let scale = tape.normalizer.sqrt();
    let mut out = Vec::with_capacity(max_iters);
    for (k, y) in tape.iterates.ys.iter().enumerate().skip(1) {
        let c = y.scale(scale);
        let residual = c.matmul(&c)?.sub(sigma)?.frobenius_norm() / sigma_norm;
        let rel_err_exact = c.sub(&exact)?.frobenius_norm() / exact_norm;
        out.push(ConvergenceRecord {
            iterations: k,
            residual,
            rel_err_exact,
            condition,
        });
    }
    Ok(out)
}

pub fn run_converge(args: &ConvergeArgs) -> Result<ConvergeOutcome> {
    if args.sigma.is_none() && args.d == 0 {
        return Err(Error::InvalidArgument("d must be at least 1".into()));
    }
    let (sigma, source) = match (&args.sigma, args.identity) {
        (Some(s), _) => (s.clone(), "file".to_string()),
        (None, true) => (SymMatrix::identity(args.d), "identity".to_string()),
        (None, false) => (random_spd(args.d, args.seed), format!("random n={}", 4 * args.d)),
    };
    let records = convergence_sweep(&sigma, args.mode, args.max_iters)?;
    let mut csv = String::new();
    let _ = writeln!(
        csv,
        "# converge d={} max_iters={} seed={} mode={} sigma={}",
        sigma.dim(),
        args.max_iters,
        args.seed,
        args.mode,
        source
    );
    csv.push_str(CONVERGE_CSV_HEADER);
    csv.push('\n');
    for r in &records {
        let _ = writeln!(csv, "{},{:e},{:e},{:e}", r.iterations, r.residual, r.rel_err_exact, r.condition);
    }
    Ok(ConvergeOutcome { records, csv })
}

// ---------------------------------------------------------------------------
// bench

#[derive(Debug, Clone)]
pub struct BenchArgs {
    pub d: usize,
    pub iters: Vec<usize>,
    pub batch: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for BenchArgs {
    fn default() -> Self {
        Self {
            d: 256,
            iters: vec![3, 5],
            batch: 1,
            repeats: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    /// `ns` for the Newton-Schulz layer, `eig` for the exact eigen path.
    pub method: &'static str,
    pub d: usize,
    pub batch: usize,
    /// Iteration count; 0 for the eigen path.
    pub iterations: usize,
    pub repeats: usize,
    pub forward_ms: f64,
    /// Forward plus backward; `None` for the forward-only eigen path.
    pub forward_backward_ms: Option<f64>,
    /// Standard deviation of the slowest timed phase.
    pub std_ms: f64,
}

pub const BENCH_CSV_HEADER: &str = "method,d,batch,N,repeats,forward_ms,forward_backward_ms,std_ms";

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub records: Vec<BenchRecord>,
    pub csv: String,
}

fn time_ms<T>(mut f: impl FnMut() -> Result<T>) -> Result<f64> {
    let start = Instant::now();
    std::hint::black_box(f()?);
    Ok(start.elapsed().as_secs_f64() * 1e3)
}

fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Times `repeats + 1` runs and drops the first as warm-up.
fn timed<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<Vec<f64>> {
    let mut samples = Vec::with_capacity(repeats);
    time_ms(&mut f)?;
    for _ in 0..repeats {
        samples.push(time_ms(&mut f)?);
    }
    Ok(samples)
}

pub fn validate_bench(args: &BenchArgs) -> Result<()> {
    if args.d < 2 {
        return Err(Error::InvalidArgument("bench needs d >= 2".into()));
    }
    if args.repeats < 3 {
        return Err(Error::InvalidArgument("bench needs at least 3 repeats".into()));
    }
    if args.batch == 0 || args.iters.is_empty() || args.iters.contains(&0) {
        return Err(Error::InvalidArgument("batch and every N must be at least 1".into()));
    }
    Ok(())
}

/// Times the Newton-Schulz layer (forward, forward + backward) at each
/// requested `N` and the eigen-decomposition square root (forward) at the
/// same size. Runs strictly serially.
pub fn run_bench(args: &BenchArgs) -> Result<BenchOutcome> {
    validate_bench(args)?;
    let sigmas: Vec<SymMatrix> = (0..args.batch)
        .map(|b| random_spd(args.d, args.seed.wrapping_add(b as u64)))
        .collect();
    let mut rng = crate::seeded_rng(args.seed ^ 0x5eed);
    let upstream = random_symmetric(args.d, &mut rng).upper_triangle();

    let mut records = Vec::new();
    for &n in &args.iters {
        let cfg = MetaLayerConfig::new(NormMode::Trace, n);
        let fwd = timed(args.repeats, || {
            sigmas.iter().map(|s| forward_inference(s, &cfg)).collect::<Result<Vec<_>>>()
        })?;
        let fwd_bwd = timed(args.repeats, || {
            sigmas
                .iter()
                .map(|s| {
                    let (_, tape) = forward(s, &cfg)?;
                    backward(&tape, &upstream)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let (fwd_mean, _) = mean_std(&fwd);
        let (fb_mean, fb_std) = mean_std(&fwd_bwd);
        records.push(BenchRecord {
            method: "ns",
            d: args.d,
            batch: args.batch,
            iterations: n,
            repeats: args.repeats,
            forward_ms: fwd_mean,
            forward_backward_ms: Some(fb_mean),
            std_ms: fb_std,
        });
    }

    let eig = timed(args.repeats, || {
        sigmas
            .iter()
            .map(|s| exact_sqrt(s).map(|r| r.upper_triangle()))
            .collect::<Result<Vec<_>>>()
    })?;
    let (eig_mean, eig_std) = mean_std(&eig);
    records.push(BenchRecord {
        method: "eig",
        d: args.d,
        batch: args.batch,
        iterations: 0,
        repeats: args.repeats,
        forward_ms: eig_mean,
        forward_backward_ms: None,
        std_ms: eig_std,
    });

    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut csv = String::new();
    let _ = writeln!(
        csv,
        "# bench d={} N={} batch={} repeats={} seed={} unix_time={}",
        args.d,
        join(&args.iters),
        args.batch,
        args.repeats,
        args.seed,
        stamp
    );
    csv.push_str("# wall-clock monotonic timer; one warm-up run excluded; inputs allocated before timing\n");
    csv.push_str("# std_ms is over forward_backward for ns and over forward for eig\n");
    csv.push_str(BENCH_CSV_HEADER);
    csv.push('\n');
    for r in &records {
        let fb = r.forward_backward_ms.map_or_else(String::new, |v| format!("{v:.4}"));
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{:.4},{},{:.4}",
            r.method, r.d, r.batch, r.iterations, r.repeats, r.forward_ms, fb, r.std_ms
        );
    }
    Ok(BenchOutcome { records, csv })
}
