//! Command-line front end: gradient checks, convergence sweeps, timing and
//! the training demo. Exit status is 0 on success, 1 when a check fails or
//! a run aborts, 2 on a usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isqrt_cov::harness::{
    run_bench, run_converge, run_gradcheck, BenchArgs, ConvergeArgs, GradcheckArgs,
};
use isqrt_cov::isqrt::{MetaLayerConfig, NormMode};
use isqrt_cov::matrix::io::load_matrix;
use isqrt_cov::matrix::symmetrize;
use isqrt_cov::train::{run_train_demo, Head, TaskConfig, TrainConfig, DEFAULT_LR};
use isqrt_cov::Error;

#[derive(Parser)]
#[command(name = "isqrt-cov", version, about = "Covariance pooling with Newton-Schulz square root normalization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare analytic layer gradients against finite differences.
    Gradcheck(GradcheckCmd),
    /// Residual and oracle error of the layer output for N = 1..max.
    Converge(ConvergeCmd),
    /// Time the Newton-Schulz layer against the eigen-decomposition root.
    Bench(BenchCmd),
    /// Train a small model on the synthetic covariance task.
    TrainDemo(TrainDemoCmd),
}

#[derive(Args)]
struct Output {
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GradcheckCmd {
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<usize>,
    /// Features per sample [default: 2d]
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
    iters: Vec<usize>,
    /// trace, frobenius or both; comma lists are accepted.
    #[arg(long, value_delimiter = ',', default_value = "both")]
    mode: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    seed: Vec<u64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ConvergeCmd {
    #[arg(long, default_value_t = 64)]
    d: usize,
    #[arg(long, default_value_t = 12)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "trace")]
    mode: NormMode,
    /// Use Σ = I instead of a random covariance.
    #[arg(long)]
    identity: bool,
    /// Read Σ from a matrix text file.
    #[arg(long, conflicts_with = "identity")]
    sigma: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BenchCmd {
    #[arg(long, default_value_t = 256)]
    d: usize,
    #[arg(long, value_delimiter = ',', default_value = "3,5")]
    iters: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    batch: usize,
    #[arg(long, default_value_t = 20)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TrainDemoCmd {
    #[arg(long, default_value_t = 4)]
    classes: usize,
    #[arg(long, default_value_t = 16)]
    d: usize,
    #[arg(long, default_value_t = 36)]
    n: usize,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = DEFAULT_LR)]
    lr: f64,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    #[arg(long, default_value_t = 0.0)]
    weight_decay: f64,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long, default_value = "isqrt")]
    head: Head,
    /// Unit-normalize the pooled vector before the classifier.
    #[arg(long)]
    l2: bool,
    #[arg(long, default_value_t = 3)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Parse { .. } => Failure::Usage(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

fn emit(output: &Output, csv: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => std::fs::write(path, csv).map_err(|e| Failure::Check(format!("{}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn parse_modes(raw: &[String]) -> Result<Vec<NormMode>, Failure> {
    let mut modes = Vec::new();
    for m in raw {
        let add: Vec<NormMode> = if m == "both" { NormMode::ALL.to_vec() } else { vec![m.parse()?] };
        for mode in add {
            if !modes.contains(&mode) {
                modes.push(mode);
            }
        }
    }
    Ok(modes)
}

fn gradcheck(cmd: GradcheckCmd) -> Result<(), Failure> {
    let args = GradcheckArgs {
        ds: cmd.d,
        n: cmd.n,
        iters: cmd.iters,
        modes: parse_modes(&cmd.mode)?,
        seeds: cmd.seed,
        tol: cmd.tol,
    };
    let outcome = run_gradcheck(&args)?;
    emit(&cmd.output, &outcome.csv)?;
    let failed: Vec<_> = outcome.reports.iter().filter(|r| !r.pass).collect();
    eprintln!("gradcheck: {}/{} cells pass", outcome.reports.len() - failed.len(), outcome.reports.len());
    for r in &failed {
        eprintln!("  FAIL {r}");
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} gradient check(s) failed", failed.len())))
    }
}

fn converge(cmd: ConvergeCmd) -> Result<(), Failure> {
    let sigma = match &cmd.sigma {
        Some(path) => Some(symmetrize(&load_matrix(path)?)?),
        None => None,
    };
    let args = ConvergeArgs {
        d: cmd.d,
        max_iters: cmd.max_iters,
        seed: cmd.seed,
        mode: cmd.mode,
        identity: cmd.identity,
        sigma,
    };
    let outcome = run_converge(&args)?;
    emit(&cmd.output, &outcome.csv)
}

fn bench(cmd: BenchCmd) -> Result<(), Failure> {
    let args = BenchArgs {
        d: cmd.d,
        iters: cmd.iters,
        batch: cmd.batch,
        repeats: cmd.repeats,
        seed: cmd.seed,
    };
    let outcome = run_bench(&args)?;
    emit(&cmd.output, &outcome.csv)
}

fn train_demo(cmd: TrainDemoCmd) -> Result<(), Failure> {
    let task = TaskConfig {
        classes: cmd.classes,
        n: cmd.n,
        seed: cmd.seed,
        ..TaskConfig::default()
    };
    let cfg = TrainConfig {
        head: cmd.head,
        d: cmd.d,
        epochs: cmd.epochs,
        lr: cmd.lr,
        momentum: cmd.momentum,
        weight_decay: cmd.weight_decay,
        batch_size: cmd.batch,
        layer: MetaLayerConfig::default(),
        l2_normalize: cmd.l2,
        seed: cmd.seed,
    };
    let (outcome, csv) = run_train_demo(&task, &cfg)?;
    emit(&cmd.output, &csv)?;
    let last = outcome.final_log();
    eprintln!(
        "train-demo {}: train_loss {:.4e} train_acc {:.3} test_acc {:.3}",
        last.head, last.train_loss, last.train_acc, last.test_acc
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gradcheck(c) => gradcheck(c),
        Command::Converge(c) => converge(c),
        Command::Bench(c) => bench(c),
        Command::TrainDemo(c) => train_demo(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("isqrt-cov: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("isqrt-cov: usage: {msg}");
            ExitCode::from(2)
        }
    }
}
