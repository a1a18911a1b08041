//! End-to-end training demo on a synthetic covariance-discrimination task.
//!
//! Every sample is an `n × p` matrix of zero-mean rows whose covariance
//! depends on the class, so the class signal lives entirely in second-order
//! statistics. The model is
//!
//! ```text
//! X (n×p) ─W─▶ H = X W (n×d) ─▶ head(H) ─▶ logits = feat · V + b ─▶ softmax CE
//! ```
//!
//! with three interchangeable heads: the square-root normalized covariance
//! (`isqrt`), the raw covariance (`plain`) and the first-order mean (`avg`).
//! Training is minibatch SGD with momentum and is fully deterministic for a
//! given seed.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::cov_pool::{covariance_backward, covariance_forward, FeatureMatrix};
use crate::error::{Error, Result};
use crate::isqrt::{backward as isqrt_backward, forward as isqrt_forward, scatter_vec_grad, MetaLayerConfig};
use crate::matrix::{triu_len, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Head {
    Isqrt,
    Plain,
    Avg,
}

impl Head {
    pub fn as_str(self) -> &'static str {
        match self {
            Head::Isqrt => "isqrt",
            Head::Plain => "plain",
            Head::Avg => "avg",
        }
    }

    /// Length of the pooled representation fed to the classifier.
    pub fn feature_len(self, d: usize) -> usize {
        match self {
            Head::Isqrt | Head::Plain => triu_len(d),
            Head::Avg => d,
        }
    }
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Head {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isqrt" => Ok(Head::Isqrt),
            "plain" => Ok(Head::Plain),
            "avg" => Ok(Head::Avg),
            other => Err(Error::InvalidArgument(format!(
                "unknown head {other:?} (expected isqrt, plain or avg)"
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// task

#[derive(Debug, Clone, PartialEq)]
pub struct TaskConfig {
    pub classes: usize,
    /// Raw feature dimension.
    pub p: usize,
    /// Features (rows) per sample.
    pub n: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    /// Class factors are `I + factor_scale · R / √p` with gaussian `R`.
    pub factor_scale: f64,
    /// Use one factor for every class (no signal at all).
    pub shared_factor: bool,
    pub seed: u64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            classes: 4,
            p: 16,
            n: 36,
            train_per_class: 64,
            test_per_class: 64,
            factor_scale: 1.0,
            shared_factor: false,
            seed: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Matrix,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTask {
    pub config: TaskConfig,
    /// `p × p` factor per class; rows of a class-`k` sample are `F_k g` with `g ~ N(0, I)`.
    pub factors: Vec<Matrix>,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

impl SyntheticTask {
    pub fn classes(&self) -> usize {
        self.config.classes
    }

    pub fn p(&self) -> usize {
        self.config.p
    }
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn draw_sample(factor: &Matrix, n: usize, label: usize, rng: &mut impl Rng) -> Sample {
    let g = gaussian_matrix(n, factor.rows(), rng);
    // Row i is F g_i, i.e. X = G Fᵀ.
    let x = g.matmul(&factor.transpose()).expect("n × p times p × p");
    Sample { x, label }
}

/// Builds the task deterministically from `cfg.seed`.
pub fn generate_task(cfg: &TaskConfig) -> Result<SyntheticTask> {
    if cfg.classes < 2 || cfg.p < 2 || cfg.n < 2 {
        return Err(Error::InvalidArgument("task needs classes >= 2, p >= 2 and n >= 2".into()));
    }
    let mut rng = crate::seeded_rng(cfg.seed);
    let inv_sqrt_p = 1.0 / (cfg.p as f64).sqrt();
    let make_factor = |rng: &mut rand_chacha::ChaCha8Rng| {
        let r = gaussian_matrix(cfg.p, cfg.p, rng);
        r.scale(cfg.factor_scale * inv_sqrt_p).shifted(1.0, 1.0).expect("square")
    };
    let factors: Vec<Matrix> = if cfg.shared_factor {
        let f = make_factor(&mut rng);
        vec![f; cfg.classes]
    } else {
        (0..cfg.classes).map(|_| make_factor(&mut rng)).collect()
    };

    let draw = |per_class: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        let mut out = Vec::with_capacity(per_class * cfg.classes);
        for _ in 0..per_class {
            for (label, f) in factors.iter().enumerate() {
                out.push(draw_sample(f, cfg.n, label, rng));
            }
        }
        out
    };
    let train = draw(cfg.train_per_class, &mut rng);
    let test = draw(cfg.test_per_class, &mut rng);
    Ok(SyntheticTask {
        config: cfg.clone(),
        factors,
        train,
        test,
    })
}

// ---------------------------------------------------------------------------
// model

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// `p × d` feature map.
    pub w: Matrix,
    /// `feature_len × K` classifier weights.
    pub v: Matrix,
    /// `K` classifier biases.
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Grads {
    w: Matrix,
    v: Matrix,
    b: Vec<f64>,
}

impl Grads {
    fn zeros_like(p: &ModelParams) -> Self {
        Self {
            w: Matrix::zeros(p.w.rows(), p.w.cols()),
            v: Matrix::zeros(p.v.rows(), p.v.cols()),
            b: vec![0.0; p.b.len()],
        }
    }

    fn accumulate(&mut self, other: &Grads) {
        add_into(&mut self.w, &other.w);
        add_into(&mut self.v, &other.v);
        for (a, b) in self.b.iter_mut().zip(&other.b) {
            *a += b;
        }
    }
}

fn add_into(acc: &mut Matrix, m: &Matrix) {
    for (a, b) in acc.as_mut_slice().iter_mut().zip(m.as_slice()) {
        *a += b;
    }
}

fn uniform_init(rows: usize, cols: usize, fan_in: usize, rng: &mut impl Rng) -> Matrix {
    let bound = 1.0 / (fan_in as f64).sqrt();
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-bound..bound))
}

impl ModelParams {
    /// Uniform `±1/√fan_in` initialization for both `W` and the classifier.
    pub fn init(p: usize, d: usize, head: Head, classes: usize, rng: &mut impl Rng) -> Self {
        let f = head.feature_len(d);
        Self {
            w: uniform_init(p, d, p, rng),
            v: uniform_init(f, classes, f, rng),
            b: (0..classes).map(|_| rng.random_range(-1.0..1.0) / (f as f64).sqrt()).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.v.is_finite() && self.b.iter().all(|v| v.is_finite())
    }
}

/// `vec / ‖vec‖₂`.
pub fn l2_normalize_vec(vec: &[f64]) -> Result<Vec<f64>> {
    let norm = vec.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(vec.iter().map(|v| v / norm).collect())
}

/// Numerically stable softmax cross-entropy. Returns `(loss, ∂loss/∂logits)`.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let loss = sum.ln() + max - logits[label];
    let mut grad: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    grad[label] -= 1.0;
    (loss, grad)
}

enum PoolTape {
    Isqrt(crate::isqrt::IterationTape),
    Plain,
    Avg,
}

struct Forward {
    h: FeatureMatrix,
    /// Norm of the pooled vector when it was normalized.
    norm: Option<f64>,
    feat: Vec<f64>,
    pool: PoolTape,
    logits: Vec<f64>,
}

/// Forward/backward for one model configuration.
#[derive(Debug, Clone)]
pub struct Model {
    pub head: Head,
    pub layer: MetaLayerConfig,
    /// Scale the pooled vector to unit length before the classifier.
    pub l2_normalize: bool,
    pub params: ModelParams,
}

impl Model {
    fn forward(&self, x: &Matrix) -> Result<Forward> {
        let h = FeatureMatrix::new(x.matmul(&self.params.w)?)?;
        let (feat, pool) = match self.head {
            Head::Isqrt => {
                let (out, tape) = isqrt_forward(&covariance_forward(&h), &self.layer)?;
                (out.vec, PoolTape::Isqrt(tape))
            }
            Head::Plain => (covariance_forward(&h).upper_triangle(), PoolTape::Plain),
            Head::Avg => {
                let n = h.n() as f64;
                let mut mean = vec![0.0; h.d()];
                for i in 0..h.n() {
                    for (m, v) in mean.iter_mut().zip(h.values().row(i)) {
                        *m += v / n;
                    }
                }
                (mean, PoolTape::Avg)
            }
        };
        let (feat, norm) = if self.l2_normalize {
            let norm = feat.iter().map(|v| v * v).sum::<f64>().sqrt();
            (l2_normalize_vec(&feat)?, Some(norm))
        } else {
            (feat, None)
        };
        let v = &self.params.v;
        let logits = (0..v.cols())
            .map(|k| self.params.b[k] + feat.iter().enumerate().map(|(j, f)| f * v.get(j, k)).sum::<f64>())
            .collect();
        Ok(Forward { h, norm, feat, pool, logits })
    }

    pub fn logits(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.logits)
    }

    /// Cross-entropy of one sample.
    pub fn loss(&self, sample: &Sample) -> Result<f64> {
        Ok(softmax_cross_entropy(&self.logits(&sample.x)?, sample.label).0)
    }

    fn loss_and_grads(&self, sample: &Sample) -> Result<(f64, Grads)> {
        let fwd = self.forward(&sample.x)?;
        let (loss, d_logits) = softmax_cross_entropy(&fwd.logits, sample.label);
        let v = &self.params.v;
        let f_len = fwd.feat.len();

        let d_v = Matrix::from_fn(f_len, v.cols(), |j, k| fwd.feat[j] * d_logits[k]);
        let mut d_feat: Vec<f64> = (0..f_len)
            .map(|j| (0..v.cols()).map(|k| v.get(j, k) * d_logits[k]).sum())
            .collect();
        if let Some(norm) = fwd.norm {
            // u = f/‖f‖: ∂l/∂f = (g − u·(uᵀg)) / ‖f‖
            let ug: f64 = fwd.feat.iter().zip(&d_feat).map(|(u, g)| u * g).sum();
            for (g, u) in d_feat.iter_mut().zip(&fwd.feat) {
                *g = (*g - u * ug) / norm;
            }
        }

        let d = self.params.w.cols();
        let d_h = match &fwd.pool {
            PoolTape::Isqrt(tape) => {
                let d_sigma = isqrt_backward(tape, &d_feat)?;
                covariance_backward(&fwd.h, &d_sigma)?
            }
            PoolTape::Plain => {
                let d_sigma = scatter_vec_grad(d, &d_feat)?;
                covariance_backward(&fwd.h, &d_sigma)?
            }
            PoolTape::Avg => {
                let n = fwd.h.n();
                Matrix::from_fn(n, d, |_, j| d_feat[j] / n as f64)
            }
        };
        let d_w = sample.x.transpose().matmul(&d_h)?;
        Ok((
            loss,
            Grads {
                w: d_w,
                v: d_v,
                b: d_logits,
            },
        ))
    }

    /// Mean loss over `samples` and gradients of that mean.
    fn batch_grads(&self, samples: &[&Sample]) -> Result<(f64, Grads)> {
        let mut total = Grads::zeros_like(&self.params);
        let mut loss = 0.0;
        for s in samples {
            let (l, g) = self.loss_and_grads(s)?;
            loss += l;
            total.accumulate(&g);
        }
        let inv = 1.0 / samples.len() as f64;
        total.w = total.w.scale(inv);
        total.v = total.v.scale(inv);
        total.b.iter_mut().for_each(|v| *v *= inv);
        Ok((loss * inv, total))
    }

    /// Gradient of the mean loss over `samples` with respect to `W`.
    pub fn grad_w(&self, samples: &[&Sample]) -> Result<Matrix> {
        Ok(self.batch_grads(samples)?.1.w)
    }

    /// `(mean loss, accuracy)` over a data set.
    pub fn evaluate(&self, samples: &[Sample]) -> Result<(f64, f64)> {
        let mut loss = 0.0;
        let mut correct = 0usize;
        for s in samples {
            let logits = self.logits(&s.x)?;
            loss += softmax_cross_entropy(&logits, s.label).0;
            let pred = logits
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, &z)| if z > best.1 { (k, z) } else { best })
                .0;
            if pred == s.label {
                correct += 1;
            }
        }
        let m = samples.len() as f64;
        Ok((loss / m, correct as f64 / m))
    }
}

// ---------------------------------------------------------------------------
// training

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub head: Head,
    /// Output dimension of the feature map.
    pub d: usize,
    pub epochs: usize,
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub layer: MetaLayerConfig,
    /// Unit-normalize the pooled vector before the classifier.
    pub l2_normalize: bool,
    /// Seeds parameter initialization and minibatch shuffling.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            head: Head::Isqrt,
            d: 16,
            epochs: 30,
            lr: DEFAULT_LR,
            momentum: 0.9,
            weight_decay: 0.0,
            batch_size: 32,
            layer: MetaLayerConfig::default(),
            l2_normalize: false,
            seed: 3,
        }
    }
}

pub const DEFAULT_LR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub head: Head,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_acc: f64,
}

pub const TRAIN_CSV_HEADER: &str = "epoch,head,train_loss,train_acc,test_acc";

impl EpochLog {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:?},{:?},{:?}",
            self.epoch, self.head, self.train_loss, self.train_acc, self.test_acc
        )
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    /// Epoch 0 is the untrained model; epochs `1..=E` follow each pass.
    pub log: Vec<EpochLog>,
}

impl TrainOutcome {
    pub fn final_log(&self) -> &EpochLog {
        self.log.last().expect("log holds at least epoch 0")
    }

    /// First epoch whose training loss is at or below `target`.
    pub fn epochs_to_reach(&self, target: f64) -> Option<usize> {
        self.log.iter().find(|l| l.train_loss <= target).map(|l| l.epoch)
    }

    pub fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(TRAIN_CSV_HEADER);
        out.push('\n');
        for l in &self.log {
            out.push_str(&l.csv_row());
            out.push('\n');
        }
        out
    }
}

fn sgd_step(param: &mut [f64], velocity: &mut [f64], grad: &[f64], cfg: &TrainConfig) {
    for ((w, v), g) in param.iter_mut().zip(velocity.iter_mut()).zip(grad) {
        *v = cfg.momentum * *v + g + cfg.weight_decay * *w;
        *w -= cfg.lr * *v;
    }
}

pub fn init_model(task: &SyntheticTask, cfg: &TrainConfig) -> Model {
    let mut rng = crate::seeded_rng(cfg.seed);
    Model {
        head: cfg.head,
        layer: cfg.layer,
        l2_normalize: cfg.l2_normalize,
        params: ModelParams::init(task.p(), cfg.d, cfg.head, task.classes(), &mut rng),
    }
}

/// Minibatch SGD with momentum. Logs the full training loss and accuracy
/// and the test accuracy before training and after every epoch.
pub fn train(task: &SyntheticTask, cfg: &TrainConfig) -> Result<TrainOutcome> {
    if cfg.d == 0 || cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("d and batch size must be positive".into()));
    }
    cfg.layer.validate()?;
    let mut model = init_model(task, cfg);
    // Shuffling uses its own stream so initialization does not shift it.
    let mut rng = crate::seeded_rng(cfg.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));

    let mut vel = Grads::zeros_like(&model.params);
    let mut order: Vec<usize> = (0..task.train.len()).collect();
    let mut log = Vec::with_capacity(cfg.epochs + 1);

    let record = |model: &Model, epoch: usize| -> Result<EpochLog> {
        let (train_loss, train_acc) = model.evaluate(&task.train)?;
        let (_, test_acc) = model.evaluate(&task.test)?;
        if !train_loss.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch,
                head: cfg.head.as_str(),
            });
        }
        Ok(EpochLog {
            epoch,
            head: cfg.head,
            train_loss,
            train_acc,
            test_acc,
        })
    };
    log.push(record(&model, 0)?);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &task.train[i]).collect();
            let (loss, g) = model.batch_grads(&batch)?;
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged {
                    epoch,
                    head: cfg.head.as_str(),
                });
            }
            let p = &mut model.params;
            sgd_step(p.w.as_mut_slice(), vel.w.as_mut_slice(), g.w.as_slice(), cfg);
            sgd_step(p.v.as_mut_slice(), vel.v.as_mut_slice(), g.v.as_slice(), cfg);
            sgd_step(&mut p.b, &mut vel.b, &g.b, cfg);
            if !p.is_finite() {
                return Err(Error::TrainingDiverged {
                    epoch,
                    head: cfg.head.as_str(),
                });
            }
        }
        log.push(record(&model, epoch)?);
    }
    Ok(TrainOutcome { model, log })
}

/// Runs [`train`] and renders the per-epoch CSV with a provenance comment.
pub fn run_train_demo(task_cfg: &TaskConfig, cfg: &TrainConfig) -> Result<(TrainOutcome, String)> {
    let task = generate_task(task_cfg)?;
    let outcome = train(&task, cfg)?;
    let mut csv = String::new();
    let _ = writeln!(
        csv,
        "# train-demo classes={} p={} n={} d={} epochs={} lr={} momentum={} weight_decay={} batch={} head={} N={} mode={} l2={} seed={}",
        task_cfg.classes,
        task_cfg.p,
        task_cfg.n,
        cfg.d,
        cfg.epochs,
        cfg.lr,
        cfg.momentum,
        cfg.weight_decay,
        cfg.batch_size,
        cfg.head,
        cfg.layer.iterations,
        cfg.layer.mode,
        cfg.l2_normalize,
        task_cfg.seed
    );
    csv.push_str(&outcome.csv());
    Ok((outcome, csv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::finite_diff_grad;

    fn small_task() -> SyntheticTask {
        generate_task(&TaskConfig {
            classes: 3,
            p: 4,
            n: 10,
            train_per_class: 4,
            test_per_class: 2,
            ..TaskConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn l2_normalize_cases() {
        assert_eq!(l2_normalize_vec(&[3.0, 4.0]).unwrap(), vec![0.6, 0.8]);
        assert_eq!(l2_normalize_vec(&[0.0, 1.0, 0.0]).unwrap(), vec![0.0, 1.0, 0.0]);
        assert!(matches!(l2_normalize_vec(&[0.0, 0.0]), Err(Error::ZeroVector)));
        let mut rng = crate::seeded_rng(4);
        let v: Vec<f64> = (0..37).map(|_| rng.random_range(-5.0..5.0)).collect();
        let u = l2_normalize_vec(&v).unwrap();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn softmax_ce_gradient_sums_to_zero() {
        let (loss, g) = softmax_cross_entropy(&[1.0, 2.0, -0.5], 1);
        assert!(loss > 0.0);
        assert!(g.iter().sum::<f64>().abs() < 1e-15);
        assert!(g[1] < 0.0);
    }

    #[test]
    fn task_is_deterministic_and_balanced() {
        let a = small_task();
        let b = small_task();
        assert_eq!(a, b);
        assert_eq!(a.train.len(), 12);
        for k in 0..3 {
            assert_eq!(a.train.iter().filter(|s| s.label == k).count(), 4);
        }
    }

    #[test]
    fn shared_factor_task_uses_one_covariance() {
        let t = generate_task(&TaskConfig {
            shared_factor: true,
            ..TaskConfig::default()
        })
        .unwrap();
        assert!(t.factors.windows(2).all(|w| w[0] == w[1]));
    }

    /// Distance between the two class-mean covariances over the mean
    /// distance of a sample covariance to its class mean.
    fn between_within_ratio(task: &SyntheticTask) -> f64 {
        let covs: Vec<(usize, Matrix)> = task
            .train
            .iter()
            .map(|s| (s.label, covariance_forward(&FeatureMatrix::new(s.x.clone()).unwrap()).into_matrix()))
            .collect();
        let means: Vec<Matrix> = (0..2)
            .map(|k| {
                let members: Vec<&Matrix> = covs.iter().filter(|c| c.0 == k).map(|c| &c.1).collect();
                let mut m = Matrix::zeros(task.config.p, task.config.p);
                for c in &members {
                    m = m.add(c).unwrap();
                }
                m.scale(1.0 / members.len() as f64)
            })
            .collect();
        let between = means[0].sub(&means[1]).unwrap().frobenius_norm();
        let within =
            covs.iter().map(|(k, c)| c.sub(&means[*k]).unwrap().frobenius_norm()).sum::<f64>() / covs.len() as f64;
        between / within
    }

    #[test]
    fn two_class_covariances_are_well_separated() {
        let task = generate_task(&TaskConfig {
            classes: 2,
            n: 4096,
            train_per_class: 8,
            test_per_class: 1,
            ..TaskConfig::default()
        })
        .unwrap();
        let ratio = between_within_ratio(&task);
        assert!(ratio >= 10.0, "between/within = {ratio}");
    }

    #[test]
    fn rejects_bad_task() {
        let cfg = TaskConfig {
            classes: 1,
            ..TaskConfig::default()
        };
        assert!(generate_task(&cfg).is_err());
    }

    #[test]
    fn head_parsing() {
        assert_eq!("isqrt".parse::<Head>().unwrap(), Head::Isqrt);
        assert_eq!("plain".parse::<Head>().unwrap(), Head::Plain);
        assert_eq!("avg".parse::<Head>().unwrap(), Head::Avg);
        assert!("max".parse::<Head>().is_err());
    }

    /// Whole-model gradient of W against finite differences, every head.
    #[test]
    fn model_gradient_matches_finite_differences() {
        let task = small_task();
        let variants = [Head::Isqrt, Head::Plain, Head::Avg]
            .into_iter()
            .flat_map(|h| [(h, false), (h, true)]);
        for (head, l2_normalize) in variants {
            let cfg = TrainConfig {
                head,
                d: 3,
                l2_normalize,
                ..TrainConfig::default()
            };
            let model = init_model(&task, &cfg);
            let batch: Vec<&Sample> = task.train.iter().take(3).collect();
            let analytic = model.grad_w(&batch).unwrap();
            let numeric = finite_diff_grad(
                |w| {
                    let mut m = model.clone();
                    m.params.w = w.clone();
                    let total: f64 = batch.iter().map(|s| m.loss(s).unwrap()).sum();
                    Ok(total / batch.len() as f64)
                },
                &model.params.w,
                1e-6,
            )
            .unwrap();
            let err = analytic.sub(&numeric).unwrap().max_abs();
            let scale = numeric.max_abs().max(1e-8);
            assert!(err / scale < 1e-6, "{head} l2={l2_normalize}: {err:e} vs scale {scale:e}");
        }
    }
}
