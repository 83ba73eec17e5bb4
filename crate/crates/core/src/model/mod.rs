//! Interval-conditioned forecasters with a regression head and a
//! classification head, and their hand-derived gradients.

mod checkpoint;
mod linear;
mod mlp;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::WindowSample;
use crate::error::{Error, Result};
use crate::interval::{encode_covariate, Interval};
use crate::matrix::Matrix;
use crate::train::loss::{LossSpec, SampleObjective, BCE_CLAMP};

pub use checkpoint::{Checkpoint, MomentState, CHECKPOINT_VERSION};
pub use linear::{moving_average, trend_weight_index};

pub const DEFAULT_KERNEL: usize = 25;
pub const DEFAULT_HIDDEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    LinearDecomp { kernel: usize },
    Mlp { hidden: usize },
}

impl ModelKind {
    pub fn linear() -> Self {
        ModelKind::LinearDecomp {
            kernel: DEFAULT_KERNEL,
        }
    }

    pub fn mlp() -> Self {
        ModelKind::Mlp {
            hidden: DEFAULT_HIDDEN,
        }
    }
}

/// `linear:25` or `mlp:64`; a bare name takes the default size.
impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::LinearDecomp { kernel } => write!(f, "linear:{kernel}"),
            ModelKind::Mlp { hidden } => write!(f, "mlp:{hidden}"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, size) = match s.trim().split_once(':') {
            Some((n, v)) => {
                let v: usize = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad model size in {s:?}")))?;
                (n.trim(), Some(v))
            }
            None => (s.trim(), None),
        };
        match name.to_ascii_lowercase().as_str() {
            "linear" | "lineardecomp" | "dlinear" => Ok(ModelKind::LinearDecomp {
                kernel: size.unwrap_or(DEFAULT_KERNEL),
            }),
            "mlp" => Ok(ModelKind::Mlp {
                hidden: size.unwrap_or(DEFAULT_HIDDEN),
            }),
            other => Err(Error::Config(format!(
                "unknown model kind {other:?} (expected linear or mlp)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub kind: ModelKind,
    pub window: usize,
    pub horizon: usize,
    pub channels: usize,
}

impl Architecture {
    pub fn new(kind: ModelKind, window: usize, horizon: usize, channels: usize) -> Result<Self> {
        if window == 0 || horizon == 0 || channels == 0 {
            return Err(Error::Config(format!(
                "model dims must be positive, got w={window} tau={horizon} n={channels}"
            )));
        }
        match kind {
            ModelKind::Mlp { hidden: 0 } => {
                return Err(Error::Config("mlp hidden width must be >= 1".into()))
            }
            ModelKind::LinearDecomp { kernel: 0 } => {
                return Err(Error::Config("moving-average kernel must be >= 1".into()))
            }
            _ => {}
        }
        Ok(Self {
            kind,
            window,
            horizon,
            channels,
        })
    }

    pub fn param_count(&self) -> usize {
        match self.kind {
            ModelKind::LinearDecomp { kernel } => linear::Dims::of(self, kernel).param_count(),
            ModelKind::Mlp { hidden } => mlp::Dims::of(self, hidden).param_count(),
        }
    }

    /// Entries per head, `tau * n`.
    pub fn head_len(&self) -> usize {
        self.horizon * self.channels
    }

    fn blocks(&self) -> Vec<(std::ops::Range<usize>, usize, bool)> {
        match self.kind {
            ModelKind::LinearDecomp { kernel } => linear::blocks(&linear::Dims::of(self, kernel)),
            ModelKind::Mlp { hidden } => mlp::blocks(&mlp::Dims::of(self, hidden)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    arch: Architecture,
    theta: Vec<f64>,
}

impl ModelParams {
    pub fn from_vec(arch: Architecture, theta: Vec<f64>) -> Result<Self> {
        let expected = arch.param_count();
        if theta.len() != expected {
            return Err(Error::Dimension(format!(
                "{} parameters given, architecture {} needs {expected}",
                theta.len(),
                arch.kind
            )));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite parameter".into()));
        }
        Ok(Self { arch, theta })
    }

    pub fn zeros(arch: Architecture) -> Self {
        let theta = vec![0.0; arch.param_count()];
        Self { arch, theta }
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Weights uniform in `[-s, s]` with `s = sqrt(1 / fan_in)`, biases zero.
pub fn init(kind: ModelKind, dims: (usize, usize, usize), seed: u64) -> Result<ModelParams> {
    let arch = Architecture::new(kind, dims.0, dims.1, dims.2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ModelParams::zeros(arch);
    for (range, fan_in, is_bias) in arch.blocks() {
        if is_bias {
            continue;
        }
        let s = init_scale(fan_in);
        for v in &mut params.theta[range] {
            *v = rng.random_range(-s..=s);
        }
    }
    Ok(params)
}

pub fn init_scale(fan_in: usize) -> f64 {
    (1.0 / fan_in as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualForecast {
    pub regression: Matrix,
    pub probability: Matrix,
}

impl DualForecast {
    /// Mean of the probability head.
    pub fn confidence(&self) -> f64 {
        self.probability.mean()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

enum Cache {
    Linear(linear::Cache),
    Mlp(mlp::Cache),
}

fn check_history(arch: &Architecture, history: &Matrix) -> Result<()> {
    if history.shape() != (arch.window, arch.channels) {
        return Err(Error::Dimension(format!(
            "history is {}x{}, model expects {}x{}",
            history.rows(),
            history.cols(),
            arch.window,
            arch.channels
        )));
    }
    Ok(())
}

/// Raw outputs: regression `tau x n` row-major followed by logits.
fn raw_forward(params: &ModelParams, history: &Matrix, cov: [f64; 2]) -> Result<(Vec<f64>, Cache)> {
    let arch = &params.arch;
    check_history(arch, history)?;
    Ok(match arch.kind {
        ModelKind::LinearDecomp { kernel } => {
            let dims = linear::Dims::of(arch, kernel);
            let (out, cache) = linear::forward(&params.theta, &dims, history.as_slice(), cov);
            (out, Cache::Linear(cache))
        }
        ModelKind::Mlp { hidden } => {
            let dims = mlp::Dims::of(arch, hidden);
            let mut input = Vec::with_capacity(dims.input);
            input.extend_from_slice(history.as_slice());
            input.extend_from_slice(&cov);
            let (out, cache) = mlp::forward(&params.theta, &dims, input);
            (out, Cache::Mlp(cache))
        }
    })
}

fn raw_backward(params: &ModelParams, cache: &Cache, d_out: &[f64], grad: &mut [f64]) {
    let arch = &params.arch;
    match (arch.kind, cache) {
        (ModelKind::LinearDecomp { kernel }, Cache::Linear(c)) => {
            linear::backward(&linear::Dims::of(arch, kernel), c, d_out, grad)
        }
        (ModelKind::Mlp { hidden }, Cache::Mlp(c)) => {
            mlp::backward(&params.theta, &mlp::Dims::of(arch, hidden), c, d_out, grad)
        }
        _ => unreachable!("cache built by the same architecture"),
    }
}

fn split_heads(arch: &Architecture, out: &[f64]) -> DualForecast {
    let m = arch.head_len();
    let regression =
        Matrix::from_vec(arch.horizon, arch.channels, out[..m].to_vec()).expect("head shape");
    let probability = Matrix::from_vec(
        arch.horizon,
        arch.channels,
        out[m..].iter().map(|&z| sigmoid(z)).collect(),
    )
    .expect("head shape");
    DualForecast {
        regression,
        probability,
    }
}

pub fn forward(
    params: &ModelParams,
    history: &Matrix,
    interval: &Interval,
) -> Result<DualForecast> {
    let (out, _) = raw_forward(params, history, encode_covariate(interval))?;
    Ok(split_heads(&params.arch, &out))
}

/// Batch-mean loss and its gradient with respect to every parameter.
///
/// Per sample: `w * mean|pred - y| + phi * w * bce(prob, labels)`; the
/// classification term is present only when the objective carries labels
/// and `phi > 0`. Samples with weight exactly 0 contribute nothing and are
/// skipped.
pub fn backward(
    params: &ModelParams,
    batch: &[&WindowSample],
    objectives: &[SampleObjective],
    spec: &LossSpec,
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::InsufficientData("empty batch".into()));
    }
    if batch.len() != objectives.len() {
        return Err(Error::Dimension(format!(
            "{} samples but {} objectives",
            batch.len(),
            objectives.len()
        )));
    }
    let arch = &params.arch;
    let m = arch.head_len();
    let scale = 1.0 / batch.len() as f64;
    let per_entry = 1.0 / m as f64;
    let mut grad = vec![0.0; params.theta.len()];
    let mut total = 0.0;
    let mut d_out = vec![0.0; 2 * m];

    for (i, (sample, obj)) in batch.iter().zip(objectives).enumerate() {
        if obj.weight == 0.0 {
            continue;
        }
        if sample.target.shape() != (arch.horizon, arch.channels) {
            return Err(Error::Dimension(format!(
                "target of sample {i} is {}x{}, model emits {}x{}",
                sample.target.rows(),
                sample.target.cols(),
                arch.horizon,
                arch.channels
            )));
        }
        let (out, cache) = raw_forward(params, &sample.history, encode_covariate(&obj.covariate))?;
        let target = sample.target.as_slice();
        let w = obj.weight;

        let mut reg = 0.0;
        for e in 0..m {
            let r = out[e] - target[e];
            reg += r.abs();
            // zero subgradient at an exact match
            let s = if r > 0.0 {
                1.0
            } else if r < 0.0 {
                -1.0
            } else {
                0.0
            };
            d_out[e] = scale * w * per_entry * s;
        }
        let mut loss = w * reg * per_entry;

        let labels = obj.labels.as_ref().filter(|_| spec.phi > 0.0);
        match labels {
            Some(labels) => {
                if labels.shape() != (arch.horizon, arch.channels) {
                    return Err(Error::Dimension(format!(
                        "labels of sample {i} have the wrong shape"
                    )));
                }
                let mut bce = 0.0;
                for (e, &y) in labels.as_slice().iter().enumerate() {
                    let p_raw = sigmoid(out[m + e]);
                    let p = p_raw.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
                    bce -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
                    let inside = p_raw == p;
                    d_out[m + e] = if inside {
                        scale * spec.phi * w * per_entry * (p_raw - y)
                    } else {
                        0.0
                    };
                }
                loss += spec.phi * w * bce * per_entry;
            }
            None => d_out[m..].iter_mut().for_each(|g| *g = 0.0),
        }

        if !loss.is_finite() {
            return Err(Error::Numeric(format!("non-finite loss at sample {i}")));
        }
        total += scale * loss;
        raw_backward(params, &cache, &d_out, &mut grad);
    }
    Ok((total, grad))
}

/// Batch-mean loss only; same objective as [`backward`].
pub fn batch_loss(
    params: &ModelParams,
    batch: &[&WindowSample],
    objectives: &[SampleObjective],
    spec: &LossSpec,
) -> Result<f64> {
    let mut total = 0.0;
    for (i, (sample, obj)) in batch.iter().zip(objectives).enumerate() {
        if obj.weight == 0.0 {
            continue;
        }
        let f = forward(params, &sample.history, &obj.covariate)?;
        let loss = crate::train::loss::objective_loss(&f, &sample.target, obj, spec)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("non-finite loss at sample {i}")));
        }
        total += loss;
    }
    Ok(total / batch.len().max(1) as f64)
}

/// Finite-difference check of [`backward`] on one batch.
pub fn check_backward(
    params: &ModelParams,
    batch: &[&WindowSample],
    objectives: &[SampleObjective],
    spec: &LossSpec,
    step: f64,
    tol: f64,
) -> Result<crate::gradcheck::GradCheckReport> {
    let (_, grad) = backward(params, batch, objectives, spec)?;
    let theta = Matrix::column(params.theta.clone());
    let grad = Matrix::column(grad);
    let mut probe = params.clone();
    crate::gradcheck::check_gradient(
        |x| {
            probe.theta.copy_from_slice(x);
            batch_loss(&probe, batch, objectives, spec).unwrap_or(f64::NAN)
        },
        &theta,
        &grad,
        step,
        tol,
    )
}
