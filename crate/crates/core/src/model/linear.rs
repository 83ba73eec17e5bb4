//! Decomposition-linear forecaster.
//!
//! Each channel's history is split into a moving-average trend and a
//! residual. The trend, extended with the two covariate pseudo-timesteps,
//! and the residual go through two linear maps whose outputs sum. Weights
//! are shared across channels; each map emits `2 * tau` values per channel
//! (regression followed by classification logits).
//!
//! Parameter layout: `W_trend (2tau x (w + 2))`, `W_resid (2tau x w)`,
//! `bias (2tau)`.

use super::Architecture;

pub(super) struct Dims {
    pub window: usize,
    pub horizon: usize,
    pub channels: usize,
    pub kernel: usize,
}

impl Dims {
    pub fn of(arch: &Architecture, kernel: usize) -> Self {
        Self {
            window: arch.window,
            horizon: arch.horizon,
            channels: arch.channels,
            kernel,
        }
    }

    fn out(&self) -> usize {
        2 * self.horizon
    }

    fn trend_len(&self) -> usize {
        self.window + 2
    }

    pub fn param_count(&self) -> usize {
        self.out() * self.trend_len() + self.out() * self.window + self.out()
    }

    fn offsets(&self) -> (usize, usize) {
        let resid = self.out() * self.trend_len();
        let bias = resid + self.out() * self.window;
        (resid, bias)
    }
}

/// Moving average with edge values repeated to keep the length.
pub fn moving_average(x: &[f64], kernel: usize) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let front = (kernel - 1) / 2;
    let back = kernel - 1 - front;
    let mut padded = Vec::with_capacity(n + kernel - 1);
    padded.extend(std::iter::repeat_n(x[0], front));
    padded.extend_from_slice(x);
    padded.extend(std::iter::repeat_n(x[n - 1], back));
    (0..n)
        .map(|i| padded[i..i + kernel].iter().sum::<f64>() / kernel as f64)
        .collect()
}

pub(super) struct Cache {
    /// Per channel: trend extended with the covariate.
    trend: Vec<Vec<f64>>,
    resid: Vec<Vec<f64>>,
}

/// `history` is `w x n` row-major. Output uses the shared layout:
/// regression `tau x n` row-major, then logits `tau x n`.
pub(super) fn forward(
    theta: &[f64],
    dims: &Dims,
    history: &[f64],
    cov: [f64; 2],
) -> (Vec<f64>, Cache) {
    let (resid_at, bias_at) = dims.offsets();
    let n = dims.channels;
    let tl = dims.trend_len();
    let mut output = vec![0.0; 2 * dims.horizon * n];
    let mut cache = Cache {
        trend: Vec::with_capacity(n),
        resid: Vec::with_capacity(n),
    };

    for c in 0..n {
        let series: Vec<f64> = (0..dims.window).map(|t| history[t * n + c]).collect();
        let mut trend = moving_average(&series, dims.kernel);
        let resid: Vec<f64> = series.iter().zip(&trend).map(|(x, m)| x - m).collect();
        trend.extend_from_slice(&cov);

        for o in 0..dims.out() {
            let wt = &theta[o * tl..(o + 1) * tl];
            let ws = &theta[resid_at + o * dims.window..resid_at + (o + 1) * dims.window];
            let v = theta[bias_at + o]
                + wt.iter().zip(&trend).map(|(w, x)| w * x).sum::<f64>()
                + ws.iter().zip(&resid).map(|(w, x)| w * x).sum::<f64>();
            output[out_index(dims, o, c)] = v;
        }
        cache.trend.push(trend);
        cache.resid.push(resid);
    }
    (output, cache)
}

pub(super) fn backward(dims: &Dims, cache: &Cache, d_out: &[f64], grad: &mut [f64]) {
    let (resid_at, bias_at) = dims.offsets();
    let tl = dims.trend_len();
    for c in 0..dims.channels {
        for o in 0..dims.out() {
            let g = d_out[out_index(dims, o, c)];
            if g == 0.0 {
                continue;
            }
            grad[bias_at + o] += g;
            for (j, &x) in cache.trend[c].iter().enumerate() {
                grad[o * tl + j] += g * x;
            }
            for (j, &x) in cache.resid[c].iter().enumerate() {
                grad[resid_at + o * dims.window + j] += g * x;
            }
        }
    }
}

/// Map output unit `o` (0..2tau) of channel `c` to the shared layout.
fn out_index(dims: &Dims, o: usize, c: usize) -> usize {
    let per_head = dims.horizon * dims.channels;
    if o < dims.horizon {
        o * dims.channels + c
    } else {
        per_head + (o - dims.horizon) * dims.channels + c
    }
}

pub(super) fn blocks(dims: &Dims) -> Vec<(std::ops::Range<usize>, usize, bool)> {
    let (resid_at, bias_at) = dims.offsets();
    vec![
        (0..resid_at, dims.trend_len(), false),
        (resid_at..bias_at, dims.window, false),
        (bias_at..dims.param_count(), dims.window, true),
    ]
}

/// Index of `W_trend[o][j]`, for tests that hand-set weights.
pub fn trend_weight_index(window: usize, o: usize, j: usize) -> usize {
    o * (window + 2) + j
}
