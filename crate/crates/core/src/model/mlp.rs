//! One-hidden-layer tanh network over the flattened history plus the two
//! covariate entries.
//!
//! Parameter layout: `W1 (hidden x input)`, `b1 (hidden)`, `W2 (output x
//! hidden)`, `b2 (output)`, all row-major, where `output = 2 * tau * n`.

use super::Architecture;

pub(super) struct Dims {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
}

impl Dims {
    pub fn of(arch: &Architecture, hidden: usize) -> Self {
        Self {
            input: arch.window * arch.channels + 2,
            hidden,
            output: 2 * arch.horizon * arch.channels,
        }
    }

    pub fn param_count(&self) -> usize {
        self.hidden * self.input + self.hidden + self.output * self.hidden + self.output
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.hidden * self.input;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.output * self.hidden;
        (b1, w2, b2)
    }
}

pub(super) struct Cache {
    pub input: Vec<f64>,
    pub hidden: Vec<f64>,
}

pub(super) fn forward(theta: &[f64], dims: &Dims, input: Vec<f64>) -> (Vec<f64>, Cache) {
    let (b1_at, w2_at, b2_at) = dims.offsets();
    let w1 = &theta[..b1_at];
    let b1 = &theta[b1_at..w2_at];
    let w2 = &theta[w2_at..b2_at];
    let b2 = &theta[b2_at..];

    let hidden: Vec<f64> = (0..dims.hidden)
        .map(|j| {
            let row = &w1[j * dims.input..(j + 1) * dims.input];
            let z = b1[j] + row.iter().zip(&input).map(|(w, x)| w * x).sum::<f64>();
            z.tanh()
        })
        .collect();

    let output = (0..dims.output)
        .map(|o| {
            let row = &w2[o * dims.hidden..(o + 1) * dims.hidden];
            b2[o] + row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>()
        })
        .collect();

    (output, Cache { input, hidden })
}

pub(super) fn backward(theta: &[f64], dims: &Dims, cache: &Cache, d_out: &[f64], grad: &mut [f64]) {
    let (b1_at, w2_at, b2_at) = dims.offsets();
    let w2 = &theta[w2_at..b2_at];

    let mut d_hidden = vec![0.0; dims.hidden];
    for (o, &g) in d_out.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        grad[b2_at + o] += g;
        let row = o * dims.hidden;
        for j in 0..dims.hidden {
            grad[w2_at + row + j] += g * cache.hidden[j];
            d_hidden[j] += g * w2[row + j];
        }
    }

    for j in 0..dims.hidden {
        let h = cache.hidden[j];
        let d_pre = d_hidden[j] * (1.0 - h * h);
        if d_pre == 0.0 {
            continue;
        }
        grad[b1_at + j] += d_pre;
        let row = j * dims.input;
        for (k, &x) in cache.input.iter().enumerate() {
            grad[row + k] += d_pre * x;
        }
    }
}

/// Per-block fan-in, used by initialization: `(range, fan_in, is_bias)`.
pub(super) fn blocks(dims: &Dims) -> Vec<(std::ops::Range<usize>, usize, bool)> {
    let (b1_at, w2_at, b2_at) = dims.offsets();
    vec![
        (0..b1_at, dims.input, false),
        (b1_at..w2_at, dims.input, true),
        (w2_at..b2_at, dims.hidden, false),
        (b2_at..dims.param_count(), dims.hidden, true),
    ]
}
