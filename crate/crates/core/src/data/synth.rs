//! The synthetic four-hypothesis trace.
//!
//! The trace is a sequence of 48-step blocks. Each block is a rising input
//! segment `sin(pi n / 2w)` followed by one of four level-shifted output
//! segments `(sin(pi n / 2w + pi/2) + k) / 4`, `k` drawn uniformly from
//! `{0, 1, 2, 3}` per block. Nothing in a block's history reveals its `k`, so
//! an interval-blind forecaster can only predict the average hypothesis.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::TimeSeries;
use crate::error::{Error, Result};

/// Total trace length.
pub const SYNTH_LEN: usize = 3100;
/// Length of each input and each output segment.
pub const SEGMENT_LEN: usize = 24;
/// Input segment followed by output segment.
pub const BLOCK_LEN: usize = 2 * SEGMENT_LEN;
pub const HYPOTHESES: usize = 4;

/// Input-segment value at step `n` (1-based).
pub fn input_signal(n: usize) -> f64 {
    (PI * n as f64 / (2.0 * SEGMENT_LEN as f64)).sin()
}

/// Output-segment value of hypothesis `k` at step `n` (1-based).
pub fn hypothesis(k: usize, n: usize) -> f64 {
    ((PI * n as f64 / (2.0 * SEGMENT_LEN as f64) + PI / 2.0).sin() + k as f64) / 4.0
}

/// The average of the four hypotheses at step `n`.
pub fn mean_hypothesis(n: usize) -> f64 {
    ((PI * n as f64 / (2.0 * SEGMENT_LEN as f64) + PI / 2.0).sin() + 1.5) / 4.0
}

/// Generated trace plus the ground-truth layout used by evaluations.
#[derive(Debug, Clone)]
pub struct SynthTrace {
    pub series: TimeSeries,
    /// Hypothesis index of every (possibly truncated) block.
    pub classes: Vec<usize>,
}

impl SynthTrace {
    /// Start index of the output segment of block `b`.
    pub fn output_start(b: usize) -> usize {
        b * BLOCK_LEN + SEGMENT_LEN
    }

    /// Block index of timestep `t`.
    pub fn block_of(t: usize) -> usize {
        t / BLOCK_LEN
    }

    /// `Some(n)` (1-based) when `t` lies in an output segment.
    pub fn output_step(t: usize) -> Option<usize> {
        let offset = t % BLOCK_LEN;
        (offset >= SEGMENT_LEN).then(|| offset - SEGMENT_LEN + 1)
    }
}

/// Generates the univariate trace. Gaussian noise with mean `noise_sd` and
/// standard deviation `noise_sd` is added to every entry.
pub fn generate_synthds(seed: u64, noise_sd: f64) -> Result<TimeSeries> {
    Ok(generate_synthds_trace(seed, noise_sd)?.series)
}

pub fn generate_synthds_trace(seed: u64, noise_sd: f64) -> Result<SynthTrace> {
    if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
        return Err(Error::Config(format!(
            "noise_sd must be >= 0, got {noise_sd}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = SYNTH_LEN.div_ceil(BLOCK_LEN);
    let classes: Vec<usize> = (0..blocks)
        .map(|_| rng.random_range(0..HYPOTHESES))
        .collect();

    let mut values = Vec::with_capacity(SYNTH_LEN);
    'fill: for &k in &classes {
        for n in 1..=SEGMENT_LEN {
            if values.len() == SYNTH_LEN {
                break 'fill;
            }
            values.push(input_signal(n));
        }
        for n in 1..=SEGMENT_LEN {
            if values.len() == SYNTH_LEN {
                break 'fill;
            }
            values.push(hypothesis(k, n));
        }
    }

    if noise_sd > 0.0 {
        let noise = Normal::new(noise_sd, noise_sd)
            .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;
        for v in &mut values {
            *v += noise.sample(&mut rng);
        }
    }

    Ok(SynthTrace {
        series: TimeSeries::univariate(values, "synth", 1.0)?,
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_is_3100() {
        assert_eq!(generate_synthds(0, 0.05).unwrap().len(), 3100);
        assert_eq!(generate_synthds(0, 0.0).unwrap().len(), SYNTH_LEN);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_synthds(9, 0.0).unwrap();
        let b = generate_synthds(9, 0.0).unwrap();
        assert_eq!(a, b);
        let a = generate_synthds(9, 0.05).unwrap();
        let b = generate_synthds(9, 0.05).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_synthds(10, 0.05).unwrap());
    }

    #[test]
    fn noise_free_output_segments_are_exact_hypotheses() {
        let trace = generate_synthds_trace(3, 0.0).unwrap();
        let x = trace.series.channel(0);
        for (t, &v) in x.iter().enumerate() {
            match SynthTrace::output_step(t) {
                Some(n) => {
                    let k = trace.classes[SynthTrace::block_of(t)];
                    assert_eq!(v, hypothesis(k, n));
                    assert!((0.0..=1.0).contains(&v));
                    // (sin + 3) / 4 with sin in [0, cos(pi/48)]
                    if k == 3 {
                        assert!((0.75..=1.0).contains(&v));
                    }
                }
                None => assert_eq!(v, input_signal(t % BLOCK_LEN + 1)),
            }
        }
    }

    #[test]
    fn hypothesis_ranges() {
        let upper = (PI / 48.0).cos();
        for k in 0..4 {
            for n in 1..=SEGMENT_LEN {
                let v = hypothesis(k, n);
                assert!(v >= k as f64 / 4.0 && v <= (upper + k as f64) / 4.0);
            }
        }
    }

    #[test]
    fn fixed_seeds_cover_all_classes() {
        for seed in [0, 1, 2, 3, 42] {
            let trace = generate_synthds_trace(seed, 0.0).unwrap();
            for k in 0..HYPOTHESES {
                assert!(trace.classes.contains(&k), "seed {seed} misses class {k}");
            }
        }
    }

    #[test]
    fn noise_has_requested_moments() {
        let clean = generate_synthds(5, 0.0).unwrap().channel(0);
        let noisy = generate_synthds(5, 0.05).unwrap().channel(0);
        let diffs: Vec<f64> = noisy.iter().zip(&clean).map(|(a, b)| a - b).collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / diffs.len() as f64;
        assert!((mean - 0.05).abs() < 0.005, "mean {mean}");
        assert!((var.sqrt() - 0.05).abs() < 0.005, "sd {}", var.sqrt());
    }

    #[test]
    fn negative_noise_rejected() {
        assert!(generate_synthds(0, -1.0).is_err());
    }
}
