#![allow(dead_code)]

use intervalcast::data::synth::{BLOCK_LEN, SEGMENT_LEN};
use intervalcast::data::{generate_synthds, make_windows, normalize, WindowConfig, WindowSample};
use intervalcast::interval::{DecayRate, Interval};
use intervalcast::model::{Architecture, ModelKind, ModelParams};
use intervalcast::train::{LossSpec, PolicyConfig, SampleObjective};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GRAD_WINDOW: usize = 48;
pub const GRAD_HORIZON: usize = 24;
pub const GRAD_BATCH: usize = 8;

pub fn grad_models() -> Vec<ModelKind> {
    vec![ModelKind::linear(), ModelKind::mlp()]
}

pub fn grad_policies() -> Vec<PolicyConfig> {
    vec![
        PolicyConfig::baseline(),
        PolicyConfig::e2e(Interval::new(0.5, 1.0).unwrap()),
        PolicyConfig::continuous(0.1).unwrap(),
        PolicyConfig::discrete(4).unwrap(),
        PolicyConfig::dstar(4, DecayRate::Finite(37.0), 0.5).unwrap(),
    ]
}

/// Every window of the noisy SynthDS trace, normalized.
pub fn synth_windows() -> Vec<WindowSample> {
    let series = generate_synthds(0, 0.05).unwrap();
    let (series, _) = normalize(&series).unwrap();
    make_windows(
        &series,
        &WindowConfig::new(GRAD_WINDOW, GRAD_HORIZON, 1).unwrap(),
    )
    .unwrap()
}

pub struct GradCase {
    pub params: ModelParams,
    pub batch: Vec<WindowSample>,
    pub objectives: Vec<SampleObjective>,
    pub spec: LossSpec,
}

/// Parameters uniform in [-0.1, 0.1] and a batch of windows at random
/// positions. Policies that draw intervals use the same rng.
pub fn grad_case(
    windows: &[WindowSample],
    kind: ModelKind,
    policy: &PolicyConfig,
    draw: u64,
) -> GradCase {
    let arch = Architecture::new(kind, GRAD_WINDOW, GRAD_HORIZON, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + draw);
    let theta: Vec<f64> = (0..arch.param_count())
        .map(|_| rng.random_range(-0.1..0.1))
        .collect();
    let params = ModelParams::from_vec(arch, theta).unwrap();
    // half the windows start an output segment, so their target is one
    // hypothesis curve and the indicator policies keep weight
    let aligned: Vec<&WindowSample> = windows
        .iter()
        .filter(|s| s.t_origin % BLOCK_LEN == SEGMENT_LEN)
        .collect();
    let batch: Vec<WindowSample> = (0..GRAD_BATCH)
        .map(|i| {
            if i % 2 == 0 {
                aligned[rng.random_range(0..aligned.len())].clone()
            } else {
                windows[rng.random_range(0..windows.len())].clone()
            }
        })
        .collect();
    let refs: Vec<&WindowSample> = batch.iter().collect();
    let objectives = policy.make_batch_losses(&refs, &mut rng);
    GradCase {
        params,
        batch,
        objectives,
        spec: policy.loss_spec(),
    }
}
