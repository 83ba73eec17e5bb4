//! Checks the hand-derived gradients of both models against central
//! finite differences, for the baseline loss and a soft Dstar loss.

use intervalcast::data::{generate_synthds, make_windows, normalize, WindowConfig, WindowSample};
use intervalcast::model::{backward, check_backward, init};
use intervalcast::{DecayRate, ModelKind, PolicyConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> intervalcast::Result<()> {
    let (series, _) = normalize(&generate_synthds(0, 0.05)?)?;
    let windows = make_windows(&series, &WindowConfig::new(24, 8, 37)?)?;
    let batch: Vec<&WindowSample> = windows.iter().take(6).collect();

    // a low decay rate keeps every sample weighted
    for policy in [
        PolicyConfig::baseline(),
        PolicyConfig::dstar(4, DecayRate::Finite(2.0), 0.5)?,
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let objectives = policy.make_batch_losses(&batch, &mut rng);
        let spec = policy.loss_spec();
        println!("{policy}");
        for kind in [
            ModelKind::LinearDecomp { kernel: 5 },
            ModelKind::Mlp { hidden: 4 },
        ] {
            let params = init(kind, (24, 8, 1), 1)?;
            let (loss, grad) = backward(&params, &batch, &objectives, &spec)?;
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            let report = check_backward(&params, &batch, &objectives, &spec, 1e-5, 1e-5)?;
            println!(
            "  {kind:<10} {} params  loss {loss:.5}  |grad| {norm:.4}  max rel err {:.2e} (param {})  {}",
            params.len(),
            report.max_relative_error,
            report.worst_parameter_index,
            if report.passed { "ok" } else { "MISMATCH" }
        );
        }
    }
    Ok(())
}
