//! Trains the five policies on noisy SynthDS with the linear model and
//! saves the Dstar run as a checkpoint.

use intervalcast::data::{
    chrono_split, generate_synthds, make_windows, normalize, SplitSpec, WindowConfig,
};
use intervalcast::model::Checkpoint;
use intervalcast::train::train;
use intervalcast::{DecayRate, Interval, ModelKind, PolicyConfig, TrainConfig};

fn main() -> intervalcast::Result<()> {
    let (series, _) = normalize(&generate_synthds(1, 0.05)?)?;
    let windows = make_windows(&series, &WindowConfig::new(48, 24, 1)?)?;
    let splits = chrono_split(windows, &SplitSpec::standard())?;
    println!(
        "train {} / val {} / test {} windows",
        splits.train.len(),
        splits.val.len(),
        splits.test.len()
    );

    let policies = [
        PolicyConfig::baseline(),
        PolicyConfig::e2e(Interval::new(0.75, 1.0)?),
        PolicyConfig::continuous(0.1)?,
        PolicyConfig::discrete(4)?,
        PolicyConfig::dstar(4, DecayRate::Finite(37.0), 0.5)?,
    ];
    let cfg = TrainConfig {
        epochs: 15,
        ..TrainConfig::default()
    };

    let mut last = None;
    for policy in &policies {
        let out = train(
            policy,
            ModelKind::linear(),
            &splits.train,
            &splits.val,
            &cfg,
            0,
        )?;
        let best = out.report.best().expect("at least one epoch");
        println!(
            "{:<32} epochs {:2}  best {:2}  train {:.4}  val {:.4}{}",
            policy.to_string(),
            out.report.epochs.len(),
            best.epoch,
            best.train_loss,
            best.val_loss,
            if out.report.stopped_early {
                "  (early stop)"
            } else {
                ""
            }
        );
        last = Some((policy.clone(), out));
    }

    let (policy, out) = last.unwrap();
    let ck = Checkpoint {
        params: out.params,
        policy: policy.to_string(),
        optimizer: Some(out.optimizer),
    };
    let path = std::env::temp_dir().join("intervalcast-dstar.ckpt");
    ck.save(&path)?;
    let back = Checkpoint::load(&path)?;
    println!(
        "checkpoint {} ({} parameters) reloads identically: {}",
        path.display(),
        back.params.len(),
        back == ck
    );
    Ok(())
}
