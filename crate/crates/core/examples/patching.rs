//! Inference-time patching: a Dstar model trained on eight cells answers a
//! query spanning two of them, by confidence-weighted averaging or by
//! taking the most confident cell.

use intervalcast::data::{
    chrono_split, generate_synthds, make_windows, normalize, SplitSpec, WindowConfig,
};
use intervalcast::patch::{patch_average, patch_maxconf, Strategy, TrainedModel};
use intervalcast::train::train;
use intervalcast::{DecayRate, Interval, ModelKind, PolicyConfig, TrainConfig};

fn main() -> intervalcast::Result<()> {
    let (series, _) = normalize(&generate_synthds(1, 0.0)?)?;
    let windows = make_windows(&series, &WindowConfig::new(48, 24, 1)?)?;
    let splits = chrono_split(windows, &SplitSpec::standard())?;

    let policy = PolicyConfig::dstar(8, DecayRate::Finite(37.0), 0.5)?;
    let cfg = TrainConfig {
        epochs: 10,
        ..TrainConfig::default()
    };
    let out = train(
        &policy,
        ModelKind::mlp(),
        &splits.train,
        &splits.val,
        &cfg,
        0,
    )?;
    let partition = policy.partition().unwrap();

    let query = Interval::new(0.75, 1.0)?;
    let sample = &splits.test[splits.test.len() / 2];
    let (avg, trace) = patch_average(&out.params, &sample.history, &query, partition)?;
    let (max, _) = patch_maxconf(&out.params, &sample.history, &query, partition)?;

    println!("query {query} engages {} cells", trace.cells.len());
    for c in &trace.cells {
        println!(
            "  {}  confidence {:.3}  first step {:.3}",
            c.cell,
            c.confidence,
            c.prediction.as_slice()[0]
        );
    }
    println!("average strategy first step {:.3}", avg.as_slice()[0]);
    println!("max strategy     first step {:.3}", max.as_slice()[0]);
    println!(
        "truth            first step {:.3}",
        sample.target.as_slice()[0]
    );

    // the same through the policy-aware wrapper; misaligned queries are
    // served by every overlapping cell
    let model = TrainedModel {
        params: out.params,
        policy,
    };
    let wide = Interval::new(0.3, 0.6)?;
    let f = model.forecast(&sample.history, &wide, Strategy::Average)?;
    println!("query {wide}: first step {:.3}", f.as_slice()[0]);
    Ok(())
}
