//! Per-interval MAE of B, D4 and Dstar4 on aligned test windows, the
//! improvement table, and a rolling evaluation through the test split.

use intervalcast::data::synth::{BLOCK_LEN, SEGMENT_LEN};
use intervalcast::data::{
    chrono_split, generate_synthds, make_windows, normalize, SplitSpec, WindowConfig,
};
use intervalcast::eval::{evaluate_windows, improvement_table, rolling_eval};
use intervalcast::patch::{Strategy, TrainedModel};
use intervalcast::train::train;
use intervalcast::{DecayRate, ModelKind, PolicyConfig, TrainConfig};

fn main() -> intervalcast::Result<()> {
    let (series, _) = normalize(&generate_synthds(1, 0.0)?)?;
    let wcfg = WindowConfig::new(48, 24, 1)?;
    let splits = chrono_split(make_windows(&series, &wcfg)?, &SplitSpec::standard())?;
    let aligned: Vec<_> = splits
        .test
        .iter()
        .filter(|s| s.t_origin % BLOCK_LEN == SEGMENT_LEN)
        .cloned()
        .collect();

    let cells = intervalcast::DiscretePartition::equal(4)?.cells().to_vec();
    let cfg = TrainConfig::default();
    let mut columns = Vec::new();
    let mut models = Vec::new();
    for policy in [
        PolicyConfig::baseline(),
        PolicyConfig::discrete(4)?,
        PolicyConfig::dstar(4, DecayRate::Finite(37.0), 0.5)?,
    ] {
        let out = train(
            &policy,
            ModelKind::mlp(),
            &splits.train,
            &splits.val,
            &cfg,
            0,
        )?;
        let model = TrainedModel {
            params: out.params,
            policy: policy.clone(),
        };
        columns.push((
            policy.kind().to_string(),
            evaluate_windows(&model, &aligned, &cells, Strategy::Average)?,
        ));
        models.push(model);
    }
    let table = improvement_table(&columns, 0)?;
    print!("{}", table.to_csv());

    // rolling origin over the raw test span
    let first = splits.test[0].t_origin - wcfg.window;
    let test_series = series.slice(first, series.len())?;
    let rolled = rolling_eval(&models[2], &test_series, &wcfg, &cells, Strategy::Average)?;
    let covered = rolled.coverage.iter().filter(|&&c| c == 1).count();
    println!(
        "rolling Dstar: {} origins, {covered} steps scored once",
        rolled.rolls
    );
    for m in &rolled.metrics {
        println!(
            "  {}  mae {:?}  ({} of {} entries)",
            m.interval,
            m.mae(),
            m.covered_entries,
            m.total_entries
        );
    }
    Ok(())
}
