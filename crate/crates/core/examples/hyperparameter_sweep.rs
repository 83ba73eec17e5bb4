//! Sweeps the number of cells of a Dstar model and compares the two
//! patching strategies on coarser query partitions.

use intervalcast::data::{
    chrono_split, generate_synthds, make_windows, normalize, SplitSpec, WindowConfig,
};
use intervalcast::eval::{evaluate_windows, recombine, strategy_ratio};
use intervalcast::patch::{Strategy, TrainedModel};
use intervalcast::train::train;
use intervalcast::{DecayRate, DiscretePartition, ModelKind, PolicyConfig, TrainConfig};

fn main() -> intervalcast::Result<()> {
    let (series, _) = normalize(&generate_synthds(1, 0.0)?)?;
    let splits = chrono_split(
        make_windows(&series, &WindowConfig::new(48, 24, 4)?)?,
        &SplitSpec::standard(),
    )?;
    let cfg = TrainConfig {
        epochs: 10,
        ..TrainConfig::default()
    };

    println!("cells  query-cells  mae(avg)  mae(max)  max/avg");
    for l in [4, 8, 16] {
        let policy = PolicyConfig::dstar(l, DecayRate::Finite(37.0), 0.5)?;
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
            policy,
        };
        for q in [1, 2, 4] {
            let queries = DiscretePartition::equal(q)?.cells().to_vec();
            let one = recombine(&evaluate_windows(
                &model,
                &splits.test,
                &queries,
                Strategy::Average,
            )?);
            let inf = recombine(&evaluate_windows(
                &model,
                &splits.test,
                &queries,
                Strategy::MaxConfidence,
            )?);
            if let (Some(one), Some(inf)) = (one, inf) {
                println!(
                    "{l:5}  {q:11}  {one:8.4}  {inf:8.4}  {:7.3}",
                    strategy_ratio(inf, one)?
                );
            }
        }
    }
    Ok(())
}
