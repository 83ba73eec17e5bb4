//! Threshold sleep policy of a capacity cell: sweep the threshold on a
//! utilization trace, then measure how a biased forecast distorts the
//! decisions.

use intervalcast::energy::{
    compare_decisions, default_thresholds, simulate, sweep_threshold, EnergySimConfig,
};

fn main() -> intervalcast::Result<()> {
    let cfg = EnergySimConfig::default();

    // a day of low utilization with a busy afternoon, 15-minute steps
    let truth: Vec<f64> = (0..96)
        .map(|t| {
            let h = t as f64 / 4.0;
            0.004 + 0.03 * ((h - 14.0) * std::f64::consts::PI / 12.0).cos().max(0.0)
        })
        .collect();

    let sweep = sweep_threshold(&truth, &default_thresholds(), &cfg)?;
    for o in sweep.outcomes.iter().step_by(5) {
        println!(
            "u_th {:.3}: asleep {:2}, rate {:.2} Mbps, energy {:.1} Wh, objective {:.1}",
            o.threshold,
            o.sleep_steps(),
            o.mean_throughput,
            o.mean_energy,
            o.objective
        );
    }
    println!("best threshold {:.3}", sweep.best_threshold);

    let s = simulate(&truth, sweep.best_threshold, &cfg)?;
    println!(
        "asleep {} of {} steps, mean rate {:.2} Mbps, mean energy {:.1} Wh",
        s.sleep_steps(),
        truth.len(),
        s.mean_throughput,
        s.mean_energy
    );

    // a forecast that overshoots by 20%
    let forecast: Vec<f64> = truth.iter().map(|u| u * 1.2).collect();
    for th in [0.01, 0.02, 0.025] {
        let r = compare_decisions(&truth, &forecast, th, &cfg)?;
        println!(
            "u_th {th:.3}: sleep {} vs oracle {}, mismatches {}, energy error {:.1} Wh",
            r.sleep_forecast, r.sleep_true, r.mismatches, r.energy_error
        );
    }
    Ok(())
}
