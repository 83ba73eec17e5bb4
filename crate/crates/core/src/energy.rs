//! Two-tier network energy saving: a capacity cell sleeps whenever its
//! utilization is below a threshold and its traffic is offloaded, at
//! degraded rate, to an always-on coverage cell.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySimConfig {
    /// Peak service rate of the capacity cell, Mbps.
    pub c_cap: f64,
    /// Capacity available on the coverage cell, Mbps.
    pub c_cov: f64,
    /// Rate degradation when offloaded.
    pub alpha: f64,
    /// Wh per time unit when active.
    pub e_on: f64,
    /// Wh per time unit when asleep.
    pub e_off: f64,
    /// Trade-off between throughput and energy.
    pub lambda: f64,
}

impl Default for EnergySimConfig {
    fn default() -> Self {
        Self {
            c_cap: 100.0,
            c_cov: 30.0,
            alpha: 0.5,
            e_on: 1266.0,
            e_off: 320.0,
            lambda: 0.5,
        }
    }
}

impl EnergySimConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.c_cap > 0.0
            && self.c_cov > 0.0
            && self.alpha > 0.0
            && self.alpha <= 1.0
            && self.e_on >= self.e_off
            && self.e_off >= 0.0
            && (0.0..=1.0).contains(&self.lambda);
        if !ok {
            return Err(Error::Config(format!(
                "invalid energy config {self:?}: need c_cap, c_cov > 0, 0 < alpha <= 1, e_on >= e_off >= 0, 0 <= lambda <= 1"
            )));
        }
        Ok(())
    }
}

/// `S(t) = 1` iff `u(t) >= u_th`.
pub fn decide(u: &[f64], u_th: f64) -> Vec<bool> {
    u.iter().map(|&x| x >= u_th).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub threshold: f64,
    pub states: Vec<bool>,
    /// Mbps.
    pub throughput: Vec<f64>,
    /// Wh.
    pub energy: Vec<f64>,
    pub mean_throughput: f64,
    pub mean_energy: f64,
    pub objective: f64,
}

impl SimOutcome {
    pub fn sleep_steps(&self) -> usize {
        self.states.iter().filter(|&&s| !s).count()
    }
}

fn check_utilization(u: &[f64]) -> Result<()> {
    if u.is_empty() {
        return Err(Error::InsufficientData("empty utilization series".into()));
    }
    if let Some((t, v)) = u
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(Error::Config(format!(
            "utilization {v} at step {t} is outside [0, 1]"
        )));
    }
    Ok(())
}

/// Applies `states` to the true utilization `u`.
pub fn simulate_states(
    u: &[f64],
    states: &[bool],
    threshold: f64,
    cfg: &EnergySimConfig,
) -> Result<SimOutcome> {
    cfg.validate()?;
    check_utilization(u)?;
    if u.len() != states.len() {
        return Err(Error::InsufficientData(format!(
            "{} utilization steps but {} states",
            u.len(),
            states.len()
        )));
    }
    let mut throughput = Vec::with_capacity(u.len());
    let mut energy = Vec::with_capacity(u.len());
    for (&x, &on) in u.iter().zip(states) {
        let load = x * cfg.c_cap;
        if on {
            throughput.push(load.min(cfg.c_cap));
            energy.push(cfg.e_on);
        } else {
            throughput.push(cfg.alpha * load.min(cfg.c_cov));
            energy.push(cfg.e_off);
        }
    }
    let n = u.len() as f64;
    let mean_throughput = throughput.iter().sum::<f64>() / n;
    let mean_energy = energy.iter().sum::<f64>() / n;
    Ok(SimOutcome {
        threshold,
        states: states.to_vec(),
        throughput,
        energy,
        mean_throughput,
        mean_energy,
        objective: (1.0 - cfg.lambda) * mean_throughput - cfg.lambda * mean_energy,
    })
}

pub fn simulate(u: &[f64], u_th: f64, cfg: &EnergySimConfig) -> Result<SimOutcome> {
    if !(0.0..=1.0).contains(&u_th) {
        return Err(Error::Config(format!("threshold {u_th} is outside [0, 1]")));
    }
    simulate_states(u, &decide(u, u_th), u_th, cfg)
}

/// `n` evenly spaced thresholds from `lo` to `hi` inclusive.
pub fn threshold_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// 26 points over `[0, 0.025]`.
pub fn default_thresholds() -> Vec<f64> {
    threshold_grid(0.0, 0.025, 26)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSweep {
    pub outcomes: Vec<SimOutcome>,
    /// Threshold with the largest objective; the smallest one on ties.
    pub best_threshold: f64,
}

pub fn sweep_threshold(
    u: &[f64],
    thresholds: &[f64],
    cfg: &EnergySimConfig,
) -> Result<ThresholdSweep> {
    if thresholds.is_empty() {
        return Err(Error::Config("empty threshold list".into()));
    }
    if thresholds.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("thresholds must be sorted ascending".into()));
    }
    let outcomes: Vec<SimOutcome> = thresholds
        .iter()
        .map(|&th| simulate(u, th, cfg))
        .collect::<Result<_>>()?;
    let mut best = &outcomes[0];
    for o in &outcomes[1..] {
        if o.objective > best.objective {
            best = o;
        }
    }
    Ok(ThresholdSweep {
        best_threshold: best.threshold,
        outcomes,
    })
}

impl ThresholdSweep {
    /// `threshold,mean_throughput_mbps,mean_energy_wh,objective,sleep_steps`.
    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("threshold,mean_throughput_mbps,mean_energy_wh,objective,sleep_steps\n");
        for o in &self.outcomes {
            s.push_str(&format!(
                "{:?},{:?},{:?},{:?},{}\n",
                o.threshold,
                o.mean_throughput,
                o.mean_energy,
                o.objective,
                o.sleep_steps()
            ));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionReport {
    pub threshold: f64,
    pub sleep_true: usize,
    pub sleep_forecast: usize,
    /// `|#sleep(forecast) - #sleep(truth)|`.
    pub sleep_duration_error: usize,
    /// Steps where the two decisions differ.
    pub mismatches: usize,
    /// Mean energy of forecast-driven decisions applied to the truth, Wh.
    pub energy_forecast: f64,
    /// Mean energy of oracle decisions, Wh.
    pub energy_oracle: f64,
    /// `|energy_forecast - energy_oracle|`, Wh.
    pub energy_error: f64,
}

/// Compares decisions taken on a forecast with those taken on the truth,
/// both applied to the true utilization.
pub fn compare_decisions(
    u_true: &[f64],
    u_forecast: &[f64],
    u_th: f64,
    cfg: &EnergySimConfig,
) -> Result<DecisionReport> {
    if u_true.len() != u_forecast.len() {
        return Err(Error::InsufficientData(format!(
            "truth has {} steps, forecast {}",
            u_true.len(),
            u_forecast.len()
        )));
    }
    let oracle = simulate(u_true, u_th, cfg)?;
    let forecast_states = decide(u_forecast, u_th);
    let driven = simulate_states(u_true, &forecast_states, u_th, cfg)?;
    let mismatches = oracle
        .states
        .iter()
        .zip(&driven.states)
        .filter(|(a, b)| a != b)
        .count();
    Ok(DecisionReport {
        threshold: u_th,
        sleep_true: oracle.sleep_steps(),
        sleep_forecast: driven.sleep_steps(),
        sleep_duration_error: oracle.sleep_steps().abs_diff(driven.sleep_steps()),
        mismatches,
        energy_forecast: driven.mean_energy,
        energy_oracle: oracle.mean_energy,
        energy_error: (driven.mean_energy - oracle.mean_energy).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decide_examples() {
        assert!(decide(&[0.0, 0.3, 1.0], 0.0).iter().all(|&s| s));
        assert_eq!(decide(&[1.0], 1.0), vec![true]);
        assert_eq!(decide(&[0.01, 0.03], 0.02), vec![false, true]);
    }

    #[test]
    fn simulate_examples() {
        let cfg = EnergySimConfig::default();
        let on = simulate(&[0.5], 0.0, &cfg).unwrap();
        assert_eq!(on.throughput[0], 50.0);
        let off = simulate(&[0.5], 0.9, &cfg).unwrap();
        assert_eq!(off.throughput[0], 15.0);
        let all_on = simulate(&[0.1, 0.0, 0.7], 0.0, &cfg).unwrap();
        assert_eq!(all_on.mean_energy, 1266.0);
    }

    #[test]
    fn default_grid() {
        let g = default_thresholds();
        assert_eq!(g.len(), 26);
        assert_eq!(g[0], 0.0);
        assert!((g[25] - 0.025).abs() < 1e-15);
        assert!((g[1] - 0.001).abs() < 1e-15);
    }

    #[test]
    fn sweep_single_threshold() {
        let s = sweep_threshold(&[0.2, 0.01], &[0.0], &EnergySimConfig::default()).unwrap();
        assert_eq!(s.outcomes.len(), 1);
        assert_eq!(s.outcomes[0].sleep_steps(), 0);
    }

    #[test]
    fn throughput_only_prefers_zero_threshold() {
        let cfg = EnergySimConfig {
            lambda: 0.0,
            ..EnergySimConfig::default()
        };
        let u: Vec<f64> = (0..50).map(|t| t as f64 * 0.0006).collect();
        let s = sweep_threshold(&u, &default_thresholds(), &cfg).unwrap();
        assert_eq!(s.best_threshold, 0.0);
    }

    #[test]
    fn energy_only_prefers_most_sleep() {
        let cfg = EnergySimConfig {
            lambda: 1.0,
            ..EnergySimConfig::default()
        };
        let u: Vec<f64> = (0..50).map(|t| t as f64 * 0.0006).collect();
        let s = sweep_threshold(&u, &default_thresholds(), &cfg).unwrap();
        let most = s.outcomes.iter().map(|o| o.sleep_steps()).max().unwrap();
        let chosen = s
            .outcomes
            .iter()
            .find(|o| o.threshold == s.best_threshold)
            .unwrap();
        assert_eq!(chosen.sleep_steps(), most);
    }

    #[test]
    fn maximal_mismatch() {
        let r =
            compare_decisions(&[0.0; 24], &[0.5; 24], 0.02, &EnergySimConfig::default()).unwrap();
        assert_eq!(r.sleep_duration_error, 24);
        assert_eq!(r.mismatches, 24);
        assert!((r.energy_error - (1266.0 - 320.0)).abs() < 1e-9);
    }

    #[test]
    fn length_mismatch() {
        assert!(compare_decisions(&[0.1], &[0.1, 0.2], 0.0, &EnergySimConfig::default()).is_err());
    }

    #[test]
    fn invalid_config() {
        let cfg = EnergySimConfig {
            alpha: 0.0,
            ..EnergySimConfig::default()
        };
        assert!(simulate(&[0.1], 0.0, &cfg).is_err());
        assert!(simulate(&[1.5], 0.0, &EnergySimConfig::default()).is_err());
    }

    proptest! {
        #[test]
        fn invariants(u in prop::collection::vec(0.0f64..=1.0, 1..80), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let cfg = EnergySimConfig::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let s_lo = simulate(&u, lo, &cfg).unwrap();
            let s_hi = simulate(&u, hi, &cfg).unwrap();
            for (x, y) in s_lo.states.iter().zip(&s_hi.states) {
                prop_assert!(*x || !*y);
            }
            for o in [&s_lo, &s_hi] {
                prop_assert!(o.mean_energy >= cfg.e_off - 1e-9 && o.mean_energy <= cfg.e_on + 1e-9);
                prop_assert!(o.throughput.iter().all(|&r| r <= cfg.c_cap.max(cfg.alpha * cfg.c_cov)));
            }
            let same = compare_decisions(&u, &u, lo, &cfg).unwrap();
            prop_assert_eq!(same.sleep_duration_error, 0);
            prop_assert_eq!(same.mismatches, 0);
            prop_assert_eq!(same.energy_error, 0.0);
        }
    }
}
