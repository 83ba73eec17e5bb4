//! The five training policies and the per-sample objectives they produce.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::data::WindowSample;
use crate::error::{Error, Result};
use crate::interval::{target_weight, DecayRate, DiscretePartition, Interval, UniformSampler};
use crate::train::loss::{entry_labels, LossSpec, SampleObjective};

pub const DEFAULT_PHI: f64 = 0.5;
pub const DEFAULT_NU: f64 = 37.0;
pub const DEFAULT_WEIGHT_DECAY: f64 = 0.01;
/// Cells of the probe partition used to validate continuous-interval models.
pub const PROBE_CELLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    B,
    E2E,
    C,
    D,
    Dstar,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::B => "b",
            PolicyKind::E2E => "e2e",
            PolicyKind::C => "c",
            PolicyKind::D => "d",
            PolicyKind::Dstar => "dstar",
        })
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "b" | "baseline" => Ok(PolicyKind::B),
            "e2e" => Ok(PolicyKind::E2E),
            "c" | "continuous" => Ok(PolicyKind::C),
            "d" | "discrete" => Ok(PolicyKind::D),
            "dstar" | "d*" => Ok(PolicyKind::Dstar),
            other => Err(Error::Config(format!(
                "unknown policy {other:?} (expected b, e2e, c, d or dstar)"
            ))),
        }
    }
}

/// Interval source of a policy. Each variant carries exactly the fields its
/// kind needs.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySource {
    Baseline,
    Task {
        interval: Interval,
    },
    Continuous {
        sampler: UniformSampler,
    },
    Discrete {
        partition: DiscretePartition,
    },
    Patched {
        partition: DiscretePartition,
        nu: DecayRate,
        phi: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub source: PolicySource,
    pub weight_decay: f64,
}

impl PolicyConfig {
    pub fn baseline() -> Self {
        Self::from_source(PolicySource::Baseline)
    }

    pub fn e2e(interval: Interval) -> Self {
        Self::from_source(PolicySource::Task { interval })
    }

    pub fn continuous(delta: f64) -> Result<Self> {
        Ok(Self::from_source(PolicySource::Continuous {
            sampler: UniformSampler::new(delta)?,
        }))
    }

    pub fn discrete(cells: usize) -> Result<Self> {
        Ok(Self::from_source(PolicySource::Discrete {
            partition: DiscretePartition::equal(cells)?,
        }))
    }

    pub fn dstar(cells: usize, nu: DecayRate, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&phi) {
            return Err(Error::Config(format!("phi must lie in [0, 1], got {phi}")));
        }
        Ok(Self::from_source(PolicySource::Patched {
            partition: DiscretePartition::equal(cells)?,
            nu,
            phi,
        }))
    }

    fn from_source(source: PolicySource) -> Self {
        Self {
            source,
            weight_decay: DEFAULT_WEIGHT_DECAY,
        }
    }

    pub fn with_weight_decay(mut self, weight_decay: f64) -> Result<Self> {
        if !(weight_decay >= 0.0) || !weight_decay.is_finite() {
            return Err(Error::Config(format!(
                "weight_decay must be >= 0, got {weight_decay}"
            )));
        }
        self.weight_decay = weight_decay;
        Ok(self)
    }

    pub fn kind(&self) -> PolicyKind {
        match self.source {
            PolicySource::Baseline => PolicyKind::B,
            PolicySource::Task { .. } => PolicyKind::E2E,
            PolicySource::Continuous { .. } => PolicyKind::C,
            PolicySource::Discrete { .. } => PolicyKind::D,
            PolicySource::Patched { .. } => PolicyKind::Dstar,
        }
    }

    pub fn partition(&self) -> Option<&DiscretePartition> {
        match &self.source {
            PolicySource::Discrete { partition } | PolicySource::Patched { partition, .. } => {
                Some(partition)
            }
            _ => None,
        }
    }

    pub fn task_interval(&self) -> Option<Interval> {
        match self.source {
            PolicySource::Task { interval } => Some(interval),
            _ => None,
        }
    }

    pub fn loss_spec(&self) -> LossSpec {
        match self.source {
            PolicySource::Patched { phi, .. } => LossSpec { phi },
            _ => LossSpec::REGRESSION_ONLY,
        }
    }

    /// One objective per sample. Discrete and continuous policies draw a
    /// fresh interval for every sample, in batch order.
    pub fn make_batch_losses<R: Rng + ?Sized>(
        &self,
        batch: &[&WindowSample],
        rng: &mut R,
    ) -> Vec<SampleObjective> {
        batch
            .iter()
            .map(|s| {
                let cell = match &self.source {
                    PolicySource::Baseline => Interval::FULL,
                    PolicySource::Task { interval } => *interval,
                    PolicySource::Continuous { sampler } => sampler.sample(rng),
                    PolicySource::Discrete { partition }
                    | PolicySource::Patched { partition, .. } => partition.sample(rng),
                };
                self.objective_for(s, cell)
            })
            .collect()
    }

    /// Objective of `sample` conditioned on `interval` under this policy's
    /// weighting rule.
    pub fn objective_for(&self, sample: &WindowSample, interval: Interval) -> SampleObjective {
        match &self.source {
            PolicySource::Baseline => SampleObjective {
                covariate: Interval::FULL,
                weight: 1.0,
                labels: None,
            },
            PolicySource::Task { .. } => SampleObjective {
                // the model never sees the task interval as a covariate
                covariate: Interval::FULL,
                weight: target_weight(&sample.target, &interval, DecayRate::Infinite),
                labels: None,
            },
            PolicySource::Continuous { .. } | PolicySource::Discrete { .. } => SampleObjective {
                covariate: interval,
                weight: target_weight(&sample.target, &interval, DecayRate::Infinite),
                labels: None,
            },
            PolicySource::Patched { nu, .. } => SampleObjective {
                covariate: interval,
                weight: target_weight(&sample.target, &interval, *nu),
                labels: Some(entry_labels(&sample.target, &interval)),
            },
        }
    }

    /// Intervals over which validation loss is averaged.
    pub fn validation_cells(&self) -> Vec<Interval> {
        match &self.source {
            PolicySource::Baseline => vec![Interval::FULL],
            PolicySource::Task { interval } => vec![*interval],
            PolicySource::Continuous { .. } => DiscretePartition::equal(PROBE_CELLS)
                .expect("probe partition")
                .cells()
                .to_vec(),
            PolicySource::Discrete { partition } | PolicySource::Patched { partition, .. } => {
                partition.cells().to_vec()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.weight_decay >= 0.0) || !self.weight_decay.is_finite() {
            return Err(Error::Config(format!(
                "weight_decay must be >= 0, got {}",
                self.weight_decay
            )));
        }
        if let PolicySource::Patched { phi, .. } = self.source {
            if !(0.0..=1.0).contains(&phi) {
                return Err(Error::Config(format!("phi must lie in [0, 1], got {phi}")));
            }
        }
        Ok(())
    }
}

/// Compact description stored in checkpoints, e.g. `dstar L=8 nu=37 phi=0.5 wd=0.01`.
impl fmt::Display for PolicyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind())?;
        match &self.source {
            PolicySource::Baseline => {}
            PolicySource::Task { interval } => {
                write!(f, " interval={},{}", interval.lo(), interval.hi())?
            }
            PolicySource::Continuous { sampler } => write!(f, " delta={}", sampler.delta())?,
            PolicySource::Discrete { partition } => write!(f, " L={}", partition.len())?,
            PolicySource::Patched { partition, nu, phi } => {
                write!(f, " L={} nu={nu} phi={phi}", partition.len())?
            }
        }
        write!(f, " wd={}", self.weight_decay)
    }
}

impl FromStr for PolicyConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let kind: PolicyKind = parts
            .next()
            .ok_or_else(|| Error::Config("empty policy description".into()))?
            .parse()?;
        let mut fields = std::collections::HashMap::new();
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("policy field {p:?} is not key=value")))?;
            fields.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| {
            fields
                .get(k)
                .ok_or_else(|| Error::Config(format!("{kind} policy needs {k}")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| Error::Config(format!("bad number for {k}")))
        };
        let mut policy = match kind {
            PolicyKind::B => PolicyConfig::baseline(),
            PolicyKind::E2E => PolicyConfig::e2e(get("interval")?.parse()?),
            PolicyKind::C => PolicyConfig::continuous(num("delta")?)?,
            PolicyKind::D => PolicyConfig::discrete(num("L")? as usize)?,
            PolicyKind::Dstar => {
                PolicyConfig::dstar(num("L")? as usize, get("nu")?.parse()?, num("phi")?)?
            }
        };
        if fields.contains_key("wd") {
            policy = policy.with_weight_decay(num("wd")?)?;
        }
        Ok(policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthds_trace, make_windows, SynthTrace, WindowConfig};
    use crate::matrix::Matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample(values: &[f64]) -> WindowSample {
        WindowSample {
            history: Matrix::zeros(2, 1),
            target: Matrix::column(values.to_vec()),
            t_origin: 2,
        }
    }

    #[test]
    fn baseline_weights_are_one() {
        let samples = [sample(&[0.1, 0.9]), sample(&[2.0, -1.0])];
        let batch: Vec<&WindowSample> = samples.iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for o in PolicyConfig::baseline().make_batch_losses(&batch, &mut rng) {
            assert_eq!(o.weight, 1.0);
            assert_eq!(o.covariate, Interval::FULL);
            assert!(o.labels.is_none());
        }
    }

    #[test]
    fn e2e_weight_follows_hypothesis_class() {
        let trace = generate_synthds_trace(5, 0.0).unwrap();
        let cfg = WindowConfig::new(48, 24, 1).unwrap();
        let windows = make_windows(&trace.series, &cfg).unwrap();
        let policy = PolicyConfig::e2e(Interval::new(0.75, 1.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut seen = [false; 2];
        for w in &windows {
            // windows whose target is exactly one output segment
            if SynthTrace::output_step(w.t_origin) != Some(1) {
                continue;
            }
            let k = trace.classes[SynthTrace::block_of(w.t_origin)];
            let o = &policy.make_batch_losses(&[w], &mut rng)[0];
            let expected = if k == 3 { 1.0 } else { 0.0 };
            assert_eq!(o.weight, expected, "block class {k}");
            assert_eq!(
                o.weight,
                target_weight(
                    &w.target,
                    &Interval::new(0.75, 1.0).unwrap(),
                    DecayRate::Infinite
                )
            );
            seen[(k == 3) as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn dstar_with_infinite_rate_matches_discrete() {
        let samples: Vec<WindowSample> = (0..40)
            .map(|i| sample(&[(i as f64 * 0.137) % 1.0, (i as f64 * 0.071) % 1.0]))
            .collect();
        let batch: Vec<&WindowSample> = samples.iter().collect();
        let d = PolicyConfig::discrete(4).unwrap();
        let ds = PolicyConfig::dstar(4, DecayRate::Infinite, 0.5).unwrap();
        let a = d.make_batch_losses(&batch, &mut ChaCha8Rng::seed_from_u64(11));
        let b = ds.make_batch_losses(&batch, &mut ChaCha8Rng::seed_from_u64(11));
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.covariate, y.covariate);
            assert_eq!(x.weight, y.weight);
        }
        assert!(b.iter().all(|o| o.labels.is_some()));
    }

    #[test]
    fn continuous_draws_respect_delta() {
        let samples = vec![sample(&[0.5]); 200];
        let batch: Vec<&WindowSample> = samples.iter().collect();
        let p = PolicyConfig::continuous(0.3).unwrap();
        for o in p.make_batch_losses(&batch, &mut ChaCha8Rng::seed_from_u64(2)) {
            assert!(o.covariate.width() >= 0.3 - 1e-12);
            assert_eq!(o.weight, if o.covariate.contains(0.5) { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn fingerprint_round_trip() {
        let policies = [
            PolicyConfig::baseline(),
            PolicyConfig::e2e(Interval::new(0.75, 1.0).unwrap()),
            PolicyConfig::continuous(0.15).unwrap(),
            PolicyConfig::discrete(8).unwrap(),
            PolicyConfig::dstar(8, DecayRate::Finite(37.0), 0.5).unwrap(),
            PolicyConfig::dstar(4, DecayRate::Infinite, 0.0)
                .unwrap()
                .with_weight_decay(0.0)
                .unwrap(),
        ];
        for p in policies {
            assert_eq!(p.to_string().parse::<PolicyConfig>().unwrap(), p);
        }
    }

    #[test]
    fn validation_cells_per_kind() {
        assert_eq!(
            PolicyConfig::baseline().validation_cells(),
            vec![Interval::FULL]
        );
        assert_eq!(
            PolicyConfig::continuous(0.1)
                .unwrap()
                .validation_cells()
                .len(),
            4
        );
        assert_eq!(
            PolicyConfig::discrete(8).unwrap().validation_cells().len(),
            8
        );
    }

    #[test]
    fn bad_phi_rejected() {
        assert!(PolicyConfig::dstar(4, DecayRate::Infinite, 1.5).is_err());
    }
}
