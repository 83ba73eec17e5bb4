use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use super::config::{parse_list, parse_range, ConfigFile};
use super::{
    CommonArgs, DataArgs, EnergyArgs, EvalArgs, EvalTargetArgs, FitArgs, GenerateArgs, PolicyArgs,
    SweepArgs, TrainArgs, OUT_ENV,
};
use crate::data::{
    chrono_split, generate_synthds, load_csv, make_windows, normalize, write_csv, SplitSpec,
    Splits, TimeSeries, WindowConfig, WindowSample,
};
use crate::energy::{compare_decisions, sweep_threshold, EnergySimConfig};
use crate::error::{Error, Result};
use crate::eval::{evaluate_windows, improvement_table, rolling_eval, IntervalMetric};
use crate::interval::{DecayRate, DiscretePartition, Interval};
use crate::model::{Checkpoint, ModelKind};
use crate::patch::{Strategy, TrainedModel};
use crate::train::{
    train, PolicyConfig, PolicyKind, TrainConfig, TrainOutcome, DEFAULT_NU, DEFAULT_PHI,
};

const DEFAULT_DELTA: f64 = 0.1;
const DEFAULT_CELLS: usize = 4;

fn config_file(common: &CommonArgs) -> Result<ConfigFile> {
    match &common.config {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn out_location(common: &CommonArgs, file: &ConfigFile) -> Result<PathBuf> {
    if let Some(p) = file.pick_opt(common.out.clone(), "out")? {
        return Ok(p);
    }
    Ok(std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out")))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synth {
        seed: u64,
        noise_sd: f64,
    },
    Csv {
        path: PathBuf,
        channels: usize,
        domain_max: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub source: DataSource,
    pub window: WindowConfig,
    pub split: SplitSpec,
}

impl DataConfig {
    fn resolve(a: &DataArgs, file: &ConfigFile) -> Result<Self> {
        let data = file.pick(a.data.clone(), "data", "synth".to_string())?;
        let source = if data == "synth" {
            let noise_sd = file.pick(a.noise_sd, "noise_sd", 0.05)?;
            if !(noise_sd >= 0.0) {
                return Err(Error::Config(format!(
                    "noise_sd must be >= 0, got {noise_sd}"
                )));
            }
            DataSource::Synth {
                seed: file.pick(a.data_seed, "data_seed", 0)?,
                noise_sd,
            }
        } else {
            let domain_max = file.pick(a.domain_max, "domain_max", 1.0)?;
            if !(domain_max > 0.0) {
                return Err(Error::Config(format!(
                    "domain_max must be > 0, got {domain_max}"
                )));
            }
            DataSource::Csv {
                path: PathBuf::from(data),
                channels: file.pick(a.channels, "channels", 100)?,
                domain_max,
            }
        };
        let window = WindowConfig::new(
            file.pick(a.window, "window", 48)?,
            file.pick(a.horizon, "horizon", 24)?,
            file.pick(a.stride, "stride", 1)?,
        )?;
        let split = match file.pick_opt(a.split.clone(), "split")? {
            Some(s) => {
                let f: Vec<f64> = parse_list(&s, "split")?;
                if f.len() != 3 {
                    return Err(Error::Config("split needs three fractions".into()));
                }
                SplitSpec::new(f[0], f[1], f[2])?
            }
            None => SplitSpec::standard(),
        };
        Ok(Self {
            source,
            window,
            split,
        })
    }

    /// The normalized series.
    pub fn load_series(&self) -> Result<TimeSeries> {
        let raw = match &self.source {
            DataSource::Synth { seed, noise_sd } => generate_synthds(*seed, *noise_sd)?,
            DataSource::Csv {
                path,
                channels,
                domain_max,
            } => load_csv(path, *channels, *domain_max)?,
        };
        Ok(normalize(&raw)?.0)
    }
}

/// Normalized series plus its chronological window splits.
pub fn load_splits(data: &DataConfig) -> Result<(TimeSeries, Splits<WindowSample>)> {
    let series = data.load_series()?;
    let windows = make_windows(&series, &data.window)?;
    let splits = chrono_split(windows, &data.split)?;
    Ok((series, splits))
}

/// Everything a training run needs, validated before any compute.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: DataConfig,
    pub model: ModelKind,
    pub policy: PolicyConfig,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub name: Option<String>,
}

struct PolicyFields {
    kind: PolicyKind,
    interval: Option<Interval>,
    delta: f64,
    cells: usize,
    nu: DecayRate,
    phi: f64,
    weight_decay: f64,
}

impl PolicyFields {
    fn resolve(a: &PolicyArgs, file: &ConfigFile, default_kind: PolicyKind) -> Result<Self> {
        let kind = match file.pick_opt(a.policy.clone(), "policy")? {
            Some(s) => s.parse()?,
            None => default_kind,
        };
        let interval = file
            .pick_opt(a.interval.clone(), "interval")?
            .map(|s| s.parse::<Interval>())
            .transpose()?;
        let nu = match file.pick_opt(a.nu.clone(), "nu")? {
            Some(s) => s.parse()?,
            None => DecayRate::Finite(DEFAULT_NU),
        };
        Ok(Self {
            kind,
            interval,
            delta: file.pick(a.delta, "delta", DEFAULT_DELTA)?,
            cells: file.pick(a.cells, "L", DEFAULT_CELLS)?,
            nu,
            phi: file.pick(a.phi, "phi", DEFAULT_PHI)?,
            weight_decay: file.pick(
                a.weight_decay,
                "weight_decay",
                crate::train::DEFAULT_WEIGHT_DECAY,
            )?,
        })
    }

    fn build(&self, warnings: &mut Vec<String>) -> Result<PolicyConfig> {
        let policy = match self.kind {
            PolicyKind::B => {
                if self.interval.is_some() {
                    warnings.push("interval ignored for policy b".into());
                }
                PolicyConfig::baseline()
            }
            PolicyKind::E2E => PolicyConfig::e2e(
                self.interval
                    .ok_or_else(|| Error::Config("policy e2e needs --interval lo,hi".into()))?,
            ),
            PolicyKind::C => PolicyConfig::continuous(self.delta)?,
            PolicyKind::D => PolicyConfig::discrete(self.cells)?,
            PolicyKind::Dstar => PolicyConfig::dstar(self.cells, self.nu, self.phi)?,
        };
        policy.with_weight_decay(self.weight_decay)
    }
}

fn resolve_fit(a: &FitArgs, file: &ConfigFile) -> Result<(ModelKind, TrainConfig, Vec<u64>)> {
    let model: ModelKind = file
        .pick(a.model.clone(), "model", "mlp".to_string())?
        .parse()?;
    let train = TrainConfig {
        epochs: file.pick(a.epochs, "epochs", 50)?,
        batch_size: file.pick(a.batch, "batch", 32)?,
        patience: file.pick(a.patience, "patience", 5)?,
        ..TrainConfig::default()
    };
    train.validate()?;
    let seeds: Vec<u64> = parse_list(&file.pick(a.seed.clone(), "seed", "0".to_string())?, "seed")?;
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    Ok((model, train, seeds))
}

impl RunConfig {
    /// Resolves flags over the config file over defaults. Returns the
    /// config and any warnings.
    pub fn from_args(a: &TrainArgs) -> Result<(Self, Vec<String>)> {
        let file = config_file(&a.common)?;
        let mut warnings = Vec::new();
        let data = DataConfig::resolve(&a.data, &file)?;
        let policy =
            PolicyFields::resolve(&a.policy, &file, PolicyKind::B)?.build(&mut warnings)?;
        let (model, train, seeds) = resolve_fit(&a.fit, &file)?;
        let cfg = Self {
            data,
            model,
            policy,
            train,
            seeds,
            out: out_location(&a.common, &file)?,
            name: file.pick_opt(a.name.clone(), "name")?,
        };
        Ok((cfg, warnings))
    }

    fn stem(&self, seed: u64) -> String {
        match &self.name {
            Some(n) if self.seeds.len() == 1 => n.clone(),
            Some(n) => format!("{n}-seed{seed}"),
            None => format!("{}-seed{seed}", self.policy.kind()),
        }
    }
}

fn append_log(dir: &Path, line: &str) -> Result<()> {
    let path = dir.join("train.log");
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| Error::io(&path, e))?;
    writeln!(f, "{line}").map_err(|e| Error::io(&path, e))
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<String> {
    let file = config_file(&a.common)?;
    let seed = file.pick(a.seed, "seed", 0)?;
    let noise_sd = file.pick(a.noise_sd, "noise_sd", 0.05)?;
    let series = generate_synthds(seed, noise_sd)?;
    let out = out_location(&a.common, &file)?;
    let path = if out.extension().is_some_and(|e| e == "csv") {
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            ensure_dir(parent)?;
        }
        out
    } else {
        ensure_dir(&out)?;
        out.join("synthds.csv")
    };
    write_csv(&series, &path)?;
    Ok(format!("wrote {} ({} steps)", path.display(), series.len()))
}

fn train_one(cfg: &RunConfig, splits: &Splits<WindowSample>, seed: u64) -> Result<TrainOutcome> {
    train(
        &cfg.policy,
        cfg.model,
        &splits.train,
        &splits.val,
        &cfg.train,
        seed,
    )
}

pub fn cmd_train(a: &TrainArgs) -> Result<String> {
    let (cfg, warnings) = RunConfig::from_args(a)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let (_, splits) = load_splits(&cfg.data)?;
    ensure_dir(&cfg.out)?;
    let mut summary = String::new();
    for &seed in &cfg.seeds {
        let outcome = train_one(&cfg, &splits, seed)?;
        let stem = cfg.stem(seed);
        let ckpt = cfg.out.join(format!("{stem}.ckpt"));
        let report = cfg.out.join(format!("{stem}.report.csv"));
        Checkpoint {
            params: outcome.params,
            policy: cfg.policy.to_string(),
            optimizer: Some(outcome.optimizer),
        }
        .save(&ckpt)?;
        outcome.report.write_csv(&report)?;
        let best = outcome
            .report
            .best()
            .map(|r| r.val_loss)
            .unwrap_or(f64::NAN);
        append_log(
            &cfg.out,
            &format!(
                "{stem} policy=\"{}\" model={} seed={seed} epochs_run={} best_epoch={} wall_clock_secs={:.3}",
                cfg.policy,
                cfg.model,
                outcome.report.epochs.len(),
                outcome.report.best_epoch,
                outcome.report.wall_clock_secs
            ),
        )?;
        let _ = writeln!(
            summary,
            "wrote {} (best epoch {}, val loss {best:.6})",
            ckpt.display(),
            outcome.report.best_epoch
        );
    }
    Ok(summary)
}

fn parse_intervals(s: &str) -> Result<Vec<Interval>> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse())
        .collect()
}

fn resolve_targets(t: &EvalTargetArgs, file: &ConfigFile) -> Result<(Vec<Interval>, Strategy)> {
    let intervals = match file.pick_opt(t.intervals.clone(), "intervals")? {
        Some(s) => parse_intervals(&s)?,
        None => DiscretePartition::equal(file.pick(t.eval_l, "eval_l", DEFAULT_CELLS)?)?
            .cells()
            .to_vec(),
    };
    if intervals.is_empty() {
        return Err(Error::Config("no evaluation intervals".into()));
    }
    let strategy = file
        .pick(t.strategy.clone(), "strategy", "avg".to_string())?
        .parse()?;
    Ok((intervals, strategy))
}

/// Like [`evaluate_windows`], but intervals a model cannot answer yield an
/// empty metric instead of an error.
fn evaluate_lenient(
    model: &TrainedModel,
    windows: &[WindowSample],
    intervals: &[Interval],
    strategy: Strategy,
) -> Result<Vec<IntervalMetric>> {
    intervals
        .iter()
        .map(
            |i| match evaluate_windows(model, windows, std::slice::from_ref(i), strategy) {
                Ok(mut m) => Ok(m.remove(0)),
                Err(Error::UnsupportedQuery { .. }) => Ok(IntervalMetric::new(*i)),
                Err(e) => Err(e),
            },
        )
        .collect()
}

fn rolling_windows(
    series: &TimeSeries,
    test: &[WindowSample],
    window: &WindowConfig,
) -> Result<Vec<WindowSample>> {
    let first = test
        .first()
        .ok_or_else(|| Error::InsufficientData("empty test split".into()))?;
    let last = test.last().expect("non-empty");
    let span = series.slice(
        first.t_origin - window.window,
        last.t_origin + window.horizon,
    )?;
    let cfg = WindowConfig::new(window.window, window.horizon, window.horizon)?;
    make_windows(&span, &cfg)
}

pub fn cmd_eval(a: &EvalArgs) -> Result<String> {
    let file = config_file(&a.common)?;
    let data = DataConfig::resolve(&a.data, &file)?;
    let (intervals, strategy) = resolve_targets(&a.target, &file)?;
    let models: Vec<(String, TrainedModel)> = a
        .checkpoint
        .iter()
        .map(|p| {
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string());
            Ok((name, TrainedModel::from_checkpoint(&Checkpoint::load(p)?)?))
        })
        .collect::<Result<_>>()?;
    let out = out_location(&a.common, &file)?;
    let (series, splits) = load_splits(&data)?;

    let mut columns = Vec::new();
    for (name, model) in &models {
        let metrics = if a.rolling {
            let cfg = data.window;
            let first = splits
                .test
                .first()
                .ok_or_else(|| Error::InsufficientData("empty test split".into()))?;
            let last = splits.test.last().expect("non-empty");
            let span = series.slice(first.t_origin - cfg.window, last.t_origin + cfg.horizon)?;
            match rolling_eval(model, &span, &cfg, &intervals, strategy) {
                Ok(r) => r.metrics,
                Err(Error::UnsupportedQuery { .. }) => evaluate_lenient(
                    model,
                    &rolling_windows(&series, &splits.test, &cfg)?,
                    &intervals,
                    strategy,
                )?,
                Err(e) => return Err(e),
            }
        } else {
            evaluate_lenient(model, &splits.test, &intervals, strategy)?
        };
        columns.push((name.clone(), metrics));
    }
    let baseline = models
        .iter()
        .position(|(_, m)| m.policy.kind() == PolicyKind::B)
        .unwrap_or(0);
    let table = improvement_table(&columns, baseline)?;
    ensure_dir(&out)?;
    let path = out.join("eval.csv");
    let csv = table.to_csv();
    write_text(&path, &csv)?;
    Ok(format!("wrote {}\n{csv}", path.display()))
}

#[derive(Debug, Clone, PartialEq)]
enum SweepParam {
    Cells(Vec<usize>),
    Nu(Vec<DecayRate>),
    Delta(Vec<f64>),
    Strategy(Vec<Strategy>),
}

fn parse_sweep(s: &str) -> Result<(String, SweepParam)> {
    let (key, values) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("sweep {s:?} is not param=values")))?;
    let key = key.trim();
    let param = match key {
        "L" => SweepParam::Cells(parse_list(values, "L")?),
        "nu" => SweepParam::Nu(parse_list(values, "nu")?),
        "delta" => SweepParam::Delta(parse_range(values, "delta")?),
        "strategy" => SweepParam::Strategy(parse_list(values, "strategy")?),
        other => {
            return Err(Error::Config(format!(
                "cannot sweep {other:?} (expected L, nu, delta or strategy)"
            )))
        }
    };
    Ok((key.to_string(), param))
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<String> {
    let file = config_file(&a.common)?;
    let spec = file
        .pick_opt(a.sweep.clone(), "sweep")?
        .ok_or_else(|| Error::Config("sweep needs --sweep param=values".into()))?;
    let (key, param) = parse_sweep(&spec)?;
    let default_kind = match param {
        SweepParam::Delta(_) => PolicyKind::C,
        _ => PolicyKind::Dstar,
    };
    let base = PolicyFields::resolve(&a.policy, &file, default_kind)?;
    let allowed: &[PolicyKind] = match param {
        SweepParam::Cells(_) => &[PolicyKind::D, PolicyKind::Dstar],
        SweepParam::Nu(_) | SweepParam::Strategy(_) => &[PolicyKind::Dstar],
        SweepParam::Delta(_) => &[PolicyKind::C],
    };
    if !allowed.contains(&base.kind) {
        return Err(Error::Config(format!(
            "cannot sweep {key} with policy {}",
            base.kind
        )));
    }
    let data = DataConfig::resolve(&a.data, &file)?;
    let (model, train_cfg, seeds) = resolve_fit(&a.fit, &file)?;
    let (intervals, strategy) = resolve_targets(&a.target, &file)?;
    let out = out_location(&a.common, &file)?;

    // one entry per (label, policy, strategies to evaluate)
    let mut warnings = Vec::new();
    let mut runs: Vec<(String, PolicyConfig, Vec<Strategy>)> = Vec::new();
    match &param {
        SweepParam::Cells(vals) => {
            for &l in vals {
                let f = PolicyFields {
                    cells: l,
                    ..base_clone(&base)
                };
                runs.push((l.to_string(), f.build(&mut warnings)?, vec![strategy]));
            }
        }
        SweepParam::Nu(vals) => {
            for &nu in vals {
                let f = PolicyFields {
                    nu,
                    ..base_clone(&base)
                };
                runs.push((nu.to_string(), f.build(&mut warnings)?, vec![strategy]));
            }
        }
        SweepParam::Delta(vals) => {
            for &d in vals {
                let f = PolicyFields {
                    delta: d,
                    ..base_clone(&base)
                };
                runs.push((format!("{d}"), f.build(&mut warnings)?, vec![strategy]));
            }
        }
        SweepParam::Strategy(vals) => {
            runs.push(("-".into(), base.build(&mut warnings)?, vals.clone()));
        }
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }

    let (_, splits) = load_splits(&data)?;
    let mut csv = String::from("param,value,seed,interval,mae,covered_entries,best_epoch\n");
    for (label, policy, strategies) in &runs {
        for &seed in &seeds {
            let outcome = train(policy, model, &splits.train, &splits.val, &train_cfg, seed)?;
            let trained = TrainedModel {
                params: outcome.params,
                policy: policy.clone(),
            };
            for &s in strategies {
                let value = if matches!(param, SweepParam::Strategy(_)) {
                    s.to_string()
                } else {
                    label.clone()
                };
                for m in evaluate_lenient(&trained, &splits.test, &intervals, s)? {
                    let _ = writeln!(
                        csv,
                        "{key},{value},{seed},\"{}\",{},{},{}",
                        m.interval,
                        m.mae().map(|v| format!("{v:?}")).unwrap_or_default(),
                        m.covered_entries,
                        outcome.report.best_epoch
                    );
                }
            }
        }
    }
    ensure_dir(&out)?;
    let path = out.join(format!("sweep-{key}.csv"));
    write_text(&path, &csv)?;
    Ok(format!("wrote {}", path.display()))
}

fn base_clone(b: &PolicyFields) -> PolicyFields {
    PolicyFields {
        kind: b.kind,
        interval: b.interval,
        delta: b.delta,
        cells: b.cells,
        nu: b.nu,
        phi: b.phi,
        weight_decay: b.weight_decay,
    }
}

fn load_column(path: &Path, scale: f64) -> Result<Vec<f64>> {
    let s = load_csv(path, 1, 1.0)?;
    Ok(s.channel(0).into_iter().map(|v| v * scale).collect())
}

pub fn cmd_energy(a: &EnergyArgs) -> Result<String> {
    let file = config_file(&a.common)?;
    let cfg = EnergySimConfig {
        c_cap: file.pick(a.c_cap, "c_cap", 100.0)?,
        c_cov: file.pick(a.c_cov, "c_cov", 30.0)?,
        alpha: file.pick(a.alpha, "alpha", 0.5)?,
        e_on: file.pick(a.e_on, "e_on", 1266.0)?,
        e_off: file.pick(a.e_off, "e_off", 320.0)?,
        lambda: file.pick(a.lambda, "lambda", 0.5)?,
    };
    cfg.validate()?;
    let thresholds = parse_range(
        &file.pick(a.thresholds.clone(), "thresholds", "0:0.025:26".to_string())?,
        "thresholds",
    )?;
    let scale = file.pick(a.scale, "scale", 1.0)?;
    let truth_path: PathBuf = file
        .pick_opt(a.truth.clone(), "truth")?
        .ok_or_else(|| Error::Config("energy needs --truth <csv>".into()))?;
    let truth = load_column(&truth_path, scale)?;
    let forecast = file
        .pick_opt(a.forecast.clone(), "forecast")?
        .map(|p| load_column(&p, scale))
        .transpose()?;
    let out = out_location(&a.common, &file)?;

    let sweep = sweep_threshold(&truth, &thresholds, &cfg)?;
    let mut csv =
        String::from("threshold,mean_throughput_mbps,mean_energy_wh,objective,sleep_steps");
    if forecast.is_some() {
        csv.push_str(",sleep_steps_forecast,sleep_duration_error,mismatches,energy_error_wh");
    }
    csv.push('\n');
    for o in &sweep.outcomes {
        let _ = write!(
            csv,
            "{:?},{:?},{:?},{:?},{}",
            o.threshold,
            o.mean_throughput,
            o.mean_energy,
            o.objective,
            o.sleep_steps()
        );
        if let Some(f) = &forecast {
            let r = compare_decisions(&truth, f, o.threshold, &cfg)?;
            let _ = write!(
                csv,
                ",{},{},{},{:?}",
                r.sleep_forecast, r.sleep_duration_error, r.mismatches, r.energy_error
            );
        }
        csv.push('\n');
    }
    ensure_dir(&out)?;
    let path = out.join("energy.csv");
    write_text(&path, &csv)?;
    Ok(format!(
        "wrote {} (best threshold {:?} at lambda {})",
        path.display(),
        sweep.best_threshold,
        cfg.lambda
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_specs() {
        assert_eq!(
            parse_sweep("L=4,8,16,32").unwrap().1,
            SweepParam::Cells(vec![4, 8, 16, 32])
        );
        match parse_sweep("nu=0,1,2,5,inf").unwrap().1 {
            SweepParam::Nu(v) => {
                assert_eq!(v.len(), 5);
                assert_eq!(v[4], DecayRate::Infinite);
            }
            other => panic!("{other:?}"),
        }
        match parse_sweep("delta=0:0.4:9").unwrap().1 {
            SweepParam::Delta(v) => assert_eq!(v.len(), 9),
            other => panic!("{other:?}"),
        }
        assert!(parse_sweep("phi=0.1").is_err());
    }

    #[test]
    fn interval_lists() {
        let v = parse_intervals("0,0.25; 0.75,1").unwrap();
        assert_eq!(
            v,
            vec![
                Interval::new(0.0, 0.25).unwrap(),
                Interval::new(0.75, 1.0).unwrap()
            ]
        );
    }
}
