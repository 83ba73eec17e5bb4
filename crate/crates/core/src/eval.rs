//! Per-interval masked MAE, policy comparison tables, strategy ratios and
//! rolling-origin evaluation.

use crate::data::{TimeSeries, WindowConfig, WindowSample};
use crate::error::{Error, Result};
use crate::interval::{DiscretePartition, Interval};
use crate::matrix::Matrix;
use crate::patch::{Strategy, TrainedModel};

/// Evaluation mask: `lo <= y < hi`, with `hi` inclusive when it is the top
/// of the domain. Each value falls in exactly one cell of a partition.
pub fn in_mask(interval: &Interval, y: f64) -> bool {
    interval.lo() <= y && (y < interval.hi() || (interval.hi() >= 1.0 && y <= interval.hi()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMetric {
    pub interval: Interval,
    pub abs_error_sum: f64,
    pub covered_entries: usize,
    pub total_entries: usize,
}

impl IntervalMetric {
    pub fn new(interval: Interval) -> Self {
        Self {
            interval,
            abs_error_sum: 0.0,
            covered_entries: 0,
            total_entries: 0,
        }
    }

    pub fn accumulate(&mut self, pred: &Matrix, target: &Matrix) -> Result<()> {
        if pred.shape() != target.shape() {
            return Err(Error::Dimension(format!(
                "prediction {}x{} vs target {}x{}",
                pred.rows(),
                pred.cols(),
                target.rows(),
                target.cols()
            )));
        }
        for (&p, &y) in pred.as_slice().iter().zip(target.as_slice()) {
            if in_mask(&self.interval, y) {
                self.abs_error_sum += (p - y).abs();
                self.covered_entries += 1;
            }
        }
        self.total_entries += target.len();
        Ok(())
    }

    /// `None` when no target entry fell inside the interval.
    pub fn mae(&self) -> Option<f64> {
        (self.covered_entries > 0).then(|| self.abs_error_sum / self.covered_entries as f64)
    }
}

/// Mean absolute error over the entries whose target lies in `interval`.
pub fn interval_mae(
    preds: &Matrix,
    targets: &Matrix,
    interval: &Interval,
) -> Result<IntervalMetric> {
    let mut m = IntervalMetric::new(*interval);
    m.accumulate(preds, targets)?;
    Ok(m)
}

/// One metric per cell of the partition.
pub fn partition_mae(
    preds: &Matrix,
    targets: &Matrix,
    partition: &DiscretePartition,
) -> Result<Vec<IntervalMetric>> {
    partition
        .cells()
        .iter()
        .map(|c| interval_mae(preds, targets, c))
        .collect()
}

/// Entry-count-weighted recombination of per-cell metrics.
pub fn recombine(metrics: &[IntervalMetric]) -> Option<f64> {
    let covered: usize = metrics.iter().map(|m| m.covered_entries).sum();
    (covered > 0).then(|| {
        metrics
            .iter()
            .filter_map(|m| m.mae().map(|v| v * m.covered_entries as f64))
            .sum::<f64>()
            / covered as f64
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    /// `None` on the averaged row.
    pub interval: Option<Interval>,
    pub maes: Vec<Option<f64>>,
    /// Column index of the best non-baseline policy.
    pub best: Option<usize>,
    pub improvement_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub policies: Vec<String>,
    pub baseline: usize,
    pub rows: Vec<ComparisonRow>,
    pub average: ComparisonRow,
}

/// `max(0, (b - best) / b) * 100`.
pub fn improvement_pct(baseline: f64, best: f64) -> Option<f64> {
    (baseline > 0.0).then(|| ((baseline - best) / baseline).max(0.0) * 100.0)
}

fn build_row(interval: Option<Interval>, maes: Vec<Option<f64>>, baseline: usize) -> ComparisonRow {
    let best = maes
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != baseline)
        .filter_map(|(i, m)| m.map(|v| (i, v)))
        .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, bv)) if bv <= v => acc,
            _ => Some((i, v)),
        });
    let improvement = match (maes[baseline], best) {
        (Some(b), Some((_, v))) => improvement_pct(b, v),
        _ => None,
    };
    ComparisonRow {
        interval,
        maes,
        best: best.map(|(i, _)| i),
        improvement_pct: improvement,
    }
}

/// Rows per interval plus an unweighted average row. `columns[i]` holds
/// one policy's metrics over the same ordered interval list.
pub fn improvement_table(
    columns: &[(String, Vec<IntervalMetric>)],
    baseline: usize,
) -> Result<ComparisonTable> {
    let (_, first) = columns
        .first()
        .ok_or_else(|| Error::Config("no policies to compare".into()))?;
    if baseline >= columns.len() {
        return Err(Error::Config(format!(
            "baseline column {baseline} out of range"
        )));
    }
    let intervals: Vec<Interval> = first.iter().map(|m| m.interval).collect();
    for (name, metrics) in columns {
        let same = metrics.len() == intervals.len()
            && metrics
                .iter()
                .zip(&intervals)
                .all(|(m, i)| m.interval.approx_eq(i));
        if !same {
            return Err(Error::Config(format!(
                "policy {name} was evaluated on different intervals"
            )));
        }
    }

    let rows: Vec<ComparisonRow> = intervals
        .iter()
        .enumerate()
        .map(|(r, interval)| {
            let maes = columns.iter().map(|(_, m)| m[r].mae()).collect();
            build_row(Some(*interval), maes, baseline)
        })
        .collect();

    let averages = (0..columns.len())
        .map(|c| {
            let vals: Vec<f64> = rows.iter().filter_map(|r| r.maes[c]).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();

    Ok(ComparisonTable {
        policies: columns.iter().map(|(n, _)| n.clone()).collect(),
        baseline,
        average: build_row(None, averages, baseline),
        rows,
    })
}

impl ComparisonTable {
    /// Header `interval,<policies>,best,improvement_pct`; one row per
    /// interval then `average`. Missing values are left empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("interval");
        for p in &self.policies {
            s.push(',');
            s.push_str(p);
        }
        s.push_str(",best,improvement_pct\n");
        let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for row in self.rows.iter().chain(std::iter::once(&self.average)) {
            match row.interval {
                Some(i) => s.push_str(&format!("\"{}\"", i)),
                None => s.push_str("average"),
            }
            for m in &row.maes {
                s.push(',');
                s.push_str(&fmt_opt(*m));
            }
            s.push(',');
            s.push_str(row.best.map(|b| self.policies[b].as_str()).unwrap_or(""));
            s.push(',');
            s.push_str(
                &row.improvement_pct
                    .map(|v| format!("{v:.1}"))
                    .unwrap_or_default(),
            );
            s.push('\n');
        }
        s
    }
}

/// `mae_inf / mae_one`; below 1 the max-confidence strategy is better.
pub fn strategy_ratio(mae_inf: f64, mae_one: f64) -> Result<f64> {
    if !(mae_one > 0.0) {
        return Err(Error::RatioUndefined(format!(
            "average-strategy mae is {mae_one}"
        )));
    }
    Ok(mae_inf / mae_one)
}

/// Metrics of `model` on prepared windows, one per query interval.
pub fn evaluate_windows(
    model: &TrainedModel,
    windows: &[WindowSample],
    intervals: &[Interval],
    strategy: Strategy,
) -> Result<Vec<IntervalMetric>> {
    intervals
        .iter()
        .map(|interval| {
            let mut m = IntervalMetric::new(*interval);
            for w in windows {
                let pred = model.forecast(&w.history, interval, strategy)?;
                m.accumulate(&pred, &w.target)?;
            }
            Ok(m)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingResult {
    pub metrics: Vec<IntervalMetric>,
    pub rolls: usize,
    /// Times each timestep of the test series was a target.
    pub coverage: Vec<u32>,
}

/// Rolls the forecast origin forward by `tau` through `test`, so every
/// evaluated target timestep is scored exactly once.
pub fn rolling_eval(
    model: &TrainedModel,
    test: &TimeSeries,
    cfg: &WindowConfig,
    intervals: &[Interval],
    strategy: Strategy,
) -> Result<RollingResult> {
    let rolling = WindowConfig::new(cfg.window, cfg.horizon, cfg.horizon)?;
    let windows = crate::data::make_windows(test, &rolling)?;
    let mut coverage = vec![0u32; test.len()];
    for w in &windows {
        for c in &mut coverage[w.t_origin..w.t_origin + cfg.horizon] {
            *c += 1;
        }
    }
    Ok(RollingResult {
        metrics: evaluate_windows(model, &windows, intervals, strategy)?,
        rolls: windows.len(),
        coverage,
    })
}
