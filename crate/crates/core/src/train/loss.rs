//! Masked regression loss, weighted binary cross-entropy and the per-sample
//! objective the optimizer sees.

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::matrix::Matrix;
use crate::model::DualForecast;

/// Probabilities are clamped to `[BCE_CLAMP, 1 - BCE_CLAMP]` before the log.
pub const BCE_CLAMP: f64 = 1e-12;

fn same_shape(a: &Matrix, b: &Matrix, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "{what}: {}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// `weight * mean(|pred - target|)`.
pub fn masked_mae(pred: &Matrix, target: &Matrix, weight: f64) -> Result<f64> {
    same_shape(pred, target, "masked_mae")?;
    if weight == 0.0 || pred.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = pred
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(p, y)| (p - y).abs())
        .sum();
    Ok(weight * sum / pred.len() as f64)
}

/// `weight * mean(-[y ln p + (1 - y) ln(1 - p)])` with clamped `p`.
pub fn weighted_bce(prob: &Matrix, label: &Matrix, weight: f64) -> Result<f64> {
    same_shape(prob, label, "weighted_bce")?;
    if weight == 0.0 || prob.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = prob
        .as_slice()
        .iter()
        .zip(label.as_slice())
        .map(|(&p, &y)| {
            let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum();
    Ok(weight * sum / prob.len() as f64)
}

/// Per-entry membership labels, 1 where the target lies in the closed interval.
pub fn entry_labels(target: &Matrix, interval: &Interval) -> Matrix {
    target.map(|y| if interval.contains(y) { 1.0 } else { 0.0 })
}

/// What one sample contributes to a batch: the interval fed to the model,
/// the loss weight, and classification labels when the policy trains the
/// probability head.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleObjective {
    pub covariate: Interval,
    pub weight: f64,
    pub labels: Option<Matrix>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    /// Weight of the classification term.
    pub phi: f64,
}

impl LossSpec {
    pub const REGRESSION_ONLY: LossSpec = LossSpec { phi: 0.0 };
}

/// `w * mae + phi * w * bce` for one sample.
pub fn objective_loss(
    forecast: &DualForecast,
    target: &Matrix,
    obj: &SampleObjective,
    spec: &LossSpec,
) -> Result<f64> {
    let mut loss = masked_mae(&forecast.regression, target, obj.weight)?;
    if let Some(labels) = obj.labels.as_ref().filter(|_| spec.phi > 0.0) {
        loss += spec.phi * weighted_bce(&forecast.probability, labels, obj.weight)?;
    }
    Ok(loss)
}
