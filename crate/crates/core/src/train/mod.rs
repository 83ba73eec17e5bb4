//! Losses, training policies, the optimizer and the training loop.

pub mod loss;
mod optim;
mod policy;
mod report;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::WindowSample;
use crate::error::{Error, Result};
use crate::model::{self, forward, init, ModelKind, ModelParams, MomentState};

pub use loss::{
    entry_labels, masked_mae, objective_loss, weighted_bce, LossSpec, SampleObjective, BCE_CLAMP,
};
pub use optim::{cosine_lr, AdamW, BETA1, BETA2, EPS, LR_MAX, LR_MIN};
pub use policy::{
    PolicyConfig, PolicyKind, PolicySource, DEFAULT_NU, DEFAULT_PHI, DEFAULT_WEIGHT_DECAY,
    PROBE_CELLS,
};
pub use report::{EarlyStopping, EpochRecord, StopDecision, TrainReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub lr_max: f64,
    pub lr_min: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 32,
            patience: 5,
            lr_max: LR_MAX,
            lr_min: LR_MIN,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.patience == 0 {
            return Err(Error::Config(
                "epochs, batch size and patience must be >= 1".into(),
            ));
        }
        if !(self.lr_max > 0.0 && self.lr_min >= 0.0 && self.lr_min <= self.lr_max) {
            return Err(Error::Config(format!(
                "need 0 <= lr_min <= lr_max and lr_max > 0, got {} / {}",
                self.lr_min, self.lr_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the best validation epoch.
    pub params: ModelParams,
    pub report: TrainReport,
    /// Optimizer state captured together with `params`.
    pub optimizer: MomentState,
}

/// Validation loss: for each validation cell, the weighted mean of the
/// sample objectives `sum(w * l) / sum(w)`, then the mean over cells that
/// received any weight.
pub fn validation_loss(
    params: &ModelParams,
    policy: &PolicyConfig,
    val: &[WindowSample],
) -> Result<f64> {
    let spec = policy.loss_spec();
    let mut cell_losses = Vec::new();
    for cell in policy.validation_cells() {
        let mut num = 0.0;
        let mut den = 0.0;
        for s in val {
            let obj = policy.objective_for(s, cell);
            if obj.weight == 0.0 {
                continue;
            }
            let f = forward(params, &s.history, &obj.covariate)?;
            num += objective_loss(&f, &s.target, &obj, &spec)?;
            den += obj.weight;
        }
        if den > 0.0 {
            cell_losses.push(num / den);
        }
    }
    if cell_losses.is_empty() {
        return Err(Error::InsufficientData(
            "no validation sample falls inside any validation interval".into(),
        ));
    }
    Ok(cell_losses.iter().sum::<f64>() / cell_losses.len() as f64)
}

/// Trains a fresh model. `seed` fixes initialization, shuffling and the
/// interval draws.
pub fn train(
    policy: &PolicyConfig,
    kind: ModelKind,
    train_set: &[WindowSample],
    val_set: &[WindowSample],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    policy.validate()?;
    let first = train_set
        .first()
        .ok_or_else(|| Error::InsufficientData("empty training split".into()))?;
    if val_set.is_empty() {
        return Err(Error::InsufficientData("empty validation split".into()));
    }
    let dims = (
        first.history.rows(),
        first.target.rows(),
        first.history.cols(),
    );
    let params = init(kind, dims, seed)?;
    train_from(policy, params, train_set, val_set, cfg, seed)
}

/// Trains starting from the given parameters.
pub fn train_from(
    policy: &PolicyConfig,
    mut params: ModelParams,
    train_set: &[WindowSample],
    val_set: &[WindowSample],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let spec = policy.loss_spec();
    let mut opt = AdamW::new(params.len(), policy.weight_decay);
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut report = TrainReport::default();
    let mut best = (params.clone(), opt.state().clone());
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 0..cfg.epochs {
        let lr = cosine_lr(epoch, cfg.epochs, cfg.lr_max, cfg.lr_min);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&WindowSample> = chunk.iter().map(|&i| &train_set[i]).collect();
            let objectives = policy.make_batch_losses(&batch, &mut rng);
            let (loss, grad) =
                model::backward(&params, &batch, &objectives, &spec).map_err(|e| {
                    Error::Training {
                        epoch: epoch + 1,
                        batch: b + 1,
                        message: e.to_string(),
                    }
                })?;
            opt.step(params.theta_mut(), &grad, lr);
            if !params.theta().iter().all(|v| v.is_finite()) {
                return Err(Error::Training {
                    epoch: epoch + 1,
                    batch: b + 1,
                    message: "parameters became non-finite".into(),
                });
            }
            report.step_losses.push(loss);
            epoch_loss += loss;
            batches += 1;
        }

        let val_loss = validation_loss(&params, policy, val_set)?;
        if !val_loss.is_finite() {
            return Err(Error::Training {
                epoch: epoch + 1,
                batch: 0,
                message: "non-finite validation loss".into(),
            });
        }
        report.epochs.push(EpochRecord {
            epoch: epoch + 1,
            train_loss: epoch_loss / batches as f64,
            val_loss,
            lr,
        });
        match stopper.observe(epoch + 1, val_loss) {
            StopDecision::Improved => best = (params.clone(), opt.state().clone()),
            StopDecision::Continue => {}
            StopDecision::Stop => {
                report.stopped_early = epoch + 1 < cfg.epochs;
                break;
            }
        }
    }

    report.best_epoch = stopper.best_epoch();
    report.wall_clock_secs = started.elapsed().as_secs_f64();
    Ok(TrainOutcome {
        params: best.0,
        report,
        optimizer: best.1,
    })
}
