//! Per-epoch training records and the early-stopping rule.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were returned.
    pub best_epoch: usize,
    pub stopped_early: bool,
    /// Loss of every optimizer step, in order.
    pub step_losses: Vec<f64>,
    pub wall_clock_secs: f64,
}

/// Wall-clock time is excluded from equality so that reruns compare equal.
impl PartialEq for TrainReport {
    fn eq(&self, other: &Self) -> bool {
        self.epochs == other.epochs
            && self.best_epoch == other.best_epoch
            && self.stopped_early == other.stopped_early
            && self.step_losses == other.step_losses
    }
}

impl TrainReport {
    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.iter().find(|r| r.epoch == self.best_epoch)
    }

    /// One row per epoch. Floats use their shortest exact representation;
    /// wall-clock time is left out so identical runs give identical files.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_loss,lr,best,stopped_early\n");
        for r in &self.epochs {
            s.push_str(&format!(
                "{},{:?},{:?},{:?},{},{}\n",
                r.epoch,
                r.train_loss,
                r.val_loss,
                r.lr,
                (r.epoch == self.best_epoch) as u8,
                self.stopped_early as u8
            ));
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    Continue,
    Stop,
}

/// Stops after `patience` consecutive epochs without a strict improvement.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            stale: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, val_loss: f64) -> StopDecision {
        if val_loss < self.best {
            self.best = val_loss;
            self.best_epoch = epoch;
            self.stale = 0;
            return StopDecision::Improved;
        }
        self.stale += 1;
        if self.stale >= self.patience {
            StopDecision::Stop
        } else {
            StopDecision::Continue
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_loss(&self) -> f64 {
        self.best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stops_five_epochs_after_best() {
        let mut es = EarlyStopping::new(5);
        let mut stopped_at = None;
        for epoch in 1..=50 {
            // improves until epoch 10, flat afterwards
            let loss = if epoch <= 10 { 1.0 / epoch as f64 } else { 0.2 };
            if es.observe(epoch, loss) == StopDecision::Stop {
                stopped_at = Some(epoch);
                break;
            }
        }
        assert_eq!(stopped_at, Some(15));
        assert_eq!(es.best_epoch(), 10);
    }

    #[test]
    fn equal_loss_is_not_improvement() {
        let mut es = EarlyStopping::new(2);
        assert_eq!(es.observe(1, 1.0), StopDecision::Improved);
        assert_eq!(es.observe(2, 1.0), StopDecision::Continue);
        assert_eq!(es.observe(3, 1.0), StopDecision::Stop);
    }

    #[test]
    fn csv_has_no_clock() {
        let mut r = TrainReport {
            epochs: vec![EpochRecord {
                epoch: 1,
                train_loss: 0.5,
                val_loss: 0.25,
                lr: 1e-3,
            }],
            best_epoch: 1,
            stopped_early: false,
            step_losses: vec![0.5],
            wall_clock_secs: 1.5,
        };
        let a = r.to_csv();
        r.wall_clock_secs = 99.0;
        assert_eq!(a, r.to_csv());
        assert_eq!(a.lines().nth(1).unwrap(), "1,0.5,0.25,0.001,1,0");
    }
}
