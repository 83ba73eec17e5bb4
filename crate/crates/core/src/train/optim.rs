//! AdamW with a per-epoch cosine learning-rate schedule.

use std::f64::consts::PI;

use crate::model::MomentState;

pub const LR_MAX: f64 = 1e-3;
pub const LR_MIN: f64 = 1e-5;
pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPS: f64 = 1e-8;

/// `lr_min + 0.5 (lr_max - lr_min)(1 + cos(pi t / n_epochs))`.
pub fn cosine_lr(epoch: usize, n_epochs: usize, lr_max: f64, lr_min: f64) -> f64 {
    let frac = if n_epochs == 0 {
        0.0
    } else {
        epoch.min(n_epochs) as f64 / n_epochs as f64
    };
    lr_min + 0.5 * (lr_max - lr_min) * (1.0 + (PI * frac).cos())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamW {
    pub weight_decay: f64,
    state: MomentState,
}

impl AdamW {
    pub fn new(param_count: usize, weight_decay: f64) -> Self {
        Self {
            weight_decay,
            state: MomentState {
                step: 0,
                m: vec![0.0; param_count],
                v: vec![0.0; param_count],
            },
        }
    }

    pub fn state(&self) -> &MomentState {
        &self.state
    }

    /// One update with decoupled weight decay:
    /// `theta -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta)`.
    pub fn step(&mut self, theta: &mut [f64], grad: &[f64], lr: f64) {
        debug_assert_eq!(theta.len(), grad.len());
        let s = &mut self.state;
        s.step += 1;
        let bc1 = 1.0 - BETA1.powi(s.step as i32);
        let bc2 = 1.0 - BETA2.powi(s.step as i32);
        for i in 0..theta.len() {
            let g = grad[i];
            s.m[i] = BETA1 * s.m[i] + (1.0 - BETA1) * g;
            s.v[i] = BETA2 * s.v[i] + (1.0 - BETA2) * g * g;
            let m_hat = s.m[i] / bc1;
            let v_hat = s.v[i] / bc2;
            theta[i] -= lr * (m_hat / (v_hat.sqrt() + EPS) + self.weight_decay * theta[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_endpoints_and_monotone() {
        assert!((cosine_lr(0, 50, LR_MAX, LR_MIN) - 1e-3).abs() < 1e-18);
        assert!((cosine_lr(50, 50, LR_MAX, LR_MIN) - 1e-5).abs() < 1e-18);
        assert!((cosine_lr(25, 50, LR_MAX, LR_MIN) - (1e-5 + 0.5 * (1e-3 - 1e-5))).abs() < 1e-15);
        let lrs: Vec<f64> = (0..=50).map(|t| cosine_lr(t, 50, LR_MAX, LR_MIN)).collect();
        assert!(lrs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let mut opt = AdamW::new(3, 0.0);
        let mut theta = vec![1.0, 1.0, 1.0];
        opt.step(&mut theta, &[2.0, -0.5, 0.0], 0.01);
        assert!((theta[0] - 0.99).abs() < 1e-9);
        assert!((theta[1] - 1.01).abs() < 1e-9);
        assert_eq!(theta[2], 1.0);
    }

    #[test]
    fn weight_decay_shrinks_without_gradient() {
        let mut opt = AdamW::new(1, 0.1);
        let mut theta = vec![2.0];
        opt.step(&mut theta, &[0.0], 0.5);
        assert!((theta[0] - 1.9).abs() < 1e-12);
    }
}
