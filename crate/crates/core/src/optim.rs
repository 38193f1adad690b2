//! Adam with box projection.

use crate::config::BhlConfig;
use crate::detect::PeakSet;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPS: f64 = 1e-8;

/// Parameters plus Adam moment accumulators for one fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitState {
    pub params: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u32,
}

impl FitState {
    pub fn new(params: Vec<f64>) -> Self {
        let n = params.len();
        Self {
            params,
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    pub fn step_count(&self) -> u32 {
        self.step
    }

    /// One bias-corrected Adam update.
    pub fn adam_step(&mut self, grads: &[f64], lr: f64) {
        assert_eq!(grads.len(), self.params.len(), "gradient length mismatch");
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - BETA1.powi(t);
        let bc2 = 1.0 - BETA2.powi(t);
        for (((p, m), v), g) in self
            .params
            .iter_mut()
            .zip(&mut self.m)
            .zip(&mut self.v)
            .zip(grads)
        {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + EPS);
        }
    }
}

/// Clamps amps to `[0, ∞)` and sigmas to `[min_sigma, max_sigma]`.
pub fn project_constraints(mut peaks: PeakSet, cfg: &BhlConfig) -> PeakSet {
    peaks.amps.iter_mut().for_each(|a| *a = a.max(0.0));
    peaks
        .sigmas
        .iter_mut()
        .for_each(|s| *s = s.clamp(cfg.min_sigma, cfg.max_sigma));
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_step_is_lr_times_sign() {
        // m̂ = g and v̂ = g² after bias correction: Δ = -lr·g/(|g| + ε).
        let mut s = FitState::new(vec![1.0]);
        s.adam_step(&[0.5], 0.01);
        let expected = 1.0 - 0.01 * 0.5 / (0.5 + EPS);
        assert_abs_diff_eq!(s.params[0], expected, epsilon = 1e-15);
        assert_abs_diff_eq!(s.params[0] - 1.0, -0.01, epsilon = 1e-9);
        assert_eq!(s.step_count(), 1);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut s = FitState::new(vec![0.3, -2.0]);
        for _ in 0..10 {
            s.adam_step(&[0.0, 0.0], 0.1);
        }
        assert_eq!(s.params, vec![0.3, -2.0]);
    }

    #[test]
    fn equal_gradients_equal_updates() {
        let mut s = FitState::new(vec![1.0, 5.0]);
        for k in 0..5 {
            let g = 0.1 * (k as f64 + 1.0);
            s.adam_step(&[g, g], 0.05);
        }
        assert_abs_diff_eq!(s.params[0] - 1.0, s.params[1] - 5.0, epsilon = 1e-12);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut s = FitState::new(vec![3.0]);
        for _ in 0..2000 {
            let g = 2.0 * (s.params[0] - 1.25);
            s.adam_step(&[g], 0.01);
        }
        assert_abs_diff_eq!(s.params[0], 1.25, epsilon = 1e-3);
    }

    #[test]
    fn projection() {
        let cfg = BhlConfig::default();
        let peaks = PeakSet {
            bin_indices: vec![1, 2, 3],
            mus: vec![0.0, 0.1, 0.2],
            amps: vec![-0.3, 0.4, 2.0],
            sigmas: vec![0.01, 0.1, 7.0],
            prior_amps: vec![0.0; 3],
            included: vec![true, false, true],
            ..Default::default()
        };
        let p = project_constraints(peaks.clone(), &cfg);
        assert_eq!(p.amps, vec![0.0, 0.4, 2.0]);
        assert_eq!(p.sigmas, vec![cfg.min_sigma, 0.1, cfg.max_sigma]);
        assert_eq!(p.mus, peaks.mus);
        assert_eq!(p.included, peaks.included);
        assert_eq!(project_constraints(p.clone(), &cfg), p);
    }
}
