use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_traits::Float;

/// Adam with bias correction. Only coordinates in the active range move.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    active: Range<usize>,
}

impl Adam {
    pub fn new(len: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            active: 0..len,
        }
    }

    /// Restricts updates to `range`; other coordinates stay frozen.
    pub fn with_active(mut self, range: Range<usize>) -> Self {
        self.active = range.start.min(self.m.len())..range.end.min(self.m.len());
        self
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.lr = lr;
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), self.m.len());
        debug_assert_eq!(grad.len(), self.m.len());
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for k in self.active.clone() {
            let g = grad[k];
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g;
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[k] / c1;
            let v_hat = self.v[k] / c2;
            params[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        // after bias correction m̂ = g and v̂ = g², so the step is lr·g/(|g|+ε)
        let mut adam = Adam::new(3, 0.01);
        let mut p = [1.0, 2.0, 3.0];
        let g = [0.5, -4.0, 0.0];
        adam.step(&mut p, &g);
        assert!((p[0] - (1.0 - 0.01 * 0.5 / (0.5 + 1e-8))).abs() < 1e-15);
        assert!((p[1] - (2.0 + 0.01 * 4.0 / (4.0 + 1e-8))).abs() < 1e-15);
        assert_eq!(p[2], 3.0);
    }

    #[test]
    fn active_range_freezes_the_rest() {
        let mut adam = Adam::new(4, 0.1).with_active(2..4);
        let mut p = [0.0; 4];
        adam.step(&mut p, &[1.0; 4]);
        assert_eq!(&p[..2], &[0.0, 0.0]);
        assert!(p[2] < 0.0 && p[3] < 0.0);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut adam = Adam::new(2, 0.05);
        let mut p = [3.0, -2.0];
        for _ in 0..2000 {
            let g = [2.0 * (p[0] - 1.0), 4.0 * (p[1] + 0.5)];
            adam.step(&mut p, &g);
        }
        assert!((p[0] - 1.0).abs() < 1e-3);
        assert!((p[1] + 0.5).abs() < 1e-3);
    }
}
