//! Adam optimizer over a flat parameter vector.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub cfg: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(n_params: usize, cfg: AdamConfig) -> Self {
        Self {
            cfg,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// One bias-corrected update of `params` along `-grads`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter count");
        assert_eq!(grads.len(), self.m.len(), "gradient count");
        self.t += 1;
        let AdamConfig { lr, beta1, beta2, eps } = self.cfg;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        for k in 0..params.len() {
            let g = grads[k];
            self.m[k] = beta1 * self.m[k] + (1.0 - beta1) * g;
            self.v[k] = beta2 * self.v[k] + (1.0 - beta2) * g * g;
            let m_hat = self.m[k] / c1;
            let v_hat = self.v[k] / c2;
            params[k] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = vec![0.3, -1.2, 5.0];
        let before = p.clone();
        let mut opt = Adam::new(3, AdamConfig::default());
        for _ in 0..10 {
            opt.step(&mut p, &[0.0; 3]);
        }
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_is_about_lr() {
        for g in [1e-3, 0.5, -7.0, 1e4] {
            let mut p = vec![1.0];
            let mut opt = Adam::new(1, AdamConfig::default());
            opt.step(&mut p, &[g]);
            let dp = p[0] - 1.0;
            assert!(dp.abs() <= 1e-3 * (1.0 + 1e-6));
            assert!(dp.abs() >= 1e-3 * 0.99);
            assert_eq!(dp.signum(), -g.signum());
        }
    }

    #[test]
    fn minimizes_a_quadratic() {
        // f(p) = 3 (p - 2)^2
        let mut p = vec![-1.0];
        let mut opt = Adam::new(
            1,
            AdamConfig {
                lr: 0.05,
                ..AdamConfig::default()
            },
        );
        for _ in 0..1000 {
            let g = 6.0 * (p[0] - 2.0);
            opt.step(&mut p, &[g]);
        }
        assert!((p[0] - 2.0).abs() < 1e-3, "{}", p[0]);
    }
}
