//! Adam optimizer over flat parameter slices.

/// Moment buffers are indexed by a caller-maintained flat offset so one
/// optimizer instance can cover a network plus auxiliary parameters.
#[derive(Debug, Clone)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(num_params: usize) -> Adam {
        Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: vec![0.0; num_params], v: vec![0.0; num_params] }
    }

    /// Advance the shared step counter; call once before the per-slice
    /// updates of one optimization step.
    pub fn begin_step(&mut self) {
        self.t += 1;
    }

    /// Update `params[i] -= lr * m_hat / (sqrt(v_hat) + eps)` for the slice
    /// living at `offset` in the flat parameter layout.
    pub fn update_slice(&mut self, offset: usize, lr: f64, params: &mut [f64], grads: &[f64]) {
        debug_assert_eq!(params.len(), grads.len());
        debug_assert!(self.t > 0, "begin_step before update_slice");
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let k = offset + i;
            let g = grads[i];
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g;
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_learning_rate_leaves_params_bitwise_unchanged() {
        let mut opt = Adam::new(3);
        let mut p = [0.5, -1.25, 3.0];
        let before = p.map(f64::to_bits);
        opt.begin_step();
        opt.update_slice(0, 0.0, &mut p, &[1.0, -2.0, 0.3]);
        assert_eq!(p.map(f64::to_bits), before);
    }

    #[test]
    fn single_step_matches_hand_computation() {
        let mut opt = Adam::new(1);
        let mut p = [1.0];
        opt.begin_step();
        opt.update_slice(0, 0.1, &mut p, &[0.5]);
        // with zero-initialized moments the first step has m_hat = g,
        // v_hat = g^2
        let expect = 1.0 - 0.1 * 0.5 / (0.5f64 + 1e-8);
        assert!((p[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn descends_a_quadratic() {
        let mut opt = Adam::new(1);
        let mut p = [4.0];
        for _ in 0..500 {
            let g = 2.0 * p[0];
            opt.begin_step();
            opt.update_slice(0, 0.05, &mut p, &[g]);
        }
        assert!(p[0].abs() < 0.05, "converged to {}", p[0]);
    }
}
