//! Adam optimizer with bias correction.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::network::{NetGrads, Network};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// First/second moment state for one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamSlice {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamSlice {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub(crate) fn moments(&self) -> (&[f64], &[f64], u64) {
        (&self.m, &self.v, self.t)
    }

    pub(crate) fn restore(m: Vec<f64>, v: Vec<f64>, t: u64) -> Self {
        assert_eq!(m.len(), v.len());
        Self { m, v, t }
    }
}

/// One Adam step on a flat parameter slice. Zero gradients leave parameters
/// unchanged.
pub fn adam_step_slice(params: &mut [f64], grads: &[f64], state: &mut AdamSlice, lr: f64) {
    assert_eq!(params.len(), grads.len(), "gradient length mismatch");
    assert_eq!(params.len(), state.m.len(), "optimizer state length mismatch");
    state.t += 1;
    let t = state.t as f64;
    let bc1 = 1.0 - ADAM_BETA1.powf(t);
    let bc2 = 1.0 - ADAM_BETA2.powf(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = ADAM_BETA1 * state.m[i] + (1.0 - ADAM_BETA1) * g;
        state.v[i] = ADAM_BETA2 * state.v[i] + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}

/// Adam state for every parameter tensor of a network, in network order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub slices: Vec<AdamSlice>,
}

impl AdamState {
    pub fn for_network(net: &Network) -> Self {
        Self {
            slices: net.params().iter().map(|t| AdamSlice::new(t.numel())).collect(),
        }
    }

    /// Apply one Adam step to every parameter tensor of `net` using `grads`.
    pub fn step(&mut self, net: &mut Network, grads: &NetGrads, lr: f64) {
        let grad_tensors = grads.tensors();
        let mut params = net.params_mut();
        assert_eq!(params.len(), grad_tensors.len(), "gradient tensor count");
        assert_eq!(params.len(), self.slices.len(), "state tensor count");
        for ((p, g), s) in params.iter_mut().zip(grad_tensors.iter()).zip(self.slices.iter_mut()) {
            adam_step_slice(p.data_mut(), g.data(), s, lr);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Mode, Network, Tensor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut p = vec![1.0, -2.0, 3.0];
        let g = vec![0.0; 3];
        let mut s = AdamSlice::new(3);
        adam_step_slice(&mut p, &g, &mut s, 0.001);
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn constant_gradient_step_magnitude_approaches_lr() {
        let mut p = vec![0.0];
        let mut s = AdamSlice::new(1);
        let lr = 0.001;
        let mut prev = p[0];
        let mut last_step = 0.0;
        for _ in 0..500 {
            adam_step_slice(&mut p, &[0.37], &mut s, lr);
            last_step = (p[0] - prev).abs();
            prev = p[0];
        }
        assert!(
            (last_step - lr).abs() < 0.05 * lr,
            "asymptotic step {last_step:.6e} vs lr {lr:.6e}"
        );
    }

    #[test]
    fn network_step_decreases_quadratic_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut net = Network::new(vec![Network::dense(3, 1, &mut rng)]);
        let mut state = AdamState::for_network(&net);
        let x = Tensor::new(&[4, 3], (0..12).map(|i| (i as f64 * 0.3).cos()).collect());
        let target = 0.7;
        let loss_of = |net: &mut Network| {
            let (y, _) = net.forward(&x, Mode::Train).unwrap();
            y.data().iter().map(|v| (v - target) * (v - target)).sum::<f64>()
        };
        let before = loss_of(&mut net);
        for _ in 0..600 {
            let (y, cache) = net.forward(&x, Mode::Train).unwrap();
            let up: Vec<f64> = y.data().iter().map(|v| 2.0 * (v - target)).collect();
            let (grads, _) = net.backward(&cache, &Tensor::new(y.shape(), up)).unwrap();
            state.step(&mut net, &grads, 0.01);
        }
        let after = loss_of(&mut net);
        assert!(after < before * 0.01, "loss {before:.3e} -> {after:.3e}");
    }
}
