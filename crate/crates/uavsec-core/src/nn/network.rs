//! Layer stacks, gradient checking, and initialization.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)]
use num_traits::Float;

use super::layers::{Layer, LayerCache, LayerGrads};
use super::tensor::Tensor;
use super::NnError;

/// Forward-pass mode: batch statistics in `Train`, running statistics in
/// `Eval`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Activations saved by one forward pass.
#[derive(Debug, Clone)]
pub struct NetCache {
    pub(super) layers: Vec<LayerCache>,
}

/// Parameter gradients for a whole network, one entry per layer.
#[derive(Debug, Clone)]
pub struct NetGrads {
    pub layers: Vec<LayerGrads>,
}

impl NetGrads {
    /// Flattened view of all gradient tensors in network order.
    pub fn tensors(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| l.tensors()).collect()
    }
}

/// An ordered stack of layers. An empty network is the identity map.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Network {
    pub layers: Vec<Layer>,
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Self {
        Self { layers }
    }

    /// Dense layer with uniform fan-in initialization from the seeded stream.
    pub fn dense(inputs: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Layer {
        let bound = 1.0 / (inputs as f64).sqrt();
        let weight = (0..outputs * inputs)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        let bias = (0..outputs).map(|_| rng.random_range(-bound..bound)).collect();
        Layer::Dense {
            weight: Tensor::new(&[outputs, inputs], weight),
            bias: Tensor::new(&[outputs], bias),
        }
    }

    /// 3x3 convolution with uniform fan-in initialization.
    pub fn conv3x3(c_in: usize, c_out: usize, rng: &mut ChaCha8Rng) -> Layer {
        let fan_in = (c_in * 9) as f64;
        let bound = 1.0 / fan_in.sqrt();
        let weight = (0..c_out * c_in * 9)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        let bias = (0..c_out).map(|_| rng.random_range(-bound..bound)).collect();
        Layer::Conv3x3 {
            weight: Tensor::new(&[c_out, c_in, 3, 3], weight),
            bias: Tensor::new(&[c_out], bias),
        }
    }

    /// Batch normalization with unit scale, zero shift, and fresh running
    /// statistics.
    pub fn batchnorm(channels: usize) -> Layer {
        Layer::BatchNorm {
            gamma: Tensor::new(&[channels], vec![1.0; channels]),
            beta: Tensor::zeros(&[channels]),
            running_mean: Tensor::zeros(&[channels]),
            running_var: Tensor::new(&[channels], vec![1.0; channels]),
            momentum: 0.1,
            eps: 1e-5,
        }
    }

    /// Forward pass. `Train` mode uses batch statistics and updates running
    /// statistics; `Eval` uses running statistics and leaves them untouched.
    pub fn forward(&mut self, input: &Tensor, mode: Mode) -> Result<(Tensor, NetCache), NnError> {
        let mut x = input.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter_mut().enumerate() {
            let (out, cache) = layer.forward(i, &x, mode)?;
            caches.push(cache);
            x = out;
        }
        Ok((x, NetCache { layers: caches }))
    }

    /// Eval-mode forward without mutation or cache; safe on shared frozen
    /// parameters.
    pub fn infer(&self, input: &Tensor) -> Result<Tensor, NnError> {
        let mut x = input.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            // Eval mode never touches running statistics, so the clone is
            // parameter-only bookkeeping kept off the hot path.
            let (out, _) = layer.clone().forward(i, &x, Mode::Eval)?;
            x = out;
        }
        Ok(x)
    }

    /// Exact gradients of the forward pass saved in `cache`, for the scalar
    /// function whose output gradient is `upstream`.
    pub fn backward(
        &self,
        cache: &NetCache,
        upstream: &Tensor,
    ) -> Result<(NetGrads, Tensor), NnError> {
        if cache.layers.len() != self.layers.len()
            || cache
                .layers
                .iter()
                .zip(self.layers.iter())
                .any(|(c, l)| c.kind() != l.kind())
        {
            return Err(NnError::StaleCache);
        }
        let mut grads = vec![LayerGrads::None; self.layers.len()];
        let mut up = upstream.clone();
        for i in (0..self.layers.len()).rev() {
            let (g, dx) = self.layers[i].backward(&cache.layers[i], &up)?;
            grads[i] = g;
            up = dx;
        }
        Ok((NetGrads { layers: grads }, up))
    }

    /// All trainable parameter tensors in a fixed order.
    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    pub fn num_params(&self) -> usize {
        self.params().iter().map(|t| t.numel()).sum()
    }
}

/// Central-difference gradient check over a random subsample of at least 200
/// parameters (or all of them, if fewer). Returns the maximum relative error
/// between analytic and finite-difference gradients of the probe loss
/// `sum_j c_j * y_j` with fixed pseudo-random coefficients `c`.
pub fn grad_check(net: &mut Network, input: &Tensor, step: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6164);

    let (out, cache) = net
        .forward(input, Mode::Train)
        .expect("grad_check forward must succeed");
    let coeffs: Vec<f64> = (0..out.numel())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let upstream = Tensor::new(out.shape(), coeffs.clone());
    let (grads, _) = net
        .backward(&cache, &upstream)
        .expect("grad_check backward must succeed");
    let analytic: Vec<f64> = grads
        .tensors()
        .iter()
        .flat_map(|t| t.data().iter().copied())
        .collect();

    let total = net.num_params();
    let sample = 200.min(total);
    let mut indices: Vec<usize> = (0..total).collect();
    // Partial Fisher-Yates: the first `sample` entries become the subsample.
    for i in 0..sample {
        let j = rng.random_range(i..total);
        indices.swap(i, j);
    }

    let loss = |net: &mut Network| -> f64 {
        let (y, _) = net
            .forward(input, Mode::Train)
            .expect("grad_check probe forward must succeed");
        y.data()
            .iter()
            .zip(coeffs.iter())
            .map(|(a, b)| a * b)
            .sum()
    };

    // Error is normalized by the largest sampled gradient magnitude:
    // per-element relative errors on near-zero gradients are dominated by
    // f64 central-difference roundoff, not by backprop correctness.
    let mut max_abs_err: f64 = 0.0;
    let mut grad_scale: f64 = 0.0;
    for &flat in indices.iter().take(sample) {
        let original = {
            let mut offset = flat;
            let mut val = 0.0;
            for t in net.params_mut() {
                if offset < t.numel() {
                    val = t.data()[offset];
                    break;
                }
                offset -= t.numel();
            }
            val
        };
        set_param(net, flat, original + step);
        let plus = loss(net);
        set_param(net, flat, original - step);
        let minus = loss(net);
        set_param(net, flat, original);
        let fd = (plus - minus) / (2.0 * step);
        let an = analytic[flat];
        max_abs_err = max_abs_err.max((an - fd).abs());
        grad_scale = grad_scale.max(an.abs()).max(fd.abs());
    }
    max_abs_err / grad_scale.max(1e-12)
}

fn set_param(net: &mut Network, flat: usize, value: f64) {
    let mut offset = flat;
    for t in net.params_mut() {
        if offset < t.numel() {
            t.data_mut()[offset] = value;
            return;
        }
        offset -= t.numel();
    }
    panic!("parameter index out of range");
}
