//! Layer kinds with exact forward/backward rules.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::network::Mode;
use super::tensor::Tensor;
use super::NnError;

/// One layer of a [`super::Network`].
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    /// Fully connected: `y = W x + b`, weights `[out, in]`.
    Dense { weight: Tensor, bias: Tensor },
    /// 3x3 convolution, stride 1, zero padding 1 (same spatial size).
    /// Weights `[c_out, c_in, 3, 3]`.
    Conv3x3 { weight: Tensor, bias: Tensor },
    /// Per-channel batch normalization over `[B, F]` or `[B, C, H, W]`.
    BatchNorm {
        gamma: Tensor,
        beta: Tensor,
        running_mean: Tensor,
        running_var: Tensor,
        momentum: f64,
        eps: f64,
    },
    Relu,
    Tanh,
    /// 2x2 max pooling with stride 2 (floor semantics on odd sizes).
    MaxPool2,
    /// Collapse all trailing dimensions into one: `[B, ...] -> [B, n]`.
    Flatten,
}

/// Discriminant used to pair caches with layers across forward/backward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Dense,
    Conv3x3,
    BatchNorm,
    Relu,
    Tanh,
    MaxPool2,
    Flatten,
}

impl Layer {
    pub fn kind(&self) -> LayerKind {
        match self {
            Layer::Dense { .. } => LayerKind::Dense,
            Layer::Conv3x3 { .. } => LayerKind::Conv3x3,
            Layer::BatchNorm { .. } => LayerKind::BatchNorm,
            Layer::Relu => LayerKind::Relu,
            Layer::Tanh => LayerKind::Tanh,
            Layer::MaxPool2 => LayerKind::MaxPool2,
            Layer::Flatten => LayerKind::Flatten,
        }
    }

    /// Trainable parameter tensors, in a fixed order.
    pub fn params(&self) -> Vec<&Tensor> {
        match self {
            Layer::Dense { weight, bias } | Layer::Conv3x3 { weight, bias } => {
                vec![weight, bias]
            }
            Layer::BatchNorm { gamma, beta, .. } => vec![gamma, beta],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Layer::Dense { weight, bias } | Layer::Conv3x3 { weight, bias } => {
                vec![weight, bias]
            }
            Layer::BatchNorm { gamma, beta, .. } => vec![gamma, beta],
            _ => Vec::new(),
        }
    }
}

/// Saved activations needed by the backward pass.
#[derive(Debug, Clone)]
pub enum LayerCache {
    Dense {
        input: Tensor,
    },
    Conv3x3 {
        input: Tensor,
    },
    BatchNorm {
        input: Tensor,
        normalized: Tensor,
        mean: Vec<f64>,
        inv_std: Vec<f64>,
        mode: Mode,
    },
    Relu {
        input: Tensor,
    },
    Tanh {
        output: Tensor,
    },
    MaxPool2 {
        input_shape: Vec<usize>,
        argmax: Vec<usize>,
    },
    Flatten {
        input_shape: Vec<usize>,
    },
}

impl LayerCache {
    pub fn kind(&self) -> LayerKind {
        match self {
            LayerCache::Dense { .. } => LayerKind::Dense,
            LayerCache::Conv3x3 { .. } => LayerKind::Conv3x3,
            LayerCache::BatchNorm { .. } => LayerKind::BatchNorm,
            LayerCache::Relu { .. } => LayerKind::Relu,
            LayerCache::Tanh { .. } => LayerKind::Tanh,
            LayerCache::MaxPool2 { .. } => LayerKind::MaxPool2,
            LayerCache::Flatten { .. } => LayerKind::Flatten,
        }
    }
}

/// Parameter gradients, mirroring [`Layer::params`] order.
#[derive(Debug, Clone)]
pub enum LayerGrads {
    Pair { weight: Tensor, bias: Tensor },
    None,
}

impl LayerGrads {
    pub fn tensors(&self) -> Vec<&Tensor> {
        match self {
            LayerGrads::Pair { weight, bias } => vec![weight, bias],
            LayerGrads::None => Vec::new(),
        }
    }
}

impl Layer {
    pub(super) fn forward(
        &mut self,
        index: usize,
        input: &Tensor,
        mode: Mode,
    ) -> Result<(Tensor, LayerCache), NnError> {
        match self {
            Layer::Dense { weight, bias } => {
                let (b, fi) = as_2d(input, index)?;
                let fo = weight.shape()[0];
                if weight.shape()[1] != fi || bias.shape() != [fo] {
                    return Err(NnError::ShapeMismatch {
                        layer: index,
                        detail: "dense input width",
                    });
                }
                let x = input.data();
                let w = weight.data();
                let bs = bias.data();
                let mut out = vec![0.0; b * fo];
                for bi in 0..b {
                    for o in 0..fo {
                        let mut acc = bs[o];
                        let wrow = &w[o * fi..(o + 1) * fi];
                        let xrow = &x[bi * fi..(bi + 1) * fi];
                        for i in 0..fi {
                            acc += wrow[i] * xrow[i];
                        }
                        out[bi * fo + o] = acc;
                    }
                }
                Ok((
                    Tensor::new(&[b, fo], out),
                    LayerCache::Dense {
                        input: input.clone(),
                    },
                ))
            }
            Layer::Conv3x3 { weight, bias } => {
                let (b, c_in, h, w_dim) = as_4d(input, index)?;
                let c_out = weight.shape()[0];
                if weight.shape() != [c_out, c_in, 3, 3] || bias.shape() != [c_out] {
                    return Err(NnError::ShapeMismatch {
                        layer: index,
                        detail: "conv kernel shape",
                    });
                }
                let x = input.data();
                let wt = weight.data();
                let bs = bias.data();
                let mut out = vec![0.0; b * c_out * h * w_dim];
                for bi in 0..b {
                    for co in 0..c_out {
                        for y in 0..h {
                            for xpos in 0..w_dim {
                                let mut acc = bs[co];
                                for ci in 0..c_in {
                                    for ky in 0..3usize {
                                        let iy = y as isize + ky as isize - 1;
                                        if iy < 0 || iy >= h as isize {
                                            continue;
                                        }
                                        for kx in 0..3usize {
                                            let ix = xpos as isize + kx as isize - 1;
                                            if ix < 0 || ix >= w_dim as isize {
                                                continue;
                                            }
                                            let xi = ((bi * c_in + ci) * h + iy as usize) * w_dim
                                                + ix as usize;
                                            let wi = ((co * c_in + ci) * 3 + ky) * 3 + kx;
                                            acc += x[xi] * wt[wi];
                                        }
                                    }
                                }
                                out[((bi * c_out + co) * h + y) * w_dim + xpos] = acc;
                            }
                        }
                    }
                }
                Ok((
                    Tensor::new(&[b, c_out, h, w_dim], out),
                    LayerCache::Conv3x3 {
                        input: input.clone(),
                    },
                ))
            }
            Layer::BatchNorm {
                gamma,
                beta,
                running_mean,
                running_var,
                momentum,
                eps,
            } => {
                let (channels, groups) = bn_layout(input, index)?;
                if gamma.shape() != [channels] || beta.shape() != [channels] {
                    return Err(NnError::ShapeMismatch {
                        layer: index,
                        detail: "batchnorm channel count",
                    });
                }
                let x = input.data();
                let count = groups.len() / channels;
                let mut mean = vec![0.0; channels];
                let mut var = vec![0.0; channels];
                match mode {
                    Mode::Train => {
                        for (&gidx, &xi) in groups.iter().zip(x.iter()) {
                            mean[gidx] += xi;
                        }
                        for m in mean.iter_mut() {
                            *m /= count as f64;
                        }
                        for (&gidx, &xi) in groups.iter().zip(x.iter()) {
                            let d = xi - mean[gidx];
                            var[gidx] += d * d;
                        }
                        for v in var.iter_mut() {
                            *v /= count as f64;
                        }
                        let rm = running_mean.data_mut();
                        let rv = running_var.data_mut();
                        for c in 0..channels {
                            rm[c] = (1.0 - *momentum) * rm[c] + *momentum * mean[c];
                            rv[c] = (1.0 - *momentum) * rv[c] + *momentum * var[c];
                        }
                    }
                    Mode::Eval => {
                        mean.copy_from_slice(running_mean.data());
                        var.copy_from_slice(running_var.data());
                    }
                }
                let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / (v + *eps).sqrt()).collect();
                let g = gamma.data();
                let be = beta.data();
                let mut norm = vec![0.0; x.len()];
                let mut out = vec![0.0; x.len()];
                for (i, (&gidx, &xi)) in groups.iter().zip(x.iter()).enumerate() {
                    let n = (xi - mean[gidx]) * inv_std[gidx];
                    norm[i] = n;
                    out[i] = g[gidx] * n + be[gidx];
                }
                Ok((
                    Tensor::new(input.shape(), out),
                    LayerCache::BatchNorm {
                        input: input.clone(),
                        normalized: Tensor::new(input.shape(), norm),
                        mean,
                        inv_std,
                        mode,
                    },
                ))
            }
            Layer::Relu => {
                let out: Vec<f64> = input.data().iter().map(|&x| x.max(0.0)).collect();
                Ok((
                    Tensor::new(input.shape(), out),
                    LayerCache::Relu {
                        input: input.clone(),
                    },
                ))
            }
            Layer::Tanh => {
                let out: Vec<f64> = input.data().iter().map(|&x| x.tanh()).collect();
                let out_t = Tensor::new(input.shape(), out);
                Ok((
                    out_t.clone(),
                    LayerCache::Tanh { output: out_t },
                ))
            }
            Layer::MaxPool2 => {
                let (b, c, h, w_dim) = as_4d(input, index)?;
                let oh = h / 2;
                let ow = w_dim / 2;
                if oh == 0 || ow == 0 {
                    return Err(NnError::ShapeMismatch {
                        layer: index,
                        detail: "maxpool input smaller than window",
                    });
                }
                let x = input.data();
                let mut out = vec![0.0; b * c * oh * ow];
                let mut argmax = vec![0usize; b * c * oh * ow];
                for bi in 0..b {
                    for ci in 0..c {
                        for oy in 0..oh {
                            for ox in 0..ow {
                                let mut best = f64::NEG_INFINITY;
                                let mut best_idx = 0usize;
                                for dy in 0..2usize {
                                    for dx in 0..2usize {
                                        let iy = oy * 2 + dy;
                                        let ix = ox * 2 + dx;
                                        let xi = ((bi * c + ci) * h + iy) * w_dim + ix;
                                        if x[xi] > best {
                                            best = x[xi];
                                            best_idx = xi;
                                        }
                                    }
                                }
                                let oi = ((bi * c + ci) * oh + oy) * ow + ox;
                                out[oi] = best;
                                argmax[oi] = best_idx;
                            }
                        }
                    }
                }
                Ok((
                    Tensor::new(&[b, c, oh, ow], out),
                    LayerCache::MaxPool2 {
                        input_shape: input.shape().to_vec(),
                        argmax,
                    },
                ))
            }
            Layer::Flatten => {
                let b = input.batch();
                let rest: usize = input.shape().iter().skip(1).product();
                Ok((
                    input.reshaped(&[b, rest]),
                    LayerCache::Flatten {
                        input_shape: input.shape().to_vec(),
                    },
                ))
            }
        }
    }

    /// Backward pass: upstream gradient in, (parameter grads, input grad) out.
    pub(super) fn backward(
        &self,
        cache: &LayerCache,
        upstream: &Tensor,
    ) -> Result<(LayerGrads, Tensor), NnError> {
        match (self, cache) {
            (Layer::Dense { weight, .. }, LayerCache::Dense { input }) => {
                let b = input.shape()[0];
                let fi = input.shape()[1];
                let fo = weight.shape()[0];
                let x = input.data();
                let w = weight.data();
                let up = upstream.data();
                let mut dw = vec![0.0; fo * fi];
                let mut db = vec![0.0; fo];
                let mut dx = vec![0.0; b * fi];
                for bi in 0..b {
                    for o in 0..fo {
                        let u = up[bi * fo + o];
                        db[o] += u;
                        for i in 0..fi {
                            dw[o * fi + i] += u * x[bi * fi + i];
                            dx[bi * fi + i] += u * w[o * fi + i];
                        }
                    }
                }
                Ok((
                    LayerGrads::Pair {
                        weight: Tensor::new(&[fo, fi], dw),
                        bias: Tensor::new(&[fo], db),
                    },
                    Tensor::new(&[b, fi], dx),
                ))
            }
            (Layer::Conv3x3 { weight, .. }, LayerCache::Conv3x3 { input }) => {
                let b = input.shape()[0];
                let c_in = input.shape()[1];
                let h = input.shape()[2];
                let w_dim = input.shape()[3];
                let c_out = weight.shape()[0];
                let x = input.data();
                let wt = weight.data();
                let up = upstream.data();
                let mut dw = vec![0.0; c_out * c_in * 9];
                let mut db = vec![0.0; c_out];
                let mut dx = vec![0.0; x.len()];
                for bi in 0..b {
                    for co in 0..c_out {
                        for y in 0..h {
                            for xpos in 0..w_dim {
                                let u = up[((bi * c_out + co) * h + y) * w_dim + xpos];
                                if u == 0.0 {
                                    continue;
                                }
                                db[co] += u;
                                for ci in 0..c_in {
                                    for ky in 0..3usize {
                                        let iy = y as isize + ky as isize - 1;
                                        if iy < 0 || iy >= h as isize {
                                            continue;
                                        }
                                        for kx in 0..3usize {
                                            let ix = xpos as isize + kx as isize - 1;
                                            if ix < 0 || ix >= w_dim as isize {
                                                continue;
                                            }
                                            let xi = ((bi * c_in + ci) * h + iy as usize) * w_dim
                                                + ix as usize;
                                            let wi = ((co * c_in + ci) * 3 + ky) * 3 + kx;
                                            dw[wi] += u * x[xi];
                                            dx[xi] += u * wt[wi];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                Ok((
                    LayerGrads::Pair {
                        weight: Tensor::new(weight.shape(), dw),
                        bias: Tensor::new(&[c_out], db),
                    },
                    Tensor::new(input.shape(), dx),
                ))
            }
            (
                Layer::BatchNorm { gamma, eps: _, .. },
                LayerCache::BatchNorm {
                    input,
                    normalized,
                    mean: _,
                    inv_std,
                    mode,
                },
            ) => {
                let (channels, groups) = bn_layout(input, 0)?;
                let count = (groups.len() / channels) as f64;
                let up = upstream.data();
                let norm = normalized.data();
                let g = gamma.data();
                let mut dgamma = vec![0.0; channels];
                let mut dbeta = vec![0.0; channels];
                for (i, &gidx) in groups.iter().enumerate() {
                    dgamma[gidx] += up[i] * norm[i];
                    dbeta[gidx] += up[i];
                }
                let mut dx = vec![0.0; up.len()];
                match mode {
                    Mode::Train => {
                        // dx = (gamma * inv_std / m) * (m*dy - sum(dy) - xhat * sum(dy*xhat))
                        for (i, &gidx) in groups.iter().enumerate() {
                            let term =
                                count * up[i] - dbeta[gidx] - norm[i] * dgamma[gidx];
                            dx[i] = g[gidx] * inv_std[gidx] / count * term;
                        }
                    }
                    Mode::Eval => {
                        for (i, &gidx) in groups.iter().enumerate() {
                            dx[i] = up[i] * g[gidx] * inv_std[gidx];
                        }
                    }
                }
                Ok((
                    LayerGrads::Pair {
                        weight: Tensor::new(&[channels], dgamma),
                        bias: Tensor::new(&[channels], dbeta),
                    },
                    Tensor::new(input.shape(), dx),
                ))
            }
            (Layer::Relu, LayerCache::Relu { input }) => {
                let dx: Vec<f64> = input
                    .data()
                    .iter()
                    .zip(upstream.data().iter())
                    .map(|(&x, &u)| if x > 0.0 { u } else { 0.0 })
                    .collect();
                Ok((LayerGrads::None, Tensor::new(input.shape(), dx)))
            }
            (Layer::Tanh, LayerCache::Tanh { output }) => {
                let dx: Vec<f64> = output
                    .data()
                    .iter()
                    .zip(upstream.data().iter())
                    .map(|(&y, &u)| u * (1.0 - y * y))
                    .collect();
                Ok((LayerGrads::None, Tensor::new(output.shape(), dx)))
            }
            (Layer::MaxPool2, LayerCache::MaxPool2 { input_shape, argmax }) => {
                let numel: usize = input_shape.iter().product();
                let mut dx = vec![0.0; numel];
                for (oi, &src) in argmax.iter().enumerate() {
                    dx[src] += upstream.data()[oi];
                }
                Ok((LayerGrads::None, Tensor::new(input_shape, dx)))
            }
            (Layer::Flatten, LayerCache::Flatten { input_shape }) => {
                Ok((LayerGrads::None, upstream.reshaped(input_shape)))
            }
            _ => Err(NnError::StaleCache),
        }
    }
}

fn as_2d(t: &Tensor, layer: usize) -> Result<(usize, usize), NnError> {
    if t.shape().len() != 2 {
        return Err(NnError::ShapeMismatch {
            layer,
            detail: "expected [batch, features]",
        });
    }
    Ok((t.shape()[0], t.shape()[1]))
}

fn as_4d(t: &Tensor, layer: usize) -> Result<(usize, usize, usize, usize), NnError> {
    if t.shape().len() != 4 {
        return Err(NnError::ShapeMismatch {
            layer,
            detail: "expected [batch, channels, height, width]",
        });
    }
    Ok((t.shape()[0], t.shape()[1], t.shape()[2], t.shape()[3]))
}

/// Channel index of every element, plus the channel count: `[B, F]`
/// normalizes per feature, `[B, C, H, W]` per channel.
fn bn_layout(t: &Tensor, layer: usize) -> Result<(usize, Vec<usize>), NnError> {
    match t.shape().len() {
        2 => {
            let (b, f) = (t.shape()[0], t.shape()[1]);
            let mut groups = Vec::with_capacity(b * f);
            for _ in 0..b {
                for c in 0..f {
                    groups.push(c);
                }
            }
            Ok((f, groups))
        }
        4 => {
            let (b, c, h, w) = (t.shape()[0], t.shape()[1], t.shape()[2], t.shape()[3]);
            let mut groups = Vec::with_capacity(b * c * h * w);
            for _ in 0..b {
                for ci in 0..c {
                    for _ in 0..h * w {
                        groups.push(ci);
                    }
                }
            }
            Ok((c, groups))
        }
        _ => Err(NnError::ShapeMismatch {
            layer,
            detail: "batchnorm expects 2-D or 4-D input",
        }),
    }
}
