//! Dense row-major real tensor.

use alloc::vec;
use alloc::vec::Vec;

/// N-dimensional array of `f64` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: &[usize], data: Vec<f64>) -> Self {
        let numel: usize = shape.iter().product();
        assert_eq!(numel, data.len(), "tensor data length must match shape");
        assert!(data.iter().all(|x| x.is_finite()), "tensor entries must be finite");
        Self {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let numel: usize = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; numel],
        }
    }

    pub fn from_scalar(x: f64) -> Self {
        Self::new(&[1], vec![x])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Same data, new shape (element count must match).
    pub fn reshaped(&self, shape: &[usize]) -> Self {
        let numel: usize = shape.iter().product();
        assert_eq!(numel, self.data.len(), "reshape must preserve element count");
        Self {
            shape: shape.to_vec(),
            data: self.data.clone(),
        }
    }

    /// Leading dimension, treated as the batch size.
    pub fn batch(&self) -> usize {
        self.shape.first().copied().unwrap_or(1)
    }
}
