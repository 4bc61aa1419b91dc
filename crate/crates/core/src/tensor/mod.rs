//! NCHW f32 tensors with reverse-mode autodiff on an explicit tape.
//!
//! Tensors are immutable views over shared buffers; every op returns a fresh
//! tensor. Convolutions and reductions accumulate in f64 internally and are
//! parallelized over disjoint output regions, so results are bitwise
//! reproducible at any thread count.

mod conv;
mod elementwise;
mod matmul;
mod pool;
mod reduce;
mod shape_ops;
pub(crate) mod tape;

pub use conv::{conv2d, Conv2dSpec};
pub use elementwise::{
    add, add_scalar, gelu, ln, mul, mul_scalar, relu, sigmoid, sub, tanh, wrap_angle,
};
pub use matmul::matmul;
pub use pool::{avg_pool, global_avg_pool, max_pool, mean_width, upsample_bilinear};
pub use reduce::{softmax_lastdim, sum_all};
pub use shape_ops::{
    concat_channels, crop, pad_bottom_right, permute, reshape, shift_rows, slice_channels,
    split_channels, PadMode,
};
pub use tape::{Grads, Tape};

use std::fmt;
use std::sync::Arc;

use tape::TapeRef;

#[derive(Clone)]
pub struct Tensor {
    pub(crate) shape: [usize; 4],
    pub(crate) data: Arc<Vec<f32>>,
    pub(crate) node: Option<TapeRef>,
}

impl Tensor {
    pub fn new(shape: [usize; 4], data: Vec<f32>) -> Tensor {
        assert_eq!(
            data.len(),
            shape.iter().product::<usize>(),
            "tensor data length must match shape"
        );
        Tensor { shape, data: Arc::new(data), node: None }
    }

    pub fn zeros(shape: [usize; 4]) -> Tensor {
        Tensor::full(shape, 0.0)
    }

    pub fn full(shape: [usize; 4], v: f32) -> Tensor {
        Tensor::new(shape, vec![v; shape.iter().product()])
    }

    pub fn shape(&self) -> [usize; 4] {
        self.shape
    }

    pub fn numel(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn to_vec(&self) -> Vec<f32> {
        self.data.to_vec()
    }

    /// Value of a single-element tensor.
    pub fn item(&self) -> f32 {
        assert_eq!(self.numel(), 1, "item() needs a single-element tensor");
        self.data[0]
    }

    pub fn is_tracked(&self) -> bool {
        self.node.is_some()
    }

    /// Same data, no tape history.
    pub fn detach(&self) -> Tensor {
        Tensor { shape: self.shape, data: self.data.clone(), node: None }
    }

    /// Elementwise clamp to [0, 1]. Not differentiable (never recorded);
    /// intended for final output pixels, losses act on pre-clamp values.
    pub fn clamp01(&self) -> Tensor {
        Tensor::new(self.shape, self.data.iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor")
            .field("shape", &self.shape)
            .field("tracked", &self.node.is_some())
            .finish()
    }
}
