//! Lightweight low-light image enhancement engine.
//!
//! Self-contained building blocks: NCHW f32 tensors with reverse-mode
//! autodiff on an explicit tape, 2D FFT utilities with differentiable polar
//! spectra, BT.601 colorspace conversion, the two-branch YUV enhancement
//! network, desk-scale training, quality metrics, image and checkpoint I/O,
//! and a latency measurement harness.

pub mod bench;
pub mod color;
pub mod io;
pub mod metrics;
pub mod model;
pub(crate) mod scalar;
pub mod spectral;
pub mod tensor;
pub mod train;

pub use color::{ColorSpace, ImageBuffer};
pub use model::{Model, ModelConfig};
pub use tensor::{Grads, Tape, Tensor};
