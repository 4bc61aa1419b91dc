//! BT.601 full-range analog YUV <-> RGB, on images and on tensors.
//!
//! Y  = 0.299 R + 0.587 G + 0.114 B
//! U  = 0.492111 (B - Y)
//! V  = 0.877283 (R - Y)
//! U and V are signed (zero for grays); values are only clamped when leaving
//! the pipeline as final RGB pixels.

use crate::tensor::{conv2d, Conv2dSpec, Tensor};

pub const KR: f64 = 0.299;
pub const KG: f64 = 0.587;
pub const KB: f64 = 0.114;
pub const U_SCALE: f64 = 0.492111;
pub const V_SCALE: f64 = 0.877283;

/// Row-major 3x3: yuv = M * rgb.
pub fn yuv_from_rgb_matrix() -> [[f64; 3]; 3] {
    [
        [KR, KG, KB],
        [-U_SCALE * KR, -U_SCALE * KG, U_SCALE * (1.0 - KB)],
        [V_SCALE * (1.0 - KR), -V_SCALE * KG, -V_SCALE * KB],
    ]
}

/// Row-major 3x3: rgb = M * yuv (adjugate inverse of the forward matrix).
pub fn rgb_from_yuv_matrix() -> [[f64; 3]; 3] {
    inverse3(yuv_from_rgb_matrix())
}

pub fn inverse3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    assert!(det.abs() > 1e-12, "colorspace matrix must be invertible");
    let inv_det = 1.0 / det;
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            // Cofactor expansion, transposed (adjugate).
            let r0 = (i + 1) % 3;
            let r1 = (i + 2) % 3;
            let c0 = (j + 1) % 3;
            let c1 = (j + 2) % 3;
            out[j][i] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) * inv_det;
        }
    }
    out
}

// ── Image container ──────────────────────────────────────────────────────

/// Which planes an image holds; fixes the channel count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColorSpace {
    Rgb,
    Yuv,
    /// Luma only.
    Y,
    /// Chroma pair only.
    Uv,
}

impl ColorSpace {
    pub fn channels(self) -> usize {
        match self {
            ColorSpace::Y => 1,
            ColorSpace::Uv => 2,
            ColorSpace::Rgb | ColorSpace::Yuv => 3,
        }
    }
}

/// Interleaved HWC f32 image; pixel values nominally in [0, 1] for RGB and
/// luma, signed for chroma planes.
#[derive(Clone, Debug)]
pub struct ImageBuffer {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub space: ColorSpace,
    pub data: Vec<f32>,
}

impl ImageBuffer {
    pub fn new(height: usize, width: usize, space: ColorSpace, data: Vec<f32>) -> Self {
        let channels = space.channels();
        assert_eq!(data.len(), height * width * channels, "image data length must match dims");
        ImageBuffer { height, width, channels, space, data }
    }

    pub fn zeros(height: usize, width: usize, space: ColorSpace) -> Self {
        let channels = space.channels();
        ImageBuffer { height, width, channels, space, data: vec![0.0; height * width * channels] }
    }

    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// To a (1, channels, h, w) tensor.
    pub fn to_tensor(&self) -> Tensor {
        let (h, w, c) = (self.height, self.width, self.channels);
        let mut out = vec![0f32; c * h * w];
        for y in 0..h {
            for x in 0..w {
                for ch in 0..c {
                    out[(ch * h + y) * w + x] = self.data[(y * w + x) * c + ch];
                }
            }
        }
        Tensor::new([1, c, h, w], out)
    }

    /// From a (1, channels, h, w) tensor.
    pub fn from_tensor(t: &Tensor, space: ColorSpace) -> Self {
        let [n, c, h, w] = t.shape();
        assert_eq!(n, 1, "image tensors are single-batch");
        assert_eq!(c, space.channels(), "tensor channels must match the color space");
        let mut img = ImageBuffer::zeros(h, w, space);
        for ch in 0..c {
            for y in 0..h {
                for x in 0..w {
                    img.data[(y * w + x) * c + ch] = t.data()[(ch * h + y) * w + x];
                }
            }
        }
        img
    }
}

fn map_pixels(img: &ImageBuffer, m: [[f64; 3]; 3], out_space: ColorSpace) -> ImageBuffer {
    let mut out = ImageBuffer::zeros(img.height, img.width, out_space);
    for i in (0..img.data.len()).step_by(3) {
        let p = [img.data[i] as f64, img.data[i + 1] as f64, img.data[i + 2] as f64];
        for ch in 0..3 {
            out.data[i + ch] = (m[ch][0] * p[0] + m[ch][1] * p[1] + m[ch][2] * p[2]) as f32;
        }
    }
    out
}

pub fn rgb_to_yuv(img: &ImageBuffer) -> ImageBuffer {
    assert_eq!(img.space, ColorSpace::Rgb, "rgb_to_yuv needs an RGB image, got {:?}", img.space);
    map_pixels(img, yuv_from_rgb_matrix(), ColorSpace::Yuv)
}

/// Unclamped; callers clamp final pixels themselves.
pub fn yuv_to_rgb(img: &ImageBuffer) -> ImageBuffer {
    assert_eq!(img.space, ColorSpace::Yuv, "yuv_to_rgb needs a YUV image, got {:?}", img.space);
    map_pixels(img, rgb_from_yuv_matrix(), ColorSpace::Rgb)
}

/// Slice a YUV image into its luma plane and chroma pair.
pub fn split_yuv(img: &ImageBuffer) -> (ImageBuffer, ImageBuffer) {
    assert_eq!(img.space, ColorSpace::Yuv, "split_yuv needs a YUV image, got {:?}", img.space);
    let mut y = ImageBuffer::zeros(img.height, img.width, ColorSpace::Y);
    let mut uv = ImageBuffer::zeros(img.height, img.width, ColorSpace::Uv);
    for (i, px) in img.data.chunks_exact(3).enumerate() {
        y.data[i] = px[0];
        uv.data[2 * i] = px[1];
        uv.data[2 * i + 1] = px[2];
    }
    (y, uv)
}

/// Interleave a luma plane and chroma pair back into one YUV image.
pub fn merge_yuv(y: &ImageBuffer, uv: &ImageBuffer) -> ImageBuffer {
    assert_eq!(y.space, ColorSpace::Y, "merge_yuv luma operand must be a Y plane");
    assert_eq!(uv.space, ColorSpace::Uv, "merge_yuv chroma operand must be a UV pair");
    assert_eq!(
        (y.height, y.width),
        (uv.height, uv.width),
        "merge_yuv operands must share dims"
    );
    let mut out = ImageBuffer::zeros(y.height, y.width, ColorSpace::Yuv);
    for i in 0..y.data.len() {
        out.data[3 * i] = y.data[i];
        out.data[3 * i + 1] = uv.data[2 * i];
        out.data[3 * i + 2] = uv.data[2 * i + 1];
    }
    out
}

fn matrix_conv(x: &Tensor, m: [[f64; 3]; 3]) -> Tensor {
    let mut w = vec![0f32; 9];
    for o in 0..3 {
        for i in 0..3 {
            w[o * 3 + i] = m[o][i] as f32;
        }
    }
    let weight = Tensor::new([3, 3, 1, 1], w);
    conv2d(x, &weight, None, Conv2dSpec::default())
}

/// (n, 3, h, w) RGB -> YUV as a constant-weight 1x1 convolution, so gradients
/// flow through the conversion.
pub fn rgb_to_yuv_tensor(x: &Tensor) -> Tensor {
    matrix_conv(x, yuv_from_rgb_matrix())
}

/// (n, 3, h, w) YUV -> RGB, unclamped, differentiable.
pub fn yuv_to_rgb_tensor(x: &Tensor) -> Tensor {
    matrix_conv(x, rgb_from_yuv_matrix())
}
