//! 2D spectral analysis: amplitude/phase decomposition of feature maps with
//! gradients, plus plain (non-differentiable) helpers for offline analysis.
//!
//! The differentiable path works on a packed layout: a real (n, c, h, w)
//! tensor maps to (n, 2c, h, w) with amplitude planes first, then phase
//! planes. `Spectrum` is the unpacked two-tensor view of the same thing.

pub mod engine;
mod ops;

pub use ops::{fft2_polar_packed, ifft2_polar_packed};

use crate::tensor::{concat_channels, slice_channels, Tensor};

/// Amplitude and phase planes of a batch of real images, same shape each.
pub struct Spectrum {
    pub amplitude: Tensor,
    pub phase: Tensor,
}

/// Forward 2D DFT of each (n, c) plane in polar form.
pub fn fft2(x: &Tensor) -> Spectrum {
    let packed = fft2_polar_packed(x);
    let c = x.shape()[1];
    Spectrum {
        amplitude: slice_channels(&packed, 0, c),
        phase: slice_channels(&packed, c, c),
    }
}

/// Real part of the inverse 2D DFT of a polar spectrum.
pub fn ifft2(s: &Spectrum) -> Tensor {
    ifft2_polar_packed(&concat_channels(&[&s.amplitude, &s.phase]))
}

/// Rebuild an image from one source's amplitude spectra and the other's phase
/// spectra (channel by channel), clamped to [0, 1].
pub fn spectrum_swap(amp_source: &Tensor, phase_source: &Tensor) -> Tensor {
    assert_eq!(
        amp_source.shape(),
        phase_source.shape(),
        "spectrum_swap sources must share a shape"
    );
    let amp = fft2(amp_source).amplitude;
    let phase = fft2(phase_source).phase;
    ifft2(&Spectrum { amplitude: amp, phase }).clamp01()
}

/// Per-plane log-amplitude display image: ln(1 + |F|) with the DC bin shifted
/// to the center, each plane min-max normalized to [0, 1]. Not differentiable.
pub fn log_spectrum_image(x: &Tensor) -> Tensor {
    let [n, c, h, w] = x.shape();
    let mut out = vec![0f32; n * c * h * w];
    for p in 0..n * c {
        let plane = log_spectrum_plane(&x.data()[p * h * w..(p + 1) * h * w], h, w);
        out[p * h * w..(p + 1) * h * w].copy_from_slice(&plane);
    }
    Tensor::new([n, c, h, w], out)
}

/// Single-plane form of [`log_spectrum_image`].
pub fn log_spectrum_plane(plane: &[f32], h: usize, w: usize) -> Vec<f32> {
    assert_eq!(plane.len(), h * w);
    let mut buf: Vec<num_complex::Complex64> = plane
        .iter()
        .map(|&v| num_complex::Complex64::new(v as f64, 0.0))
        .collect();
    engine::fft2(&mut buf, h, w);
    let mut out = vec![0f32; h * w];
    let mut max = f64::MIN;
    let mut min = f64::MAX;
    let vals: Vec<f64> = buf.iter().map(|z| (1.0 + z.norm()).ln()).collect();
    for &v in &vals {
        max = max.max(v);
        min = min.min(v);
    }
    let range = (max - min).max(1e-12);
    for y in 0..h {
        for x in 0..w {
            // fftshift: move DC to the center.
            let sy = (y + h / 2) % h;
            let sx = (x + w / 2) % w;
            out[sy * w + sx] = ((vals[y * w + x] - min) / range) as f32;
        }
    }
    out
}
