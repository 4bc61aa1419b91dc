//! Differentiable polar FFT ops on the packed (amplitude ‖ phase) layout.
//!
//! Gradients route through the rectangular form: with R = A cos(phi),
//! I = A sin(phi) recomputed from the saved outputs,
//!   d/dR = gA * R/(A+eps) - gphi * I/(A+eps)^2
//!   d/dI = gA * I/(A+eps) + gphi * R/(A+eps)^2
//! and the adjoint of a real-input forward DFT is
//!   gx = Re{ DFT(gR - i * gI) }   (unnormalized forward transform).
//! The inverse op factors symmetrically through D = DFT(g):
//!   gA   = ( cos(phi) Re D + sin(phi) Im D) / N
//!   gphi = A (-sin(phi) Re D + cos(phi) Im D) / N

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::engine;
use crate::tensor::tape::{record, Backward, GradStore, NodeId};
use crate::tensor::Tensor;

const EPS: f64 = 1e-8;

/// Relative floor below which a bin's imaginary part is treated as exactly
/// zero when computing phase. Self-conjugate bins of a real input are
/// mathematically real; their imaginary part is rounding noise whose sign
/// would otherwise flip the phase between +pi and -pi at random.
const PHASE_SNAP: f64 = 1e-9;

fn seam_stable_phase(re: f64, im: f64) -> f64 {
    let im = if im.abs() <= PHASE_SNAP * re.abs() { 0.0 } else { im };
    im.atan2(re)
}

/// (n, c, h, w) -> (n, 2c, h, w): amplitude planes then phase planes.
/// Phase is defined as 0 where amplitude is exactly 0.
pub fn fft2_polar_packed(x: &Tensor) -> Tensor {
    let [n, c, h, w] = x.shape();
    let hw = h * w;
    let mut out = vec![0f32; n * 2 * c * hw];
    // Transform each plane in parallel, then write its amplitude and phase blocks.
    let results: Vec<(Vec<f32>, Vec<f32>)> = (0..n * c)
        .into_par_iter()
        .map(|p| {
            let mut buf: Vec<Complex64> = x.data()[p * hw..(p + 1) * hw]
                .iter()
                .map(|&v| Complex64::new(v as f64, 0.0))
                .collect();
            engine::fft2(&mut buf, h, w);
            let mut amp = vec![0f32; hw];
            let mut phase = vec![0f32; hw];
            for i in 0..hw {
                let a = buf[i].norm();
                amp[i] = a as f32;
                phase[i] = if a == 0.0 { 0.0 } else { seam_stable_phase(buf[i].re, buf[i].im) as f32 };
            }
            (amp, phase)
        })
        .collect();
    for (p, (amp, phase)) in results.into_iter().enumerate() {
        let b = p / c;
        let ch = p % c;
        let amp_base = (b * 2 * c + ch) * hw;
        let phase_base = (b * 2 * c + c + ch) * hw;
        out[amp_base..amp_base + hw].copy_from_slice(&amp);
        out[phase_base..phase_base + hw].copy_from_slice(&phase);
    }
    let saved = Arc::new(out.clone());
    record(&[x], [n, 2 * c, h, w], out, move |ids| {
        Box::new(FftPolarBack {
            id: ids[0].expect("fft input tracked"),
            packed: saved,
            n,
            c,
            h,
            w,
        })
    })
}

struct FftPolarBack {
    id: NodeId,
    /// Saved forward output (amplitude ‖ phase), f32.
    packed: Arc<Vec<f32>>,
    n: usize,
    c: usize,
    h: usize,
    w: usize,
}

impl Backward for FftPolarBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let (n, c, h, w) = (self.n, self.c, self.h, self.w);
        let hw = h * w;
        let grads: Vec<Vec<f32>> = (0..n * c)
            .into_par_iter()
            .map(|p| {
                let b = p / c;
                let ch = p % c;
                let amp_base = (b * 2 * c + ch) * hw;
                let phase_base = (b * 2 * c + c + ch) * hw;
                let mut gc = vec![Complex64::ZERO; hw];
                for i in 0..hw {
                    let a = self.packed[amp_base + i] as f64;
                    let phi = self.packed[phase_base + i] as f64;
                    let (re, im) = (a * phi.cos(), a * phi.sin());
                    let ga = grad[amp_base + i] as f64;
                    let gphi = grad[phase_base + i] as f64;
                    let d = a + EPS;
                    let g_re = ga * re / d - gphi * im / (d * d);
                    let g_im = ga * im / d + gphi * re / (d * d);
                    gc[i] = Complex64::new(g_re, -g_im);
                }
                engine::fft2(&mut gc, h, w);
                gc.iter().map(|z| z.re as f32).collect()
            })
            .collect();
        let buf = store.buf(self.id);
        for (p, g) in grads.iter().enumerate() {
            for i in 0..hw {
                buf[p * hw + i] += g[i];
            }
        }
    }
}

/// (n, 2c, h, w) packed polar spectrum -> (n, c, h, w) real part of the
/// inverse transform (the imaginary part is discarded).
pub fn ifft2_polar_packed(s: &Tensor) -> Tensor {
    let [n, c2, h, w] = s.shape();
    assert!(c2 % 2 == 0, "packed spectrum needs an even channel count");
    let c = c2 / 2;
    let hw = h * w;
    let results: Vec<Vec<f32>> = (0..n * c)
        .into_par_iter()
        .map(|p| {
            let b = p / c;
            let ch = p % c;
            let amp_base = (b * 2 * c + ch) * hw;
            let phase_base = (b * 2 * c + c + ch) * hw;
            let mut buf: Vec<Complex64> = (0..hw)
                .map(|i| {
                    Complex64::from_polar(
                        s.data()[amp_base + i] as f64,
                        s.data()[phase_base + i] as f64,
                    )
                })
                .collect();
            engine::ifft2(&mut buf, h, w);
            buf.iter().map(|z| z.re as f32).collect()
        })
        .collect();
    let mut out = vec![0f32; n * c * hw];
    for (p, r) in results.into_iter().enumerate() {
        out[p * hw..(p + 1) * hw].copy_from_slice(&r);
    }
    let saved = Arc::new(s.data().to_vec());
    record(&[s], [n, c, h, w], out, move |ids| {
        Box::new(IfftPolarBack {
            id: ids[0].expect("ifft input tracked"),
            packed: saved,
            n,
            c,
            h,
            w,
        })
    })
}

struct IfftPolarBack {
    id: NodeId,
    /// Saved forward *input* (amplitude ‖ phase), f32.
    packed: Arc<Vec<f32>>,
    n: usize,
    c: usize,
    h: usize,
    w: usize,
}

impl Backward for IfftPolarBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let (n, c, h, w) = (self.n, self.c, self.h, self.w);
        let hw = h * w;
        let inv_n = 1.0 / hw as f64;
        let grads: Vec<(Vec<f32>, Vec<f32>)> = (0..n * c)
            .into_par_iter()
            .map(|p| {
                let b = p / c;
                let ch = p % c;
                let amp_base = (b * 2 * c + ch) * hw;
                let phase_base = (b * 2 * c + c + ch) * hw;
                let mut d: Vec<Complex64> = grad[p * hw..(p + 1) * hw]
                    .iter()
                    .map(|&g| Complex64::new(g as f64, 0.0))
                    .collect();
                engine::fft2(&mut d, h, w);
                let mut ga = vec![0f32; hw];
                let mut gphi = vec![0f32; hw];
                for i in 0..hw {
                    let a = self.packed[amp_base + i] as f64;
                    let phi = self.packed[phase_base + i] as f64;
                    let (cp, sp) = (phi.cos(), phi.sin());
                    ga[i] = ((cp * d[i].re + sp * d[i].im) * inv_n) as f32;
                    gphi[i] = (a * (-sp * d[i].re + cp * d[i].im) * inv_n) as f32;
                }
                (ga, gphi)
            })
            .collect();
        let buf = store.buf(self.id);
        for (p, (ga, gphi)) in grads.iter().enumerate() {
            let b = p / c;
            let ch = p % c;
            let amp_base = (b * 2 * c + ch) * hw;
            let phase_base = (b * 2 * c + c + ch) * hw;
            for i in 0..hw {
                buf[amp_base + i] += ga[i];
                buf[phase_base + i] += gphi[i];
            }
        }
    }
}
