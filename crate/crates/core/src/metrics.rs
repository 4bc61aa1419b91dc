//! Image quality metrics: PSNR and SSIM on [0, 1] values.

use crate::color::{ImageBuffer, KB, KG, KR};

/// Peak signal-to-noise ratio in dB over all values jointly (peak = 1).
/// Identical inputs give +infinity.
pub fn psnr(a: &[f32], b: &[f32]) -> f64 {
    assert_eq!(a.len(), b.len(), "psnr operands must match");
    assert!(!a.is_empty(), "psnr needs at least one value");
    let mut acc = 0f64;
    for i in 0..a.len() {
        let d = a[i] as f64 - b[i] as f64;
        acc += d * d;
    }
    let mse = acc / a.len() as f64;
    if mse == 0.0 {
        return f64::INFINITY;
    }
    -10.0 * mse.log10()
}

pub fn psnr_images(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
    psnr(&a.data, &b.data)
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.0001; // (K1 L)^2, K1 = 0.01, L = 1
const SSIM_C2: f64 = 0.0009; // (K2 L)^2, K2 = 0.03

fn gaussian_window() -> [f64; SSIM_WINDOW * SSIM_WINDOW] {
    let mut out = [0f64; SSIM_WINDOW * SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    let mut sum = 0.0;
    for y in 0..SSIM_WINDOW {
        for x in 0..SSIM_WINDOW {
            let d2 = (y as f64 - c).powi(2) + (x as f64 - c).powi(2);
            let v = (-d2 / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
            out[y * SSIM_WINDOW + x] = v;
            sum += v;
        }
    }
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// Mean SSIM between two planes using an 11x11 Gaussian window (sigma 1.5)
/// over valid (fully inside) positions only.
pub fn ssim_plane(a: &[f32], b: &[f32], h: usize, w: usize) -> f64 {
    assert_eq!(a.len(), h * w, "plane size mismatch");
    assert_eq!(b.len(), h * w, "plane size mismatch");
    assert!(
        h >= SSIM_WINDOW && w >= SSIM_WINDOW,
        "ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW} input"
    );
    let win = gaussian_window();
    let mut total = 0f64;
    let mut count = 0usize;
    for y0 in 0..=h - SSIM_WINDOW {
        for x0 in 0..=w - SSIM_WINDOW {
            let (mut ma, mut mb) = (0f64, 0f64);
            for y in 0..SSIM_WINDOW {
                for x in 0..SSIM_WINDOW {
                    let wgt = win[y * SSIM_WINDOW + x];
                    ma += wgt * a[(y0 + y) * w + x0 + x] as f64;
                    mb += wgt * b[(y0 + y) * w + x0 + x] as f64;
                }
            }
            let (mut va, mut vb, mut cov) = (0f64, 0f64, 0f64);
            for y in 0..SSIM_WINDOW {
                for x in 0..SSIM_WINDOW {
                    let wgt = win[y * SSIM_WINDOW + x];
                    let da = a[(y0 + y) * w + x0 + x] as f64 - ma;
                    let db = b[(y0 + y) * w + x0 + x] as f64 - mb;
                    va += wgt * da * da;
                    vb += wgt * db * db;
                    cov += wgt * da * db;
                }
            }
            let num = (2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2);
            let den = (ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2);
            total += num / den;
            count += 1;
        }
    }
    total / count as f64
}

fn luma_plane(img: &ImageBuffer) -> Vec<f32> {
    assert_eq!(img.channels, 3, "luma extraction needs RGB");
    img.data
        .chunks_exact(3)
        .map(|p| (KR * p[0] as f64 + KG * p[1] as f64 + KB * p[2] as f64) as f32)
        .collect()
}

/// SSIM on the luma plane of two RGB images.
pub fn ssim_images(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
    assert_eq!((a.height, a.width), (b.height, b.width), "ssim image sizes must match");
    ssim_plane(&luma_plane(a), &luma_plane(b), a.height, a.width)
}

/// Mean of per-channel SSIM over RGB.
pub fn ssim_rgb_mean(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
    assert_eq!((a.height, a.width), (b.height, b.width), "ssim image sizes must match");
    assert_eq!((a.channels, b.channels), (3, 3), "ssim_rgb_mean needs RGB");
    let (h, w) = (a.height, a.width);
    let mut total = 0.0;
    for c in 0..3 {
        let pa: Vec<f32> = a.data.iter().skip(c).step_by(3).copied().collect();
        let pb: Vec<f32> = b.data.iter().skip(c).step_by(3).copied().collect();
        total += ssim_plane(&pa, &pb, h, w);
    }
    total / 3.0
}
