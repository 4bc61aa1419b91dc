//! Direct-formula image quality metrics on f64 planes.

/// PSNR over every value of both buffers jointly, peak 1.0.
pub fn psnr(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut se = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        se += d * d;
    }
    let mse = se / a.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

/// Normalized 11x11 Gaussian window, sigma 1.5.
pub fn gaussian_window() -> [[f64; 11]; 11] {
    let sigma = 1.5;
    let mut w = [[0.0; 11]; 11];
    let mut sum = 0.0;
    for y in 0..11 {
        for x in 0..11 {
            let dy = y as f64 - 5.0;
            let dx = x as f64 - 5.0;
            w[y][x] = (-(dy * dy + dx * dx) / (2.0 * sigma * sigma)).exp();
            sum += w[y][x];
        }
    }
    for row in w.iter_mut() {
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    w
}

/// SSIM on a single plane, Gaussian window 11x11 sigma 1.5, K1=0.01, K2=0.03,
/// L=1, valid windows only (no padding), evaluated exactly as the formula is
/// written.
pub fn ssim_plane(a: &[f64], b: &[f64], h: usize, w: usize) -> f64 {
    assert!(h >= 11 && w >= 11, "ssim needs at least an 11x11 plane");
    let win = gaussian_window();
    let c1 = (0.01f64).powi(2);
    let c2 = (0.03f64).powi(2);
    let mut total = 0.0;
    let mut count = 0usize;
    for y0 in 0..=h - 11 {
        for x0 in 0..=w - 11 {
            let (mut ma, mut mb) = (0.0, 0.0);
            for dy in 0..11 {
                for dx in 0..11 {
                    let g = win[dy][dx];
                    ma += g * a[(y0 + dy) * w + x0 + dx];
                    mb += g * b[(y0 + dy) * w + x0 + dx];
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for dy in 0..11 {
                for dx in 0..11 {
                    let g = win[dy][dx];
                    let da = a[(y0 + dy) * w + x0 + dx] - ma;
                    let db = b[(y0 + dy) * w + x0 + dx] - mb;
                    va += g * da * da;
                    vb += g * db * db;
                    cov += g * da * db;
                }
            }
            let s = ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            total += s;
            count += 1;
        }
    }
    total / count as f64
}
