//! Reference neural-net primitives: direct-summation convolution, window-scan
//! pooling, bilinear interpolation from first principles, activations, naive
//! batched matmul, and a row-wise softmax.
//!
//! Layouts match the engine: NCHW for images/features, row-major.

/// Direct-summation cross-correlation (no kernel flip).
///
/// `x`: (n, ci, h, w); `wt`: (co, ci/groups, kh, kw); `bias`: co entries or None.
/// Returns (out, oh, ow) with out laid out (n, co, oh, ow).
#[allow(clippy::too_many_arguments)]
pub fn conv2d(
    x: &[f64],
    (n, ci, h, w): (usize, usize, usize, usize),
    wt: &[f64],
    (co, kh, kw): (usize, usize, usize),
    bias: Option<&[f64]>,
    stride: usize,
    (pad_h, pad_w): (usize, usize),
    dilation: usize,
    groups: usize,
) -> (Vec<f64>, usize, usize) {
    assert!(ci % groups == 0 && co % groups == 0);
    let cig = ci / groups;
    let cog = co / groups;
    let oh = (h + 2 * pad_h - dilation * (kh - 1) - 1) / stride + 1;
    let ow = (w + 2 * pad_w - dilation * (kw - 1) - 1) / stride + 1;
    let mut out = vec![0.0; n * co * oh * ow];
    for b in 0..n {
        for oc in 0..co {
            let g = oc / cog;
            for y in 0..oh {
                for xo in 0..ow {
                    let mut acc = bias.map_or(0.0, |bv| bv[oc]);
                    for ic in 0..cig {
                        for ky in 0..kh {
                            for kx in 0..kw {
                                let iy = (y * stride + ky * dilation) as isize - pad_h as isize;
                                let ix = (xo * stride + kx * dilation) as isize - pad_w as isize;
                                if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                    continue; // zero padding
                                }
                                let xi = ((b * ci + g * cig + ic) * h + iy as usize) * w
                                    + ix as usize;
                                let wi = ((oc * cig + ic) * kh + ky) * kw + kx;
                                acc += x[xi] * wt[wi];
                            }
                        }
                    }
                    out[((b * co + oc) * oh + y) * ow + xo] = acc;
                }
            }
        }
    }
    (out, oh, ow)
}

/// Window-scan max pooling with kernel = stride = k. Ties go to the first
/// element in row-major scan order.
pub fn max_pool(x: &[f64], (n, c, h, w): (usize, usize, usize, usize), k: usize) -> Vec<f64> {
    assert!(h % k == 0 && w % k == 0);
    let (oh, ow) = (h / k, w / k);
    let mut out = vec![0.0; n * c * oh * ow];
    for p in 0..n * c {
        for y in 0..oh {
            for xo in 0..ow {
                let mut best = f64::NEG_INFINITY;
                for dy in 0..k {
                    for dx in 0..k {
                        let v = x[(p * h + y * k + dy) * w + xo * k + dx];
                        if v > best {
                            best = v;
                        }
                    }
                }
                out[(p * oh + y) * ow + xo] = best;
            }
        }
    }
    out
}

/// Window-scan average pooling with kernel = stride = k.
pub fn avg_pool(x: &[f64], (n, c, h, w): (usize, usize, usize, usize), k: usize) -> Vec<f64> {
    assert!(h % k == 0 && w % k == 0);
    let (oh, ow) = (h / k, w / k);
    let mut out = vec![0.0; n * c * oh * ow];
    for p in 0..n * c {
        for y in 0..oh {
            for xo in 0..ow {
                let mut acc = 0.0;
                for dy in 0..k {
                    for dx in 0..k {
                        acc += x[(p * h + y * k + dy) * w + xo * k + dx];
                    }
                }
                out[(p * oh + y) * ow + xo] = acc / (k * k) as f64;
            }
        }
    }
    out
}

/// Mean over both spatial axes; output has one value per (n, c) plane.
pub fn global_avg_pool(x: &[f64], (n, c, h, w): (usize, usize, usize, usize)) -> Vec<f64> {
    let mut out = vec![0.0; n * c];
    for p in 0..n * c {
        let mut acc = 0.0;
        for i in 0..h * w {
            acc += x[p * h * w + i];
        }
        out[p] = acc / (h * w) as f64;
    }
    out
}

/// Mean over the width axis only; output (n, c, h, 1).
pub fn mean_width(x: &[f64], (n, c, h, w): (usize, usize, usize, usize)) -> Vec<f64> {
    let mut out = vec![0.0; n * c * h];
    for p in 0..n * c {
        for y in 0..h {
            let mut acc = 0.0;
            for xo in 0..w {
                acc += x[(p * h + y) * w + xo];
            }
            out[p * h + y] = acc / w as f64;
        }
    }
    out
}

/// Source index/weight pair for one interpolated output coordinate under
/// half-pixel-centre bilinear scaling (the align_corners=false convention).
pub fn bilinear_axis_weights(in_len: usize, factor: usize) -> Vec<(usize, usize, f64)> {
    let mut table = Vec::with_capacity(in_len * factor);
    for o in 0..in_len * factor {
        let src = ((o as f64 + 0.5) / factor as f64 - 0.5).max(0.0);
        let i0 = (src.floor() as usize).min(in_len - 1);
        let i1 = (i0 + 1).min(in_len - 1);
        let t = src - i0 as f64;
        table.push((i0, i1, t));
    }
    table
}

/// Bilinear upsampling by an integer factor, half-pixel centres.
pub fn upsample_bilinear(
    x: &[f64],
    (n, c, h, w): (usize, usize, usize, usize),
    factor: usize,
) -> Vec<f64> {
    let rows = bilinear_axis_weights(h, factor);
    let cols = bilinear_axis_weights(w, factor);
    let (oh, ow) = (h * factor, w * factor);
    let mut out = vec![0.0; n * c * oh * ow];
    for p in 0..n * c {
        for (y, &(y0, y1, ty)) in rows.iter().enumerate() {
            for (xo, &(x0, x1, tx)) in cols.iter().enumerate() {
                let v00 = x[(p * h + y0) * w + x0];
                let v01 = x[(p * h + y0) * w + x1];
                let v10 = x[(p * h + y1) * w + x0];
                let v11 = x[(p * h + y1) * w + x1];
                let top = v00 * (1.0 - tx) + v01 * tx;
                let bot = v10 * (1.0 - tx) + v11 * tx;
                out[(p * oh + y) * ow + xo] = top * (1.0 - ty) + bot * ty;
            }
        }
    }
    out
}

/// Softmax over contiguous rows of length `row`.
pub fn softmax_rows(x: &[f64], row: usize) -> Vec<f64> {
    assert!(x.len() % row == 0);
    let mut out = vec![0.0; x.len()];
    for (r, chunk) in x.chunks(row).enumerate() {
        let m = chunk.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for &v in chunk {
            sum += (v - m).exp();
        }
        for (i, &v) in chunk.iter().enumerate() {
            out[r * row + i] = (v - m).exp() / sum;
        }
    }
    out
}

pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Standard normal CDF by Simpson quadrature of the density over [0, |x|].
/// Deliberately avoids erf so the engine's erf-based GELU is checked against
/// an independent route. Absolute error well below 1e-8 at 2k panels (the
/// Simpson rule converges as h^4), cheap enough to sit on every activation
/// inside whole-pipeline reference evaluations.
pub fn normal_cdf_quadrature(x: f64) -> f64 {
    let ax = x.abs().min(12.0);
    let n = 2_000; // even panel count
    let hstep = ax / n as f64;
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = density(0.0) + density(ax);
    for i in 1..n {
        let t = i as f64 * hstep;
        acc += density(t) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let half_integral = acc * hstep / 3.0;
    if x >= 0.0 {
        0.5 + half_integral
    } else {
        0.5 - half_integral
    }
}

/// Exact (quadrature-backed) Gaussian-CDF GELU: x * Phi(x).
pub fn gelu(x: f64) -> f64 {
    x * normal_cdf_quadrature(x)
}

/// Batched matmul: a (batch, m, k) * b (batch, k, n) -> (batch, m, n),
/// plain triple loop.
pub fn matmul(
    a: &[f64],
    b: &[f64],
    batch: usize,
    m: usize,
    k: usize,
    n: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; batch * m * n];
    for bi in 0..batch {
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..k {
                    acc += a[(bi * m + i) * k + l] * b[(bi * k + l) * n + j];
                }
                out[(bi * m + i) * n + j] = acc;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_cdf_hits_known_points() {
        assert!((normal_cdf_quadrature(0.0) - 0.5).abs() < 1e-12);
        // Phi(1.96) ~ 0.9750021048517795
        assert!((normal_cdf_quadrature(1.96) - 0.975_002_104_851_779_5).abs() < 1e-9);
        assert!((normal_cdf_quadrature(-1.96) - 0.024_997_895_148_220_425).abs() < 1e-9);
    }

    #[test]
    fn conv_identity_kernel_passes_through() {
        let x: Vec<f64> = (0..9).map(|v| v as f64).collect();
        let wt = vec![1.0];
        let (out, oh, ow) = conv2d(&x, (1, 1, 3, 3), &wt, (1, 1, 1), None, 1, (0, 0), 1, 1);
        assert_eq!((oh, ow), (3, 3));
        assert_eq!(out, x);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let out = softmax_rows(&[0.0, 1.0, 2.0, -1.0, 0.0, 1.0], 3);
        let s1: f64 = out[..3].iter().sum();
        let s2: f64 = out[3..].iter().sum();
        assert!((s1 - 1.0).abs() < 1e-12 && (s2 - 1.0).abs() < 1e-12);
    }
}
