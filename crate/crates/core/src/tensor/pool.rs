//! Non-overlapping pooling, global/row reductions, bilinear upsampling.

use super::tape::{record, Backward, GradStore, NodeId};
use super::Tensor;

/// Max over k x k windows (stride = k). Ties resolve to the first element in
/// row-major window order; the winner index is saved for the backward pass.
pub fn max_pool(x: &Tensor, k: usize) -> Tensor {
    let [n, c, h, w] = x.shape;
    assert!(h % k == 0 && w % k == 0, "pool size {k} must divide {h}x{w}");
    let (oh, ow) = (h / k, w / k);
    let mut out = vec![0f32; n * c * oh * ow];
    let mut arg = vec![0u32; n * c * oh * ow];
    for p in 0..n * c {
        let xbase = p * h * w;
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = f32::NEG_INFINITY;
                let mut best_i = 0usize;
                for ky in 0..k {
                    for kx in 0..k {
                        let idx = xbase + (oy * k + ky) * w + ox * k + kx;
                        let v = x.data[idx];
                        if v > best {
                            best = v;
                            best_i = idx;
                        }
                    }
                }
                let o = p * oh * ow + oy * ow + ox;
                out[o] = best;
                arg[o] = best_i as u32;
            }
        }
    }
    record(&[x], [n, c, oh, ow], out, move |ids| {
        Box::new(MaxPoolBack { id: ids[0].expect("max_pool input tracked"), arg })
    })
}

struct MaxPoolBack {
    id: NodeId,
    arg: Vec<u32>,
}

impl Backward for MaxPoolBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let buf = store.buf(self.id);
        for (i, &g) in grad.iter().enumerate() {
            buf[self.arg[i] as usize] += g;
        }
    }
}

/// Mean over k x k windows (stride = k).
pub fn avg_pool(x: &Tensor, k: usize) -> Tensor {
    let [n, c, h, w] = x.shape;
    assert!(h % k == 0 && w % k == 0, "pool size {k} must divide {h}x{w}");
    let (oh, ow) = (h / k, w / k);
    let inv = 1.0 / (k * k) as f64;
    let mut out = vec![0f32; n * c * oh * ow];
    for p in 0..n * c {
        let xbase = p * h * w;
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = 0f64;
                for ky in 0..k {
                    for kx in 0..k {
                        acc += x.data[xbase + (oy * k + ky) * w + ox * k + kx] as f64;
                    }
                }
                out[p * oh * ow + oy * ow + ox] = (acc * inv) as f32;
            }
        }
    }
    record(&[x], [n, c, oh, ow], out, move |ids| {
        Box::new(AvgPoolBack { id: ids[0].expect("avg_pool input tracked"), k, h, w })
    })
}

struct AvgPoolBack {
    id: NodeId,
    k: usize,
    h: usize,
    w: usize,
}

impl Backward for AvgPoolBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let (k, h, w) = (self.k, self.h, self.w);
        let (oh, ow) = (h / k, w / k);
        let inv = 1.0 / (k * k) as f32;
        let buf = store.buf(self.id);
        let planes = grad.len() / (oh * ow);
        for p in 0..planes {
            for oy in 0..oh {
                for ox in 0..ow {
                    let g = grad[p * oh * ow + oy * ow + ox] * inv;
                    for ky in 0..k {
                        for kx in 0..k {
                            buf[p * h * w + (oy * k + ky) * w + ox * k + kx] += g;
                        }
                    }
                }
            }
        }
    }
}

/// Mean over each full (h, w) plane -> (n, c, 1, 1).
pub fn global_avg_pool(x: &Tensor) -> Tensor {
    let [n, c, h, w] = x.shape;
    let inv = 1.0 / (h * w) as f64;
    let mut out = vec![0f32; n * c];
    for p in 0..n * c {
        let mut acc = 0f64;
        for i in 0..h * w {
            acc += x.data[p * h * w + i] as f64;
        }
        out[p] = (acc * inv) as f32;
    }
    record(&[x], [n, c, 1, 1], out, move |ids| {
        Box::new(GlobalAvgBack { id: ids[0].expect("global_avg_pool input tracked"), hw: h * w })
    })
}

struct GlobalAvgBack {
    id: NodeId,
    hw: usize,
}

impl Backward for GlobalAvgBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let inv = 1.0 / self.hw as f32;
        let buf = store.buf(self.id);
        for (p, &g) in grad.iter().enumerate() {
            let gv = g * inv;
            for i in 0..self.hw {
                buf[p * self.hw + i] += gv;
            }
        }
    }
}

/// Mean along the width axis -> (n, c, h, 1).
pub fn mean_width(x: &Tensor) -> Tensor {
    let [n, c, h, w] = x.shape;
    let inv = 1.0 / w as f64;
    let mut out = vec![0f32; n * c * h];
    for r in 0..n * c * h {
        let mut acc = 0f64;
        for i in 0..w {
            acc += x.data[r * w + i] as f64;
        }
        out[r] = (acc * inv) as f32;
    }
    record(&[x], [n, c, h, 1], out, move |ids| {
        Box::new(MeanWidthBack { id: ids[0].expect("mean_width input tracked"), w })
    })
}

struct MeanWidthBack {
    id: NodeId,
    w: usize,
}

impl Backward for MeanWidthBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let inv = 1.0 / self.w as f32;
        let buf = store.buf(self.id);
        for (r, &g) in grad.iter().enumerate() {
            let gv = g * inv;
            for i in 0..self.w {
                buf[r * self.w + i] += gv;
            }
        }
    }
}

/// Per-axis source taps for integer-factor bilinear scaling with half-pixel
/// centers: src = max((dst + 0.5)/f - 0.5, 0), clamped to the last sample.
fn bilinear_taps(len: usize, f: usize) -> Vec<(usize, usize, f32)> {
    (0..len * f)
        .map(|o| {
            let src = ((o as f64 + 0.5) / f as f64 - 0.5).max(0.0);
            let i0 = (src.floor() as usize).min(len - 1);
            let i1 = (i0 + 1).min(len - 1);
            (i0, i1, (src - i0 as f64) as f32)
        })
        .collect()
}

/// Bilinear upsampling by an integer factor (align_corners = false).
pub fn upsample_bilinear(x: &Tensor, f: usize) -> Tensor {
    assert!(f >= 1);
    let [n, c, h, w] = x.shape;
    let (oh, ow) = (h * f, w * f);
    let ty = bilinear_taps(h, f);
    let tx = bilinear_taps(w, f);
    let mut out = vec![0f32; n * c * oh * ow];
    for p in 0..n * c {
        let xb = p * h * w;
        let ob = p * oh * ow;
        for oy in 0..oh {
            let (y0, y1, fy) = ty[oy];
            for ox in 0..ow {
                let (x0, x1, fx) = tx[ox];
                let v00 = x.data[xb + y0 * w + x0];
                let v01 = x.data[xb + y0 * w + x1];
                let v10 = x.data[xb + y1 * w + x0];
                let v11 = x.data[xb + y1 * w + x1];
                let top = v00 + (v01 - v00) * fx;
                let bot = v10 + (v11 - v10) * fx;
                out[ob + oy * ow + ox] = top + (bot - top) * fy;
            }
        }
    }
    record(&[x], [n, c, oh, ow], out, move |ids| {
        Box::new(UpsampleBack { id: ids[0].expect("upsample input tracked"), ty, tx, h, w })
    })
}

struct UpsampleBack {
    id: NodeId,
    ty: Vec<(usize, usize, f32)>,
    tx: Vec<(usize, usize, f32)>,
    h: usize,
    w: usize,
}

impl Backward for UpsampleBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let (h, w) = (self.h, self.w);
        let (oh, ow) = (self.ty.len(), self.tx.len());
        let buf = store.buf(self.id);
        let planes = grad.len() / (oh * ow);
        for p in 0..planes {
            let xb = p * h * w;
            let ob = p * oh * ow;
            for oy in 0..oh {
                let (y0, y1, fy) = self.ty[oy];
                for ox in 0..ow {
                    let (x0, x1, fx) = self.tx[ox];
                    let g = grad[ob + oy * ow + ox];
                    buf[xb + y0 * w + x0] += g * (1.0 - fy) * (1.0 - fx);
                    buf[xb + y0 * w + x1] += g * (1.0 - fy) * fx;
                    buf[xb + y1 * w + x0] += g * fy * (1.0 - fx);
                    buf[xb + y1 * w + x1] += g * fy * fx;
                }
            }
        }
    }
}
