//! Data-movement ops: reshape, permute, channel concat/slice, row shift,
//! boundary padding, crop.

use super::tape::{record, Backward, GradStore, NodeId};
use super::Tensor;

/// View with a new shape over the same (contiguous) data.
pub fn reshape(x: &Tensor, shape: [usize; 4]) -> Tensor {
    assert_eq!(x.numel(), shape.iter().product::<usize>(), "reshape must preserve element count");
    record(&[x], shape, x.data.to_vec(), move |ids| {
        Box::new(PassthroughBack { id: ids[0].expect("reshape input tracked") })
    })
}

struct PassthroughBack {
    id: NodeId,
}

impl Backward for PassthroughBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let buf = store.buf(self.id);
        for i in 0..grad.len() {
            buf[i] += grad[i];
        }
    }
}

/// Axis permutation; `perm[d]` names the source axis for output axis d.
pub fn permute(x: &Tensor, perm: [usize; 4]) -> Tensor {
    {
        let mut seen = [false; 4];
        for &p in &perm {
            assert!(p < 4 && !seen[p], "permute needs a permutation of 0..4");
            seen[p] = true;
        }
    }
    let src = x.shape;
    let out_shape = [src[perm[0]], src[perm[1]], src[perm[2]], src[perm[3]]];
    let out = apply_perm(&x.data, src, perm);
    record(&[x], out_shape, out, move |ids| {
        Box::new(PermuteBack { id: ids[0].expect("permute input tracked"), src, perm })
    })
}

fn apply_perm(data: &[f32], src: [usize; 4], perm: [usize; 4]) -> Vec<f32> {
    let mut st = [0usize; 4];
    let mut acc = 1;
    for d in (0..4).rev() {
        st[d] = acc;
        acc *= src[d];
    }
    let osh = [src[perm[0]], src[perm[1]], src[perm[2]], src[perm[3]]];
    let ost = [st[perm[0]], st[perm[1]], st[perm[2]], st[perm[3]]];
    let mut out = Vec::with_capacity(data.len());
    for i0 in 0..osh[0] {
        for i1 in 0..osh[1] {
            for i2 in 0..osh[2] {
                for i3 in 0..osh[3] {
                    out.push(data[i0 * ost[0] + i1 * ost[1] + i2 * ost[2] + i3 * ost[3]]);
                }
            }
        }
    }
    out
}

struct PermuteBack {
    id: NodeId,
    src: [usize; 4],
    perm: [usize; 4],
}

impl Backward for PermuteBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        // Inverse permutation maps output-axis gradients back to source axes.
        let mut inv = [0usize; 4];
        for (d, &p) in self.perm.iter().enumerate() {
            inv[p] = d;
        }
        let osh = [
            self.src[self.perm[0]],
            self.src[self.perm[1]],
            self.src[self.perm[2]],
            self.src[self.perm[3]],
        ];
        let g = apply_perm(grad, osh, inv);
        let buf = store.buf(self.id);
        for i in 0..g.len() {
            buf[i] += g[i];
        }
    }
}

/// Concatenate along the channel axis.
pub fn concat_channels(parts: &[&Tensor]) -> Tensor {
    assert!(!parts.is_empty(), "concat needs at least one tensor");
    let [n, _, h, w] = parts[0].shape;
    for p in parts {
        assert_eq!([p.shape[0], p.shape[2], p.shape[3]], [n, h, w], "concat parts must agree on n/h/w");
    }
    let cs: Vec<usize> = parts.iter().map(|p| p.shape[1]).collect();
    let c_total: usize = cs.iter().sum();
    let mut out = Vec::with_capacity(n * c_total * h * w);
    for b in 0..n {
        for p in parts {
            let pc = p.shape[1];
            let base = b * pc * h * w;
            out.extend_from_slice(&p.data[base..base + pc * h * w]);
        }
    }
    record(parts, [n, c_total, h, w], out, move |ids| {
        Box::new(ConcatBack { ids: ids.to_vec(), cs, n, plane: h * w })
    })
}

struct ConcatBack {
    ids: Vec<Option<NodeId>>,
    cs: Vec<usize>,
    n: usize,
    plane: usize,
}

impl Backward for ConcatBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let c_total: usize = self.cs.iter().sum();
        let mut c_off = 0;
        for (part, &pc) in self.cs.iter().enumerate() {
            if let Some(id) = self.ids[part] {
                let buf = store.buf(id);
                for b in 0..self.n {
                    let src = (b * c_total + c_off) * self.plane;
                    let dst = b * pc * self.plane;
                    for i in 0..pc * self.plane {
                        buf[dst + i] += grad[src + i];
                    }
                }
            }
            c_off += pc;
        }
    }
}

/// Channels [start, start + len).
pub fn slice_channels(x: &Tensor, start: usize, len: usize) -> Tensor {
    let [n, c, h, w] = x.shape;
    assert!(start + len <= c, "channel slice {start}..{} out of range 0..{c}", start + len);
    let mut out = Vec::with_capacity(n * len * h * w);
    for b in 0..n {
        let base = (b * c + start) * h * w;
        out.extend_from_slice(&x.data[base..base + len * h * w]);
    }
    record(&[x], [n, len, h, w], out, move |ids| {
        Box::new(SliceBack { id: ids[0].expect("slice input tracked"), start, c, len, n, plane: h * w })
    })
}

/// Split into two equal channel halves; concat_channels inverts it.
pub fn split_channels(x: &Tensor) -> (Tensor, Tensor) {
    let c = x.shape()[1];
    assert_eq!(c % 2, 0, "split_channels needs an even channel count, got {c}");
    (slice_channels(x, 0, c / 2), slice_channels(x, c / 2, c / 2))
}

struct SliceBack {
    id: NodeId,
    start: usize,
    c: usize,
    len: usize,
    n: usize,
    plane: usize,
}

impl Backward for SliceBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let buf = store.buf(self.id);
        for b in 0..self.n {
            let dst = (b * self.c + self.start) * self.plane;
            let src = b * self.len * self.plane;
            for i in 0..self.len * self.plane {
                buf[dst + i] += grad[src + i];
            }
        }
    }
}

/// Vertical resample: out[y] = x[y + dy], rows shifted out are zero.
pub fn shift_rows(x: &Tensor, dy: isize) -> Tensor {
    let [n, c, h, w] = x.shape;
    let mut out = vec![0f32; x.numel()];
    for p in 0..n * c {
        for y in 0..h {
            let sy = y as isize + dy;
            if sy < 0 || sy >= h as isize {
                continue;
            }
            let dst = (p * h + y) * w;
            let src = (p * h + sy as usize) * w;
            out[dst..dst + w].copy_from_slice(&x.data[src..src + w]);
        }
    }
    record(&[x], x.shape, out, move |ids| {
        Box::new(ShiftBack { id: ids[0].expect("shift input tracked"), dy, h, w })
    })
}

struct ShiftBack {
    id: NodeId,
    dy: isize,
    h: usize,
    w: usize,
}

impl Backward for ShiftBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let (h, w) = (self.h, self.w);
        let buf = store.buf(self.id);
        let planes = grad.len() / (h * w);
        for p in 0..planes {
            for y in 0..h {
                let sy = y as isize + self.dy;
                if sy < 0 || sy >= h as isize {
                    continue;
                }
                let dst = (p * h + sy as usize) * w;
                let src = (p * h + y) * w;
                for i in 0..w {
                    buf[dst + i] += grad[src + i];
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PadMode {
    /// Mirror without repeating the edge sample; pad must be < extent.
    Reflect,
    /// Repeat the edge sample; any pad size.
    Replicate,
}

/// Pad the bottom and right borders only (keeps the origin fixed so a final
/// crop undoes it exactly).
pub fn pad_bottom_right(x: &Tensor, ph: usize, pw: usize, mode: PadMode) -> Tensor {
    let [n, c, h, w] = x.shape;
    if mode == PadMode::Reflect {
        assert!(ph < h && pw < w, "reflect pad ({ph},{pw}) must be smaller than ({h},{w})");
    }
    let (hp, wp) = (h + ph, w + pw);
    let src_y: Vec<usize> = (0..hp).map(|y| pad_src(y, h, mode)).collect();
    let src_x: Vec<usize> = (0..wp).map(|x| pad_src(x, w, mode)).collect();
    let mut out = vec![0f32; n * c * hp * wp];
    for p in 0..n * c {
        for y in 0..hp {
            for xx in 0..wp {
                out[(p * hp + y) * wp + xx] = x.data[(p * h + src_y[y]) * w + src_x[xx]];
            }
        }
    }
    record(&[x], [n, c, hp, wp], out, move |ids| {
        Box::new(PadBack { id: ids[0].expect("pad input tracked"), src_y, src_x, h, w })
    })
}

fn pad_src(i: usize, len: usize, mode: PadMode) -> usize {
    if i < len {
        i
    } else {
        match mode {
            PadMode::Reflect => 2 * len - 2 - i,
            PadMode::Replicate => len - 1,
        }
    }
}

struct PadBack {
    id: NodeId,
    src_y: Vec<usize>,
    src_x: Vec<usize>,
    h: usize,
    w: usize,
}

impl Backward for PadBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let (hp, wp) = (self.src_y.len(), self.src_x.len());
        let (h, w) = (self.h, self.w);
        let buf = store.buf(self.id);
        let planes = grad.len() / (hp * wp);
        for p in 0..planes {
            for y in 0..hp {
                for xx in 0..wp {
                    buf[(p * h + self.src_y[y]) * w + self.src_x[xx]] +=
                        grad[(p * hp + y) * wp + xx];
                }
            }
        }
    }
}

/// Keep the top-left (nh, nw) window.
pub fn crop(x: &Tensor, nh: usize, nw: usize) -> Tensor {
    let [n, c, h, w] = x.shape;
    assert!(nh <= h && nw <= w, "crop ({nh},{nw}) exceeds input ({h},{w})");
    let mut out = Vec::with_capacity(n * c * nh * nw);
    for p in 0..n * c {
        for y in 0..nh {
            let base = (p * h + y) * w;
            out.extend_from_slice(&x.data[base..base + nw]);
        }
    }
    record(&[x], [n, c, nh, nw], out, move |ids| {
        Box::new(CropBack { id: ids[0].expect("crop input tracked"), nh, nw, h, w })
    })
}

struct CropBack {
    id: NodeId,
    nh: usize,
    nw: usize,
    h: usize,
    w: usize,
}

impl Backward for CropBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let (nh, nw, h, w) = (self.nh, self.nw, self.h, self.w);
        let buf = store.buf(self.id);
        let planes = grad.len() / (nh * nw);
        for p in 0..planes {
            for y in 0..nh {
                for xx in 0..nw {
                    buf[(p * h + y) * w + xx] += grad[(p * nh + y) * nw + xx];
                }
            }
        }
    }
}
