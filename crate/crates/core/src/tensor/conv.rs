//! 2D convolution (cross-correlation) with stride, asymmetric zero padding,
//! dilation, and groups. f64 accumulation; parallel over disjoint output
//! planes, so results are bitwise identical at any thread count.

use std::sync::Arc;

use rayon::prelude::*;

use super::tape::{record, Backward, GradStore, NodeId};
use super::Tensor;

#[derive(Clone, Copy, Debug)]
pub struct Conv2dSpec {
    pub stride: usize,
    pub pad: (usize, usize),
    pub dilation: usize,
    pub groups: usize,
}

impl Default for Conv2dSpec {
    fn default() -> Self {
        Conv2dSpec { stride: 1, pad: (0, 0), dilation: 1, groups: 1 }
    }
}

fn out_dim(i: usize, k: usize, pad: usize, stride: usize, dilation: usize) -> usize {
    let span = dilation * (k - 1) + 1;
    assert!(
        i + 2 * pad >= span,
        "kernel (dilated span {span}) exceeds padded input extent {}",
        i + 2 * pad
    );
    (i + 2 * pad - span) / stride + 1
}

/// x: (n, ci, h, w), w: (co, ci/groups, kh, kw), bias: (1, co, 1, 1).
pub fn conv2d(x: &Tensor, weight: &Tensor, bias: Option<&Tensor>, spec: Conv2dSpec) -> Tensor {
    let [n, ci, h, w] = x.shape;
    let [co, cig, kh, kw] = weight.shape;
    assert!(spec.stride >= 1 && spec.dilation >= 1 && spec.groups >= 1);
    assert_eq!(ci % spec.groups, 0, "input channels must divide into groups");
    assert_eq!(co % spec.groups, 0, "output channels must divide into groups");
    assert_eq!(cig, ci / spec.groups, "weight channel dim must be ci/groups");
    if let Some(b) = bias {
        assert_eq!(b.shape, [1, co, 1, 1], "bias must be (1, co, 1, 1)");
    }
    let (ph, pw) = spec.pad;
    let oh = out_dim(h, kh, ph, spec.stride, spec.dilation);
    let ow = out_dim(w, kw, pw, spec.stride, spec.dilation);
    let cog = co / spec.groups;

    let xd = &x.data;
    let wd = &weight.data;
    let mut out = vec![0f32; n * co * oh * ow];
    out.par_chunks_mut(oh * ow).enumerate().for_each(|(plane, dst)| {
        let b = plane / co;
        let oc = plane % co;
        let g = oc / cog;
        let bias_v = bias.map_or(0.0, |t| t.data[oc] as f64);
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = bias_v;
                for icg in 0..cig {
                    let ic = g * cig + icg;
                    let xplane = (b * ci + ic) * h * w;
                    let wbase = ((oc * cig + icg) * kh) * kw;
                    for ky in 0..kh {
                        let iy = (oy * spec.stride + ky * spec.dilation) as isize - ph as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let xrow = xplane + iy as usize * w;
                        let wrow = wbase + ky * kw;
                        for kx in 0..kw {
                            let ix = (ox * spec.stride + kx * spec.dilation) as isize - pw as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            acc += xd[xrow + ix as usize] as f64 * wd[wrow + kx] as f64;
                        }
                    }
                }
                dst[oy * ow + ox] = acc as f32;
            }
        }
    });

    let back = Conv2dBack {
        ids: Cd3 { x: None, w: None, b: None },
        x: x.data.clone(),
        w: weight.data.clone(),
        x_shape: x.shape,
        w_shape: weight.shape,
        spec,
        oh,
        ow,
    };
    let inputs: Vec<&Tensor> = match bias {
        Some(b) => vec![x, weight, b],
        None => vec![x, weight],
    };
    record(&inputs, [n, co, oh, ow], out, move |ids| {
        let mut back = back;
        back.ids = Cd3 {
            x: ids[0],
            w: ids[1],
            b: ids.get(2).copied().flatten(),
        };
        Box::new(back)
    })
}

struct Cd3 {
    x: Option<NodeId>,
    w: Option<NodeId>,
    b: Option<NodeId>,
}

struct Conv2dBack {
    ids: Cd3,
    x: Arc<Vec<f32>>,
    w: Arc<Vec<f32>>,
    x_shape: [usize; 4],
    w_shape: [usize; 4],
    spec: Conv2dSpec,
    oh: usize,
    ow: usize,
}

impl Backward for Conv2dBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let [n, ci, h, w] = self.x_shape;
        let [co, cig, kh, kw] = self.w_shape;
        let (ph, pw) = self.spec.pad;
        let (s, d) = (self.spec.stride, self.spec.dilation);
        let (oh, ow) = (self.oh, self.ow);
        let cog = co / self.spec.groups;

        if let Some(bid) = self.ids.b {
            let buf = store.buf(bid);
            buf.par_iter_mut().enumerate().for_each(|(oc, slot)| {
                let mut acc = 0f64;
                for b in 0..n {
                    let base = (b * co + oc) * oh * ow;
                    for i in 0..oh * ow {
                        acc += grad[base + i] as f64;
                    }
                }
                *slot += acc as f32;
            });
        }

        if let Some(wid) = self.ids.w {
            let xd = &self.x;
            let buf = store.buf(wid);
            // One chunk per output channel: filter slice (cig, kh, kw).
            buf.par_chunks_mut(cig * kh * kw).enumerate().for_each(|(oc, wslice)| {
                let g = oc / cog;
                for icg in 0..cig {
                    let ic = g * cig + icg;
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let mut acc = 0f64;
                            for b in 0..n {
                                let gbase = (b * co + oc) * oh * ow;
                                let xplane = (b * ci + ic) * h * w;
                                for oy in 0..oh {
                                    let iy = (oy * s + ky * d) as isize - ph as isize;
                                    if iy < 0 || iy >= h as isize {
                                        continue;
                                    }
                                    let xrow = xplane + iy as usize * w;
                                    let grow = gbase + oy * ow;
                                    for ox in 0..ow {
                                        let ix = (ox * s + kx * d) as isize - pw as isize;
                                        if ix < 0 || ix >= w as isize {
                                            continue;
                                        }
                                        acc += grad[grow + ox] as f64 * xd[xrow + ix as usize] as f64;
                                    }
                                }
                            }
                            wslice[(icg * kh + ky) * kw + kx] += acc as f32;
                        }
                    }
                }
            });
        }

        if let Some(xid) = self.ids.x {
            let wd = &self.w;
            let buf = store.buf(xid);
            // One chunk per input plane; gather over (oc-in-group, ky, kx).
            buf.par_chunks_mut(h * w).enumerate().for_each(|(plane, xslice)| {
                let b = plane / ci;
                let ic = plane % ci;
                let g = ic / cig;
                let icg = ic % cig;
                for iy in 0..h {
                    for ix in 0..w {
                        let mut acc = 0f64;
                        for ocg in 0..cog {
                            let oc = g * cog + ocg;
                            let gbase = (b * co + oc) * oh * ow;
                            let wbase = (oc * cig + icg) * kh * kw;
                            for ky in 0..kh {
                                let oy_num = iy as isize + ph as isize - (ky * d) as isize;
                                if oy_num < 0 || oy_num % s as isize != 0 {
                                    continue;
                                }
                                let oy = oy_num as usize / s;
                                if oy >= oh {
                                    continue;
                                }
                                for kx in 0..kw {
                                    let ox_num = ix as isize + pw as isize - (kx * d) as isize;
                                    if ox_num < 0 || ox_num % s as isize != 0 {
                                        continue;
                                    }
                                    let ox = ox_num as usize / s;
                                    if ox >= ow {
                                        continue;
                                    }
                                    acc += grad[gbase + oy * ow + ox] as f64
                                        * wd[wbase + ky * kw + kx] as f64;
                                }
                            }
                        }
                        xslice[iy * w + ix] += acc as f32;
                    }
                }
            });
        }
    }
}
