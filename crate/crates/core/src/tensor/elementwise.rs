//! Elementwise ops: activations, scalar affine, ln, angle wrap, and
//! shape-broadcast add/sub/mul.

use std::f32::consts::{PI, TAU};
use std::sync::Arc;

use super::tape::{record, Backward, GradStore, NodeId};
use super::Tensor;
use crate::scalar;

// ── Unary ops ────────────────────────────────────────────────────────────

/// `saved` holds either the input or the output, whatever `dfn` wants:
/// dfn(saved[i], grad[i]) -> gradient contribution for input i.
struct UnaryBack<F: Fn(f32, f32) -> f32> {
    id: NodeId,
    saved: Arc<Vec<f32>>,
    dfn: F,
}

impl<F: Fn(f32, f32) -> f32> Backward for UnaryBack<F> {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let buf = store.buf(self.id);
        for i in 0..grad.len() {
            buf[i] += (self.dfn)(self.saved[i], grad[i]);
        }
    }
}

fn unary(
    x: &Tensor,
    fwd: impl Fn(f32) -> f32,
    save_output: bool,
    dfn: impl Fn(f32, f32) -> f32 + 'static,
) -> Tensor {
    let out: Vec<f32> = x.data.iter().map(|&v| fwd(v)).collect();
    let saved = if save_output { Arc::new(out.clone()) } else { x.data.clone() };
    record(&[x], x.shape, out, move |ids| {
        Box::new(UnaryBack { id: ids[0].expect("unary input tracked"), saved, dfn })
    })
}

pub fn relu(x: &Tensor) -> Tensor {
    unary(x, |v| v.max(0.0), false, |x, g| if x > 0.0 { g } else { 0.0 })
}

pub fn sigmoid(x: &Tensor) -> Tensor {
    unary(
        x,
        |v| scalar::sigmoid(v as f64) as f32,
        true,
        |y, g| g * y * (1.0 - y),
    )
}

pub fn tanh(x: &Tensor) -> Tensor {
    unary(x, |v| (v as f64).tanh() as f32, true, |y, g| g * (1.0 - y * y))
}

/// Exact (erf-based) GELU.
pub fn gelu(x: &Tensor) -> Tensor {
    unary(
        x,
        |v| scalar::gelu(v as f64) as f32,
        false,
        |x, g| g * scalar::dgelu(x as f64) as f32,
    )
}

/// Natural log; caller guarantees strictly positive input.
pub fn ln(x: &Tensor) -> Tensor {
    unary(x, |v| v.ln(), false, |x, g| g / x)
}

pub fn add_scalar(x: &Tensor, s: f32) -> Tensor {
    unary(x, move |v| v + s, false, |_, g| g)
}

pub fn mul_scalar(x: &Tensor, s: f32) -> Tensor {
    unary(x, move |v| v * s, false, move |_, g| g * s)
}

/// Wrap angles to (-pi, pi]. Gradient passes through unchanged (the map has
/// unit slope almost everywhere).
pub fn wrap_angle(x: &Tensor) -> Tensor {
    unary(
        x,
        |v| {
            let mut r = v.rem_euclid(TAU);
            if r > PI {
                r -= TAU;
            }
            r
        },
        false,
        |_, g| g,
    )
}

// ── Broadcast binary ops ─────────────────────────────────────────────────

#[derive(Clone, Copy)]
enum BinKind {
    Add,
    Sub,
    Mul,
}

fn bcast_shape(a: [usize; 4], b: [usize; 4]) -> [usize; 4] {
    let mut out = [0; 4];
    for d in 0..4 {
        out[d] = if a[d] == b[d] {
            a[d]
        } else if a[d] == 1 {
            b[d]
        } else if b[d] == 1 {
            a[d]
        } else {
            panic!("incompatible broadcast shapes {a:?} vs {b:?}");
        };
    }
    out
}

/// Contiguous strides of `shape`, zeroed where the axis is broadcast.
fn bcast_strides(shape: [usize; 4], full: [usize; 4]) -> [usize; 4] {
    let mut st = [0; 4];
    let mut acc = 1;
    for d in (0..4).rev() {
        st[d] = if shape[d] == 1 && full[d] != 1 { 0 } else { acc };
        acc *= shape[d];
    }
    st
}

struct BinaryBack {
    kind: BinKind,
    ids: [Option<NodeId>; 2],
    a: Arc<Vec<f32>>,
    b: Arc<Vec<f32>>,
    full: [usize; 4],
    st_a: [usize; 4],
    st_b: [usize; 4],
}

impl BinaryBack {
    /// Accumulate d(loss)/d(operand) via the broadcast index map.
    fn side(&self, grad: &[f32], store: &mut GradStore, which: usize) {
        let Some(id) = self.ids[which] else { return };
        let (st_self, st_other, other) = if which == 0 {
            (self.st_a, self.st_b, &self.b)
        } else {
            (self.st_b, self.st_a, &self.a)
        };
        let [n, c, h, w] = self.full;
        let buf = store.buf(id);
        let mut flat = 0;
        for i0 in 0..n {
            for i1 in 0..c {
                for i2 in 0..h {
                    for i3 in 0..w {
                        let idx_s = i0 * st_self[0] + i1 * st_self[1] + i2 * st_self[2] + i3 * st_self[3];
                        let g = grad[flat];
                        let contrib = match self.kind {
                            BinKind::Add => g,
                            BinKind::Sub => {
                                if which == 0 {
                                    g
                                } else {
                                    -g
                                }
                            }
                            BinKind::Mul => {
                                let idx_o = i0 * st_other[0]
                                    + i1 * st_other[1]
                                    + i2 * st_other[2]
                                    + i3 * st_other[3];
                                g * other[idx_o]
                            }
                        };
                        buf[idx_s] += contrib;
                        flat += 1;
                    }
                }
            }
        }
    }
}

impl Backward for BinaryBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        self.side(grad, store, 0);
        self.side(grad, store, 1);
    }
}

fn binary(a: &Tensor, b: &Tensor, kind: BinKind) -> Tensor {
    let full = bcast_shape(a.shape, b.shape);
    let st_a = bcast_strides(a.shape, full);
    let st_b = bcast_strides(b.shape, full);
    let [n, c, h, w] = full;
    let mut out = Vec::with_capacity(n * c * h * w);
    for i0 in 0..n {
        for i1 in 0..c {
            for i2 in 0..h {
                for i3 in 0..w {
                    let va = a.data[i0 * st_a[0] + i1 * st_a[1] + i2 * st_a[2] + i3 * st_a[3]];
                    let vb = b.data[i0 * st_b[0] + i1 * st_b[1] + i2 * st_b[2] + i3 * st_b[3]];
                    out.push(match kind {
                        BinKind::Add => va + vb,
                        BinKind::Sub => va - vb,
                        BinKind::Mul => va * vb,
                    });
                }
            }
        }
    }
    let (ad, bd) = (a.data.clone(), b.data.clone());
    record(&[a, b], full, out, move |ids| {
        Box::new(BinaryBack {
            kind,
            ids: [ids[0], ids[1]],
            a: ad,
            b: bd,
            full,
            st_a,
            st_b,
        })
    })
}

/// Elementwise sum; shapes broadcast where an axis is 1.
pub fn add(a: &Tensor, b: &Tensor) -> Tensor {
    binary(a, b, BinKind::Add)
}

pub fn sub(a: &Tensor, b: &Tensor) -> Tensor {
    binary(a, b, BinKind::Sub)
}

pub fn mul(a: &Tensor, b: &Tensor) -> Tensor {
    binary(a, b, BinKind::Mul)
}
