//! Batched matrix product over the two leading axes:
//! (b0, b1, m, k) x (b0, b1, k, n) -> (b0, b1, m, n). f64 accumulation.

use std::sync::Arc;

use rayon::prelude::*;

use super::tape::{record, Backward, GradStore, NodeId};
use super::Tensor;

pub fn matmul(a: &Tensor, b: &Tensor) -> Tensor {
    let [b0, b1, m, k] = a.shape;
    let [c0, c1, k2, n] = b.shape;
    assert_eq!((b0, b1), (c0, c1), "matmul batch dims must match");
    assert_eq!(k, k2, "matmul inner dims must match");
    let batch = b0 * b1;
    let (ad, bd) = (&a.data, &b.data);
    let mut out = vec![0f32; batch * m * n];
    out.par_chunks_mut(m * n).enumerate().for_each(|(p, dst)| {
        let abase = p * m * k;
        let bbase = p * k * n;
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0f64;
                for l in 0..k {
                    acc += ad[abase + i * k + l] as f64 * bd[bbase + l * n + j] as f64;
                }
                dst[i * n + j] = acc as f32;
            }
        }
    });
    let (adc, bdc) = (a.data.clone(), b.data.clone());
    record(&[a, b], [b0, b1, m, n], out, move |ids| {
        Box::new(MatmulBack { ids: [ids[0], ids[1]], a: adc, b: bdc, m, k, n })
    })
}

struct MatmulBack {
    ids: [Option<NodeId>; 2],
    a: Arc<Vec<f32>>,
    b: Arc<Vec<f32>>,
    m: usize,
    k: usize,
    n: usize,
}

impl Backward for MatmulBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let (m, k, n) = (self.m, self.k, self.n);
        if let Some(aid) = self.ids[0] {
            let bd = &self.b;
            let buf = store.buf(aid);
            // dA = dOut * B^T
            buf.par_chunks_mut(m * k).enumerate().for_each(|(p, dst)| {
                let gbase = p * m * n;
                let bbase = p * k * n;
                for i in 0..m {
                    for l in 0..k {
                        let mut acc = 0f64;
                        for j in 0..n {
                            acc += grad[gbase + i * n + j] as f64 * bd[bbase + l * n + j] as f64;
                        }
                        dst[i * k + l] += acc as f32;
                    }
                }
            });
        }
        if let Some(bid) = self.ids[1] {
            let ad = &self.a;
            let buf = store.buf(bid);
            // dB = A^T * dOut
            buf.par_chunks_mut(k * n).enumerate().for_each(|(p, dst)| {
                let gbase = p * m * n;
                let abase = p * m * k;
                for l in 0..k {
                    for j in 0..n {
                        let mut acc = 0f64;
                        for i in 0..m {
                            acc += ad[abase + i * k + l] as f64 * grad[gbase + i * n + j] as f64;
                        }
                        dst[l * n + j] += acc as f32;
                    }
                }
            });
        }
    }
}
