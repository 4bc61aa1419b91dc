//! Reductions and row-wise softmax.

use std::sync::Arc;

use super::tape::{record, Backward, GradStore, NodeId};
use super::Tensor;

/// Sum of all elements -> (1, 1, 1, 1). f64 accumulation.
pub fn sum_all(x: &Tensor) -> Tensor {
    let mut acc = 0f64;
    for &v in x.data.iter() {
        acc += v as f64;
    }
    let numel = x.numel();
    record(&[x], [1, 1, 1, 1], vec![acc as f32], move |ids| {
        Box::new(SumAllBack { id: ids[0].expect("sum_all input tracked"), numel })
    })
}

struct SumAllBack {
    id: NodeId,
    numel: usize,
}

impl Backward for SumAllBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let g = grad[0];
        let buf = store.buf(self.id);
        for v in buf.iter_mut().take(self.numel) {
            *v += g;
        }
    }
}

/// Softmax along the last (width) axis, numerically stabilized per row.
pub fn softmax_lastdim(x: &Tensor) -> Tensor {
    let [n, c, h, w] = x.shape;
    let rows = n * c * h;
    let mut out = vec![0f32; rows * w];
    for r in 0..rows {
        let row = &x.data[r * w..(r + 1) * w];
        let max = row.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
        let mut denom = 0f64;
        for i in 0..w {
            denom += ((row[i] - max) as f64).exp();
        }
        for i in 0..w {
            out[r * w + i] = (((row[i] - max) as f64).exp() / denom) as f32;
        }
    }
    let y = Arc::new(out.clone());
    record(&[x], [n, c, h, w], out, move |ids| {
        Box::new(SoftmaxBack { id: ids[0].expect("softmax input tracked"), y, w })
    })
}

struct SoftmaxBack {
    id: NodeId,
    y: Arc<Vec<f32>>,
    w: usize,
}

impl Backward for SoftmaxBack {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let w = self.w;
        let buf = store.buf(self.id);
        let rows = grad.len() / w;
        for r in 0..rows {
            let mut dot = 0f64;
            for i in 0..w {
                dot += grad[r * w + i] as f64 * self.y[r * w + i] as f64;
            }
            for i in 0..w {
                let yi = self.y[r * w + i] as f64;
                buf[r * w + i] += (yi * (grad[r * w + i] as f64 - dot)) as f32;
            }
        }
    }
}
