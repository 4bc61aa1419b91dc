//! Training losses. Both act on pre-clamp RGB predictions.

use std::sync::Arc;

use crate::tensor::tape::{record, Backward, GradStore, NodeId};
use crate::tensor::{add, add_scalar, ln, mul_scalar, sub, sum_all, Tensor};

/// Mean smooth-L1 (Huber): 0.5 d^2 / beta for |d| < beta, |d| - 0.5 beta
/// otherwise. Fused forward/backward for efficiency.
pub fn smooth_l1(pred: &Tensor, target: &Tensor, beta: f32) -> Tensor {
    assert_eq!(pred.shape(), target.shape(), "loss operands must match");
    assert!(beta > 0.0, "smooth_l1 beta must be positive");
    let n = pred.numel();
    let mut acc = 0f64;
    for i in 0..n {
        let d = (pred.data()[i] - target.data()[i]) as f64;
        let b = beta as f64;
        acc += if d.abs() < b { 0.5 * d * d / b } else { d.abs() - 0.5 * b };
    }
    let (pd, td) = (pred.data.clone(), target.data.clone());
    record(&[pred, target], [1, 1, 1, 1], vec![(acc / n as f64) as f32], move |ids| {
        Box::new(SmoothL1Back { ids: [ids[0], ids[1]], pred: pd, target: td, beta })
    })
}

struct SmoothL1Back {
    ids: [Option<NodeId>; 2],
    pred: Arc<Vec<f32>>,
    target: Arc<Vec<f32>>,
    beta: f32,
}

impl Backward for SmoothL1Back {
    fn backward(&self, grad: &[f32], store: &mut GradStore) {
        let g0 = grad[0];
        let n = self.pred.len() as f32;
        for (which, sign) in [(0usize, 1.0f32), (1, -1.0)] {
            let Some(id) = self.ids[which] else { continue };
            let buf = store.buf(id);
            for i in 0..self.pred.len() {
                let d = self.pred[i] - self.target[i];
                // d/d(pred) of the mean: clamp(d, -beta, beta) / beta / n
                buf[i] += sign * g0 * d.clamp(-self.beta, self.beta) / self.beta / n;
            }
        }
    }
}

/// Negated-PSNR surrogate: 10 * log10(mse + 1e-8). Decreasing it raises the
/// prediction's PSNR. Composed from primitive ops.
pub fn psnr_loss(pred: &Tensor, target: &Tensor) -> Tensor {
    assert_eq!(pred.shape(), target.shape(), "loss operands must match");
    let diff = sub(pred, target);
    let sq = crate::tensor::mul(&diff, &diff);
    let mse = mul_scalar(&sum_all(&sq), 1.0 / pred.numel() as f32);
    mul_scalar(&ln(&add_scalar(&mse, 1e-8)), 10.0 / std::f32::consts::LN_10)
}

#[derive(Clone, Copy, Debug)]
pub struct LossWeights {
    pub smooth: f32,
    pub psnr: f32,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { smooth: 1.0, psnr: 0.1 }
    }
}

/// w.smooth * smooth_l1(beta=1) + w.psnr * psnr_loss.
pub fn total_loss(pred: &Tensor, target: &Tensor, w: LossWeights) -> Tensor {
    add(
        &mul_scalar(&smooth_l1(pred, target, 1.0), w.smooth),
        &mul_scalar(&psnr_loss(pred, target), w.psnr),
    )
}
