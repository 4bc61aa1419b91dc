//! Adam optimizer. Moments are stored in f32, update math runs in f64, with
//! the standard bias correction.

#[derive(Clone, Copy, Debug)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

pub struct Adam {
    cfg: AdamConfig,
    m: Vec<Vec<f32>>,
    v: Vec<Vec<f32>>,
    t: u64,
}

impl Adam {
    /// One moment pair per parameter tensor, sized by `numels`.
    pub fn new(cfg: AdamConfig, numels: &[usize]) -> Adam {
        Adam {
            cfg,
            m: numels.iter().map(|&n| vec![0.0; n]).collect(),
            v: numels.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// Begin step t+1; returns the bias-correction factors (bc1, bc2).
    fn advance(&mut self) -> (f64, f64) {
        self.t += 1;
        let t = self.t as i32;
        (1.0 - self.cfg.beta1.powi(t), 1.0 - self.cfg.beta2.powi(t))
    }

    /// Update all parameters in place. `grads[i]` must align with `params[i]`;
    /// a None gradient leaves that parameter (and its moments) untouched.
    pub fn step(&mut self, params: &mut [Vec<f32>], grads: &[Option<&[f32]>], lr: f64) {
        assert_eq!(params.len(), self.m.len(), "optimizer state mismatch");
        assert_eq!(params.len(), grads.len(), "gradient list mismatch");
        let (bc1, bc2) = self.advance();
        let (b1, b2, eps) = (self.cfg.beta1, self.cfg.beta2, self.cfg.eps);
        for (i, p) in params.iter_mut().enumerate() {
            let Some(g) = grads[i] else { continue };
            assert_eq!(g.len(), p.len(), "gradient length mismatch at parameter {i}");
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            for j in 0..p.len() {
                let gj = g[j] as f64;
                let mj = b1 * m[j] as f64 + (1.0 - b1) * gj;
                let vj = b2 * v[j] as f64 + (1.0 - b2) * gj * gj;
                m[j] = mj as f32;
                v[j] = vj as f32;
                let update = lr * (mj / bc1) / ((vj / bc2).sqrt() + eps);
                p[j] = (p[j] as f64 - update) as f32;
            }
        }
    }
}

/// Cosine decay from `lr0` to `lr_min` over `epochs` (flat when epochs == 1).
pub fn cosine_lr(lr0: f64, lr_min: f64, epoch: usize, epochs: usize) -> f64 {
    if epochs <= 1 {
        return lr0;
    }
    let t = epoch as f64 / (epochs - 1) as f64;
    lr_min + 0.5 * (lr0 - lr_min) * (1.0 + (std::f64::consts::PI * t).cos())
}
