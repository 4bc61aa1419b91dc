//! Deterministic synthetic scenes and low-light degradations for tests.
//!
//! Scenes mix smooth gradients, filled rectangles, and sinusoidal texture so
//! they carry both structure (edges) and spectrum content. The degradation
//! mimics a dark capture: gain + gamma + sensor noise.

pub struct Rng64(u64);

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        Rng64(seed.wrapping_add(0xA076_1D64_78BD_642F))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-12);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Well-lit RGB scene in [0, 1], HWC layout, h*w*3 values.
pub fn scene(h: usize, w: usize, seed: u64) -> Vec<f64> {
    let mut rng = Rng64::new(seed);
    let mut img = vec![0.0f64; h * w * 3];

    // Smooth base gradient with a random orientation per channel.
    for c in 0..3 {
        let gx = rng.range(-0.3, 0.3);
        let gy = rng.range(-0.3, 0.3);
        let base = rng.range(0.35, 0.65);
        for y in 0..h {
            for x in 0..w {
                img[(y * w + x) * 3 + c] =
                    base + gx * (x as f64 / w as f64 - 0.5) + gy * (y as f64 / h as f64 - 0.5);
            }
        }
    }

    // Filled rectangles: hard edges.
    let n_rects = 4 + (rng.next_u64() % 4) as usize;
    for _ in 0..n_rects {
        let rw = (rng.range(0.15, 0.45) * w as f64) as usize;
        let rh = (rng.range(0.15, 0.45) * h as f64) as usize;
        let x0 = (rng.uniform() * (w - rw.min(w - 1)) as f64) as usize;
        let y0 = (rng.uniform() * (h - rh.min(h - 1)) as f64) as usize;
        let col = [rng.uniform(), rng.uniform(), rng.uniform()];
        let alpha = rng.range(0.5, 1.0);
        for y in y0..(y0 + rh).min(h) {
            for x in x0..(x0 + rw).min(w) {
                for c in 0..3 {
                    let p = &mut img[(y * w + x) * 3 + c];
                    *p = *p * (1.0 - alpha) + col[c] * alpha;
                }
            }
        }
    }

    // Sinusoidal texture: mid-frequency spectrum content.
    let fx = rng.range(2.0, 7.0);
    let fy = rng.range(2.0, 7.0);
    let amp = rng.range(0.04, 0.10);
    for y in 0..h {
        for x in 0..w {
            let t = (std::f64::consts::TAU * (fx * x as f64 / w as f64 + fy * y as f64 / h as f64))
                .sin();
            for c in 0..3 {
                img[(y * w + x) * 3 + c] += amp * t;
            }
        }
    }

    for v in img.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    img
}

/// Low-light degradation shared by every pair in a synthetic dataset:
/// out = clamp(gain * in^gamma + noise). `noise_seed` varies per image.
pub fn degrade(img: &[f64], gain: f64, gamma: f64, noise_sigma: f64, noise_seed: u64) -> Vec<f64> {
    let mut rng = Rng64::new(noise_seed);
    img.iter()
        .map(|&v| (gain * v.powf(gamma) + noise_sigma * rng.normal()).clamp(0.0, 1.0))
        .collect()
}

/// Standard degradation used across the test-suite datasets.
pub fn degrade_default(img: &[f64], noise_seed: u64) -> Vec<f64> {
    degrade(img, 0.16, 2.0, 0.012, noise_seed)
}
