//! Shared helpers for the integration suites: deterministic data generation
//! and conversions between the engine and the f64 reference implementations.

#![allow(dead_code)]

use ylie_core::model::{Model, ModelConfig};
use ylie_core::Tensor;
use ylie_oracle::model::{Cfg, Params, Plane4};
use ylie_oracle::synth::Rng64;

/// Uniform values in [lo, hi), generated as f32 so the f64 mirror is exact.
pub fn rand_vec_range(n: usize, seed: u64, lo: f32, hi: f32) -> Vec<f32> {
    let mut rng = Rng64::new(seed);
    (0..n).map(|_| rng.range(lo as f64, hi as f64) as f32).collect()
}

/// Uniform values in [-1, 1).
pub fn rand_vec(n: usize, seed: u64) -> Vec<f32> {
    rand_vec_range(n, seed, -1.0, 1.0)
}

pub fn rand_tensor(shape: [usize; 4], seed: u64) -> Tensor {
    Tensor::new(shape, rand_vec(shape.iter().product(), seed))
}

/// Uniform values in [0, 1), image-like.
pub fn rand_image_tensor(shape: [usize; 4], seed: u64) -> Tensor {
    Tensor::new(shape, rand_vec_range(shape.iter().product(), seed, 0.0, 1.0))
}

pub fn f64s(xs: &[f32]) -> Vec<f64> {
    xs.iter().map(|&v| v as f64).collect()
}

pub fn f32s(xs: &[f64]) -> Vec<f32> {
    xs.iter().map(|&v| v as f32).collect()
}

pub fn max_abs_diff(got: &[f32], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len(), "length mismatch in comparison");
    got.iter()
        .zip(want)
        .map(|(&g, &w)| (g as f64 - w).abs())
        .fold(0.0, f64::max)
}

pub fn assert_close(got: &[f32], want: &[f64], tol: f64, what: &str) {
    let d = max_abs_diff(got, want);
    assert!(d <= tol, "{what}: max abs diff {d:.3e} exceeds {tol:.1e}");
}

/// Small but fully valid configuration for fast structural tests.
pub fn small_config() -> ModelConfig {
    ModelConfig {
        feat_y: 8,
        feat_uv: 4,
        heads: 2,
        head_dim: 2,
        pool_ratio: 2,
        gga_pool: 2,
        gga_groups: 2,
        ddsa_dilation: 2,
        lsa_k: 3,
        hf_kernels: [3, 5, 7],
        hf_width: 4,
        gi_width: 8,
        cgm_pool: 2,
        fca_hidden: 8,
        gamma_init: 0.0,
        seed: 7,
    }
}

pub fn oracle_cfg(c: &ModelConfig) -> Cfg {
    Cfg {
        feat_y: c.feat_y,
        feat_uv: c.feat_uv,
        heads: c.heads,
        head_dim: c.head_dim,
        pool_ratio: c.pool_ratio,
        gga_pool: c.gga_pool,
        gga_groups: c.gga_groups,
        ddsa_dilation: c.ddsa_dilation,
        lsa_k: c.lsa_k,
        hf_kernels: c.hf_kernels,
        hf_width: c.hf_width,
        gi_width: c.gi_width,
        cgm_pool: c.cgm_pool,
        fca_hidden: c.fca_hidden,
    }
}

/// Copy a model's parameters into the reference name -> f64 values map.
pub fn oracle_params(m: &Model) -> Params {
    m.params().iter().map(|(name, t)| (name.to_string(), f64s(t.data()))).collect()
}

pub fn plane_of(t: &Tensor) -> Plane4 {
    let [n, c, h, w] = t.shape();
    Plane4::new(n, c, h, w, f64s(t.data()))
}

/// Give the zero-initialized output heads and the zero-initialized contrast
/// gain small nonzero values. Both are exact gradient blockers at their init
/// values (zero heads cut the trunk off the loss; a zero gain multiplies the
/// inner feed-forward branch away), so gradient-flow tests must lift them.
pub fn unblock_gradient_paths(m: &mut Model, seed: u64) {
    let mut rng = Rng64::new(seed);
    for head in ["y_head", "uv_head", "gi_head"] {
        for part in ["w", "b"] {
            let name = format!("{head}.{part}");
            let t = m.params().get(&name);
            let data: Vec<f32> =
                (0..t.numel()).map(|_| rng.range(-0.05, 0.05) as f32).collect();
            let shape = t.shape();
            m.params_mut().set(&name, Tensor::new(shape, data));
        }
    }
    let gamma = rng.range(0.1, 0.4) as f32;
    m.params_mut().set("gi.fa.gamma", Tensor::new([1, 1, 1, 1], vec![gamma]));
}
