//! The two-branch YUV enhancement network.
//!
//! Luma is refined by a downsampled global/local attention block (DSGLA);
//! chroma by a frequency-domain block with learned amplitude/phase masks and
//! channel weighting (LAFA); a guided-interaction stage (GI) cross-attends
//! luma and chroma features, fuses multi-scale high-frequency detail with a
//! row-strip attention, and emits a YUV correction added on top of the
//! per-plane residual outputs. All output heads start at zero, so a freshly
//! initialized model is exactly the identity on its input.

mod flops;
mod init;

pub use flops::FlopReport;

use std::collections::HashMap;

use thiserror::Error;

use crate::color::{rgb_to_yuv_tensor, yuv_to_rgb_tensor, ColorSpace, ImageBuffer};
use crate::io::{Checkpoint, CheckpointError};
use crate::spectral::{fft2_polar_packed, ifft2_polar_packed};
use crate::tensor::{
    add, avg_pool, concat_channels, conv2d, crop, gelu, global_avg_pool, matmul, max_pool,
    mean_width, mul, mul_scalar, pad_bottom_right, permute, relu, reshape, shift_rows, sigmoid,
    slice_channels, softmax_lastdim, sub, tanh, upsample_bilinear, wrap_angle, Conv2dSpec,
    PadMode, Tape, Tensor,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config: {reason}")]
    InvalidConfig { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    /// Luma feature width (split in half inside DSGLA).
    pub feat_y: usize,
    /// Chroma feature width.
    pub feat_uv: usize,
    pub heads: usize,
    pub head_dim: usize,
    /// DSGLA operates at 1/pool_ratio resolution.
    pub pool_ratio: usize,
    /// Pooling of the GGA gate path.
    pub gga_pool: usize,
    pub gga_groups: usize,
    pub ddsa_dilation: usize,
    /// Strip-attention window (odd number of row offsets).
    pub lsa_k: usize,
    pub hf_kernels: [usize; 3],
    pub hf_width: usize,
    pub gi_width: usize,
    /// GI cross-attention operates at 1/cgm_pool resolution.
    pub cgm_pool: usize,
    pub fca_hidden: usize,
    pub gamma_init: f32,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            feat_y: 64,
            feat_uv: 24,
            heads: 4,
            head_dim: 8,
            pool_ratio: 8,
            gga_pool: 4,
            gga_groups: 2,
            ddsa_dilation: 2,
            lsa_k: 7,
            hf_kernels: [3, 5, 7],
            hf_width: 8,
            gi_width: 16,
            cgm_pool: 8,
            fca_hidden: 32,
            gamma_init: 0.0,
            seed: 0,
        }
    }
}

impl ModelConfig {
    /// heads * head_dim: the token width of both attention blocks.
    pub fn attention_width(&self) -> usize {
        self.heads * self.head_dim
    }

    pub fn validate(&self) -> Result<(), String> {
        let a = self.feat_y / 2;
        if self.feat_y == 0 || self.feat_y % 4 != 0 {
            return Err(format!("feat_y must be a positive multiple of 4, got {}", self.feat_y));
        }
        if self.feat_uv == 0 {
            return Err("feat_uv must be positive".into());
        }
        if self.heads == 0 || self.head_dim == 0 {
            return Err("heads and head_dim must be positive".into());
        }
        if self.attention_width() != a {
            return Err(format!(
                "heads*head_dim ({}) must equal feat_y/2 ({a})",
                self.attention_width()
            ));
        }
        if self.pool_ratio == 0 || self.gga_pool == 0 || self.cgm_pool == 0 {
            return Err("pool factors must be positive".into());
        }
        if self.gga_groups == 0 || a % self.gga_groups != 0 {
            return Err(format!(
                "gga_groups ({}) must divide feat_y/2 ({a})",
                self.gga_groups
            ));
        }
        if self.ddsa_dilation == 0 {
            return Err("ddsa_dilation must be positive".into());
        }
        if self.lsa_k % 2 == 0 || self.lsa_k == 0 {
            return Err(format!("lsa_k must be odd, got {}", self.lsa_k));
        }
        for k in self.hf_kernels {
            if k % 2 == 0 || k == 0 {
                return Err(format!("hf_kernels must be odd, got {k}"));
            }
        }
        if self.hf_width == 0 || self.gi_width == 0 || self.fca_hidden == 0 {
            return Err("hf_width, gi_width, fca_hidden must be positive".into());
        }
        Ok(())
    }
}

/// Named parameter tensors in fixed table order.
pub struct ParamSet {
    order: Vec<String>,
    map: HashMap<String, Tensor>,
}

impl ParamSet {
    pub(crate) fn from_pairs(pairs: Vec<(String, Tensor)>) -> ParamSet {
        let order: Vec<String> = pairs.iter().map(|(n, _)| n.clone()).collect();
        let map = pairs.into_iter().collect();
        ParamSet { order, map }
    }

    pub fn get(&self, name: &str) -> &Tensor {
        self.map.get(name).unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    /// Replace a parameter's values (shape must match).
    pub fn set(&mut self, name: &str, t: Tensor) {
        let old = self.map.get_mut(name).unwrap_or_else(|| panic!("unknown parameter {name}"));
        assert_eq!(old.shape(), t.shape(), "parameter {name} shape changed");
        *old = t;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.order.iter().map(|n| (n.as_str(), &self.map[n]))
    }

    pub fn names(&self) -> &[String] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// A parallel set whose tensors are watched leaves on `tape`.
    pub fn watched(&self, tape: &Tape) -> ParamSet {
        ParamSet::from_pairs(
            self.order.iter().map(|n| (n.clone(), tape.watch(&self.map[n]))).collect(),
        )
    }
}

pub struct Model {
    pub config: ModelConfig,
    params: ParamSet,
}

impl Model {
    /// Fresh model with seed-deterministic initialization.
    pub fn new(config: ModelConfig) -> Result<Model, ModelError> {
        config.validate().map_err(|reason| ModelError::InvalidConfig { reason })?;
        let params = ParamSet::from_pairs(init::init_params(&config));
        Ok(Model { config, params })
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        init::param_count(&self.config)
    }

    /// Unclamped RGB -> RGB forward pass at the input resolution.
    pub fn forward(&self, rgb: &Tensor) -> Tensor {
        forward_params(&self.config, &self.params, rgb)
    }

    /// Forward pass that also returns named intermediate features.
    pub fn forward_traced(&self, rgb: &Tensor) -> (Tensor, Vec<(String, Tensor)>) {
        let mut trace = Vec::new();
        let out = forward_inner(&self.config, &self.params, rgb, Some(&mut trace));
        (out, trace)
    }

    /// Enhance one image: forward pass plus final [0, 1] clamp.
    pub fn enhance(&self, img: &ImageBuffer) -> ImageBuffer {
        assert_eq!(img.space, ColorSpace::Rgb, "enhance needs an RGB image, got {:?}", img.space);
        let out = self.forward(&img.to_tensor());
        ImageBuffer::from_tensor(&out.clamp01(), ColorSpace::Rgb)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config: self.config.clone(),
            tensors: self.params.iter().map(|(n, t)| (n.to_string(), t.clone())).collect(),
        }
    }

    /// Validate a loaded checkpoint against its own config's layer table.
    pub fn from_checkpoint(ckpt: Checkpoint) -> Result<Model, CheckpointError> {
        ckpt.config
            .validate()
            .map_err(|_| CheckpointError::ConfigMismatch { field: "architecture" })?;
        let mut found: HashMap<String, Tensor> = ckpt.tensors.into_iter().collect();
        let mut pairs = Vec::new();
        for spec in init::layer_table(&ckpt.config) {
            let t = found
                .remove(&spec.name)
                .ok_or_else(|| CheckpointError::MissingTensor { name: spec.name.clone() })?;
            if t.shape() != spec.shape {
                return Err(CheckpointError::ShapeMismatch {
                    name: spec.name,
                    expected: spec.shape,
                    found: t.shape(),
                });
            }
            pairs.push((spec.name, t));
        }
        if let Some(name) = found.into_keys().next() {
            return Err(CheckpointError::UnknownTensor { name });
        }
        Ok(Model { config: ckpt.config, params: ParamSet::from_pairs(pairs) })
    }

    pub fn flops(&self, h: usize, w: usize) -> FlopReport {
        flops::count(&self.config, h, w)
    }
}

/// First config field that differs, if any (used when a checkpoint must match
/// explicitly requested settings).
pub fn config_mismatch(a: &ModelConfig, b: &ModelConfig) -> Option<&'static str> {
    if a.feat_y != b.feat_y {
        return Some("feat_y");
    }
    if a.feat_uv != b.feat_uv {
        return Some("feat_uv");
    }
    if a.heads != b.heads {
        return Some("heads");
    }
    if a.head_dim != b.head_dim {
        return Some("head_dim");
    }
    if a.pool_ratio != b.pool_ratio {
        return Some("pool_ratio");
    }
    if a.gga_pool != b.gga_pool {
        return Some("gga_pool");
    }
    if a.gga_groups != b.gga_groups {
        return Some("gga_groups");
    }
    if a.ddsa_dilation != b.ddsa_dilation {
        return Some("ddsa_dilation");
    }
    if a.lsa_k != b.lsa_k {
        return Some("lsa_k");
    }
    if a.hf_kernels != b.hf_kernels {
        return Some("hf_kernels");
    }
    if a.hf_width != b.hf_width {
        return Some("hf_width");
    }
    if a.gi_width != b.gi_width {
        return Some("gi_width");
    }
    if a.cgm_pool != b.cgm_pool {
        return Some("cgm_pool");
    }
    if a.fca_hidden != b.fca_hidden {
        return Some("fca_hidden");
    }
    None
}

// ── Forward graph ────────────────────────────────────────────────────────

fn conv(p: &ParamSet, name: &str, x: &Tensor, spec: Conv2dSpec) -> Tensor {
    conv2d(x, p.get(&format!("{name}.w")), Some(p.get(&format!("{name}.b"))), spec)
}

fn conv1x1(p: &ParamSet, name: &str, x: &Tensor) -> Tensor {
    conv(p, name, x, Conv2dSpec::default())
}

fn conv3x3(p: &ParamSet, name: &str, x: &Tensor) -> Tensor {
    conv(p, name, x, Conv2dSpec { pad: (1, 1), ..Conv2dSpec::default() })
}

fn dwconv(p: &ParamSet, name: &str, x: &Tensor, k: usize, dilation: usize) -> Tensor {
    let pad = dilation * (k / 2);
    conv(
        p,
        name,
        x,
        Conv2dSpec { pad: (pad, pad), dilation, groups: x.shape()[1], ..Conv2dSpec::default() },
    )
}

/// Multi-head attention over spatial tokens; q/k/v are (n, heads*dim, h, w)
/// feature maps with head-major channel layout.
fn attention(q: &Tensor, k: &Tensor, v: &Tensor, heads: usize, dim: usize) -> Tensor {
    let [n, c, h, w] = q.shape();
    let t = h * w;
    let tk = k.shape()[2] * k.shape()[3];
    let q = permute(&reshape(q, [n, heads, dim, t]), [0, 1, 3, 2]); // (n, heads, t, d)
    let kk = reshape(k, [n, heads, dim, tk]); // (n, heads, d, tk)
    let vt = permute(&reshape(v, [n, heads, dim, tk]), [0, 1, 3, 2]); // (n, heads, tk, d)
    let scores = matmul(&mul_scalar(&q, 1.0 / (dim as f32).sqrt()), &kk); // (n, heads, t, tk)
    let attn = softmax_lastdim(&scores);
    let out = matmul(&attn, &vt); // (n, heads, t, d)
    reshape(&permute(&out, [0, 1, 3, 2]), [n, c, h, w])
}

/// Dilated-depthwise self-attention over the global half of the luma features.
pub fn ddsa(cfg: &ModelConfig, p: &ParamSet, x: &Tensor) -> Tensor {
    let a = cfg.feat_y / 2;
    let qkv = conv1x1(p, "dsgla.ddsa.qkv", x);
    let qkv = dwconv(p, "dsgla.ddsa.dd", &qkv, 3, cfg.ddsa_dilation);
    let q = slice_channels(&qkv, 0, a);
    let k = slice_channels(&qkv, a, a);
    let v = slice_channels(&qkv, 2 * a, a);
    let att = attention(&q, &k, &v, cfg.heads, cfg.head_dim);
    conv1x1(p, "dsgla.ddsa.proj", &att)
}

/// Ghost-gated aggregation over the local half.
pub fn gga(cfg: &ModelConfig, p: &ParamSet, x: &Tensor) -> Tensor {
    let [_, _, h, w] = x.shape();
    let base = conv1x1(p, "dsgla.gga.base", x);
    let ghost = dwconv(p, "dsgla.gga.ghost", &base, 3, 1);
    let f_ghost = concat_channels(&[&base, &ghost]);

    // Gate: pooled strip convolutions, resampled back and squashed.
    let k = cfg.gga_pool;
    let (hp, wp) = (h.div_ceil(k) * k, w.div_ceil(k) * k);
    let g = pad_bottom_right(x, hp - h, wp - w, PadMode::Replicate);
    let g = avg_pool(&g, k);
    let g = conv(
        p,
        "dsgla.gga.short1",
        &g,
        Conv2dSpec { pad: (0, 2), groups: cfg.gga_groups, ..Conv2dSpec::default() },
    );
    let g = conv(
        p,
        "dsgla.gga.short2",
        &g,
        Conv2dSpec { pad: (2, 0), groups: cfg.gga_groups, ..Conv2dSpec::default() },
    );
    let g = crop(&upsample_bilinear(&g, k), h, w);
    mul(&f_ghost, &sigmoid(&g))
}

/// Downsample -> split -> DDSA ‖ GGA -> fuse -> upsample -> residual.
pub fn dsgla_forward(cfg: &ModelConfig, p: &ParamSet, x: &Tensor) -> Tensor {
    let a = cfg.feat_y / 2;
    let pooled = max_pool(x, cfg.pool_ratio);
    let gl = slice_channels(&pooled, 0, a);
    let lo = slice_channels(&pooled, a, a);
    let fused = concat_channels(&[&ddsa(cfg, p, &gl), &gga(cfg, p, &lo)]);
    let fused = conv1x1(p, "dsgla.fuse", &fused);
    add(x, &upsample_bilinear(&fused, cfg.pool_ratio))
}

/// Frequency-domain chroma refinement guided by luma features.
pub fn lafa_forward(cfg: &ModelConfig, p: &ParamSet, uv: &Tensor, y: &Tensor) -> Tensor {
    let c = cfg.feat_uv;
    let s = add(uv, &conv1x1(p, "lafa.proj", y));
    let packed = fft2_polar_packed(&s);

    // Channel weights from pooled amplitude and phase statistics.
    let f = global_avg_pool(&packed);
    let wgt = sigmoid(&conv1x1(p, "lafa.fc2", &relu(&conv1x1(p, "lafa.fc1", &f))));

    let amp = mul(&slice_channels(&packed, 0, c), p.get("lafa.amp_mask"));
    let phase = wrap_angle(&mul(&slice_channels(&packed, c, c), p.get("lafa.phase_mask")));
    let rec = ifft2_polar_packed(&concat_channels(&[&amp, &phase]));

    let gated = mul(&mul(&rec, &wgt), &dwconv(p, "lafa.dconv", &s, 3, 1));
    add(&gated, &s)
}

fn hf_branch(cfg: &ModelConfig, p: &ParamSet, x: &Tensor, prefix: &str) -> Tensor {
    let proj = conv1x1(p, &format!("{prefix}.proj"), x);
    let scales: Vec<Tensor> = cfg
        .hf_kernels
        .iter()
        .map(|&k| dwconv(p, &format!("{prefix}.dw{k}"), &proj, k, 1))
        .collect();
    let refs: Vec<&Tensor> = scales.iter().collect();
    conv1x1(p, &format!("{prefix}.fuse"), &concat_channels(&refs))
}

/// Guided interaction: low-res cross-attention (global) + multi-scale
/// high-frequency fusion with row-strip attention (local), assembled by a
/// gated feed-forward with a learned contrast term.
pub fn gi_forward(cfg: &ModelConfig, p: &ParamSet, y: &Tensor, uv: &Tensor) -> (Tensor, Tensor, Tensor) {
    let aw = cfg.attention_width();

    let q = conv1x1(p, "gi.cgm.q", &avg_pool(y, cfg.cgm_pool));
    let kv = conv1x1(p, "gi.cgm.kv", &avg_pool(uv, cfg.cgm_pool));
    let k = slice_channels(&kv, 0, aw);
    let v = slice_channels(&kv, aw, aw);
    let att = attention(&q, &k, &v, cfg.heads, cfg.head_dim);
    let f_gl = upsample_bilinear(&conv1x1(p, "gi.cgm.proj", &att), cfg.cgm_pool);

    let hy = hf_branch(cfg, p, y, "gi.hf_y");
    let huv = hf_branch(cfg, p, uv, "gi.hf_uv");
    let f = mul(&hy, &huv);
    let wrow = tanh(&conv1x1(p, "gi.lsa", &mean_width(&f)));
    let half = (cfg.lsa_k / 2) as isize;
    let mut strip_sum: Option<Tensor> = None;
    for (i, off) in (-half..=half).enumerate() {
        let term = mul(&slice_channels(&wrow, i, 1), &shift_rows(&huv, off));
        strip_sum = Some(match strip_sum {
            Some(acc) => add(&acc, &term),
            None => term,
        });
    }
    let f_lh = mul(&huv, &strip_sum.expect("lsa_k >= 1"));
    let fyuv = add(&f_gl, &f_lh);

    let fbar = gelu(&dwconv(p, "gi.fa.dconv", &conv1x1(p, "gi.fa.conv1", &fyuv), 3, 1));
    let inner = gelu(&conv1x1(p, "gi.fa.conv2", &fbar));
    let out = add(&fbar, &mul(&sub(&fbar, &inner), p.get("gi.fa.gamma")));
    (out, f_gl, f_lh)
}

fn lcm(a: usize, b: usize) -> usize {
    let gcd = |mut x: usize, mut y: usize| {
        while y != 0 {
            (x, y) = (y, x % y);
        }
        x
    };
    a / gcd(a, b) * b
}

/// Full unclamped forward pass with externally supplied parameters (used by
/// the trainer, which watches them on a tape first).
pub fn forward_params(cfg: &ModelConfig, p: &ParamSet, rgb: &Tensor) -> Tensor {
    forward_inner(cfg, p, rgb, None)
}

fn forward_inner(
    cfg: &ModelConfig,
    p: &ParamSet,
    rgb: &Tensor,
    mut trace: Option<&mut Vec<(String, Tensor)>>,
) -> Tensor {
    let [_, c, h, w] = rgb.shape();
    assert_eq!(c, 3, "pipeline input must be RGB");
    assert!(h >= 16 && w >= 16, "pipeline needs at least 16x16 input, got {h}x{w}");
    let mut grab = |name: &str, t: &Tensor| {
        if let Some(tr) = trace.as_deref_mut() {
            tr.push((name.to_string(), t.clone()));
        }
    };

    let yuv = rgb_to_yuv_tensor(rgb);
    let mult = lcm(cfg.pool_ratio, cfg.cgm_pool);
    let (hp, wp) = (h.div_ceil(mult) * mult, w.div_ceil(mult) * mult);
    let yuv = pad_bottom_right(&yuv, hp - h, wp - w, PadMode::Reflect);

    let y = slice_channels(&yuv, 0, 1);
    let uv = slice_channels(&yuv, 1, 2);

    let yf0 = conv3x3(p, "y_embed", &y);
    grab("y_embed", &yf0);
    let yf = dsgla_forward(cfg, p, &yf0);
    grab("dsgla", &yf);
    let y_enh = add(&y, &conv3x3(p, "y_head", &yf));

    let uf0 = conv3x3(p, "uv_embed", &uv);
    grab("uv_embed", &uf0);
    let uf = lafa_forward(cfg, p, &uf0, &yf);
    grab("lafa", &uf);
    let uv_enh = add(&uv, &conv3x3(p, "uv_head", &uf));

    let (o, f_gl, f_lh) = gi_forward(cfg, p, &yf, &uf);
    grab("gi_global", &f_gl);
    grab("gi_local", &f_lh);
    grab("gi", &o);
    let correction = conv3x3(p, "gi_head", &o);
    grab("correction", &correction);

    let yuv_out = add(&concat_channels(&[&y_enh, &uv_enh]), &correction);
    crop(&yuv_to_rgb_tensor(&yuv_out), h, w)
}
