//! Parameter table and seeded initialization.
//!
//! The table order is the contract: checkpoints store tensors in this order
//! and initialization draws random values in this order, so a given seed
//! always produces the same parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ModelConfig;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug)]
pub(crate) enum Init {
    /// Uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)).
    FanIn(usize),
    Zero,
    One,
    Const(f32),
}

pub(crate) struct LayerSpec {
    pub name: String,
    pub shape: [usize; 4],
    pub init: Init,
}

fn conv(table: &mut Vec<LayerSpec>, name: &str, co: usize, ci_g: usize, kh: usize, kw: usize) {
    table.push(LayerSpec {
        name: format!("{name}.w"),
        shape: [co, ci_g, kh, kw],
        init: Init::FanIn(ci_g * kh * kw),
    });
    table.push(LayerSpec { name: format!("{name}.b"), shape: [1, co, 1, 1], init: Init::Zero });
}

/// Output head: zero weight and bias, so the whole network starts as the
/// identity mapping and learns residual corrections.
fn zero_conv(table: &mut Vec<LayerSpec>, name: &str, co: usize, ci: usize, k: usize) {
    table.push(LayerSpec { name: format!("{name}.w"), shape: [co, ci, k, k], init: Init::Zero });
    table.push(LayerSpec { name: format!("{name}.b"), shape: [1, co, 1, 1], init: Init::Zero });
}

pub(crate) fn layer_table(c: &ModelConfig) -> Vec<LayerSpec> {
    let a = c.feat_y / 2; // attention / local width inside DSGLA
    let aw = c.heads * c.head_dim; // cross-attention width in GI
    let mut t = Vec::new();

    conv(&mut t, "y_embed", c.feat_y, 1, 3, 3);

    conv(&mut t, "dsgla.ddsa.qkv", 3 * a, a, 1, 1);
    conv(&mut t, "dsgla.ddsa.dd", 3 * a, 1, 3, 3); // depthwise, dilated
    conv(&mut t, "dsgla.ddsa.proj", a, a, 1, 1);
    conv(&mut t, "dsgla.gga.base", a / 2, a, 1, 1);
    conv(&mut t, "dsgla.gga.ghost", a / 2, 1, 3, 3); // depthwise
    conv(&mut t, "dsgla.gga.short1", a, a / c.gga_groups, 1, 5);
    conv(&mut t, "dsgla.gga.short2", a, a / c.gga_groups, 5, 1);
    conv(&mut t, "dsgla.fuse", c.feat_y, c.feat_y, 1, 1);

    zero_conv(&mut t, "y_head", 1, c.feat_y, 3);

    conv(&mut t, "uv_embed", c.feat_uv, 2, 3, 3);

    conv(&mut t, "lafa.proj", c.feat_uv, c.feat_y, 1, 1);
    conv(&mut t, "lafa.fc1", c.fca_hidden, 2 * c.feat_uv, 1, 1);
    conv(&mut t, "lafa.fc2", c.feat_uv, c.fca_hidden, 1, 1);
    t.push(LayerSpec { name: "lafa.amp_mask".into(), shape: [1, c.feat_uv, 1, 1], init: Init::One });
    t.push(LayerSpec {
        name: "lafa.phase_mask".into(),
        shape: [1, c.feat_uv, 1, 1],
        init: Init::One,
    });
    conv(&mut t, "lafa.dconv", c.feat_uv, 1, 3, 3); // depthwise

    zero_conv(&mut t, "uv_head", 2, c.feat_uv, 3);

    conv(&mut t, "gi.cgm.q", aw, c.feat_y, 1, 1);
    conv(&mut t, "gi.cgm.kv", 2 * aw, c.feat_uv, 1, 1);
    conv(&mut t, "gi.cgm.proj", c.gi_width, aw, 1, 1);
    for (prefix, ci) in [("gi.hf_y", c.feat_y), ("gi.hf_uv", c.feat_uv)] {
        conv(&mut t, &format!("{prefix}.proj"), c.hf_width, ci, 1, 1);
        for k in c.hf_kernels {
            conv(&mut t, &format!("{prefix}.dw{k}"), c.hf_width, 1, k, k); // depthwise
        }
        conv(&mut t, &format!("{prefix}.fuse"), c.gi_width, 3 * c.hf_width, 1, 1);
    }
    conv(&mut t, "gi.lsa", c.lsa_k, c.gi_width, 1, 1);
    conv(&mut t, "gi.fa.conv1", c.gi_width, c.gi_width, 1, 1);
    conv(&mut t, "gi.fa.dconv", c.gi_width, 1, 3, 3); // depthwise
    conv(&mut t, "gi.fa.conv2", c.gi_width, c.gi_width, 1, 1);
    t.push(LayerSpec {
        name: "gi.fa.gamma".into(),
        shape: [1, 1, 1, 1],
        init: Init::Const(c.gamma_init),
    });

    zero_conv(&mut t, "gi_head", 3, c.gi_width, 3);
    t
}

/// Materialize the table with seed-deterministic values. Only FanIn entries
/// consume randomness, in table order.
pub(crate) fn init_params(cfg: &ModelConfig) -> Vec<(String, Tensor)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    layer_table(cfg)
        .into_iter()
        .map(|spec| {
            let numel: usize = spec.shape.iter().product();
            let data = match spec.init {
                Init::FanIn(fan_in) => {
                    let bound = 1.0 / (fan_in as f64).sqrt();
                    (0..numel)
                        .map(|_| ((2.0 * rng.random::<f64>() - 1.0) * bound) as f32)
                        .collect()
                }
                Init::Zero => vec![0.0; numel],
                Init::One => vec![1.0; numel],
                Init::Const(v) => vec![v; numel],
            };
            (spec.name, Tensor::new(spec.shape, data))
        })
        .collect()
}

pub(crate) fn param_count(cfg: &ModelConfig) -> usize {
    layer_table(cfg).iter().map(|s| s.shape.iter().product::<usize>()).sum()
}
