//! Analytic FLOP counting for one forward pass.
//!
//! Conventions: a multiply-accumulate counts as 2 FLOPs (bias adds ignored);
//! an FFT of n points costs 5 n log2(n); softmax costs 4 per element;
//! bilinear resampling costs 8 per output element (4 MACs); elementwise
//! unary/binary ops and pooling cost 1 per element visited.

use super::ModelConfig;

#[derive(Clone, Debug)]
pub struct FlopReport {
    pub total: u64,
    pub blocks: Vec<(String, u64)>,
}

fn conv(ci_g: usize, co: usize, kh: usize, kw: usize, oh: usize, ow: usize) -> u64 {
    2 * (ci_g * kh * kw * co * oh * ow) as u64
}

fn fft(hw: usize) -> u64 {
    (5.0 * hw as f64 * (hw as f64).log2()).round() as u64
}

fn attention(heads: usize, dim: usize, tq: usize, tk: usize) -> u64 {
    let matmuls = 2 * 2 * (heads * tq * tk * dim) as u64; // scores + weighted sum
    let softmax = 4 * (heads * tq * tk) as u64;
    let scale = (heads * tq * dim) as u64;
    matmuls + softmax + scale
}

fn bilinear(out_elems: usize) -> u64 {
    8 * out_elems as u64
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

pub(crate) fn count(c: &ModelConfig, h: usize, w: usize) -> FlopReport {
    let mult = lcm(c.pool_ratio, c.cgm_pool);
    let (h, w) = (h.div_ceil(mult) * mult, w.div_ceil(mult) * mult);
    let hw = h * w;
    let a = c.feat_y / 2;
    let mut blocks: Vec<(String, u64)> = Vec::new();

    blocks.push(("colorspace".into(), conv(3, 3, 1, 1, h, w) * 2));

    blocks.push(("y_embed".into(), conv(1, c.feat_y, 3, 3, h, w)));

    // DSGLA at 1/pool_ratio resolution.
    let (dh, dw) = (h / c.pool_ratio, w / c.pool_ratio);
    let dt = dh * dw;
    let mut dsgla = (c.feat_y * hw) as u64; // max_pool visit
    dsgla += conv(a, 3 * a, 1, 1, dh, dw); // qkv
    dsgla += conv(1, 3 * a, 3, 3, dh, dw); // depthwise dilated
    dsgla += attention(c.heads, c.head_dim, dt, dt);
    dsgla += conv(a, a, 1, 1, dh, dw); // proj
    dsgla += conv(a, a / 2, 1, 1, dh, dw); // gga base
    dsgla += conv(1, a / 2, 3, 3, dh, dw); // gga ghost (depthwise)
    let (gh, gw) = (dh.div_ceil(c.gga_pool), dw.div_ceil(c.gga_pool));
    dsgla += (a * dh * dw) as u64; // gate avg_pool visit
    dsgla += conv(a / c.gga_groups, a, 1, 5, gh, gw);
    dsgla += conv(a / c.gga_groups, a, 5, 1, gh, gw);
    dsgla += bilinear(a * gh * c.gga_pool * gw * c.gga_pool);
    dsgla += 2 * (a * dt) as u64; // sigmoid + gate multiply
    dsgla += conv(c.feat_y, c.feat_y, 1, 1, dh, dw); // fuse
    dsgla += bilinear(c.feat_y * hw);
    dsgla += (c.feat_y * hw) as u64; // residual add
    blocks.push(("dsgla".into(), dsgla));

    blocks.push(("y_head".into(), conv(c.feat_y, 1, 3, 3, h, w) + hw as u64));

    blocks.push(("uv_embed".into(), conv(2, c.feat_uv, 3, 3, h, w)));

    // LAFA at full resolution.
    let cu = c.feat_uv;
    let mut lafa = conv(c.feat_y, cu, 1, 1, h, w); // luma projection
    lafa += (cu * hw) as u64; // sum with chroma features
    lafa += 2 * cu as u64 * fft(hw); // forward + inverse transforms
    lafa += (2 * cu * hw) as u64; // pooled statistics visit
    lafa += conv(2 * cu, c.fca_hidden, 1, 1, 1, 1) + conv(c.fca_hidden, cu, 1, 1, 1, 1);
    lafa += (c.fca_hidden + cu) as u64; // relu + sigmoid
    lafa += (3 * cu * hw) as u64; // masks + wrap
    lafa += conv(1, cu, 3, 3, h, w); // depthwise gate conv
    lafa += (3 * cu * hw) as u64; // two gate multiplies + residual add
    blocks.push(("lafa".into(), lafa));

    blocks.push(("uv_head".into(), conv(c.feat_uv, 2, 3, 3, h, w) + (2 * hw) as u64));

    // GI: cross-attention at 1/cgm_pool, high-frequency branches at full res.
    let aw = c.attention_width();
    let (qh, qw) = (h / c.cgm_pool, w / c.cgm_pool);
    let qt = qh * qw;
    let mut gi = ((c.feat_y + cu) * hw) as u64; // two avg_pool visits
    gi += conv(c.feat_y, aw, 1, 1, qh, qw); // q
    gi += conv(cu, 2 * aw, 1, 1, qh, qw); // kv
    gi += attention(c.heads, c.head_dim, qt, qt);
    gi += conv(aw, c.gi_width, 1, 1, qh, qw); // proj
    gi += bilinear(c.gi_width * hw);
    for ci in [c.feat_y, cu] {
        gi += conv(ci, c.hf_width, 1, 1, h, w); // hf proj
        for k in c.hf_kernels {
            gi += conv(1, c.hf_width, k, k, h, w); // depthwise scales
        }
        gi += conv(3 * c.hf_width, c.gi_width, 1, 1, h, w); // hf fuse
    }
    gi += (c.gi_width * hw) as u64; // hy * huv
    gi += (c.gi_width * hw) as u64; // mean_width visit
    gi += conv(c.gi_width, c.lsa_k, 1, 1, h, 1) + (c.lsa_k * h) as u64; // lsa + tanh
    gi += (2 * c.lsa_k * c.gi_width * hw) as u64; // strip multiply + accumulate
    gi += (2 * c.gi_width * hw) as u64; // local gate + global/local sum
    gi += conv(c.gi_width, c.gi_width, 1, 1, h, w); // fa conv1
    gi += conv(1, c.gi_width, 3, 3, h, w); // fa depthwise
    gi += conv(c.gi_width, c.gi_width, 1, 1, h, w); // fa conv2
    gi += (5 * c.gi_width * hw) as u64; // two gelus + contrast residual
    blocks.push(("gi".into(), gi));

    blocks.push(("gi_head".into(), conv(c.gi_width, 3, 3, 3, h, w) + (3 * hw) as u64));

    let total = blocks.iter().map(|(_, f)| f).sum();
    FlopReport { total, blocks }
}
