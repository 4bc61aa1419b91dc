//! Straight-line f64 reference of the full enhancement network.
//!
//! Written directly from the block recipes with plain loops and the `nn`/`fft`
//! reference primitives — no shared code with the engine. Parameter tensors
//! arrive as a name -> values map; shapes are implied by the config. The
//! engine's tests compare block-by-block and end-to-end against this.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use crate::{color, fft, nn};

pub type Params = BTreeMap<String, Vec<f64>>;

#[derive(Clone, Copy)]
pub struct Cfg {
    pub feat_y: usize,
    pub feat_uv: usize,
    pub heads: usize,
    pub head_dim: usize,
    pub pool_ratio: usize,
    pub gga_pool: usize,
    pub gga_groups: usize,
    pub ddsa_dilation: usize,
    pub lsa_k: usize,
    pub hf_kernels: [usize; 3],
    pub hf_width: usize,
    pub gi_width: usize,
    pub cgm_pool: usize,
    pub fca_hidden: usize,
}

pub struct Plane4 {
    pub data: Vec<f64>,
    pub n: usize,
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl Plane4 {
    pub fn new(n: usize, c: usize, h: usize, w: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * c * h * w);
        Plane4 { data, n, c, h, w }
    }
    fn dims(&self) -> (usize, usize, usize, usize) {
        (self.n, self.c, self.h, self.w)
    }
}

fn get<'a>(p: &'a Params, name: &str) -> &'a [f64] {
    p.get(name).unwrap_or_else(|| panic!("oracle params missing {name}"))
}

/// Convolution wrapper reading `<name>.w` / `<name>.b`.
fn conv(
    p: &Params,
    name: &str,
    x: &Plane4,
    co: usize,
    (kh, kw): (usize, usize),
    (pad_h, pad_w): (usize, usize),
    dilation: usize,
    groups: usize,
) -> Plane4 {
    let wt = get(p, &format!("{name}.w"));
    let b = get(p, &format!("{name}.b"));
    let (out, oh, ow) = nn::conv2d(
        &x.data,
        x.dims(),
        wt,
        (co, kh, kw),
        Some(b),
        1,
        (pad_h, pad_w),
        dilation,
        groups,
    );
    Plane4::new(x.n, co, oh, ow, out)
}

fn map(x: &Plane4, f: impl Fn(f64) -> f64) -> Plane4 {
    Plane4::new(x.n, x.c, x.h, x.w, x.data.iter().map(|&v| f(v)).collect())
}

fn zip(a: &Plane4, b: &Plane4, f: impl Fn(f64, f64) -> f64) -> Plane4 {
    assert_eq!(a.data.len(), b.data.len());
    Plane4::new(
        a.n,
        a.c,
        a.h,
        a.w,
        a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
    )
}

fn slice_channels(x: &Plane4, start: usize, len: usize) -> Plane4 {
    let mut out = Vec::with_capacity(x.n * len * x.h * x.w);
    for n in 0..x.n {
        for c in start..start + len {
            let base = (n * x.c + c) * x.h * x.w;
            out.extend_from_slice(&x.data[base..base + x.h * x.w]);
        }
    }
    Plane4::new(x.n, len, x.h, x.w, out)
}

fn concat_channels(parts: &[&Plane4]) -> Plane4 {
    let (n, h, w) = (parts[0].n, parts[0].h, parts[0].w);
    let c: usize = parts.iter().map(|p| p.c).sum();
    let mut out = Vec::with_capacity(n * c * h * w);
    for b in 0..n {
        for p in parts {
            let base = b * p.c * h * w;
            out.extend_from_slice(&p.data[base..base + p.c * h * w]);
        }
    }
    Plane4::new(n, c, h, w, out)
}

fn pad_replicate_to_multiple(x: &Plane4, k: usize) -> Plane4 {
    let hp = x.h.div_ceil(k) * k;
    let wp = x.w.div_ceil(k) * k;
    let mut out = vec![0.0; x.n * x.c * hp * wp];
    for p in 0..x.n * x.c {
        for y in 0..hp {
            for xo in 0..wp {
                let sy = y.min(x.h - 1);
                let sx = xo.min(x.w - 1);
                out[(p * hp + y) * wp + xo] = x.data[(p * x.h + sy) * x.w + sx];
            }
        }
    }
    Plane4::new(x.n, x.c, hp, wp, out)
}

fn pad_reflect_bottom_right(x: &Plane4, ph: usize, pw: usize) -> Plane4 {
    assert!(ph < x.h && pw < x.w, "reflect pad must be smaller than the plane");
    let (hp, wp) = (x.h + ph, x.w + pw);
    let mut out = vec![0.0; x.n * x.c * hp * wp];
    for p in 0..x.n * x.c {
        for y in 0..hp {
            for xo in 0..wp {
                let sy = if y < x.h { y } else { 2 * x.h - 2 - y };
                let sx = if xo < x.w { xo } else { 2 * x.w - 2 - xo };
                out[(p * hp + y) * wp + xo] = x.data[(p * x.h + sy) * x.w + sx];
            }
        }
    }
    Plane4::new(x.n, x.c, hp, wp, out)
}

fn crop(x: &Plane4, nh: usize, nw: usize) -> Plane4 {
    let mut out = vec![0.0; x.n * x.c * nh * nw];
    for p in 0..x.n * x.c {
        for y in 0..nh {
            for xo in 0..nw {
                out[(p * nh + y) * nw + xo] = x.data[(p * x.h + y) * x.w + xo];
            }
        }
    }
    Plane4::new(x.n, x.c, nh, nw, out)
}

fn upsample(x: &Plane4, f: usize) -> Plane4 {
    let out = nn::upsample_bilinear(&x.data, x.dims(), f);
    Plane4::new(x.n, x.c, x.h * f, x.w * f, out)
}

fn wrap_angle(v: f64) -> f64 {
    let mut r = v.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
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

/// Multi-head self/cross attention over spatial tokens, channels laid out as
/// head-major (c = head * head_dim + d). Plain per-token loops.
fn attention(q: &Plane4, k: &Plane4, v: &Plane4, heads: usize, head_dim: usize) -> Plane4 {
    let t = q.h * q.w;
    let tk = k.h * k.w;
    assert_eq!(q.c, heads * head_dim);
    let scale = 1.0 / (head_dim as f64).sqrt();
    let mut out = vec![0.0; q.n * q.c * t];
    for b in 0..q.n {
        for hd in 0..heads {
            // scores[t, tk] then row softmax then weighted sum of v rows
            let mut scores = vec![0.0; t * tk];
            for t1 in 0..t {
                for t2 in 0..tk {
                    let mut acc = 0.0;
                    for d in 0..head_dim {
                        let qc = (b * q.c + hd * head_dim + d) * t + t1;
                        let kc = (b * k.c + hd * head_dim + d) * tk + t2;
                        acc += q.data[qc] * k.data[kc];
                    }
                    scores[t1 * tk + t2] = acc * scale;
                }
            }
            let attn = nn::softmax_rows(&scores, tk);
            for t1 in 0..t {
                for d in 0..head_dim {
                    let mut acc = 0.0;
                    for t2 in 0..tk {
                        let vc = (b * v.c + hd * head_dim + d) * tk + t2;
                        acc += attn[t1 * tk + t2] * v.data[vc];
                    }
                    out[(b * q.c + hd * head_dim + d) * t + t1] = acc;
                }
            }
        }
    }
    Plane4::new(q.n, q.c, q.h, q.w, out)
}

/// Dilated-depthwise self attention over the global half.
pub fn ddsa(p: &Params, cfg: &Cfg, x: &Plane4) -> Plane4 {
    let a = cfg.feat_y / 2;
    let qkv = conv(p, "dsgla.ddsa.qkv", x, 3 * a, (1, 1), (0, 0), 1, 1);
    let d = cfg.ddsa_dilation;
    let qkv = conv(p, "dsgla.ddsa.dd", &qkv, 3 * a, (3, 3), (d, d), d, 3 * a);
    let q = slice_channels(&qkv, 0, a);
    let k = slice_channels(&qkv, a, a);
    let v = slice_channels(&qkv, 2 * a, a);
    let att = attention(&q, &k, &v, cfg.heads, cfg.head_dim);
    conv(p, "dsgla.ddsa.proj", &att, a, (1, 1), (0, 0), 1, 1)
}

/// Ghost-gated aggregation over the local half.
pub fn gga(p: &Params, cfg: &Cfg, x: &Plane4) -> Plane4 {
    let a = cfg.feat_y / 2;
    let base = conv(p, "dsgla.gga.base", x, a / 2, (1, 1), (0, 0), 1, 1);
    let ghost = conv(p, "dsgla.gga.ghost", &base, a / 2, (3, 3), (1, 1), 1, a / 2);
    let f_ghost = concat_channels(&[&base, &ghost]);

    let padded = pad_replicate_to_multiple(x, cfg.gga_pool);
    let pooled = nn::avg_pool(&padded.data, padded.dims(), cfg.gga_pool);
    let g = Plane4::new(x.n, x.c, padded.h / cfg.gga_pool, padded.w / cfg.gga_pool, pooled);
    let g = conv(p, "dsgla.gga.short1", &g, a, (1, 5), (0, 2), 1, cfg.gga_groups);
    let g = conv(p, "dsgla.gga.short2", &g, a, (5, 1), (2, 0), 1, cfg.gga_groups);
    let g = upsample(&g, cfg.gga_pool);
    let g = crop(&g, x.h, x.w);
    let m = map(&g, nn::sigmoid);
    zip(&f_ghost, &m, |a, b| a * b)
}

/// Downsample -> split -> DDSA || GGA -> fuse -> upsample -> residual.
pub fn dsgla(p: &Params, cfg: &Cfg, x: &Plane4) -> Plane4 {
    let a = cfg.feat_y / 2;
    let pooled = nn::max_pool(&x.data, x.dims(), cfg.pool_ratio);
    let pl = Plane4::new(x.n, x.c, x.h / cfg.pool_ratio, x.w / cfg.pool_ratio, pooled);
    let gl = slice_channels(&pl, 0, a);
    let lo = slice_channels(&pl, a, a);
    let att = ddsa(p, cfg, &gl);
    let loc = gga(p, cfg, &lo);
    let fused = concat_channels(&[&att, &loc]);
    let fused = conv(p, "dsgla.fuse", &fused, cfg.feat_y, (1, 1), (0, 0), 1, 1);
    let up = upsample(&fused, cfg.pool_ratio);
    zip(x, &up, |a, b| a + b)
}

/// Frequency-domain chroma refinement guided by luma features.
pub fn lafa(p: &Params, cfg: &Cfg, uv: &Plane4, y: &Plane4) -> Plane4 {
    let c = cfg.feat_uv;
    let proj = conv(p, "lafa.proj", y, c, (1, 1), (0, 0), 1, 1);
    let s = zip(uv, &proj, |a, b| a + b);
    let (h, w) = (s.h, s.w);

    // Per-channel polar spectra.
    let mut amps: Vec<Vec<f64>> = Vec::with_capacity(s.n * c);
    let mut phs: Vec<Vec<f64>> = Vec::with_capacity(s.n * c);
    for pch in 0..s.n * c {
        let plane = &s.data[pch * h * w..(pch + 1) * h * w];
        let (a, ph) = fft::dft2_polar(plane, h, w);
        amps.push(a);
        phs.push(ph);
    }

    // Channel weights from pooled amplitude+phase (amplitude block first).
    let amp_mask = get(p, "lafa.amp_mask");
    let ph_mask = get(p, "lafa.phase_mask");
    let fc1w = get(p, "lafa.fc1.w");
    let fc1b = get(p, "lafa.fc1.b");
    let fc2w = get(p, "lafa.fc2.w");
    let fc2b = get(p, "lafa.fc2.b");
    let mut out = vec![0.0; s.n * c * h * w];
    for b in 0..s.n {
        let mut feat = vec![0.0; 2 * c];
        for ch in 0..c {
            feat[ch] = amps[b * c + ch].iter().sum::<f64>() / (h * w) as f64;
            feat[c + ch] = phs[b * c + ch].iter().sum::<f64>() / (h * w) as f64;
        }
        let mut hid = vec![0.0; cfg.fca_hidden];
        for i in 0..cfg.fca_hidden {
            let mut acc = fc1b[i];
            for j in 0..2 * c {
                acc += fc1w[i * 2 * c + j] * feat[j];
            }
            hid[i] = nn::relu(acc);
        }
        let mut wgt = vec![0.0; c];
        for i in 0..c {
            let mut acc = fc2b[i];
            for j in 0..cfg.fca_hidden {
                acc += fc2w[i * cfg.fca_hidden + j] * hid[j];
            }
            wgt[i] = nn::sigmoid(acc);
        }
        for ch in 0..c {
            let amp2: Vec<f64> = amps[b * c + ch].iter().map(|&a| a * amp_mask[ch]).collect();
            let ph2: Vec<f64> = phs[b * c + ch]
                .iter()
                .map(|&v| wrap_angle(v * ph_mask[ch]))
                .collect();
            let rec = fft::idft2_polar_real(&amp2, &ph2, h, w);
            for i in 0..h * w {
                out[((b * c + ch) * h * w) + i] = rec[i] * wgt[ch];
            }
        }
    }
    let x2 = Plane4::new(s.n, c, h, w, out);
    let d = conv(p, "lafa.dconv", &s, c, (3, 3), (1, 1), 1, c);
    let gated = zip(&x2, &d, |a, b| a * b);
    zip(&gated, &s, |a, b| a + b)
}

fn hf_branch(p: &Params, cfg: &Cfg, x: &Plane4, prefix: &str) -> Plane4 {
    let proj = conv(p, &format!("{prefix}.proj"), x, cfg.hf_width, (1, 1), (0, 0), 1, 1);
    let mut scales = Vec::new();
    for k in cfg.hf_kernels {
        let pad = k / 2;
        scales.push(conv(
            p,
            &format!("{prefix}.dw{k}"),
            &proj,
            cfg.hf_width,
            (k, k),
            (pad, pad),
            1,
            cfg.hf_width,
        ));
    }
    let refs: Vec<&Plane4> = scales.iter().collect();
    let cat = concat_channels(&refs);
    conv(p, &format!("{prefix}.fuse"), &cat, cfg.gi_width, (1, 1), (0, 0), 1, 1)
}

/// Rows of `x` sampled at vertical offset `d` (out[h] = x[h + d]), zero-fill.
fn shift_rows(x: &Plane4, d: isize) -> Plane4 {
    let mut out = vec![0.0; x.data.len()];
    for p in 0..x.n * x.c {
        for y in 0..x.h {
            let sy = y as isize + d;
            if sy < 0 || sy >= x.h as isize {
                continue;
            }
            for xo in 0..x.w {
                out[(p * x.h + y) * x.w + xo] = x.data[(p * x.h + sy as usize) * x.w + xo];
            }
        }
    }
    Plane4::new(x.n, x.c, x.h, x.w, out)
}

/// Global cross-attention + local high-frequency fusion.
pub fn gi(p: &Params, cfg: &Cfg, y: &Plane4, uv: &Plane4) -> Plane4 {
    let aw = cfg.heads * cfg.head_dim;

    // Global branch at reduced resolution.
    let yd = {
        let d = nn::avg_pool(&y.data, y.dims(), cfg.cgm_pool);
        Plane4::new(y.n, y.c, y.h / cfg.cgm_pool, y.w / cfg.cgm_pool, d)
    };
    let ud = {
        let d = nn::avg_pool(&uv.data, uv.dims(), cfg.cgm_pool);
        Plane4::new(uv.n, uv.c, uv.h / cfg.cgm_pool, uv.w / cfg.cgm_pool, d)
    };
    let q = conv(p, "gi.cgm.q", &yd, aw, (1, 1), (0, 0), 1, 1);
    let kv = conv(p, "gi.cgm.kv", &ud, 2 * aw, (1, 1), (0, 0), 1, 1);
    let k = slice_channels(&kv, 0, aw);
    let v = slice_channels(&kv, aw, aw);
    let att = attention(&q, &k, &v, cfg.heads, cfg.head_dim);
    let att = conv(p, "gi.cgm.proj", &att, cfg.gi_width, (1, 1), (0, 0), 1, 1);
    let f_gl = upsample(&att, cfg.cgm_pool);

    // Local branch: multi-scale high-frequency extraction + strip attention.
    let hy = hf_branch(p, cfg, y, "gi.hf_y");
    let huv = hf_branch(p, cfg, uv, "gi.hf_uv");
    let f = zip(&hy, &huv, |a, b| a * b);
    let pooled = Plane4::new(f.n, f.c, f.h, 1, nn::mean_width(&f.data, f.dims()));
    let wrow = conv(p, "gi.lsa", &pooled, cfg.lsa_k, (1, 1), (0, 0), 1, 1);
    let wrow = map(&wrow, f64::tanh);
    let half = (cfg.lsa_k / 2) as isize;
    let mut strip_sum = Plane4::new(f.n, f.c, f.h, f.w, vec![0.0; f.data.len()]);
    for (i, off) in (-half..=half).enumerate() {
        let shifted = shift_rows(&huv, off);
        for b in 0..f.n {
            for c in 0..f.c {
                for yy in 0..f.h {
                    let wv = wrow.data[(b * cfg.lsa_k + i) * f.h + yy];
                    for xo in 0..f.w {
                        let idx = ((b * f.c + c) * f.h + yy) * f.w + xo;
                        strip_sum.data[idx] += wv * shifted.data[idx];
                    }
                }
            }
        }
    }
    let f_lh = zip(&huv, &strip_sum, |a, b| a * b);
    let fyuv = zip(&f_gl, &f_lh, |a, b| a + b);

    // Feed-forward assembly with the learnable residual contrast term.
    let t = conv(p, "gi.fa.conv1", &fyuv, cfg.gi_width, (1, 1), (0, 0), 1, 1);
    let t = conv(p, "gi.fa.dconv", &t, cfg.gi_width, (3, 3), (1, 1), 1, cfg.gi_width);
    let fbar = map(&t, nn::gelu);
    let inner = conv(p, "gi.fa.conv2", &fbar, cfg.gi_width, (1, 1), (0, 0), 1, 1);
    let inner = map(&inner, nn::gelu);
    let gamma = get(p, "gi.fa.gamma")[0];
    let mut out = fbar.data.clone();
    for i in 0..out.len() {
        out[i] = fbar.data[i] + gamma * (fbar.data[i] - inner.data[i]);
    }
    Plane4::new(fbar.n, fbar.c, fbar.h, fbar.w, out)
}

/// Full pipeline on one RGB image (1, 3, H, W). Output is unclamped RGB.
pub fn pipeline(p: &Params, cfg: &Cfg, rgb: &Plane4) -> Plane4 {
    assert!(rgb.h >= 16 && rgb.w >= 16);
    let m = color::yuv_from_rgb_matrix();
    let hw = rgb.h * rgb.w;
    let mut yuv = vec![0.0; 3 * hw];
    for i in 0..hw {
        let px = [rgb.data[i], rgb.data[hw + i], rgb.data[2 * hw + i]];
        for ch in 0..3 {
            yuv[ch * hw + i] = m[ch][0] * px[0] + m[ch][1] * px[1] + m[ch][2] * px[2];
        }
    }
    let yuv = Plane4::new(1, 3, rgb.h, rgb.w, yuv);
    let mult = lcm(cfg.pool_ratio, cfg.cgm_pool);
    let ph = rgb.h.div_ceil(mult) * mult - rgb.h;
    let pw = rgb.w.div_ceil(mult) * mult - rgb.w;
    let yuv = pad_reflect_bottom_right(&yuv, ph, pw);

    let y = slice_channels(&yuv, 0, 1);
    let uv = slice_channels(&yuv, 1, 2);

    let yf0 = conv(p, "y_embed", &y, cfg.feat_y, (3, 3), (1, 1), 1, 1);
    let yf = dsgla(p, cfg, &yf0);
    let y_head = conv(p, "y_head", &yf, 1, (3, 3), (1, 1), 1, 1);
    let y_enh = zip(&y, &y_head, |a, b| a + b);

    let uf0 = conv(p, "uv_embed", &uv, cfg.feat_uv, (3, 3), (1, 1), 1, 1);
    let uf = lafa(p, cfg, &uf0, &yf);
    let uv_head = conv(p, "uv_head", &uf, 2, (3, 3), (1, 1), 1, 1);
    let uv_enh = zip(&uv, &uv_head, |a, b| a + b);

    let o = gi(p, cfg, &yf, &uf);
    let correction = conv(p, "gi_head", &o, 3, (3, 3), (1, 1), 1, 1);
    let merged = concat_channels(&[&y_enh, &uv_enh]);
    let yuv_out = zip(&merged, &correction, |a, b| a + b);

    let inv = color::inverse3(m);
    let hw2 = yuv_out.h * yuv_out.w;
    let mut rgb_out = vec![0.0; 3 * hw2];
    for i in 0..hw2 {
        let px = [yuv_out.data[i], yuv_out.data[hw2 + i], yuv_out.data[2 * hw2 + i]];
        for ch in 0..3 {
            rgb_out[ch * hw2 + i] = inv[ch][0] * px[0] + inv[ch][1] * px[1] + inv[ch][2] * px[2];
        }
    }
    let out = Plane4::new(1, 3, yuv_out.h, yuv_out.w, rgb_out);
    crop(&out, rgb.h, rgb.w)
}
