//! Binary model checkpoints.
//!
//! Layout (all integers little-endian):
//!   magic "YLIE" | version u32 | config block | tensor count u32
//!   per tensor: name len u32, name bytes, rank u32, dims u32 x rank, f32 payload
//!   crc32 u32 over every preceding byte
//! The config block stores the 16 architecture integers in declaration order,
//! then gamma_init f32, then seed u64. Files are written to a sibling .tmp
//! path and renamed into place so a crash never leaves a torn checkpoint.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::model::ModelConfig;
use crate::tensor::Tensor;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: [u8; 4] = *b"YLIE";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {found} (expected {CHECKPOINT_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("checkpoint corrupt: crc mismatch (stored {stored:08x}, computed {computed:08x})")]
    CrcMismatch { stored: u32, computed: u32 },
    #[error("checkpoint truncated while reading {what}")]
    Truncated { what: &'static str },
    #[error("tensor {name} has non-finite values")]
    NonFinitePayload { name: String },
    #[error("tensor {name}: expected shape {expected:?}, found {found:?}")]
    ShapeMismatch { name: String, expected: [usize; 4], found: [usize; 4] },
    #[error("checkpoint is missing tensor {name}")]
    MissingTensor { name: String },
    #[error("checkpoint contains unknown tensor {name}")]
    UnknownTensor { name: String },
    #[error("config field {field} does not match the requested model")]
    ConfigMismatch { field: &'static str },
}

pub struct Checkpoint {
    pub config: ModelConfig,
    pub tensors: Vec<(String, Tensor)>,
}

// ── CRC32 (IEEE, reflected) ──────────────────────────────────────────────

const fn crc_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = i as u32;
        let mut k = 0;
        while k < 8 {
            c = if c & 1 != 0 { 0xEDB8_8320 ^ (c >> 1) } else { c >> 1 };
            k += 1;
        }
        table[i] = c;
        i += 1;
    }
    table
}

static CRC_TABLE: [u32; 256] = crc_table();

pub(crate) fn crc32(bytes: &[u8]) -> u32 {
    let mut c = 0xFFFF_FFFFu32;
    for &b in bytes {
        c = CRC_TABLE[((c ^ b as u32) & 0xFF) as usize] ^ (c >> 8);
    }
    c ^ 0xFFFF_FFFF
}

// ── Writing ──────────────────────────────────────────────────────────────

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_usize(out: &mut Vec<u8>, v: usize) {
    assert!(v <= u32::MAX as usize, "checkpoint field exceeds u32");
    push_u32(out, v as u32);
}

fn encode_config(out: &mut Vec<u8>, c: &ModelConfig) {
    for v in [
        c.feat_y, c.feat_uv, c.heads, c.head_dim, c.pool_ratio, c.gga_pool, c.gga_groups,
        c.ddsa_dilation, c.lsa_k, c.hf_kernels[0], c.hf_kernels[1], c.hf_kernels[2],
        c.hf_width, c.gi_width, c.cgm_pool, c.fca_hidden,
    ] {
        push_usize(out, v);
    }
    out.extend_from_slice(&c.gamma_init.to_le_bytes());
    out.extend_from_slice(&c.seed.to_le_bytes());
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), CheckpointError> {
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    push_u32(&mut out, CHECKPOINT_VERSION);
    encode_config(&mut out, &ckpt.config);
    push_usize(&mut out, ckpt.tensors.len());
    for (name, t) in &ckpt.tensors {
        push_usize(&mut out, name.len());
        out.extend_from_slice(name.as_bytes());
        let shape = t.shape();
        push_u32(&mut out, 4);
        for d in shape {
            push_usize(&mut out, d);
        }
        for &v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32(&out);
    push_u32(&mut out, crc);

    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &out)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

// ── Reading ──────────────────────────────────────────────────────────────

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).ok_or(CheckpointError::Truncated { what })?;
        if end > self.bytes.len() {
            return Err(CheckpointError::Truncated { what });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn usize(&mut self, what: &'static str) -> Result<usize, CheckpointError> {
        Ok(self.u32(what)? as usize)
    }

    fn f32(&mut self, what: &'static str) -> Result<f32, CheckpointError> {
        Ok(f32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &'static str) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

fn decode_config(r: &mut Reader) -> Result<ModelConfig, CheckpointError> {
    let mut ints = [0usize; 16];
    for slot in &mut ints {
        *slot = r.usize("config")?;
    }
    let gamma_init = r.f32("config")?;
    let seed = r.u64("config")?;
    Ok(ModelConfig {
        feat_y: ints[0],
        feat_uv: ints[1],
        heads: ints[2],
        head_dim: ints[3],
        pool_ratio: ints[4],
        gga_pool: ints[5],
        gga_groups: ints[6],
        ddsa_dilation: ints[7],
        lsa_k: ints[8],
        hf_kernels: [ints[9], ints[10], ints[11]],
        hf_width: ints[12],
        gi_width: ints[13],
        cgm_pool: ints[14],
        fca_hidden: ints[15],
        gamma_init,
        seed,
    })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let bytes = fs::read(path)?;
    if bytes.len() < MAGIC.len() + 8 || bytes[..4] != MAGIC {
        if bytes.len() >= 4 && bytes[..4] == MAGIC {
            return Err(CheckpointError::Truncated { what: "header" });
        }
        return Err(CheckpointError::BadMagic);
    }
    let body = &bytes[..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    let computed = crc32(body);

    let mut r = Reader { bytes: body, pos: 4 };
    let version = r.u32("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::UnsupportedVersion { found: version });
    }
    if stored != computed {
        return Err(CheckpointError::CrcMismatch { stored, computed });
    }
    let config = decode_config(&mut r)?;
    let count = r.usize("tensor count")?;
    let mut tensors = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = r.usize("tensor name length")?;
        let name = String::from_utf8(r.take(name_len, "tensor name")?.to_vec())
            .map_err(|_| CheckpointError::Truncated { what: "tensor name (invalid utf-8)" })?;
        let rank = r.usize("tensor rank")?;
        if rank != 4 {
            return Err(CheckpointError::Truncated { what: "tensor rank (must be 4)" });
        }
        let mut shape = [0usize; 4];
        for d in &mut shape {
            *d = r.usize("tensor dims")?;
        }
        let numel: usize = shape.iter().product();
        let payload = r.take(numel * 4, "tensor payload")?;
        let mut data = Vec::with_capacity(numel);
        for chunk in payload.chunks_exact(4) {
            data.push(f32::from_le_bytes(chunk.try_into().unwrap()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(CheckpointError::NonFinitePayload { name });
        }
        tensors.push((name, Tensor::new(shape, data)));
    }
    Ok(Checkpoint { config, tensors })
}
