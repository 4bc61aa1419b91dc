//! Flag plumbing and small helpers shared by every subcommand.

use std::fs;
use std::path::Path;

use ylie_core::Model;

/// Process exit codes, identical across subcommands.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    /// Unreadable or malformed inputs, failed writes.
    pub const DATA: i32 = 2;
    /// Non-finite losses or gradients.
    pub const NUMERIC: i32 = 3;
}

/// --threads wins, YLIE_THREADS is the fallback, and the default is 1 so that
/// results are reproducible unless parallelism is asked for.
pub fn resolve_threads(flag: Option<usize>) -> Result<usize, String> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("YLIE_THREADS") {
            Ok(s) => s
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("YLIE_THREADS must be a positive integer, got {s:?}"))?,
            Err(_) => 1,
        },
    };
    if n == 0 {
        return Err("thread count must be at least 1".into());
    }
    Ok(n)
}

/// Install the global rayon pool sized to `threads`. Each process dispatches
/// exactly one subcommand, so a single installation suffices.
pub fn install_thread_pool(threads: usize) {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
}

/// Parse "HxW" into (height, width), enforcing the pipeline's 16x16 floor.
pub fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (h, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("size must look like 256x256, got {s:?}"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad height in {s:?}"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad width in {s:?}"))?;
    if h < 16 || w < 16 {
        return Err(format!("the pipeline needs at least 16x16 input, got {h}x{w}"));
    }
    Ok((h, w))
}

/// Write text through a temp file plus rename so readers never see a prefix.
pub fn atomic_write_text(path: &Path, text: &str) -> std::io::Result<()> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("out");
    let tmp = path.with_extension(format!("{ext}.tmp"));
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)
}

pub fn load_model(path: &Path) -> Result<Model, String> {
    let ckpt =
        ylie_core::io::load_checkpoint(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Model::from_checkpoint(ckpt).map_err(|e| format!("{}: {e}", path.display()))
}

/// Deterministic pseudo-random values in [0, 1) (SplitMix64).
pub fn seeded_values(n: usize, seed: u64) -> Vec<f32> {
    let mut state = seed;
    (0..n)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f32 / (1u64 << 53) as f32
        })
        .collect()
}
