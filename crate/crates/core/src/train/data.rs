//! Paired low/high image datasets and deterministic sampling.
//!
//! A dataset root holds `low/` and `high/` subdirectories with identically
//! named files; pairing is by filename.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::color::ImageBuffer;
use crate::io::{read_image, ImageError};
use crate::tensor::Tensor;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset root {root} is missing the {sub}/ subdirectory")]
    MissingSubdir { root: String, sub: &'static str },
    #[error("no image pairs found under {root}")]
    Empty { root: String },
    #[error("low image {name} has no matching file in high/")]
    Unpaired { name: String },
    #[error("pair {name}: low is {low_h}x{low_w} but high is {high_h}x{high_w}")]
    SizeMismatch { name: String, low_h: usize, low_w: usize, high_h: usize, high_w: usize },
    #[error("pair {name}: training images must be 3-channel RGB")]
    NotRgb { name: String },
    #[error(transparent)]
    Image(#[from] ImageError),
}

pub struct Dataset {
    pairs: Vec<(PathBuf, PathBuf)>,
}

const IMAGE_EXTS: [&str; 3] = ["png", "ppm", "pgm"];

impl Dataset {
    /// Scan `root`/low and `root`/high, pairing by filename (sorted order).
    pub fn open(root: &Path) -> Result<Dataset, DataError> {
        let low_dir = root.join("low");
        let high_dir = root.join("high");
        for (dir, sub) in [(&low_dir, "low"), (&high_dir, "high")] {
            if !dir.is_dir() {
                return Err(DataError::MissingSubdir {
                    root: root.display().to_string(),
                    sub: if sub == "low" { "low" } else { "high" },
                });
            }
        }
        let mut names: Vec<String> = std::fs::read_dir(&low_dir)?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_file())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|n| {
                Path::new(n)
                    .extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| IMAGE_EXTS.contains(&e.to_ascii_lowercase().as_str()))
            })
            .collect();
        names.sort();
        let mut pairs = Vec::with_capacity(names.len());
        for name in names {
            let high = high_dir.join(&name);
            if !high.is_file() {
                return Err(DataError::Unpaired { name });
            }
            pairs.push((low_dir.join(&name), high));
        }
        if pairs.is_empty() {
            return Err(DataError::Empty { root: root.display().to_string() });
        }
        Ok(Dataset { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair_paths(&self, i: usize) -> (&Path, &Path) {
        (&self.pairs[i].0, &self.pairs[i].1)
    }

    /// Load pair `i` as full-size image buffers, validating agreement.
    pub fn load_pair(&self, i: usize) -> Result<(ImageBuffer, ImageBuffer), DataError> {
        let (lp, hp) = &self.pairs[i];
        let low = read_image(lp)?;
        let high = read_image(hp)?;
        if low.channels != 3 || high.channels != 3 {
            return Err(DataError::NotRgb {
                name: lp.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            });
        }
        if low.height != high.height || low.width != high.width || low.channels != high.channels {
            return Err(DataError::SizeMismatch {
                name: lp.file_name().unwrap_or_default().to_string_lossy().into_owned(),
                low_h: low.height,
                low_w: low.width,
                high_h: high.height,
                high_w: high.width,
            });
        }
        Ok((low, high))
    }
}

/// Deterministic per-epoch shuffle: pure function of (seed, epoch).
pub fn shuffled_indices(len: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut idx: Vec<usize> = (0..len).collect();
    for i in (1..len).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

/// Aligned random crop of a pair, as (1, 3, size, size) tensors. Images
/// smaller than `size` on either axis are used whole (no crop on that axis).
pub fn random_crop_pair(
    low: &ImageBuffer,
    high: &ImageBuffer,
    size: usize,
    rng: &mut ChaCha8Rng,
) -> (Tensor, Tensor) {
    let ch = size.min(low.height);
    let cw = size.min(low.width);
    let y0 = if low.height > ch { rng.random_range(0..=low.height - ch) } else { 0 };
    let x0 = if low.width > cw { rng.random_range(0..=low.width - cw) } else { 0 };
    (crop_to_tensor(low, y0, x0, ch, cw), crop_to_tensor(high, y0, x0, ch, cw))
}

fn crop_to_tensor(img: &ImageBuffer, y0: usize, x0: usize, h: usize, w: usize) -> Tensor {
    let c = img.channels;
    let mut out = vec![0f32; c * h * w];
    for ch in 0..c {
        for y in 0..h {
            for x in 0..w {
                out[(ch * h + y) * w + x] = img.get(y0 + y, x0 + x, ch);
            }
        }
    }
    Tensor::new([1, c, h, w], out)
}
