//! File I/O: images (PPM/PGM/PNG) and binary model checkpoints.

mod checkpoint;
mod image;

pub use checkpoint::{
    load_checkpoint, save_checkpoint, Checkpoint, CheckpointError, CHECKPOINT_VERSION,
};
pub use image::{read_image, write_image, ImageError};
