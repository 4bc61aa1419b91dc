//! Desk-scale training loop: Adam, cosine or constant learning rate, batch
//! size 1, aligned random crops, deterministic for a given seed.

mod adam;
mod data;
mod loss;

pub use adam::{cosine_lr, Adam, AdamConfig};
pub use data::{random_crop_pair, shuffled_indices, DataError, Dataset};
pub use loss::{psnr_loss, smooth_l1, total_loss, LossWeights};

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::io::{save_checkpoint, CheckpointError};
use crate::metrics::psnr;
use crate::model::{forward_params, Model, ParamSet};
use crate::tensor::{Tape, Tensor};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("loss became non-finite at epoch {epoch}, step {step}")]
    NonFiniteLoss { epoch: usize, step: usize, last_good: Option<PathBuf> },
    #[error("gradient of {param} became non-finite at epoch {epoch}, step {step}")]
    NonFiniteGrad { param: String, epoch: usize, step: usize, last_good: Option<PathBuf> },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("failed to write checkpoint: {0}")]
    Checkpoint(#[from] CheckpointError),
}

impl TrainError {
    /// Newest checkpoint of still-finite parameters written before an abort.
    pub fn last_good(&self) -> Option<&Path> {
        match self {
            TrainError::NonFiniteLoss { last_good, .. }
            | TrainError::NonFiniteGrad { last_good, .. } => last_good.as_deref(),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LrSchedule {
    Cosine,
    Constant,
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub lr_min: f64,
    pub schedule: LrSchedule,
    pub crop: usize,
    pub seed: u64,
    pub weights: LossWeights,
    /// Write intermediate checkpoints every k epochs (0 = never). They land
    /// next to `out_path` as `<stem>.epoch<N>.<ext>`.
    pub checkpoint_every: usize,
    pub out_path: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            lr: 2e-4,
            lr_min: 1e-6,
            schedule: LrSchedule::Cosine,
            crop: 256,
            seed: 0,
            weights: LossWeights::default(),
            checkpoint_every: 0,
            out_path: None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EpochStats {
    pub epoch: usize,
    pub lr: f64,
    /// Mean total loss over the epoch's steps.
    pub loss: f64,
    /// Mean PSNR of clamped predictions against targets.
    pub train_psnr: f64,
}

pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
}

/// Run the full loop, mutating `model` in place. One epoch is one pass over
/// every pair; `on_epoch` fires after each epoch (progress/logging).
pub fn train(
    model: &mut Model,
    dataset: &Dataset,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<TrainReport, TrainError> {
    // Preload all pairs once; desk-scale datasets fit in memory easily.
    let mut pairs = Vec::with_capacity(dataset.len());
    for i in 0..dataset.len() {
        pairs.push(dataset.load_pair(i)?);
    }

    let names: Vec<String> = model.params().names().to_vec();
    let shapes: Vec<[usize; 4]> = names.iter().map(|n| model.params().get(n).shape()).collect();
    let mut master: Vec<Vec<f32>> = names.iter().map(|n| model.params().get(n).to_vec()).collect();
    let numels: Vec<usize> = master.iter().map(|v| v.len()).collect();
    let mut opt = Adam::new(AdamConfig::default(), &numels);

    let write_back = |model: &mut Model, master: &[Vec<f32>]| {
        for (i, name) in names.iter().enumerate() {
            model.params_mut().set(name, Tensor::new(shapes[i], master[i].clone()));
        }
    };

    let mut report = TrainReport { epochs: Vec::with_capacity(cfg.epochs) };
    for epoch in 0..cfg.epochs {
        let lr = match cfg.schedule {
            LrSchedule::Cosine => cosine_lr(cfg.lr, cfg.lr_min, epoch, cfg.epochs),
            LrSchedule::Constant => cfg.lr,
        };
        let order = shuffled_indices(pairs.len(), cfg.seed, epoch);
        let mut crop_rng = ChaCha8Rng::seed_from_u64(
            cfg.seed ^ 0xA5A5_5A5A_0000_0000 ^ (epoch as u64).wrapping_mul(0x0123_4567_89AB_CDEF),
        );
        let mut loss_sum = 0f64;
        let mut psnr_sum = 0f64;
        for (step, &i) in order.iter().enumerate() {
            let (low, high) = &pairs[i];
            let (lt, ht) = random_crop_pair(low, high, cfg.crop, &mut crop_rng);

            let tape = Tape::new();
            let watched = build_watched(&tape, &names, &shapes, &master);
            let pred = forward_params(&model.config, &watched, &lt);
            let loss = total_loss(&pred, &ht, cfg.weights);
            let loss_v = loss.item() as f64;
            if !loss_v.is_finite() {
                // The step has not been applied, so `master` is still the
                // last good state: persist it before aborting.
                let last_good = save_last_good(model, &master, cfg, &write_back);
                return Err(TrainError::NonFiniteLoss { epoch, step, last_good });
            }
            let grads = tape.backward(&loss);
            let grad_refs: Vec<Option<&[f32]>> =
                names.iter().map(|n| grads.get(watched.get(n))).collect();
            for (name, g) in names.iter().zip(&grad_refs) {
                if g.is_some_and(|g| g.iter().any(|v| !v.is_finite())) {
                    let last_good = save_last_good(model, &master, cfg, &write_back);
                    return Err(TrainError::NonFiniteGrad {
                        param: name.clone(),
                        epoch,
                        step,
                        last_good,
                    });
                }
            }
            opt.step(&mut master, &grad_refs, lr);

            loss_sum += loss_v;
            psnr_sum += psnr(pred.clamp01().data(), ht.data());
        }

        let stats = EpochStats {
            epoch,
            lr,
            loss: loss_sum / pairs.len() as f64,
            train_psnr: psnr_sum / pairs.len() as f64,
        };
        report.epochs.push(stats);
        on_epoch(&stats);

        if cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0 {
            if let Some(out) = &cfg.out_path {
                write_back(model, &master);
                save_checkpoint(&epoch_path(out, epoch + 1), &model.to_checkpoint())?;
            }
        }
    }

    write_back(model, &master);
    if let Some(out) = &cfg.out_path {
        save_checkpoint(out, &model.to_checkpoint())?;
    }
    Ok(report)
}

/// Persist the current (finite) parameters to the run's output path so an
/// aborted run still leaves a usable checkpoint behind.
fn save_last_good(
    model: &mut Model,
    master: &[Vec<f32>],
    cfg: &TrainConfig,
    write_back: &impl Fn(&mut Model, &[Vec<f32>]),
) -> Option<PathBuf> {
    write_back(model, master);
    let out = cfg.out_path.as_ref()?;
    save_checkpoint(out, &model.to_checkpoint()).ok()?;
    Some(out.clone())
}

fn build_watched(tape: &Tape, names: &[String], shapes: &[[usize; 4]], master: &[Vec<f32>]) -> ParamSet {
    let pairs: Vec<(String, Tensor)> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), tape.watch(&Tensor::new(shapes[i], master[i].clone()))))
        .collect();
    ParamSet::from_pairs(pairs)
}

fn epoch_path(out: &Path, epoch: usize) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("ckpt");
    out.with_file_name(format!("{stem}.epoch{epoch:04}.{ext}"))
}
