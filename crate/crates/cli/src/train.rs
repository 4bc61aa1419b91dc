//! `ylie train`: the desk-scale training loop with a CSV loss history.

use std::path::PathBuf;

use ylie_core::model::Model;
use ylie_core::train::{train, Dataset, LossWeights, LrSchedule, TrainConfig, TrainError};
use ylie_core::ModelConfig;

use crate::util::{self, exit};

#[derive(clap::Args)]
pub struct Args {
    /// Dataset directory containing low/ and high/ subdirectories
    #[arg(long, value_name = "DIR")]
    data: PathBuf,
    /// Output checkpoint path
    #[arg(long, value_name = "CKPT")]
    out: PathBuf,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 2e-4)]
    lr: f64,
    /// Cosine floor (clamped to --lr if larger)
    #[arg(long, default_value_t = 1e-6)]
    lr_min: f64,
    /// Learning-rate schedule: cosine or constant
    #[arg(long, default_value = "cosine")]
    schedule: String,
    /// Aligned random-crop size (images smaller than this pass through whole)
    #[arg(long, default_value_t = 256)]
    crop: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weight of the smooth-L1 term
    #[arg(long, default_value_t = 1.0)]
    smooth_weight: f32,
    /// Weight of the log-MSE (negated PSNR) term
    #[arg(long, default_value_t = 0.1)]
    psnr_weight: f32,
    /// Write <out stem>.epochNNNN checkpoints every K epochs (0 = never)
    #[arg(long, default_value_t = 0)]
    checkpoint_every: usize,
    /// Resume from an existing checkpoint instead of a fresh initialization
    #[arg(long, value_name = "CKPT")]
    resume: Option<PathBuf>,
    /// Loss-history CSV path (default: <out stem>.history.csv)
    #[arg(long, value_name = "CSV")]
    history: Option<PathBuf>,
    /// Worker threads (default: $YLIE_THREADS or 1)
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

fn usage(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    exit::USAGE
}

pub fn run(a: Args) -> i32 {
    let threads = match util::resolve_threads(a.threads) {
        Ok(t) => t,
        Err(m) => return usage(&m),
    };
    if a.epochs == 0 {
        return usage("--epochs must be at least 1");
    }
    if a.crop < 16 {
        return usage("--crop must be at least 16 (the pipeline minimum)");
    }
    if !(a.lr.is_finite() && a.lr >= 0.0) {
        return usage("--lr must be a finite non-negative number");
    }
    let schedule = match a.schedule.as_str() {
        "cosine" => LrSchedule::Cosine,
        "constant" => LrSchedule::Constant,
        other => return usage(&format!("--schedule must be cosine or constant, got {other:?}")),
    };
    util::install_thread_pool(threads);

    let dataset = match Dataset::open(&a.data) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::DATA;
        }
    };

    let mut model = match &a.resume {
        Some(path) => match util::load_model(path) {
            Ok(m) => m,
            Err(m) => {
                eprintln!("error: {m}");
                return exit::DATA;
            }
        },
        None => Model::new(ModelConfig { seed: a.seed, ..ModelConfig::default() })
            .expect("the default configuration is valid"),
    };

    let cfg = TrainConfig {
        epochs: a.epochs,
        lr: a.lr,
        lr_min: a.lr_min.min(a.lr),
        schedule,
        crop: a.crop,
        seed: a.seed,
        weights: LossWeights { smooth: a.smooth_weight, psnr: a.psnr_weight },
        checkpoint_every: a.checkpoint_every,
        out_path: Some(a.out.clone()),
    };

    let history_path = a.history.clone().unwrap_or_else(|| a.out.with_extension("history.csv"));
    let mut rows = String::from("epoch,loss,train_psnr\n");
    let epochs = a.epochs;
    let result = train(&mut model, &dataset, &cfg, |s| {
        rows.push_str(&format!("{},{:.6},{:.6}\n", s.epoch, s.loss, s.train_psnr));
        eprintln!(
            "epoch {}/{} lr={:.3e} loss={:.6} train_psnr={:.2}",
            s.epoch + 1,
            epochs,
            s.lr,
            s.loss,
            s.train_psnr
        );
    });

    // Persist whatever history accumulated, even for aborted runs.
    if let Err(e) = util::atomic_write_text(&history_path, &rows) {
        eprintln!("error: {}: {e}", history_path.display());
        return exit::DATA;
    }

    match result {
        Ok(report) => {
            let last = report.epochs.last().expect("at least one epoch ran");
            println!("checkpoint={}", a.out.display());
            println!("history={}", history_path.display());
            println!("final_loss={:.6}", last.loss);
            println!("final_train_psnr={:.6}", last.train_psnr);
            exit::OK
        }
        Err(e @ (TrainError::NonFiniteLoss { .. } | TrainError::NonFiniteGrad { .. })) => {
            eprintln!("error: {e}");
            match e.last_good() {
                Some(p) => println!("last_good={}", p.display()),
                None => eprintln!("no rescue checkpoint could be written"),
            }
            exit::NUMERIC
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit::DATA
        }
    }
}
