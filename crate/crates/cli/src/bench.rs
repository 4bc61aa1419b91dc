//! `ylie bench`: wall-clock latency of the forward pass plus the parameter
//! and FLOP budgets, reported as key=value text.

use std::hint::black_box;
use std::path::PathBuf;

use ylie_core::bench::{measure, report};
use ylie_core::{Model, ModelConfig, Tensor};

use crate::util::{self, exit};

#[derive(clap::Args)]
pub struct Args {
    /// Checkpoint to time (omit for a fresh default-config model)
    #[arg(long, value_name = "CKPT")]
    model: Option<PathBuf>,
    /// Input resolution as HxW
    #[arg(long, default_value = "256x256")]
    size: String,
    /// Worker threads for the timed region (default: $YLIE_THREADS or 1)
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Timed repetitions (at least 20)
    #[arg(long, default_value_t = 30)]
    runs: usize,
    /// Untimed warmup repetitions (at least 5)
    #[arg(long, default_value_t = 5)]
    warmup: usize,
    /// Also write the report to this file
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

pub fn run(a: Args) -> i32 {
    let threads = match util::resolve_threads(a.threads) {
        Ok(t) => t,
        Err(m) => {
            eprintln!("error: {m}");
            return exit::USAGE;
        }
    };
    if a.runs < 20 {
        eprintln!("error: --runs must be at least 20 for a meaningful report");
        return exit::USAGE;
    }
    if a.warmup < 5 {
        eprintln!("error: --warmup must be at least 5");
        return exit::USAGE;
    }
    let (h, w) = match util::parse_size(&a.size) {
        Ok(s) => s,
        Err(m) => {
            eprintln!("error: {m}");
            return exit::USAGE;
        }
    };
    util::install_thread_pool(threads);

    let model = match &a.model {
        Some(path) => match util::load_model(path) {
            Ok(m) => m,
            Err(m) => {
                eprintln!("error: {m}");
                return exit::DATA;
            }
        },
        None => Model::new(ModelConfig::default()).expect("the default configuration is valid"),
    };

    let x = Tensor::new([1, 3, h, w], util::seeded_values(3 * h * w, 0x9E3));
    let samples = measure(a.warmup, a.runs, || {
        black_box(model.forward(black_box(&x)));
    });
    let rep = report("pipeline_forward", a.warmup, samples, threads, h, w);

    let flops = model.flops(h, w);
    let mut text = String::new();
    text.push_str(&format!("params={}\n", model.param_count()));
    text.push_str(&format!("params_m={:.3}\n", model.param_count() as f64 / 1e6));
    text.push_str(&format!("flops={}\n", flops.total));
    text.push_str(&format!("flops_g={:.3}\n", flops.total as f64 / 1e9));
    text.push_str(&rep.render_text());

    print!("{text}");
    if let Some(out) = &a.out {
        if let Err(e) = util::atomic_write_text(out, &text) {
            eprintln!("error: {}: {e}", out.display());
            return exit::DATA;
        }
    }
    exit::OK
}
