//! `ylie inspect`: configuration, every named tensor with its shape and
//! count, parameter totals, and the per-block FLOPs table.

use std::path::PathBuf;

use ylie_core::{Model, ModelConfig};

use crate::util::{self, exit};

#[derive(clap::Args)]
pub struct Args {
    /// Checkpoint to inspect (omit for a fresh default-config model)
    #[arg(long, value_name = "CKPT")]
    model: Option<PathBuf>,
    /// Resolution for the FLOPs table, as HxW
    #[arg(long, default_value = "256x256")]
    size: String,
}

pub fn run(a: Args) -> i32 {
    let (h, w) = match util::parse_size(&a.size) {
        Ok(s) => s,
        Err(m) => {
            eprintln!("error: {m}");
            return exit::USAGE;
        }
    };
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

    let c = &model.config;
    println!("config.feat_y={}", c.feat_y);
    println!("config.feat_uv={}", c.feat_uv);
    println!("config.heads={}", c.heads);
    println!("config.head_dim={}", c.head_dim);
    println!("config.pool_ratio={}", c.pool_ratio);
    println!("config.gga_pool={}", c.gga_pool);
    println!("config.gga_groups={}", c.gga_groups);
    println!("config.ddsa_dilation={}", c.ddsa_dilation);
    println!("config.lsa_k={}", c.lsa_k);
    println!("config.hf_kernels={},{},{}", c.hf_kernels[0], c.hf_kernels[1], c.hf_kernels[2]);
    println!("config.hf_width={}", c.hf_width);
    println!("config.gi_width={}", c.gi_width);
    println!("config.cgm_pool={}", c.cgm_pool);
    println!("config.fca_hidden={}", c.fca_hidden);
    println!("config.gamma_init={}", c.gamma_init);
    println!("config.seed={}", c.seed);

    let mut sum = 0usize;
    for name in model.params().names().to_vec() {
        let t = model.params().get(&name);
        let [n, ch, th, tw] = t.shape();
        println!("tensor.{name} shape={n}x{ch}x{th}x{tw} params={}", t.numel());
        sum += t.numel();
    }
    assert_eq!(sum, model.param_count(), "tensor table must sum to the analytic count");
    println!("total_params={sum}");
    println!("total_params_m={:.3}", sum as f64 / 1e6);

    let flops = model.flops(h, w);
    println!("flops_size={h}x{w}");
    let mut block_sum = 0u64;
    for (name, count) in &flops.blocks {
        println!("flops.{name}={count}");
        block_sum += count;
    }
    assert_eq!(block_sum, flops.total, "per-block FLOPs must sum to the total");
    println!("flops_total={}", flops.total);
    println!("flops_g={:.3}", flops.total as f64 / 1e9);
    exit::OK
}
