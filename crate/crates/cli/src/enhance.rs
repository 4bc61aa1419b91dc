//! `ylie enhance`: run the pipeline over one image or a whole directory.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use ylie_core::io::{read_image, write_image};
use ylie_core::Model;

use crate::util::{self, exit};

#[derive(clap::Args)]
pub struct Args {
    /// Trained checkpoint
    #[arg(long, value_name = "CKPT")]
    model: PathBuf,
    /// Input image (ppm/png) or a directory of images
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Output image or directory (created if missing)
    #[arg(long, value_name = "PATH")]
    output: PathBuf,
    /// Worker threads (default: $YLIE_THREADS or 1)
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

const IMAGE_EXTS: [&str; 3] = ["ppm", "pgm", "png"];

fn enhance_one(model: &Model, inp: &Path, outp: &Path) -> Result<(), String> {
    let img = read_image(inp).map_err(|e| format!("{}: {e}", inp.display()))?;
    if img.channels != 3 {
        return Err(format!(
            "{}: enhancement needs RGB input, got {} channel(s)",
            inp.display(),
            img.channels
        ));
    }
    if img.height < 16 || img.width < 16 {
        return Err(format!(
            "{}: the pipeline needs at least 16x16 input, got {}x{}",
            inp.display(),
            img.height,
            img.width
        ));
    }
    let out = model.enhance(&img);
    write_image(outp, &out).map_err(|e| format!("{}: {e}", outp.display()))
}

pub fn run(a: Args) -> i32 {
    let threads = match util::resolve_threads(a.threads) {
        Ok(t) => t,
        Err(m) => {
            eprintln!("error: {m}");
            return exit::USAGE;
        }
    };
    util::install_thread_pool(threads);
    let model = match util::load_model(&a.model) {
        Ok(m) => m,
        Err(m) => {
            eprintln!("error: {m}");
            return exit::DATA;
        }
    };

    if a.input.is_dir() {
        let mut files: Vec<PathBuf> = match std::fs::read_dir(&a.input) {
            Ok(rd) => rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.is_file()
                        && p.extension()
                            .and_then(|e| e.to_str())
                            .is_some_and(|e| IMAGE_EXTS.contains(&e.to_ascii_lowercase().as_str()))
                })
                .collect(),
            Err(e) => {
                eprintln!("error: {}: {e}", a.input.display());
                return exit::DATA;
            }
        };
        files.sort();
        if files.is_empty() {
            eprintln!("error: no images under {}", a.input.display());
            return exit::DATA;
        }
        if let Err(e) = std::fs::create_dir_all(&a.output) {
            eprintln!("error: {}: {e}", a.output.display());
            return exit::DATA;
        }
        // Per-file results are independent; failures are reported but do not
        // stop the remaining files.
        let failures: Vec<String> = files
            .par_iter()
            .filter_map(|f| {
                let out = a.output.join(f.file_name().expect("scanned files have names"));
                enhance_one(&model, f, &out).err()
            })
            .collect();
        for m in &failures {
            eprintln!("error: {m}");
        }
        eprintln!(
            "enhanced {}/{} images into {}",
            files.len() - failures.len(),
            files.len(),
            a.output.display()
        );
        if failures.is_empty() {
            exit::OK
        } else {
            exit::DATA
        }
    } else {
        // Single-file mode; an existing directory as output keeps the name.
        let outp = if a.output.is_dir() {
            a.output.join(a.input.file_name().unwrap_or_default())
        } else {
            a.output.clone()
        };
        match enhance_one(&model, &a.input, &outp) {
            Ok(()) => {
                eprintln!("wrote {}", outp.display());
                exit::OK
            }
            Err(m) => {
                eprintln!("error: {m}");
                exit::DATA
            }
        }
    }
}
