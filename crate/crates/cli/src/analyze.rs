//! `ylie analyze`: frequency-domain analysis tools.
//!
//! spectra          — per-channel plane and log-spectrum images (raw RGB
//!                    channels plus the YUV planes for color inputs)
//! swap             — amplitude/phase spectrum swapping between two images,
//!                    with edge-map correlations against both donors
//! feature-spectra  — log-spectra of the pipeline's traced features
//!
//! Every mode writes individual image files plus a manifest.txt of key=value
//! lines into the output directory.

use std::path::{Path, PathBuf};

use ylie_core::color::rgb_to_yuv;
use ylie_core::io::{read_image, write_image};
use ylie_core::spectral::{log_spectrum_plane, spectrum_swap};
use ylie_core::{ColorSpace, ImageBuffer};

use crate::util::{self, exit};

#[derive(clap::Args)]
pub struct Args {
    /// Analysis mode: spectra, swap, or feature-spectra
    #[arg(long)]
    mode: String,
    /// First (or only) input image
    #[arg(long, value_name = "IMG")]
    input: PathBuf,
    /// Second input image (required by swap, optional for spectra)
    #[arg(long, value_name = "IMG")]
    input_b: Option<PathBuf>,
    /// Checkpoint (required by feature-spectra)
    #[arg(long, value_name = "CKPT")]
    model: Option<PathBuf>,
    /// Output directory (created if missing)
    #[arg(long, value_name = "DIR")]
    output: PathBuf,
}

/// Collects key=value rows and writes them atomically as manifest.txt.
struct Manifest {
    rows: Vec<(String, String)>,
}

impl Manifest {
    fn new(mode: &str) -> Manifest {
        Manifest { rows: vec![("mode".into(), mode.into())] }
    }

    fn push(&mut self, key: &str, value: impl ToString) {
        self.rows.push((key.to_string(), value.to_string()));
    }

    fn write(&self, dir: &Path) -> std::io::Result<()> {
        let mut text = String::new();
        for (k, v) in &self.rows {
            text.push_str(&format!("{k}={v}\n"));
        }
        util::atomic_write_text(&dir.join("manifest.txt"), &text)
    }
}

pub fn run(a: Args) -> i32 {
    if let Err(e) = std::fs::create_dir_all(&a.output) {
        eprintln!("error: {}: {e}", a.output.display());
        return exit::DATA;
    }
    match a.mode.as_str() {
        "spectra" => spectra(&a),
        "swap" => swap(&a),
        "feature-spectra" => feature_spectra(&a),
        other => {
            eprintln!("error: --mode must be spectra, swap, or feature-spectra, got {other:?}");
            exit::USAGE
        }
    }
}

fn read(path: &Path) -> Result<ImageBuffer, String> {
    read_image(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn data_err(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    exit::DATA
}

/// The analyzed channels of an image: raw channels, plus the YUV planes for
/// RGB inputs. U/V plane images are shifted by +0.5 for display; spectra are
/// computed on the raw plane values.
fn analyzed_planes(img: &ImageBuffer) -> Vec<(&'static str, Vec<f32>, f32)> {
    let (h, w) = (img.height, img.width);
    let plane = |buf: &ImageBuffer, ch: usize| -> Vec<f32> {
        let c = buf.channels;
        (0..h * w).map(|i| buf.data[i * c + ch]).collect()
    };
    if img.channels == 1 {
        return vec![("y", plane(img, 0), 0.0)];
    }
    let yuv = rgb_to_yuv(img);
    vec![
        ("r", plane(img, 0), 0.0),
        ("g", plane(img, 1), 0.0),
        ("b", plane(img, 2), 0.0),
        ("y", plane(&yuv, 0), 0.0),
        ("u", plane(&yuv, 1), 0.5),
        ("v", plane(&yuv, 2), 0.5),
    ]
}

fn spectra(a: &Args) -> i32 {
    let mut manifest = Manifest::new("spectra");
    let mut inputs = vec![("a", a.input.clone())];
    if let Some(b) = &a.input_b {
        inputs.push(("b", b.clone()));
    }
    let mut emitted = 0usize;
    for (role, path) in &inputs {
        let img = match read(path) {
            Ok(i) => i,
            Err(m) => return data_err(&m),
        };
        manifest.push(&format!("input_{role}"), path.display());
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("input").to_string();
        let (h, w) = (img.height, img.width);
        for (name, plane, shift) in analyzed_planes(&img) {
            let display: Vec<f32> = plane.iter().map(|&v| v + shift).collect();
            let plane_file = format!("{stem}.{name}.pgm");
            let spec_file = format!("{stem}.{name}.spectrum.pgm");
            let gray = ImageBuffer::new(h, w, ColorSpace::Y, display);
            if let Err(e) = write_image(&a.output.join(&plane_file), &gray) {
                return data_err(&format!("{plane_file}: {e}"));
            }
            let spec = ImageBuffer::new(h, w, ColorSpace::Y, log_spectrum_plane(&plane, h, w));
            if let Err(e) = write_image(&a.output.join(&spec_file), &spec) {
                return data_err(&format!("{spec_file}: {e}"));
            }
            manifest.push(&format!("plane.{role}.{name}"), &plane_file);
            manifest.push(&format!("spectrum.{role}.{name}"), &spec_file);
            emitted += 2;
        }
    }
    if let Err(e) = manifest.write(&a.output) {
        return data_err(&format!("manifest.txt: {e}"));
    }
    println!("wrote {emitted} files into {}", a.output.display());
    exit::OK
}

// ── Spectrum swapping ───────────────────────────────────────────────────────

fn luma64(img: &ImageBuffer) -> Vec<f64> {
    if img.channels == 1 {
        return img.data.iter().map(|&v| v as f64).collect();
    }
    img.data
        .chunks_exact(3)
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect()
}

/// Sobel gradient magnitude over the interior, (h-2) x (w-2) values.
fn sobel_mag(p: &[f64], h: usize, w: usize) -> Vec<f64> {
    let mut out = vec![0.0; (h - 2) * (w - 2)];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let gx = (p[(y - 1) * w + x + 1] + 2.0 * p[y * w + x + 1] + p[(y + 1) * w + x + 1])
                - (p[(y - 1) * w + x - 1] + 2.0 * p[y * w + x - 1] + p[(y + 1) * w + x - 1]);
            let gy = (p[(y + 1) * w + x - 1] + 2.0 * p[(y + 1) * w + x] + p[(y + 1) * w + x + 1])
                - (p[(y - 1) * w + x - 1] + 2.0 * p[(y - 1) * w + x] + p[(y - 1) * w + x + 1]);
            out[(y - 1) * (w - 2) + (x - 1)] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut num, mut va, mut vb) = (0.0, 0.0, 0.0);
    for i in 0..a.len() {
        let (da, db) = (a[i] - ma, b[i] - mb);
        num += da * db;
        va += da * da;
        vb += db * db;
    }
    num / (va.sqrt() * vb.sqrt() + 1e-12)
}

fn edge_corr(recon: &ImageBuffer, donor: &ImageBuffer) -> f64 {
    let (h, w) = (recon.height, recon.width);
    pearson(&sobel_mag(&luma64(recon), h, w), &sobel_mag(&luma64(donor), h, w))
}

fn swap(a: &Args) -> i32 {
    let Some(path_b) = &a.input_b else {
        eprintln!("error: swap mode needs --input-b");
        return exit::USAGE;
    };
    let (img_a, img_b) = match (read(&a.input), read(path_b)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(m), _) | (_, Err(m)) => return data_err(&m),
    };
    if (img_a.height, img_a.width, img_a.channels)
        != (img_b.height, img_b.width, img_b.channels)
    {
        return data_err(&format!(
            "swap inputs must share dimensions: {}x{}x{} vs {}x{}x{}",
            img_a.height, img_a.width, img_a.channels, img_b.height, img_b.width, img_b.channels
        ));
    }
    if img_a.height < 4 || img_a.width < 4 {
        return data_err("swap inputs must be at least 4x4 for edge statistics");
    }

    let (ta, tb) = (img_a.to_tensor(), img_b.to_tensor());
    let ext = if img_a.channels == 3 { "ppm" } else { "pgm" };
    let space = img_a.space;
    let mut manifest = Manifest::new("swap");
    manifest.push("input_a", a.input.display());
    manifest.push("input_b", path_b.display());

    // recon(amp donor, phase donor) in both directions.
    let cases = [
        ("amp_a_phase_b", spectrum_swap(&ta, &tb), &img_a, &img_b),
        ("amp_b_phase_a", spectrum_swap(&tb, &ta), &img_b, &img_a),
    ];
    let mut all_phase_dominate = true;
    for (name, recon, amp_donor, phase_donor) in &cases {
        let img = ImageBuffer::from_tensor(recon, space);
        let file = format!("{name}.{ext}");
        if let Err(e) = write_image(&a.output.join(&file), &img) {
            return data_err(&format!("{file}: {e}"));
        }
        let corr_amp = edge_corr(&img, amp_donor);
        let corr_phase = edge_corr(&img, phase_donor);
        manifest.push(&format!("recon.{name}"), &file);
        manifest.push(&format!("edge_corr.{name}.amp_donor"), format!("{corr_amp:.6}"));
        manifest.push(&format!("edge_corr.{name}.phase_donor"), format!("{corr_phase:.6}"));
        manifest.push(&format!("phase_dominates.{name}"), corr_phase > corr_amp);
        all_phase_dominate &= corr_phase > corr_amp;
    }
    manifest.push("phase_dominates", all_phase_dominate);
    if let Err(e) = manifest.write(&a.output) {
        return data_err(&format!("manifest.txt: {e}"));
    }
    println!("phase_dominates={all_phase_dominate}");
    exit::OK
}

// ── Feature spectra ─────────────────────────────────────────────────────────

fn feature_spectra(a: &Args) -> i32 {
    let Some(model_path) = &a.model else {
        eprintln!("error: feature-spectra mode needs --model");
        return exit::USAGE;
    };
    let model = match util::load_model(model_path) {
        Ok(m) => m,
        Err(m) => return data_err(&m),
    };
    let img = match read(&a.input) {
        Ok(i) => i,
        Err(m) => return data_err(&m),
    };
    if img.channels != 3 {
        return data_err("feature-spectra needs an RGB input");
    }
    if img.height < 16 || img.width < 16 {
        return data_err("the pipeline needs at least 16x16 input");
    }

    let (_, trace) = model.forward_traced(&img.to_tensor());
    let mut manifest = Manifest::new("feature-spectra");
    manifest.push("model", model_path.display());
    manifest.push("input", a.input.display());
    for (stage, feat) in &trace {
        // Channel-mean plane as the representative feature of the stage.
        let [_, c, h, w] = feat.shape();
        let mut mean = vec![0f32; h * w];
        for ch in 0..c {
            for i in 0..h * w {
                mean[i] += feat.data()[ch * h * w + i];
            }
        }
        for v in &mut mean {
            *v /= c as f32;
        }
        let (lo, hi) = mean.iter().fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        let range = (hi - lo).max(1e-12);
        let display: Vec<f32> = mean.iter().map(|&v| (v - lo) / range).collect();

        let feat_file = format!("{stage}.feature.pgm");
        let spec_file = format!("{stage}.spectrum.pgm");
        let gray = ImageBuffer::new(h, w, ColorSpace::Y, display);
        if let Err(e) = write_image(&a.output.join(&feat_file), &gray) {
            return data_err(&format!("{feat_file}: {e}"));
        }
        let spec = ImageBuffer::new(h, w, ColorSpace::Y, log_spectrum_plane(&mean, h, w));
        if let Err(e) = write_image(&a.output.join(&spec_file), &spec) {
            return data_err(&format!("{spec_file}: {e}"));
        }
        manifest.push(&format!("feature.{stage}"), &feat_file);
        manifest.push(&format!("spectrum.{stage}"), &spec_file);
    }
    if let Err(e) = manifest.write(&a.output) {
        return data_err(&format!("manifest.txt: {e}"));
    }
    println!("wrote {} files into {}", 2 * trace.len(), a.output.display());
    exit::OK
}
