//! Wall-clock latency harness with simple robust statistics.

use std::time::Instant;

/// Published single-image CPU latency of the original implementation at
/// 256x256, used as the comparison baseline in reports (milliseconds).
pub const REFERENCE_CPU_MS: f64 = 124.1;

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub label: String,
    pub warmup: usize,
    pub samples_ms: Vec<f64>,
    pub median_ms: f64,
    pub mean_ms: f64,
    pub p95_ms: f64,
    pub threads: usize,
    pub height: usize,
    pub width: usize,
    pub host: String,
    pub reference_cpu_ms: f64,
    /// Timing-harness floor measured on an empty closure.
    pub noop_overhead_ms: f64,
}

/// Run `f` `warmup` times untimed, then `runs` timed repetitions.
pub fn measure(warmup: usize, runs: usize, mut f: impl FnMut()) -> Vec<f64> {
    assert!(runs >= 1, "need at least one timed run");
    for _ in 0..warmup {
        f();
    }
    let mut samples = Vec::with_capacity(runs);
    for _ in 0..runs {
        let t0 = Instant::now();
        f();
        samples.push(t0.elapsed().as_secs_f64() * 1e3);
    }
    samples
}

/// Median of a sample set (mean of the middle two for even counts).
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty());
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// 95th percentile (nearest-rank).
pub fn p95(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty());
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((0.95 * s.len() as f64).ceil() as usize).clamp(1, s.len());
    s[rank - 1]
}

/// Describe the machine the numbers came from (best effort, no syscalls
/// beyond the standard library).
pub fn host_descriptor() -> String {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(0);
    format!("{}-{} ({cores} cores)", std::env::consts::OS, std::env::consts::ARCH)
}

pub fn report(
    label: &str,
    warmup: usize,
    samples_ms: Vec<f64>,
    threads: usize,
    height: usize,
    width: usize,
) -> BenchReport {
    assert!(samples_ms.len() >= 20, "a report needs at least 20 measured runs");
    let mean = samples_ms.iter().sum::<f64>() / samples_ms.len() as f64;
    let noop = measure(2, 20, || {});
    BenchReport {
        label: label.to_string(),
        warmup,
        median_ms: median(&samples_ms),
        mean_ms: mean,
        p95_ms: p95(&samples_ms),
        samples_ms,
        threads,
        height,
        width,
        host: host_descriptor(),
        reference_cpu_ms: REFERENCE_CPU_MS,
        noop_overhead_ms: median(&noop),
    }
}

impl BenchReport {
    /// key=value lines: summary fields in stable order, then one
    /// `sample_ms=` line per measured run.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("label={}\n", self.label));
        out.push_str(&format!("size={}x{}\n", self.height, self.width));
        out.push_str(&format!("threads={}\n", self.threads));
        out.push_str(&format!("host={}\n", self.host));
        out.push_str(&format!("warmup={}\n", self.warmup));
        out.push_str(&format!("runs={}\n", self.samples_ms.len()));
        out.push_str(&format!("median_ms={:.3}\n", self.median_ms));
        out.push_str(&format!("mean_ms={:.3}\n", self.mean_ms));
        out.push_str(&format!("p95_ms={:.3}\n", self.p95_ms));
        out.push_str(&format!("reference_cpu_ms={:.1}\n", self.reference_cpu_ms));
        out.push_str(&format!("speedup_vs_reference={:.3}\n", self.reference_cpu_ms / self.median_ms));
        out.push_str(&format!("noop_overhead_ms={:.6}\n", self.noop_overhead_ms));
        for s in &self.samples_ms {
            out.push_str(&format!("sample_ms={s:.3}\n"));
        }
        out
    }
}
