//! Shared input builders for the criterion benchmarks.

use ylie_core::tensor::Tensor;

/// Deterministic pseudo-random tensor (SplitMix64 mapped to [0, 1)).
pub fn seeded_tensor(shape: [usize; 4], seed: u64) -> Tensor {
    let mut state = seed;
    let numel: usize = shape.iter().product();
    let data = (0..numel)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f32 / (1u64 << 53) as f32
        })
        .collect();
    Tensor::new(shape, data)
}
