//! FFT engine contracts: closed-form spectra, equivalence with the naive
//! O(n^2) DFT, energy conservation, roundtrips, and the display helpers.

mod common;

use common::*;
use std::f32::consts::TAU;
use ylie_core::spectral::{fft2, ifft2, log_spectrum_image, spectrum_swap, Spectrum};
use ylie_core::Tensor;
use ylie_oracle::fft;

/// Rectangular components of an engine spectrum (amp/phase -> re/im).
fn to_complex(s: &Spectrum) -> (Vec<f64>, Vec<f64>) {
    let amp = f64s(s.amplitude.data());
    let ph = f64s(s.phase.data());
    let re = amp.iter().zip(&ph).map(|(a, p)| a * p.cos()).collect();
    let im = amp.iter().zip(&ph).map(|(a, p)| a * p.sin()).collect();
    (re, im)
}

#[test]
fn constant_image_concentrates_at_dc() {
    let (h, w) = (8usize, 8usize);
    let c = 0.37f32;
    let s = fft2(&Tensor::full([1, 1, h, w], c));
    let amp = s.amplitude.data();
    assert!(
        (amp[0] - c * (h * w) as f32).abs() < 1e-4,
        "DC bin must hold c*H*W, got {}",
        amp[0]
    );
    for (i, &a) in amp.iter().enumerate().skip(1) {
        assert!(a.abs() < 1e-4, "non-DC bin {i} = {a} should vanish");
    }
}

#[test]
fn impulse_has_flat_unit_amplitude_and_zero_phase() {
    let (h, w) = (4usize, 6usize);
    let mut data = vec![0f32; h * w];
    data[0] = 1.0;
    let s = fft2(&Tensor::new([1, 1, h, w], data));
    for i in 0..h * w {
        assert!((s.amplitude.data()[i] - 1.0).abs() < 1e-6, "impulse amplitude at {i}");
        assert!(s.phase.data()[i].abs() < 1e-6, "impulse phase at {i}");
    }
}

#[test]
fn zero_amplitude_bins_get_zero_phase_exactly() {
    let s = fft2(&Tensor::zeros([1, 1, 4, 4]));
    assert_eq!(s.amplitude.data(), &[0.0; 16]);
    assert_eq!(s.phase.data(), &[0.0; 16], "phase is defined as 0 where amplitude is 0");
}

#[test]
fn matches_naive_dft_on_mixed_sizes() {
    // 4x4 and 8x8 go through the radix-2 path, 6x10 through Bluestein.
    for (i, &(h, w)) in [(4usize, 4usize), (6, 10), (8, 8)].iter().enumerate() {
        let x = rand_tensor([1, 2, h, w], 700 + i as u64);
        let s = fft2(&x);
        let (re, im) = to_complex(&s);
        for p in 0..2 {
            let plane = f64s(&x.data()[p * h * w..(p + 1) * h * w]);
            let (wre, wim) = fft::dft2(&plane, h, w);
            for k in 0..h * w {
                let dr = (re[p * h * w + k] - wre[k]).abs();
                let di = (im[p * h * w + k] - wim[k]).abs();
                assert!(
                    dr < 1e-5 && di < 1e-5,
                    "{h}x{w} plane {p} bin {k}: engine ({}, {}) vs naive ({}, {})",
                    re[p * h * w + k],
                    im[p * h * w + k],
                    wre[k],
                    wim[k]
                );
            }
        }
    }
}

#[test]
fn parseval_energy_identity_holds() {
    for (i, &(h, w)) in [(8usize, 8usize), (6, 10)].iter().enumerate() {
        let x = rand_tensor([1, 1, h, w], 720 + i as u64);
        let s = fft2(&x);
        let spatial: f64 = x.data().iter().map(|&v| (v as f64) * (v as f64)).sum();
        let spectral: f64 =
            s.amplitude.data().iter().map(|&a| (a as f64) * (a as f64)).sum::<f64>()
                / (h * w) as f64;
        let rel = (spatial - spectral).abs() / spatial.max(1e-12);
        assert!(rel < 1e-5, "{h}x{w}: spatial {spatial} vs spectral {spectral} (rel {rel:.2e})");
    }
}

#[test]
fn inverse_transform_roundtrips() {
    for (i, &(h, w)) in [(8usize, 8usize), (6, 10), (5, 7)].iter().enumerate() {
        let x = rand_tensor([2, 2, h, w], 740 + i as u64);
        let back = ifft2(&fft2(&x));
        assert_close(back.data(), &f64s(x.data()), 1e-5, &format!("roundtrip {h}x{w}"));
    }
}

#[test]
fn conjugate_symmetry_of_real_input() {
    let (h, w) = (6usize, 8usize);
    let x = rand_tensor([1, 1, h, w], 55);
    let (re, im) = to_complex(&fft2(&x));
    for u in 0..h {
        for v in 0..w {
            let k = u * w + v;
            let km = ((h - u) % h) * w + (w - v) % w;
            assert!((re[k] - re[km]).abs() < 1e-5, "Re symmetry at ({u},{v})");
            assert!((im[k] + im[km]).abs() < 1e-5, "Im antisymmetry at ({u},{v})");
        }
    }
}

#[test]
fn single_cosine_hits_its_two_bins() {
    let (h, w, k) = (4usize, 8usize, 2usize);
    let data: Vec<f32> = (0..h * w)
        .map(|i| (TAU * k as f32 * (i % w) as f32 / w as f32).cos())
        .collect();
    let s = fft2(&Tensor::new([1, 1, h, w], data));
    let amp = s.amplitude.data();
    let expect = (h * w) as f32 / 2.0;
    for u in 0..h {
        for v in 0..w {
            let want = if u == 0 && (v == k || v == w - k) { expect } else { 0.0 };
            assert!(
                (amp[u * w + v] - want).abs() < 1e-4,
                "cosine bin ({u},{v}): got {}, want {want}",
                amp[u * w + v]
            );
        }
    }
}

#[test]
fn transform_is_linear_in_complex_form() {
    let (h, w) = (6usize, 6usize);
    let x = rand_tensor([1, 1, h, w], 56);
    let y = rand_tensor([1, 1, h, w], 57);
    let (a, b) = (0.7f32, -1.3f32);
    let combo: Vec<f32> =
        x.data().iter().zip(y.data()).map(|(&xv, &yv)| a * xv + b * yv).collect();
    let (cre, cim) = to_complex(&fft2(&Tensor::new([1, 1, h, w], combo)));
    let (xre, xim) = to_complex(&fft2(&x));
    let (yre, yim) = to_complex(&fft2(&y));
    for k in 0..h * w {
        let wr = a as f64 * xre[k] + b as f64 * yre[k];
        let wi = a as f64 * xim[k] + b as f64 * yim[k];
        assert!((cre[k] - wr).abs() < 1e-5 && (cim[k] - wi).abs() < 1e-5, "linearity bin {k}");
    }
}

#[test]
fn packed_layout_puts_amplitude_before_phase() {
    let (h, w) = (4usize, 4usize);
    let x = rand_tensor([1, 2, h, w], 58);
    let packed = ylie_core::spectral::fft2_polar_packed(&x);
    assert_eq!(packed.shape(), [1, 4, h, w]);
    let s = fft2(&x);
    assert_eq!(&packed.data()[..2 * h * w], s.amplitude.data());
    assert_eq!(&packed.data()[2 * h * w..], s.phase.data());
}

// ── Spectrum swap ────────────────────────────────────────────────────────

#[test]
fn swapping_a_spectrum_with_itself_is_identity() {
    let x = rand_image_tensor([1, 3, 12, 16], 59);
    let back = spectrum_swap(&x, &x);
    assert_close(back.data(), &f64s(x.data()), 1e-5, "self swap");
}

#[test]
fn swap_takes_amplitude_and_phase_from_the_right_donors() {
    // Phase donor: impulse shifted to (1, 2); amplitude donor: a constant.
    // Result must be the constant's energy relocated by the impulse's phase,
    // i.e. concentrated at the shift position.
    let (h, w) = (8usize, 8usize);
    let amp_src = Tensor::full([1, 1, h, w], 0.5);
    let mut d = vec![0f32; h * w];
    d[w + 2] = 1.0;
    let phase_src = Tensor::new([1, 1, h, w], d);
    let out = spectrum_swap(&amp_src, &phase_src);
    // Constant has energy only at DC; DC phase of the impulse is 0, so the
    // swap reproduces the constant exactly.
    assert_close(out.data(), &vec![0.5f64; h * w], 1e-5, "dc-only swap");

    // Swap in the other order: impulse amplitude (flat 1) + constant phase
    // (0 everywhere) -> flat spectrum with zero phase -> impulse at origin.
    let out2 = spectrum_swap(&phase_src, &amp_src);
    assert!((out2.data()[0] - 1.0).abs() < 1e-5, "origin sample collects all energy");
    for (i, &v) in out2.data().iter().enumerate().skip(1) {
        assert!(v.abs() < 1e-5, "sample {i} should be ~0 (clamped), got {v}");
    }
}

#[test]
#[should_panic(expected = "spectrum_swap")]
fn swap_rejects_mismatched_shapes() {
    let a = Tensor::zeros([1, 1, 4, 4]);
    let b = Tensor::zeros([1, 1, 4, 6]);
    let _ = spectrum_swap(&a, &b);
}

// ── Log-spectrum display ─────────────────────────────────────────────────

#[test]
fn log_spectrum_of_constant_is_a_single_bright_center() {
    let (h, w) = (8usize, 10usize);
    let img = log_spectrum_image(&Tensor::full([1, 1, h, w], 0.8));
    let data = img.data();
    let center = (h / 2) * w + w / 2;
    assert_eq!(data[center], 1.0, "DC lands at the center after the shift");
    for (i, &v) in data.iter().enumerate() {
        if i != center {
            assert!(v.abs() < 1e-6, "bin {i} should normalize to 0, got {v}");
        }
        assert!((0.0..=1.0).contains(&v), "normalized range");
    }
}

#[test]
fn log_spectrum_of_stripes_lights_the_matching_axis() {
    let (h, w) = (16usize, 16usize);
    // Intensity varies along x (vertical stripe edges): energy sits on the
    // horizontal frequency axis, the center row after the shift.
    let vert: Vec<f32> = (0..h * w)
        .map(|i| (TAU * 3.0 * (i % w) as f32 / w as f32).cos() * 0.4 + 0.5)
        .collect();
    let img = log_spectrum_image(&Tensor::new([1, 1, h, w], vert));
    let row_energy = |r: usize| -> f32 { (0..w).map(|c| img.data()[r * w + c]).sum() };
    let center_row = row_energy(h / 2);
    for r in 0..h {
        if r != h / 2 {
            assert!(
                center_row > row_energy(r) + 1.0,
                "center row must dominate row {r}: {center_row} vs {}",
                row_energy(r)
            );
        }
    }

    // Intensity varying along y concentrates on the center column instead.
    let horiz: Vec<f32> = (0..h * w)
        .map(|i| (TAU * 3.0 * (i / w) as f32 / h as f32).cos() * 0.4 + 0.5)
        .collect();
    let img = log_spectrum_image(&Tensor::new([1, 1, h, w], horiz));
    let col_energy = |c: usize| -> f32 { (0..h).map(|r| img.data()[r * w + c]).sum() };
    let center_col = col_energy(w / 2);
    for c in 0..w {
        if c != w / 2 {
            assert!(center_col > col_energy(c) + 1.0, "center column must dominate column {c}");
        }
    }
}

#[test]
fn log_spectrum_is_min_max_normalized_per_plane() {
    let x = rand_image_tensor([1, 2, 8, 8], 60);
    let img = log_spectrum_image(&x);
    for p in 0..2 {
        let plane = &img.data()[p * 64..(p + 1) * 64];
        let max = plane.iter().cloned().fold(f32::MIN, f32::max);
        let min = plane.iter().cloned().fold(f32::MAX, f32::min);
        assert_eq!(min, 0.0, "plane {p} min");
        assert_eq!(max, 1.0, "plane {p} max");
    }
}
