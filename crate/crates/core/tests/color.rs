//! BT.601 colorspace contracts: frozen primary values, achromatic chroma,
//! roundtrip accuracy, and agreement between the image and tensor paths.

mod common;

use common::*;
use ylie_core::color::{
    merge_yuv, rgb_from_yuv_matrix, rgb_to_yuv, rgb_to_yuv_tensor, split_yuv, yuv_from_rgb_matrix,
    yuv_to_rgb, yuv_to_rgb_tensor, ColorSpace, ImageBuffer,
};
use ylie_oracle::synth::Rng64;

fn one_pixel(rgb: [f32; 3]) -> ImageBuffer {
    ImageBuffer::new(1, 1, ColorSpace::Rgb, rgb.to_vec())
}

#[test]
fn primary_values_are_frozen() {
    let cases: [([f32; 3], [f64; 3]); 4] = [
        ([1.0, 1.0, 1.0], [1.0, 0.0, 0.0]),
        ([0.0, 0.0, 0.0], [0.0, 0.0, 0.0]),
        // Pure red: U = 0.492111*(0 - 0.299), V = 0.877283*(1 - 0.299).
        ([1.0, 0.0, 0.0], [0.299, -0.147141, 0.614975]),
        ([0.5, 0.5, 0.5], [0.5, 0.0, 0.0]),
    ];
    for (rgb, want) in cases {
        let yuv = rgb_to_yuv(&one_pixel(rgb));
        for ch in 0..3 {
            assert!(
                (yuv.data[ch] as f64 - want[ch]).abs() < 1e-6,
                "rgb {rgb:?} channel {ch}: got {}, want {}",
                yuv.data[ch],
                want[ch]
            );
        }
    }
}

#[test]
fn achromatic_pixels_have_zero_chroma() {
    for i in 0..=100 {
        let g = i as f32 / 100.0;
        let yuv = rgb_to_yuv(&one_pixel([g, g, g]));
        assert!((yuv.data[0] - g).abs() < 1e-6, "gray {g} luma");
        assert!(yuv.data[1].abs() < 1e-6, "gray {g} leaks into U: {}", yuv.data[1]);
        assert!(yuv.data[2].abs() < 1e-6, "gray {g} leaks into V: {}", yuv.data[2]);
    }
}

#[test]
fn roundtrip_is_tight_over_many_random_pixels() {
    // 100_000 in-gamut pixels through rgb -> yuv -> rgb, before any clamping.
    let (h, w) = (250usize, 400usize);
    let img = ImageBuffer::new(h, w, ColorSpace::Rgb, rand_vec_range(h * w * 3, 61, 0.0, 1.0));
    let back = yuv_to_rgb(&rgb_to_yuv(&img));
    let mut worst = 0f32;
    for (a, b) in img.data.iter().zip(&back.data) {
        worst = worst.max((a - b).abs());
    }
    assert!(worst < 1e-5, "worst roundtrip error {worst} over {} pixels", h * w);
}

#[test]
fn forward_matrix_matches_scalar_oracle() {
    let mut rng = Rng64::new(62);
    for _ in 0..256 {
        let rgb = [rng.uniform(), rng.uniform(), rng.uniform()];
        let want = ylie_oracle::color::rgb_to_yuv(rgb);
        let got = rgb_to_yuv(&one_pixel([rgb[0] as f32, rgb[1] as f32, rgb[2] as f32]));
        for ch in 0..3 {
            assert!(
                (got.data[ch] as f64 - want[ch]).abs() < 1e-5,
                "forward {rgb:?} ch {ch}"
            );
        }
        let back = ylie_oracle::color::yuv_to_rgb(want);
        let inv = yuv_to_rgb(&got);
        for ch in 0..3 {
            assert!((inv.data[ch] as f64 - back[ch]).abs() < 1e-5, "inverse {rgb:?} ch {ch}");
        }
    }
}

#[test]
fn matrices_are_mutual_inverses() {
    let f = yuv_from_rgb_matrix();
    let b = rgb_from_yuv_matrix();
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| b[i][k] * f[k][j]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((dot - want).abs() < 1e-12, "inverse product at ({i},{j}) = {dot}");
        }
    }
}

#[test]
fn conversion_is_per_pixel_local() {
    let (h, w) = (6usize, 5usize);
    let base = ImageBuffer::new(h, w, ColorSpace::Rgb, rand_vec_range(h * w * 3, 63, 0.0, 1.0));
    let mut poked = base.clone();
    poked.set(3, 2, 1, 0.987);
    let a = rgb_to_yuv(&base);
    let b = rgb_to_yuv(&poked);
    for y in 0..h {
        for x in 0..w {
            for ch in 0..3 {
                if y == 3 && x == 2 {
                    continue;
                }
                assert_eq!(a.get(y, x, ch), b.get(y, x, ch), "pixel ({y},{x}) must not move");
            }
        }
    }
    assert_ne!(a.get(3, 2, 1), b.get(3, 2, 1), "poked pixel must move");
}

#[test]
fn split_and_merge_roundtrip_bitwise() {
    let (h, w) = (7usize, 9usize);
    let rgb = ImageBuffer::new(h, w, ColorSpace::Rgb, rand_vec_range(h * w * 3, 64, 0.0, 1.0));
    let yuv = rgb_to_yuv(&rgb);
    let (y, uv) = split_yuv(&yuv);
    assert_eq!(y.space, ColorSpace::Y);
    assert_eq!(uv.space, ColorSpace::Uv);
    assert_eq!((y.channels, uv.channels), (1, 2));
    for i in 0..h * w {
        assert_eq!(y.data[i], yuv.data[3 * i], "luma plane sample {i}");
        assert_eq!(uv.data[2 * i], yuv.data[3 * i + 1], "U plane sample {i}");
        assert_eq!(uv.data[2 * i + 1], yuv.data[3 * i + 2], "V plane sample {i}");
    }
    let merged = merge_yuv(&y, &uv);
    assert_eq!(merged.space, ColorSpace::Yuv);
    assert_eq!(merged.data, yuv.data, "merge must invert split bitwise");
}

#[test]
fn tensor_path_agrees_with_image_path() {
    let (h, w) = (8usize, 6usize);
    let img = ImageBuffer::new(h, w, ColorSpace::Rgb, rand_vec_range(h * w * 3, 65, 0.0, 1.0));
    let via_img = rgb_to_yuv(&img).to_tensor();
    let via_tensor = rgb_to_yuv_tensor(&img.to_tensor());
    assert_close(
        via_tensor.data(),
        &f64s(via_img.data()),
        1e-6,
        "1x1-conv conversion vs per-pixel matrix",
    );
    let back = yuv_to_rgb_tensor(&via_tensor);
    assert_close(back.data(), &f64s(img.to_tensor().data()), 1e-5, "tensor roundtrip");
}

#[test]
fn image_tensor_conversion_roundtrips_bitwise() {
    let (h, w) = (5usize, 11usize);
    let img = ImageBuffer::new(h, w, ColorSpace::Rgb, rand_vec_range(h * w * 3, 66, 0.0, 1.0));
    let back = ImageBuffer::from_tensor(&img.to_tensor(), ColorSpace::Rgb);
    assert_eq!(back.data, img.data, "HWC -> CHW -> HWC must be bitwise");
    assert_eq!((back.height, back.width, back.channels), (h, w, 3));
}

#[test]
#[should_panic(expected = "rgb_to_yuv")]
fn forward_conversion_rejects_non_rgb_input() {
    let yuv = rgb_to_yuv(&one_pixel([0.2, 0.4, 0.6]));
    let _ = rgb_to_yuv(&yuv);
}

#[test]
#[should_panic(expected = "merge_yuv")]
fn merge_rejects_mismatched_dims() {
    let y = ImageBuffer::zeros(4, 4, ColorSpace::Y);
    let uv = ImageBuffer::zeros(4, 5, ColorSpace::Uv);
    let _ = merge_yuv(&y, &uv);
}
