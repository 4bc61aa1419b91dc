//! Naive O(n^2) discrete Fourier transforms straight from the definition.
//! Unnormalized forward, 1/(H*W) inverse — the same convention the engine
//! promises.

use std::f64::consts::TAU;

/// 2-D DFT of a real plane. Returns (re, im), each h*w, unnormalized:
/// F[u,v] = sum_{y,x} f[y,x] * exp(-i*2pi*(u*y/h + v*x/w)).
pub fn dft2(x: &[f64], h: usize, w: usize) -> (Vec<f64>, Vec<f64>) {
    let mut re = vec![0.0; h * w];
    let mut im = vec![0.0; h * w];
    for u in 0..h {
        for v in 0..w {
            let mut acc_re = 0.0;
            let mut acc_im = 0.0;
            for y in 0..h {
                for xo in 0..w {
                    let ang = TAU * (u * y) as f64 / h as f64 + TAU * (v * xo) as f64 / w as f64;
                    acc_re += x[y * w + xo] * ang.cos();
                    acc_im -= x[y * w + xo] * ang.sin();
                }
            }
            re[u * w + v] = acc_re;
            im[u * w + v] = acc_im;
        }
    }
    (re, im)
}

/// 2-D inverse DFT carrying the 1/(h*w) factor. Returns (re, im).
pub fn idft2(re: &[f64], im: &[f64], h: usize, w: usize) -> (Vec<f64>, Vec<f64>) {
    let mut ore = vec![0.0; h * w];
    let mut oim = vec![0.0; h * w];
    let norm = 1.0 / (h * w) as f64;
    for y in 0..h {
        for xo in 0..w {
            let mut acc_re = 0.0;
            let mut acc_im = 0.0;
            for u in 0..h {
                for v in 0..w {
                    let ang = TAU * (u * y) as f64 / h as f64 + TAU * (v * xo) as f64 / w as f64;
                    let (s, c) = ang.sin_cos();
                    let (fr, fi) = (re[u * w + v], im[u * w + v]);
                    acc_re += fr * c - fi * s;
                    acc_im += fr * s + fi * c;
                }
            }
            ore[y * w + xo] = acc_re * norm;
            oim[y * w + xo] = acc_im * norm;
        }
    }
    (ore, oim)
}

/// Amplitude/phase form of `dft2`. Phase at exactly-zero amplitude is 0.
/// A bin whose imaginary part is negligible against its real part is
/// mathematically real (self-conjugate bin of a real input); its rounding
/// noise is snapped to +0 so the phase lands on +pi, never -pi.
pub fn dft2_polar(x: &[f64], h: usize, w: usize) -> (Vec<f64>, Vec<f64>) {
    let (re, im) = dft2(x, h, w);
    let mut amp = vec![0.0; h * w];
    let mut ph = vec![0.0; h * w];
    for i in 0..h * w {
        amp[i] = re[i].hypot(im[i]);
        ph[i] = if amp[i] == 0.0 {
            0.0
        } else {
            let imc = if im[i].abs() <= 1e-9 * re[i].abs() { 0.0 } else { im[i] };
            imc.atan2(re[i])
        };
    }
    (amp, ph)
}

/// Real part of the inverse DFT of an amplitude/phase spectrum.
pub fn idft2_polar_real(amp: &[f64], ph: &[f64], h: usize, w: usize) -> Vec<f64> {
    let re: Vec<f64> = amp.iter().zip(ph).map(|(a, p)| a * p.cos()).collect();
    let im: Vec<f64> = amp.iter().zip(ph).map(|(a, p)| a * p.sin()).collect();
    idft2(&re, &im, h, w).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_recovers_input() {
        let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
        let (re, im) = dft2(&x, 3, 4);
        let (back, imag) = idft2(&re, &im, 3, 4);
        for i in 0..12 {
            assert!((back[i] - x[i]).abs() < 1e-10);
            assert!(imag[i].abs() < 1e-10);
        }
    }

    #[test]
    fn constant_plane_has_dc_only() {
        let x = vec![2.0; 6];
        let (re, im) = dft2(&x, 2, 3);
        assert!((re[0] - 12.0).abs() < 1e-12);
        for i in 1..6 {
            assert!(re[i].abs() < 1e-10 && im[i].abs() < 1e-10);
        }
    }
}
