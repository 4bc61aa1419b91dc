//! Complex FFT engine: iterative radix-2 for power-of-two lengths, Bluestein
//! chirp-z for everything else. Forward is unnormalized; inverse divides by n.
//! All arithmetic in f64.

use num_complex::Complex64;
use std::f64::consts::PI;

/// In-place forward DFT (unnormalized), any length >= 1.
pub fn fft_inplace(buf: &mut [Complex64]) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        fft_pow2(buf);
    } else {
        bluestein(buf);
    }
}

/// In-place inverse DFT including the 1/n factor.
pub fn ifft_inplace(buf: &mut [Complex64]) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    for v in buf.iter_mut() {
        *v = v.conj();
    }
    fft_inplace(buf);
    let inv = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v = v.conj() * inv;
    }
}

/// Cooley-Tukey with bit-reversal permutation and a shared twiddle table
/// (table[k] = exp(-2*pi*i*k/n), strided per stage).
fn fft_pow2(a: &mut [Complex64]) {
    let n = a.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let tw: Vec<Complex64> = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = tw[k * step];
                let u = a[start + k];
                let v = a[start + k + half] * w;
                a[start + k] = u + v;
                a[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

/// Bluestein: express the length-n DFT as a length-m (power of two) circular
/// convolution with a chirp. Chirp angles use k^2 mod 2n to stay exact for
/// large k.
fn bluestein(x: &mut [Complex64]) {
    let n = x.len();
    let m = (2 * n - 1).next_power_of_two();
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let sq = (k as u128 * k as u128 % (2 * n) as u128) as f64;
            Complex64::from_polar(1.0, -PI * sq / n as f64)
        })
        .collect();
    let mut a = vec![Complex64::ZERO; m];
    for k in 0..n {
        a[k] = x[k] * chirp[k];
    }
    let mut b = vec![Complex64::ZERO; m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        let c = chirp[k].conj();
        b[k] = c;
        b[m - k] = c;
    }
    fft_pow2(&mut a);
    fft_pow2(&mut b);
    for i in 0..m {
        a[i] *= b[i];
    }
    // Inverse length-m FFT via conjugation.
    for v in a.iter_mut() {
        *v = v.conj();
    }
    fft_pow2(&mut a);
    let inv = 1.0 / m as f64;
    for (k, dst) in x.iter_mut().enumerate() {
        *dst = a[k].conj() * inv * chirp[k];
    }
}

/// 2D forward DFT (unnormalized): rows, then columns.
pub fn fft2(data: &mut [Complex64], h: usize, w: usize) {
    assert_eq!(data.len(), h * w);
    for row in data.chunks_mut(w) {
        fft_inplace(row);
    }
    let mut col = vec![Complex64::ZERO; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = data[y * w + x];
        }
        fft_inplace(&mut col);
        for y in 0..h {
            data[y * w + x] = col[y];
        }
    }
}

/// 2D inverse DFT including the 1/(h*w) factor.
pub fn ifft2(data: &mut [Complex64], h: usize, w: usize) {
    assert_eq!(data.len(), h * w);
    for v in data.iter_mut() {
        *v = v.conj();
    }
    fft2(data, h, w);
    let inv = 1.0 / (h * w) as f64;
    for v in data.iter_mut() {
        *v = v.conj() * inv;
    }
}
