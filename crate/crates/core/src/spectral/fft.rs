//! Fast discrete Fourier transform for arbitrary lengths.
//!
//! Power-of-two lengths run an iterative radix-2 Cooley-Tukey kernel. Every
//! other length goes through Bluestein's chirp-z identity, which rewrites the
//! length-`n` DFT as a circular convolution of power-of-two length
//! `m >= 2n - 1`:
//!
//! ```text
//! kn = (k^2 + n^2 - (k - n)^2) / 2
//! X[k] = c[k] * sum_n (x[n] c[n]) conj(c[k - n]),   c[k] = exp(-i pi k^2 / N)
//! ```
//!
//! The chirp angle is reduced with `k^2 mod 2N` in integer arithmetic so it
//! stays accurate for long records.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Forward transform, `X[k] = sum_n x[n] exp(-2 pi i k n / N)`, unnormalized.
pub fn fft(input: &[Complex64]) -> Vec<Complex64> {
    transform(input, false)
}

/// Inverse transform including the `1/N` factor.
pub fn ifft(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    let mut out = transform(input, true);
    if n > 0 {
        let scale = 1.0 / n as f64;
        out.iter_mut().for_each(|v| *v *= scale);
    }
    out
}

/// Forward transform of a real sequence.
pub fn fft_real(input: &[f64]) -> Vec<Complex64> {
    let buf: Vec<Complex64> = input.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&buf)
}

fn transform(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    match n {
        0 => Vec::new(),
        1 => input.to_vec(),
        _ if n.is_power_of_two() => {
            let mut buf = input.to_vec();
            radix2(&mut buf, inverse);
            buf
        }
        _ => bluestein(input, inverse),
    }
}

/// In-place iterative radix-2 transform. `buf.len()` must be a power of two.
fn radix2(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    if bits == 0 {
        return;
    }

    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64))
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

fn bluestein(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    let m = (2 * n - 1).next_power_of_two();
    let sign = if inverse { 1.0 } else { -1.0 };

    let two_n = 2 * n as u128;
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let k = k as u128;
            let reduced = (k * k) % two_n;
            Complex64::from_polar(1.0, sign * PI * reduced as f64 / n as f64)
        })
        .collect();

    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for (slot, (x, c)) in a.iter_mut().zip(input.iter().zip(&chirp)) {
        *slot = x * c;
    }

    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        let v = chirp[k].conj();
        b[k] = v;
        b[m - k] = v;
    }

    radix2(&mut a, false);
    radix2(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    radix2(&mut a, true);

    let scale = 1.0 / m as f64;
    (0..n).map(|k| a[k] * scale * chirp[k]).collect()
}
