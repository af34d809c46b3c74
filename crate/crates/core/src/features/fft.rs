//! Iterative radix-2 FFT and spectral band averaging.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    #[inline]
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn abs(self) -> f64 {
        libm::hypot(self.re, self.im)
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }
}

impl Add for Complex {
    type Output = Complex;
    #[inline]
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    #[inline]
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    #[inline]
    fn mul(self, o: Complex) -> Complex {
        Complex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

fn transform(buf: &mut [Complex], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    // Twiddles computed directly rather than by recurrence so the error
    // stays at a few ulps for long transforms.
    let sign = if inverse { 1.0 } else { -1.0 };
    let twiddles: Vec<Complex> = (0..n / 2)
        .map(|k| {
            let a = sign * 2.0 * PI * k as f64 / n as f64;
            Complex::new(libm::cos(a), libm::sin(a))
        })
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

/// In-place forward DFT, `X_k = sum x_j e^{-2 pi i jk/N}`.
pub fn fft_in_place(buf: &mut [Complex]) {
    transform(buf, false);
}

/// In-place inverse DFT including the `1/N` factor.
pub fn ifft_in_place(buf: &mut [Complex]) {
    transform(buf, true);
    let scale = 1.0 / buf.len() as f64;
    for c in buf.iter_mut() {
        c.re *= scale;
        c.im *= scale;
    }
}

/// Forward transform of a real series zero-padded to the next power of two.
pub fn fft_real_padded(x: &[f64]) -> Vec<Complex> {
    let n = x.len().max(1).next_power_of_two();
    let mut buf = vec![Complex::ZERO; n];
    for (b, &v) in buf.iter_mut().zip(x) {
        b.re = v;
    }
    fft_in_place(&mut buf);
    buf
}

/// Nine frequency bands given by ten ascending edges in Hz. A bin belongs to
/// band `k` when its frequency lies in `(edges[k], edges[k + 1]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralBandSpec {
    pub edges: [f64; 10],
}

impl SpectralBandSpec {
    pub const N_BANDS: usize = 9;

    /// Log-spaced edges from 20 Hz to the Nyquist frequency of `rate_hz`.
    pub fn log_spaced(rate_hz: f64) -> Self {
        let lo = 20.0_f64;
        let hi = rate_hz / 2.0;
        let mut edges = [0.0; 10];
        for (k, e) in edges.iter_mut().enumerate() {
            *e = lo * libm::pow(hi / lo, k as f64 / 9.0);
        }
        edges[0] = lo;
        edges[9] = hi;
        Self { edges }
    }

    pub fn validate(&self, rate_hz: f64) -> Result<()> {
        let e = &self.edges;
        if !(e[0] > 0.0) || e.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("band edges must be finite and start above 0 Hz".into()));
        }
        if e.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("band edges must be strictly increasing".into()));
        }
        if (e[9] - rate_hz / 2.0).abs() > 1e-9 * rate_hz {
            return Err(Error::InvalidParameter(alloc::format!(
                "last band edge {} must equal the Nyquist frequency {}",
                e[9],
                rate_hz / 2.0
            )));
        }
        Ok(())
    }
}

impl Default for SpectralBandSpec {
    fn default() -> Self {
        Self::log_spaced(crate::FAST_RATE_HZ)
    }
}

/// Mean DFT magnitude per band of the zero-padded series. Bands that
/// contain no bin report 0.
pub fn band_averages(x: &[f64], rate_hz: f64, spec: &SpectralBandSpec) -> Result<[f64; 9]> {
    if x.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: x.len() });
    }
    let spectrum = fft_real_padded(x);
    let n = spectrum.len();
    let mut sums = [0.0; 9];
    let mut counts = [0usize; 9];
    let mut band = 0;
    for (k, c) in spectrum.iter().enumerate().take(n / 2 + 1) {
        let f = k as f64 * rate_hz / n as f64;
        if f <= spec.edges[0] {
            continue;
        }
        while band < 9 && f > spec.edges[band + 1] {
            band += 1;
        }
        if band == 9 {
            break;
        }
        sums[band] += c.abs();
        counts[band] += 1;
    }
    let mut out = [0.0; 9];
    for b in 0..9 {
        if counts[b] > 0 {
            out[b] = sums[b] / counts[b] as f64;
        }
    }
    Ok(out)
}
