//! Scalar statistics over a sampled series.
//!
//! A series has `N` samples indexed `0..N`. Divisors follow the feature
//! definitions the classifiers were tuned against, including the cubed
//! `(N - 1)` divisor of the skewness.

use crate::error::{Error, Result};

/// Variance below this is treated as zero when normalizing the kurtosis.
pub const KURTOSIS_VARIANCE_EPS: f64 = 1e-12;

fn need(x: &[f64], n: usize) -> Result<()> {
    if x.len() < n {
        Err(Error::TooShort {
            needed: n,
            got: x.len(),
        })
    } else {
        Ok(())
    }
}

pub fn sum(x: &[f64]) -> Result<f64> {
    need(x, 1)?;
    Ok(x.iter().sum())
}

pub fn max(x: &[f64]) -> Result<f64> {
    need(x, 1)?;
    Ok(x.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

pub fn min(x: &[f64]) -> Result<f64> {
    need(x, 1)?;
    Ok(x.iter().copied().fold(f64::INFINITY, f64::min))
}

pub fn mean(x: &[f64]) -> Result<f64> {
    Ok(sum(x)? / x.len() as f64)
}

/// Population variance (divisor `N`).
pub fn variance(x: &[f64]) -> Result<f64> {
    let mu = mean(x)?;
    Ok(central_sum(x, mu, 2) / x.len() as f64)
}

fn central_sum(x: &[f64], mu: f64, power: u32) -> f64 {
    x.iter()
        .map(|&v| {
            let d = v - mu;
            match power {
                2 => d * d,
                3 => d * d * d,
                _ => (d * d) * (d * d),
            }
        })
        .sum()
}

/// Third central moment sum over `(N - 1)^3`.
pub fn skewness(x: &[f64]) -> Result<f64> {
    need(x, 2)?;
    let mu = mean(x)?;
    let d = (x.len() - 1) as f64;
    Ok(central_sum(x, mu, 3) / (d * d * d))
}

/// Moment-ratio skewness `m3 / m2^1.5`; 0 for constant input.
pub fn standard_skewness(x: &[f64]) -> Result<f64> {
    need(x, 2)?;
    let mu = mean(x)?;
    let n = x.len() as f64;
    let m2 = central_sum(x, mu, 2) / n;
    if m2 < KURTOSIS_VARIANCE_EPS {
        return Ok(0.0);
    }
    Ok(central_sum(x, mu, 3) / n / libm::pow(m2, 1.5))
}

/// Fourth central moment sum over `N * var^2`; 0 when the variance is
/// below [`KURTOSIS_VARIANCE_EPS`].
pub fn kurtosis(x: &[f64]) -> Result<f64> {
    need(x, 1)?;
    let mu = mean(x)?;
    let n = x.len() as f64;
    let var = central_sum(x, mu, 2) / n;
    if var < KURTOSIS_VARIANCE_EPS {
        return Ok(0.0);
    }
    Ok(central_sum(x, mu, 4) / (n * var * var))
}

#[inline]
pub fn sign(v: f64) -> u8 {
    u8::from(v >= 0.0)
}

/// Adjacent sign changes divided by `N`.
pub fn zcr(x: &[f64]) -> Result<f64> {
    need(x, 2)?;
    let changes = x.windows(2).filter(|w| sign(w[0]) != sign(w[1])).count();
    Ok(changes as f64 / x.len() as f64)
}

/// First index whose value reaches 80% of the series maximum.
pub fn rise80(x: &[f64]) -> Result<usize> {
    let peak = max(x)?;
    if peak <= 0.0 {
        return Err(Error::NoContact);
    }
    let level = 0.8 * peak;
    // the maximum itself always qualifies
    Ok(x.iter().position(|&v| v >= level).unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_values() {
        assert_eq!(sum(&[1.0, 2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(sum(&[-1.0, 1.0]).unwrap(), 0.0);
        let x = [3.0, 1.0, 2.0];
        assert_eq!(max(&x).unwrap(), 3.0);
        assert_eq!(min(&x).unwrap(), 1.0);
        assert_eq!(mean(&x).unwrap(), 2.0);
        let c = [4.5; 7];
        assert_eq!((max(&c).unwrap(), min(&c).unwrap(), mean(&c).unwrap()), (4.5, 4.5, 4.5));
    }

    #[test]
    fn variance_values() {
        assert_eq!(variance(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(variance(&[0.0, 2.0]).unwrap(), 1.0);
    }

    #[test]
    fn skewness_values() {
        assert_eq!(skewness(&[-1.0, 0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(skewness(&[0.0, 0.0, 3.0]).unwrap(), 0.75);
        assert!(skewness(&[1.0]).is_err());
        assert_eq!(standard_skewness(&[2.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn kurtosis_values() {
        assert_eq!(kurtosis(&[3.0; 5]).unwrap(), 0.0);
        assert_eq!(kurtosis(&[-1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn sign_and_zcr() {
        assert_eq!(sign(-0.5), 0);
        assert_eq!(sign(0.0), 1);
        assert_eq!(sign(7.0), 1);
        assert_eq!(zcr(&[1.0, -1.0, 1.0, -1.0]).unwrap(), 0.75);
        assert_eq!(zcr(&[0.1, 2.0, 5.0]).unwrap(), 0.0);
        assert!(zcr(&[1.0]).is_err());
    }

    #[test]
    fn rise80_values() {
        assert_eq!(rise80(&[0.0, 5.0, 8.0, 10.0, 7.0]).unwrap(), 2);
        assert_eq!(rise80(&[10.0, 3.0, 1.0]).unwrap(), 0);
        let ramp: [f64; 11] = core::array::from_fn(|i| i as f64);
        assert_eq!(rise80(&ramp).unwrap(), 8);
        assert_eq!(rise80(&[-1.0, -2.0]).unwrap_err(), Error::NoContact);
        assert_eq!(rise80(&[0.0, 0.0]).unwrap_err(), Error::NoContact);
    }

    #[test]
    fn empty_inputs_error() {
        for f in [sum, max, min, mean, variance, kurtosis] {
            assert!(f(&[]).is_err());
        }
    }
}
