use rand::Rng;

use super::ResampleError;

/// Below this mean draws use sequential-search inversion, above it PTRS.
const INVERSION_LIMIT: f64 = 30.0;

/// One draw from `Pois(lambda)`.
///
/// Small means use inversion by sequential search; larger means use Hormann's
/// transformed rejection with squeeze (PTRS), which needs no normal
/// approximation.
pub fn poisson_sample<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u64, ResampleError> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(ResampleError::InvalidMean(lambda));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    if lambda < INVERSION_LIMIT {
        Ok(inversion(lambda, rng))
    } else {
        Ok(ptrs(lambda, rng))
    }
}

fn inversion<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    // Cut the search once the pmf underflows relative to the cdf.
    while u > cdf && p > 0.0 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

fn ptrs<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln() <= -lambda + k * loglam - ln_factorial(k as u64) {
            return k as u64;
        }
    }
}

/// `ln k!`: exact summation for small `k`, Stirling series beyond.
pub(crate) fn ln_factorial(k: u64) -> f64 {
    if k < 10 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    let x = k as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}
