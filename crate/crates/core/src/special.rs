//! `log Γ` and the Hurwitz zeta function.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

// B_{2k} / (2k)! for k = 1..12
const BERNOULLI_OVER_FACT: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
    77683.0 / 14_101_100_039_391_805_440_000.0,
    -236_364_091.0 / 1_693_824_136_731_743_669_452_800_000.0,
];

/// `log Γ(x)` for `x > 0`, with `log Γ(1) = log Γ(2) = 0` exactly.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::NonPositiveArgument(x));
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    Ok(libm::lgamma(x))
}

/// `(ζ(0, α), ∂_s ζ(0, α)) = (1/2 - α, log Γ(α) - log(2π)/2)`.
pub fn hurwitz_zeta_at_zero(alpha: f64) -> Result<(f64, f64)> {
    let lg = log_gamma(alpha)?;
    Ok((0.5 - alpha, lg - HALF_LN_2PI))
}

/// `ζ(s, q) = Σ_{k≥0} (k + q)^{-s}` for real `s > 1`, `q > 0`, by
/// Euler-Maclaurin summation.
pub fn hurwitz_zeta(s: f64, q: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Numeric(format!("hurwitz_zeta needs s > 1, got {s}")));
    }
    if !(q > 0.0) {
        return Err(Error::NonPositiveArgument(q));
    }
    // direct terms until the Bernoulli tail is tiny
    let n = (12.0 - q).max(0.0).ceil() as usize + 8;
    let head: f64 = crate::linalg::compensated_sum((0..n).map(|k| (k as f64 + q).powf(-s)));
    let a = n as f64 + q;
    let mut tail = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // s (s+1) ... (s+2j-2) a^{-s-2j+1}
    let mut rising = s;
    let mut pw = a.powf(-s - 1.0);
    for (j, b) in BERNOULLI_OVER_FACT.iter().enumerate() {
        let term = b * rising * pw;
        tail += term;
        if term.abs() < 1e-18 * tail.abs() {
            break;
        }
        let k = 2.0 * j as f64;
        rising *= (s + k + 1.0) * (s + k + 2.0);
        pw /= a * a;
    }
    Ok(head + tail)
}

/// Log-determinant `-∂_s` at 0 of `Σ_{k≥0} ((a + kπ)/r)^{-2s}`.
pub(crate) fn arithmetic_logdet(a: f64, r: f64) -> Result<f64> {
    let alpha = a / PI;
    let (z0, zp) = hurwitz_zeta_at_zero(alpha)?;
    Ok(2.0 * (PI / r).ln() * z0 - 2.0 * zp)
}
