//! Standard normal density and distribution function.

use std::f64::consts::FRAC_1_SQRT_2;

/// `1 / sqrt(2π)`
pub(crate) const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_868;
/// `ln(sqrt(2π))`
pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_405_617_640;

/// Below this point `erfc` underflows and the log-CDF switches to its
/// asymptotic series.
const LOG_CDF_ASYMPTOTIC_BELOW: f64 = -37.0;

/// Standard normal density `φ(z)`.
#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal distribution function `Φ(z)`; accepts `±∞`.
#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(z)`, computed without cancellation.
#[inline]
pub(crate) fn std_normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// `ln Φ(z)`, accurate deep into the lower tail.
pub fn log_std_normal_cdf(z: f64) -> f64 {
    if z == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if z > 5.0 {
        // Φ(z) ≈ 1: use log1p on the tiny upper tail.
        return (-std_normal_sf(z)).ln_1p();
    }
    if z >= LOG_CDF_ASYMPTOTIC_BELOW {
        return std_normal_cdf(z).ln();
    }
    // Φ(z) = φ(z)/|z| · (1 - 1/z² + 3/z⁴ - 15/z⁶ + 105/z⁸ - 945/z¹⁰ + ...)
    let w = 1.0 / (z * z);
    let series = 1.0 - w * (1.0 - w * (3.0 - w * (15.0 - w * (105.0 - w * 945.0))));
    -0.5 * z * z - LN_SQRT_2PI - (-z).ln() + series.ln()
}

/// Rough standard normal quantile (absolute error below 5e-4), used only to
/// seed root finders.
pub(crate) fn approx_std_normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let (q, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
    let t = (-2.0 * q.ln()).sqrt();
    let num = 2.515_517 + t * (0.802_853 + t * 0.010_328);
    let den = 1.0 + t * (1.432_788 + t * (0.189_269 + t * 0.001_308));
    sign * (t - num / den)
}
