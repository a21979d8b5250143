//! Owen's T function.
//!
//! `T(h, a) = (1/2π) ∫₀ᵃ exp(-h²(1+t²)/2) / (1+t²) dt`
//!
//! For `|a| ≤ 1` the defining integral is evaluated directly with a fixed
//! 21-point Kronrod rule on panels no wider than `2/h`, after factoring out
//! `exp(-h²/2)`. The integrand is positive there, so the result carries
//! relative as well as absolute accuracy. For `|a| > 1` the reflection
//!
//! `T(h, a) = ½[Φ(h)Q(ah) + Φ(ah)Q(h)] - T(ah, 1/a)`,  `h ≥ 0`,
//!
//! maps the problem back onto `|a| < 1`. `Q = 1 - Φ` is evaluated directly
//! so the bracket carries no cancellation.

use std::f64::consts::PI;

use super::normal::{std_normal_cdf, std_normal_sf};
use crate::moments::quadrature::{KRONROD21_NODES, KRONROD21_WEIGHTS};

/// Beyond `h·t` of this size the integrand is below `e^-42` of its value
/// at `t = 0`.
const TAIL_CUTOFF: f64 = 9.2;

/// Owen's T function for finite `h` and `a`.
///
/// Odd in `a`, even in `h`:
///
/// ```
/// use tsn::owen_t;
/// let t = owen_t(1.0, 1.0);
/// assert!((t - 0.066_741_882_165_7).abs() < 1e-13);
/// assert_eq!(owen_t(-1.0, 1.0), t);
/// assert_eq!(owen_t(1.0, -1.0), -t);
/// ```
pub fn owen_t(h: f64, a: f64) -> f64 {
    if a == 0.0 || h.is_infinite() {
        return 0.0;
    }
    let h = h.abs();
    let value = if a.abs() <= 1.0 {
        t_direct(h, a.abs())
    } else {
        let a = a.abs();
        let ah = a * h;
        let bracket = std_normal_cdf(h) * std_normal_sf(ah) + std_normal_cdf(ah) * std_normal_sf(h);
        0.5 * bracket - t_direct(ah, 1.0 / a)
    };
    value.copysign(a)
}

/// Direct quadrature of the defining integral for `h ≥ 0`, `0 < a ≤ 1`.
fn t_direct(h: f64, a: f64) -> f64 {
    let scale = (-0.5 * h * h).exp();
    if scale == 0.0 {
        return 0.0;
    }
    let upper = if h > 0.0 { a.min(TAIL_CUTOFF / h) } else { a };
    let panels = ((upper * h) / 2.0).ceil().max(1.0) as usize;
    let width = upper / panels as f64;
    let half_h2 = 0.5 * h * h;

    let integrand = |t: f64| {
        let t2 = t * t;
        (-half_h2 * t2).exp() / (1.0 + t2)
    };

    let mut total = 0.0;
    for p in 0..panels {
        let lo = p as f64 * width;
        let center = lo + 0.5 * width;
        let half = 0.5 * width;
        let mut sum = KRONROD21_WEIGHTS[10] * integrand(center);
        for (node, weight) in KRONROD21_NODES.iter().zip(KRONROD21_WEIGHTS.iter()).take(10) {
            let dx = half * node;
            sum += weight * (integrand(center - dx) + integrand(center + dx));
        }
        total += sum * half;
    }
    scale * total / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Composite Simpson rule on the defining integral.
    fn owen_oracle(h: f64, a: f64) -> f64 {
        let n = 20_000;
        let step = a / n as f64;
        let f = |t: f64| (-0.5 * h * h * (1.0 + t * t)).exp() / (1.0 + t * t);
        let mut sum = f(0.0) + f(a);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(i as f64 * step);
        }
        sum * step / 3.0 / (2.0 * PI)
    }

    #[test]
    fn reference_values() {
        assert_eq!(owen_t(3.0, 0.0), 0.0);
        assert_abs_diff_eq!(owen_t(0.0, 1.0), 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(owen_t(1.0, 1.0), 0.066_741_882_165_700_97, epsilon = 1e-15);
    }

    #[test]
    fn closed_forms() {
        // T(0, a) = atan(a) / 2π
        for &a in &[0.1, 0.5, 1.0, 2.0, 10.0, 1e3] {
            assert_abs_diff_eq!(owen_t(0.0, a), a.atan() / (2.0 * PI), epsilon = 1e-15);
        }
        // T(h, 1) = Φ(h)(1 - Φ(h)) / 2
        for i in 0..60 {
            let h = i as f64 * 0.25;
            let expect = 0.5 * std_normal_cdf(h) * std_normal_sf(h);
            assert_abs_diff_eq!(owen_t(h, 1.0), expect, epsilon = 1e-16);
        }
    }

    #[test]
    fn matches_quadrature_oracle() {
        for &h in &[0.0, 0.1, 0.7, 1.5, 3.0, 5.0, 8.0] {
            for &a in &[0.05, 0.3, 0.99, 1.01, 2.5, 7.0, 20.0] {
                let got = owen_t(h, a);
                let want = owen_oracle(h, a);
                assert!((got - want).abs() <= 1e-14, "T({h},{a}) = {got}, oracle {want}");
            }
        }
    }

    #[test]
    fn large_arguments() {
        assert_eq!(owen_t(f64::INFINITY, 2.0), 0.0);
        assert_abs_diff_eq!(owen_t(40.0, 3.0), 0.0, epsilon = 1e-300);
        // T(h, a) → Q(h)/2 as a → ∞ for h > 0
        assert_abs_diff_eq!(owen_t(1.0, 1e8), 0.5 * std_normal_sf(1.0), epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn symmetries(h in -10.0f64..10.0, a in -30.0f64..30.0) {
            let t = owen_t(h, a);
            prop_assert_eq!(owen_t(-h, a), t);
            prop_assert_eq!(owen_t(h, -a), -t);
            prop_assert!(t.abs() <= 0.25 + 1e-15);
        }
    }
}
