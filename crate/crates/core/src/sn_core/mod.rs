//! Skew-normal and truncated skew-normal distribution functions.

mod normal;
mod owen;

pub use normal::{log_std_normal_cdf, std_normal_cdf, std_normal_pdf};
pub use owen::owen_t;

pub(crate) use normal::{approx_std_normal_quantile, LN_SQRT_2PI};

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_2_PI, LN_2};

use crate::error::{Result, TsnError};

/// Truncated models whose retained probability falls below this are
/// rejected as degenerate.
pub const MASS_FLOOR: f64 = 1e-12;

/// Standardized search range for quantiles, in units of ω.
const QUANTILE_RANGE: f64 = 15.0;

/// Location `xi`, scale `omega` and shape `alpha` of a skew-normal law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnParams {
    pub xi: f64,
    pub omega: f64,
    pub alpha: f64,
}

impl SnParams {
    pub fn new(xi: f64, omega: f64, alpha: f64) -> Result<Self> {
        let p = Self { xi, omega, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi.is_finite() && self.omega.is_finite() && self.alpha.is_finite()) {
            return Err(TsnError::InvalidParams(format!("non-finite component in {self:?}")));
        }
        if self.omega <= 0.0 {
            return Err(TsnError::InvalidParams(format!("scale must be positive, got {}", self.omega)));
        }
        Ok(())
    }

    /// `δ = α / sqrt(1 + α²)`
    pub fn delta(&self) -> f64 {
        delta_of(self.alpha)
    }

    #[inline]
    pub(crate) fn standardize(&self, x: f64) -> f64 {
        (x - self.xi) / self.omega
    }
}

pub(crate) fn delta_of(alpha: f64) -> f64 {
    alpha / (1.0 + alpha * alpha).sqrt()
}

/// Mean and variance of the untruncated standard skew-normal with shape α.
pub(crate) fn std_sn_mean_var(alpha: f64) -> (f64, f64) {
    let mu = delta_of(alpha) * FRAC_2_PI.sqrt();
    (mu, 1.0 - mu * mu)
}

/// The known interval `[lower, upper]`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationWindow {
    lower: f64,
    upper: f64,
}

impl TruncationWindow {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(TsnError::InvalidWindow { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    /// The whole real line.
    pub fn unbounded() -> Self {
        Self { lower: f64::NEG_INFINITY, upper: f64::INFINITY }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn is_unbounded(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lower).min(self.upper)
    }

    /// Image of the window under `x ↦ shift + scale·x` with `scale > 0`.
    pub fn affine(&self, shift: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !shift.is_finite() {
            return Err(TsnError::InvalidArgument(format!(
                "affine map needs finite shift and positive scale, got ({shift}, {scale})"
            )));
        }
        Self::new(shift + scale * self.lower, shift + scale * self.upper)
    }

    /// A finite reference point: the lower end if finite, else the upper
    /// end, else zero.
    pub(crate) fn finite_anchor(&self) -> f64 {
        if self.lower.is_finite() {
            self.lower
        } else if self.upper.is_finite() {
            self.upper
        } else {
            0.0
        }
    }
}

/// A skew-normal law conditioned on a truncation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsnModel {
    params: SnParams,
    window: TruncationWindow,
    mass: f64,
}

impl TsnModel {
    /// Fails with [`TsnError::DegenerateWindow`] when the window retains less
    /// than [`MASS_FLOOR`] of the parent distribution.
    pub fn new(params: SnParams, window: TruncationWindow) -> Result<Self> {
        params.validate()?;
        let mass = sn_window_mass(&params, &window);
        if !(mass >= MASS_FLOOR) {
            return Err(TsnError::DegenerateWindow { mass });
        }
        Ok(Self { params, window, mass })
    }

    pub fn params(&self) -> &SnParams {
        &self.params
    }

    pub fn window(&self) -> &TruncationWindow {
        &self.window
    }

    /// `F_SN(U) - F_SN(L)`
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Window endpoints in standardized units `(x - ξ)/ω`.
    pub(crate) fn std_bounds(&self) -> (f64, f64) {
        (self.params.standardize(self.window.lower), self.params.standardize(self.window.upper))
    }
}

/// Skew-normal density `(2/ω) φ(z) Φ(αz)`, `z = (x-ξ)/ω`.
///
/// ```
/// use tsn::{sn_pdf, SnParams};
/// let p = SnParams::new(0.0, 1.0, 7.0).unwrap();
/// // Φ(0) = 1/2 cancels the factor 2
/// assert!((sn_pdf(0.0, &p) - 0.398_942_280_4).abs() < 1e-10);
/// ```
pub fn sn_pdf(x: f64, p: &SnParams) -> f64 {
    let z = p.standardize(x);
    2.0 / p.omega * std_normal_pdf(z) * std_normal_cdf(p.alpha * z)
}

/// `ln f_SN(x)` accumulated as `ln 2 - ln ω + ln φ(z) + ln Φ(αz)`.
pub fn sn_log_pdf(x: f64, p: &SnParams) -> f64 {
    let z = p.standardize(x);
    LN_2 - p.omega.ln() - 0.5 * z * z - LN_SQRT_2PI + log_std_normal_cdf(p.alpha * z)
}

/// Skew-normal distribution function `Φ(z) - 2 T(z, α)`.
pub fn sn_cdf(x: f64, p: &SnParams) -> f64 {
    std_sn_cdf(p.standardize(x), p.alpha)
}

/// CDF of the standard (ξ=0, ω=1) skew-normal.
pub(crate) fn std_sn_cdf(z: f64, alpha: f64) -> f64 {
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    if z == f64::INFINITY {
        return 1.0;
    }
    (std_normal_cdf(z) - 2.0 * owen_t(z, alpha)).clamp(0.0, 1.0)
}

/// Survival function of the standard skew-normal via the reflection
/// `1 - F(z; α) = F(-z; -α)`.
#[inline]
pub(crate) fn std_sn_sf(z: f64, alpha: f64) -> f64 {
    std_sn_cdf(-z, -alpha)
}

/// Standardized density `2 φ(z) Φ(αz)`.
#[inline]
pub(crate) fn std_sn_pdf(z: f64, alpha: f64) -> f64 {
    2.0 * std_normal_pdf(z) * std_normal_cdf(alpha * z)
}

/// Probability of the window under the untruncated law, computed on whichever
/// side of the distribution avoids cancellation.
pub(crate) fn std_window_mass(a: f64, b: f64, alpha: f64) -> f64 {
    if a >= 0.0 {
        std_sn_sf(a, alpha) - std_sn_sf(b, alpha)
    } else {
        std_sn_cdf(b, alpha) - std_sn_cdf(a, alpha)
    }
}

fn sn_window_mass(p: &SnParams, w: &TruncationWindow) -> f64 {
    std_window_mass(p.standardize(w.lower), p.standardize(w.upper), p.alpha)
}

/// Skew-normal quantile function.
///
/// Safeguarded Newton iteration inside the bracket `ξ ± 15ω`; upper-half
/// probabilities are solved on the reflected law for tail accuracy.
pub fn sn_quantile(prob: f64, p: &SnParams) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(TsnError::ProbabilityOutOfRange(prob));
    }
    p.validate()?;
    let z = if prob <= 0.5 {
        std_sn_quantile_lower(prob, p.alpha, -QUANTILE_RANGE, QUANTILE_RANGE)
    } else {
        -std_sn_quantile_lower(1.0 - prob, -p.alpha, -QUANTILE_RANGE, QUANTILE_RANGE)
    };
    Ok(p.xi + p.omega * z)
}

/// Solve `F(z; α) = target` for `z ∈ [lo, hi]` by safeguarded Newton.
pub(crate) fn std_sn_quantile_lower(target: f64, alpha: f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let (mu, var) = std_sn_mean_var(alpha);
    let mut z = if target > 0.0 && target < 1.0 {
        mu + var.sqrt() * approx_std_normal_quantile(target)
    } else {
        0.5 * (lo + hi)
    };
    if !(z > lo && z < hi) {
        z = 0.5 * (lo + hi);
    }

    for _ in 0..200 {
        let f = std_sn_cdf(z, alpha) - target;
        if f == 0.0 {
            return z;
        }
        if f < 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        if f.abs() <= 1e-15 * target.max(1e-300).min(1.0) || hi - lo <= 4.0 * f64::EPSILON * z.abs().max(1.0) {
            return z;
        }
        let d = std_sn_pdf(z, alpha);
        let newton = z - f / d;
        z = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    z
}

/// Truncated density: zero outside the window, `f_SN / mass` inside.
pub fn tsn_pdf(x: f64, m: &TsnModel) -> f64 {
    if !m.window.contains(x) {
        return 0.0;
    }
    sn_pdf(x, &m.params) / m.mass
}

/// Truncated distribution function; 0 at and below `L`, 1 at and above `U`.
pub fn tsn_cdf(x: f64, m: &TsnModel) -> f64 {
    if x <= m.window.lower {
        return 0.0;
    }
    if x >= m.window.upper {
        return 1.0;
    }
    let (a, _) = m.std_bounds();
    let z = m.params.standardize(x);
    (std_window_mass(a, z, m.params.alpha) / m.mass).clamp(0.0, 1.0)
}

/// Truncated log-likelihood `Σ ln f_SN(xᵢ) - n ln(F(U) - F(L))`.
///
/// ```
/// use tsn::{tsn_loglik, SnParams, TruncationWindow, TsnModel};
/// let m = TsnModel::new(SnParams::new(0.0, 1.0, 5.0).unwrap(), TruncationWindow::unbounded()).unwrap();
/// let ll = tsn_loglik(&[0.0], &m).unwrap();
/// assert!((ll + 0.918_938_5).abs() < 1e-7);
/// ```
pub fn tsn_loglik(data: &[f64], m: &TsnModel) -> Result<f64> {
    if data.is_empty() {
        return Err(TsnError::TooFewObservations { needed: 1, got: 0 });
    }
    if let Some((index, &value)) = data.iter().enumerate().find(|(_, x)| !m.window.contains(**x)) {
        return Err(TsnError::DataOutsideWindow { index, value });
    }
    Ok(loglik_in_window(data, m))
}

/// Log-likelihood without the window membership check.
pub(crate) fn loglik_in_window(data: &[f64], m: &TsnModel) -> f64 {
    let p = &m.params;
    let sum: f64 = data.iter().map(|&x| sn_log_pdf(x, p)).sum();
    sum - data.len() as f64 * m.mass.ln()
}
