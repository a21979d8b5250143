//! Moments and the Φ-weighted moment of the truncated skew-normal,
//! evaluated by adaptive quadrature in standardized units.
//!
//! With `X = ξ + ωZ` the integrals run over `z ∈ [(L-ξ)/ω, (U-ξ)/ω]` against
//! the unnormalized standard density `2φ(z)Φ(αz)`, so node placement does
//! not depend on the location or scale. Powers are taken about a shift `c`
//! close to the truncated mean, which keeps `E[(Z-c)²] - E[Z-c]²` free of
//! cancellation even when the window sits far out in a tail.

pub mod quadrature;

pub use quadrature::{integrate, integrate_with, Scaling, Tolerance};

use crate::error::{Result, TsnError};
use crate::sn_core::{std_normal_cdf, std_normal_pdf, std_sn_mean_var, TsnModel};

/// Relative tolerance for the internal moment integrals.
const MOMENT_TOL: Tolerance = Tolerance { rel: 1e-11, abs: 0.0, max_subdivisions: 200 };

/// Request for `E[Xᵏ Φʳ(X) | L ≤ X ≤ U]` with `k ≤ 3`, `r ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRequest {
    model: TsnModel,
    power_k: u32,
    phi_weight_r: u32,
}

impl MomentRequest {
    /// `(k, r) = (0, 0)` is accepted and yields the normalization, 1.
    pub fn new(model: TsnModel, power_k: u32, phi_weight_r: u32) -> Result<Self> {
        if power_k > 3 || phi_weight_r > 1 {
            return Err(TsnError::InvalidArgument(format!(
                "weighted moment (k={power_k}, r={phi_weight_r}) outside the supported range k ≤ 3, r ≤ 1"
            )));
        }
        Ok(Self { model, power_k, phi_weight_r })
    }
}

/// Evaluate a [`MomentRequest`] directly by quadrature.
pub fn tsn_weighted_moment(req: &MomentRequest) -> Result<f64> {
    let p = *req.model.params();
    let (a, b) = req.model.std_bounds();
    let (k, r) = (req.power_k as i32, req.phi_weight_r);
    let [mass, value] = integrate_pieces(a, b, shift_point(p.alpha, a, b), |z| {
        let g = std_density(z, p.alpha);
        let x = p.xi + p.omega * z;
        let w = if r == 1 { std_normal_cdf(x) } else { 1.0 };
        [g, g * x.powi(k) * w]
    })?;
    Ok(value / mass)
}

/// `E[Xᵏ | L ≤ X ≤ U]` for `k ∈ {1, 2, 3}`.
///
/// ```
/// use tsn::{tsn_raw_moment, SnParams, TruncationWindow, TsnModel};
/// let half_normal = TsnModel::new(
///     SnParams::new(0.0, 1.0, 0.0).unwrap(),
///     TruncationWindow::new(0.0, f64::INFINITY).unwrap(),
/// ).unwrap();
/// let mean = tsn_raw_moment(&half_normal, 1).unwrap();
/// assert!((mean - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-10);
/// ```
pub fn tsn_raw_moment(m: &TsnModel, k: u32) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return Err(TsnError::InvalidArgument(format!("raw moment order must be 1, 2 or 3, got {k}")));
    }
    let raw = raw_moments(m)?;
    Ok(raw[k as usize - 1])
}

/// First three raw moments `[E X, E X², E X³]`.
pub(crate) fn raw_moments(m: &TsnModel) -> Result<[f64; 3]> {
    let p = m.params();
    let s = shifted(m)?;
    // X = base + ω (Z - c)
    let base = p.xi + p.omega * s.shift;
    let (w, w2, w3) = (p.omega, p.omega * p.omega, p.omega.powi(3));
    let m1 = base + w * s.central[0];
    let m2 = base * base + 2.0 * base * w * s.central[0] + w2 * s.central[1];
    let m3 = base.powi(3) + 3.0 * base * base * w * s.central[0] + 3.0 * base * w2 * s.central[1] + w3 * s.central[2];
    Ok([m1, m2, m3])
}

pub fn tsn_mean(m: &TsnModel) -> Result<f64> {
    mean_variance(m).map(|(mean, _)| mean)
}

/// Variance, computed from moments about a point near the mean.
pub fn tsn_variance(m: &TsnModel) -> Result<f64> {
    mean_variance(m).map(|(_, var)| var)
}

/// `(E X, Var X)` from a single quadrature pass.
pub fn mean_variance(m: &TsnModel) -> Result<(f64, f64)> {
    let p = m.params();
    let (a, b) = m.std_bounds();
    let c = shift_point(p.alpha, a, b);
    let [mass, s1, s2] = integrate_pieces(a, b, c, |z| {
        let g = std_density(z, p.alpha);
        let d = z - c;
        [g, g * d, g * d * d]
    })?;
    let (e1, e2) = (s1 / mass, s2 / mass);
    let var_z = e2 - e1 * e1;
    if !(var_z > 0.0) {
        return Err(TsnError::NumericalDegeneracy("truncated variance is not positive"));
    }
    Ok((p.xi + p.omega * (c + e1), p.omega * p.omega * var_z))
}

/// `E[Φ(X) | L ≤ X ≤ U]`, with Φ applied to the raw observation scale.
pub fn tsn_phi_weighted_moment(m: &TsnModel) -> Result<f64> {
    mean_variance_phi(m).map(|(_, _, phi)| phi)
}

/// Mean, variance and Φ-weighted moment from one quadrature pass.
pub(crate) fn mean_variance_phi(m: &TsnModel) -> Result<(f64, f64, f64)> {
    let p = m.params();
    let (a, b) = m.std_bounds();
    let c = shift_point(p.alpha, a, b);
    let [mass, s1, s2, sp] = integrate_pieces(a, b, c, |z| {
        let g = std_density(z, p.alpha);
        let d = z - c;
        [g, g * d, g * d * d, g * std_normal_cdf(p.xi + p.omega * z)]
    })?;
    let (e1, e2) = (s1 / mass, s2 / mass);
    let var_z = e2 - e1 * e1;
    if !(var_z > 0.0) {
        return Err(TsnError::NumericalDegeneracy("truncated variance is not positive"));
    }
    Ok((p.xi + p.omega * (c + e1), p.omega * p.omega * var_z, sp / mass))
}

struct Shifted {
    shift: f64,
    /// `E[(Z-c)^j]` for `j = 1, 2, 3`.
    central: [f64; 3],
}

fn shifted(m: &TsnModel) -> Result<Shifted> {
    let alpha = m.params().alpha;
    let (a, b) = m.std_bounds();
    let c = shift_point(alpha, a, b);
    let [mass, s1, s2, s3] = integrate_pieces(a, b, c, |z| {
        let g = std_density(z, alpha);
        let d = z - c;
        [g, g * d, g * d * d, g * d * d * d]
    })?;
    Ok(Shifted { shift: c, central: [s1 / mass, s2 / mass, s3 / mass] })
}

#[inline]
fn std_density(z: f64, alpha: f64) -> f64 {
    2.0 * std_normal_pdf(z) * std_normal_cdf(alpha * z)
}

/// Untruncated standard mean, pulled into the window.
fn shift_point(alpha: f64, a: f64, b: f64) -> f64 {
    let (mu, _) = std_sn_mean_var(alpha);
    mu.max(a).min(b)
}

/// Integrate over `[a, b]`, split at `c` when it is interior.
fn integrate_pieces<const N: usize, F>(a: f64, b: f64, c: f64, f: F) -> Result<[f64; N]>
where
    F: Fn(f64) -> [f64; N],
{
    let scaling = Scaling { center: c, scale: 1.0 };
    if c > a && c < b {
        let left = integrate_with(&f, a, c, scaling, MOMENT_TOL)?;
        let right = integrate_with(&f, c, b, scaling, MOMENT_TOL)?;
        let mut out = left;
        for (o, r) in out.iter_mut().zip(right) {
            *o += r;
        }
        Ok(out)
    } else {
        integrate_with(&f, a, b, scaling, MOMENT_TOL)
    }
}
