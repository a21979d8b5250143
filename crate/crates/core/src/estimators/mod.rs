//! Parameter estimation for the truncated skew-normal.
//!
//! Five methods share one entry point, [`fit`]:
//!
//! * `grid-mom` sweeps α over a grid, matches the mean and variance for
//!   (ξ, ω) at each point, and keeps the point with the best likelihood;
//! * `grid-mle` does the same sweep but maximizes the likelihood in (ξ, ω);
//! * `mle`, `mom` and `mwm` are the classical baselines.

mod classical;
mod grid;
pub(crate) mod nelder_mead;
pub(crate) mod newton;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TsnError};
use crate::sn_core::{delta_of, std_normal_cdf, SnParams, TruncationWindow};

pub use classical::{fit_mle, fit_mom, fit_mwm};
pub use grid::{fit_grid_mle, fit_grid_mom, solve_location_scale, LocationScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "mle")]
    Mle,
    #[serde(rename = "mom")]
    Mom,
    #[serde(rename = "mwm")]
    Mwm,
    #[serde(rename = "grid-mom")]
    GridMom,
    #[serde(rename = "grid-mle")]
    GridMle,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Mle, Method::Mom, Method::Mwm, Method::GridMom, Method::GridMle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mle => "mle",
            Method::Mom => "mom",
            Method::Mwm => "mwm",
            Method::GridMom => "grid-mom",
            Method::GridMle => "grid-mle",
        }
    }

    pub fn is_grid(self) -> bool {
        matches!(self, Method::GridMom | Method::GridMle)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = TsnError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Method::ALL.into_iter().find(|m| m.name() == key).ok_or_else(|| {
            TsnError::InvalidArgument(format!("unknown method {s:?} (expected mle, mom, mwm, grid-mom or grid-mle)"))
        })
    }
}

/// Equally spaced shape grid `-a, -a + Δ, …, a` with `Δ = 2a/(G-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_width: f64,
    points: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(TsnError::InvalidArgument(format!(
                "grid half-width must be positive and finite, got {half_width}"
            )));
        }
        if points < 2 {
            return Err(TsnError::InvalidArgument(format!("grid needs at least 2 points, got {points}")));
        }
        Ok(Self { half_width, points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    /// Grid point `g` for `g = 0..G`. Written so that the end points are
    /// exactly `±a` and the grid is symmetric about zero.
    pub fn value(&self, g: usize) -> f64 {
        let m = (self.points - 1) as f64;
        self.half_width * (2.0 * g as f64 - m) / m
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|g| self.value(g)).collect()
    }
}

impl Default for GridSpec {
    /// `a = 5`, `G = 401`, so `Δ = 0.025`.
    fn default() -> Self {
        Self { half_width: 5.0, points: 401 }
    }
}

/// Summary statistics used by the moment-based estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    /// Divisor `n`.
    pub variance: f64,
    pub raw2: f64,
    pub raw3: f64,
    /// Standardized third central moment.
    pub skewness: f64,
    /// Average of `Φ(xᵢ)`.
    pub mean_phi: f64,
    /// Standard deviation (divisor `n`) of `Φ(xᵢ)`.
    pub sd_phi: f64,
}

/// ```
/// let s = tsn::compute_stats(&[0.0, 1.0, 2.0, 3.0]).unwrap();
/// assert_eq!(s.mean, 1.5);
/// assert_eq!(s.variance, 1.25);
/// ```
pub fn compute_stats(data: &[f64]) -> Result<SampleStats> {
    let n = data.len();
    if n < 2 {
        return Err(TsnError::TooFewObservations { needed: 2, got: n });
    }
    if let Some((index, &value)) = data.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(TsnError::InvalidArgument(format!("observation {index} is not finite ({value})")));
    }
    let nf = n as f64;
    let mean = data.iter().sum::<f64>() / nf;
    let (mut c2, mut c3) = (0.0, 0.0);
    for &x in data {
        let d = x - mean;
        c2 += d * d;
        c3 += d * d * d;
    }
    let variance = c2 / nf;
    let skewness = if variance > 0.0 { c3 / nf / variance.powf(1.5) } else { 0.0 };
    let raw2 = data.iter().map(|x| x * x).sum::<f64>() / nf;
    let raw3 = data.iter().map(|x| x * x * x).sum::<f64>() / nf;
    let phis: Vec<f64> = data.iter().map(|&x| std_normal_cdf(x)).collect();
    let mean_phi = phis.iter().sum::<f64>() / nf;
    let sd_phi = (phis.iter().map(|p| (p - mean_phi).powi(2)).sum::<f64>() / nf).sqrt();
    Ok(SampleStats { n, mean, variance, raw2, raw3, skewness, mean_phi, sd_phi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    NoConverge,
    Degenerate,
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub xi: f64,
    pub omega: f64,
    pub loglik: f64,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub method: Method,
    pub estimate: SnParams,
    /// Truncated log-likelihood at the estimate; `-∞` if the estimate
    /// leaves no mass in the window.
    pub loglik: f64,
    pub converged: bool,
    pub grid_trace: Option<Vec<GridPoint>>,
    /// Final residual norm for the moment-based methods.
    pub residual_norm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    /// Number of starts: the default start plus `multistart_count - 1` draws
    /// from the cube around the sample mean and sd.
    pub multistart_count: usize,
    pub seed: u64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { multistart_count: 1, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitConfig {
    pub grid: GridSpec,
    pub mle: MleOptions,
}

/// Fit `method` to `data` observed under `window`.
///
/// ```
/// use tsn::{fit, sample_tsn, FitConfig, GridSpec, Method, RngStream, SnParams, TruncationWindow, TsnModel};
/// let window = TruncationWindow::new(f64::NEG_INFINITY, 1.5).unwrap();
/// let model = TsnModel::new(SnParams::new(0.0, 1.0, 2.0).unwrap(), window).unwrap();
/// let data = sample_tsn(&model, 500, RngStream::new(1, 0)).unwrap();
/// let config = FitConfig { grid: GridSpec::new(5.0, 101).unwrap(), ..Default::default() };
/// let fit = fit(Method::GridMom, &data, &window, &config).unwrap();
/// assert!(fit.converged);
/// assert!(fit.estimate.alpha.abs() <= 5.0);
/// ```
pub fn fit(method: Method, data: &[f64], window: &TruncationWindow, config: &FitConfig) -> Result<FitResult> {
    match method {
        Method::Mle => fit_mle(data, window, &config.mle),
        Method::Mom => fit_mom(data, window),
        Method::Mwm => fit_mwm(data, window),
        Method::GridMom => fit_grid_mom(data, window, &config.grid),
        Method::GridMle => fit_grid_mle(data, window, &config.grid),
    }
}

/// Validate data against the window and compute statistics.
fn prepare(data: &[f64], window: &TruncationWindow, needed: usize) -> Result<SampleStats> {
    if data.len() < needed {
        return Err(TsnError::TooFewObservations { needed, got: data.len() });
    }
    let stats = compute_stats(data)?;
    if let Some((index, &value)) = data.iter().enumerate().find(|(_, x)| !window.contains(**x)) {
        return Err(TsnError::DataOutsideWindow { index, value });
    }
    if !(stats.variance > 0.0) {
        return Err(TsnError::EstimationFailed("sample variance is zero".into()));
    }
    Ok(stats)
}

/// `(ξ, ω)` matching the mean and variance of the untruncated law with
/// shape α.
pub(crate) fn untruncated_location_scale(alpha: f64, mean: f64, variance: f64) -> (f64, f64) {
    let b = delta_of(alpha) * std::f64::consts::FRAC_2_PI.sqrt();
    let omega = (variance / (1.0 - b * b)).sqrt();
    (mean - omega * b, omega)
}

/// Shape whose untruncated skewness equals `skewness`, with `|δ| ≤ 0.995`.
pub(crate) fn shape_from_skewness(skewness: f64) -> f64 {
    use std::f64::consts::PI;
    let c = (2.0 * skewness.abs() / (4.0 - PI)).cbrt();
    let b = c / (1.0 + c * c).sqrt();
    let delta = ((PI / 2.0).sqrt() * b).min(0.995).copysign(skewness);
    delta / (1.0 - delta * delta).sqrt()
}
