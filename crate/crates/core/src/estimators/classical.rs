//! Maximum likelihood, method of moments and method of weighted moments.

use rand::Rng;

use super::grid::loglik_at;
use super::nelder_mead::{self, SimplexOptions};
use super::newton::{self, norm, NewtonOptions, NewtonStatus};
use super::{prepare, shape_from_skewness, untruncated_location_scale, FitResult, Method, MleOptions, SampleStats};
use crate::error::{Result, TsnError};
use crate::moments::{mean_variance_phi, raw_moments};
use crate::sampling::RngStream;
use crate::sn_core::{SnParams, TruncationWindow, TsnModel};

/// Residual norm below which the moment equations count as solved.
const MOM_TOL: f64 = 1e-7;
/// Newton keeps iterating below `MOM_TOL`: near α = 0 the third moment is
/// flat in α, so a residual of 1e-7 still leaves α uncertain at 1e-4.
const MOM_NEWTON_TOL: f64 = 1e-15;

/// Default start: shape from the sample skewness, then location and scale
/// from the untruncated moment relations.
fn default_start(stats: &SampleStats) -> [f64; 3] {
    let alpha = shape_from_skewness(stats.skewness);
    let (xi, omega) = untruncated_location_scale(alpha, stats.mean, stats.variance);
    [xi, omega, alpha]
}

/// Simplex search over `(u, v, α)` with `ξ = x̄ + s u`, `ω = s eᵛ`.
fn to_params(stats: &SampleStats, x: &[f64; 3]) -> (f64, f64, f64) {
    let sd = stats.variance.sqrt();
    (stats.mean + sd * x[0], sd * x[1].exp(), x[2])
}

fn from_params(stats: &SampleStats, p: [f64; 3]) -> [f64; 3] {
    let sd = stats.variance.sqrt();
    [(p[0] - stats.mean) / sd, (p[1] / sd).ln(), p[2]]
}

/// Local maximizer of the truncated likelihood by Nelder–Mead.
///
/// With `multistart_count = k`, the default start is followed by `k - 1`
/// starts drawn uniformly from
/// `[m-1, m+1] × [max(s-1, 1), max(s+1, 2)] × [-5, 5]`, `m` and `s` being the
/// sample mean and standard deviation; the best likelihood wins.
pub fn fit_mle(data: &[f64], window: &TruncationWindow, opts: &MleOptions) -> Result<FitResult> {
    if opts.multistart_count == 0 {
        return Err(TsnError::InvalidArgument("multistart count must be at least 1".into()));
    }
    let stats = prepare(data, window, 3)?;
    let (m, s) = (stats.mean, stats.variance.sqrt());
    let mut starts = vec![default_start(&stats)];
    let mut rng = RngStream::new(opts.seed, 0).rng();
    for _ in 1..opts.multistart_count {
        starts.push([
            rng.random_range(m - 1.0..=m + 1.0),
            rng.random_range((s - 1.0).max(1.0)..=(s + 1.0).max(2.0)),
            rng.random_range(-5.0..=5.0),
        ]);
    }

    let objective = |x: &[f64; 3]| {
        let (xi, omega, alpha) = to_params(&stats, x);
        loglik_at(data, window, xi, omega, alpha).map_or(f64::INFINITY, |ll| -ll)
    };
    let best = starts
        .into_iter()
        .map(|p| nelder_mead::minimize(objective, from_params(&stats, p), [0.2, 0.2, 0.5], SimplexOptions::default()))
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one start");

    if !best.value.is_finite() {
        return Err(TsnError::EstimationFailed("likelihood is not finite at any simplex vertex".into()));
    }
    let (xi, omega, alpha) = to_params(&stats, &best.x);
    Ok(FitResult {
        method: Method::Mle,
        estimate: SnParams::new(xi, omega, alpha)?,
        loglik: -best.value,
        converged: best.converged,
        grid_trace: None,
        residual_norm: None,
    })
}

/// Match the first three raw moments by damped Newton.
///
/// The system is solved on standardized data `(x - x̄)/s`, and the reported
/// residual norm is in those units.
pub fn fit_mom(data: &[f64], window: &TruncationWindow) -> Result<FitResult> {
    let stats = prepare(data, window, 3)?;
    let sol = solve_mom(&stats, window)?;
    finish(Method::Mom, data, window, sol)
}

/// Match the mean, variance and `E[Φ(X)]` by least squares.
///
/// Residuals are scaled by `s`, `s²` and the sample spread of `Φ(xᵢ)`
/// respectively, and their sum of squares is minimized by Nelder–Mead.
pub fn fit_mwm(data: &[f64], window: &TruncationWindow) -> Result<FitResult> {
    let stats = prepare(data, window, 2)?;
    let sol = solve_mwm(&stats, window)?;
    finish(Method::Mwm, data, window, sol)
}

struct MomentSolution {
    estimate: [f64; 3],
    converged: bool,
    residual_norm: f64,
}

fn solve_mom(stats: &SampleStats, window: &TruncationWindow) -> Result<MomentSolution> {
    let sd = stats.variance.sqrt();
    let std_window = window.affine(-stats.mean / sd, 1.0 / sd)?;
    let residual = |x: &[f64; 3]| -> Result<[f64; 3]> {
        let model = TsnModel::new(SnParams::new(x[0], x[1].exp(), x[2])?, std_window)?;
        let raw = raw_moments(&model)?;
        Ok([raw[0], raw[1] - 1.0, raw[2] - stats.skewness])
    };
    let alpha0 = shape_from_skewness(stats.skewness);
    let (xi0, omega0) = untruncated_location_scale(alpha0, 0.0, 1.0);
    let opts = NewtonOptions {
        max_iter: 100,
        tol: MOM_NEWTON_TOL,
        max_halvings: 30,
        step: |x: &[f64; 3]| [1e-6 * x[1].exp(), 1e-6, 1e-6 * x[2].abs().max(1.0)],
    };
    let sol = newton::solve(residual, [xi0, omega0.ln(), alpha0], &opts);
    if sol.status == NewtonStatus::Undefined {
        return Err(TsnError::EstimationFailed("moment equations undefined at the starting point".into()));
    }
    Ok(MomentSolution {
        estimate: [stats.mean + sd * sol.x[0], sd * sol.x[1].exp(), sol.x[2]],
        converged: norm(&sol.residual) <= MOM_TOL,
        residual_norm: norm(&sol.residual),
    })
}

fn mwm_objective(stats: &SampleStats, window: &TruncationWindow, x: &[f64; 3]) -> f64 {
    let phi_scale = if stats.sd_phi > 0.0 { stats.sd_phi } else { 1.0 };
    let (xi, omega, alpha) = to_params(stats, x);
    let Ok(params) = SnParams::new(xi, omega, alpha) else { return f64::INFINITY };
    let Ok(model) = TsnModel::new(params, *window) else { return f64::INFINITY };
    match mean_variance_phi(&model) {
        Ok((m, v, e)) => {
            let r =
                [(m - stats.mean) / stats.variance.sqrt(), v / stats.variance - 1.0, (e - stats.mean_phi) / phi_scale];
            r.iter().map(|c| c * c).sum()
        }
        Err(_) => f64::INFINITY,
    }
}

fn solve_mwm(stats: &SampleStats, window: &TruncationWindow) -> Result<MomentSolution> {
    let start = from_params(stats, default_start(stats));
    let opts = SimplexOptions { ftol: 1e-14, ..SimplexOptions::default() };
    let r = nelder_mead::minimize(|x| mwm_objective(stats, window, x), start, [0.2, 0.2, 0.5], opts);
    if !r.value.is_finite() {
        return Err(TsnError::EstimationFailed("weighted moments undefined at every simplex vertex".into()));
    }
    let (xi, omega, alpha) = to_params(stats, &r.x);
    Ok(MomentSolution { estimate: [xi, omega, alpha], converged: r.converged, residual_norm: r.value.sqrt() })
}

fn finish(method: Method, data: &[f64], window: &TruncationWindow, sol: MomentSolution) -> Result<FitResult> {
    let [xi, omega, alpha] = sol.estimate;
    let estimate = SnParams::new(xi, omega, alpha)
        .map_err(|e| TsnError::EstimationFailed(format!("{method} produced invalid parameters: {e}")))?;
    let loglik = loglik_at(data, window, xi, omega, alpha).unwrap_or(f64::NEG_INFINITY);
    Ok(FitResult {
        method,
        estimate,
        loglik,
        converged: sol.converged,
        grid_trace: None,
        residual_norm: Some(sol.residual_norm),
    })
}
