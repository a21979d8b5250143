//! Grid sweeps over the shape parameter.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{self, SimplexOptions};
use super::newton::{self, NewtonOptions, NewtonStatus};
use super::{prepare, untruncated_location_scale, FitResult, GridPoint, GridSpec, Method, PointStatus, SampleStats};
use crate::error::{Result, TsnError};
use crate::moments::mean_variance;
use crate::sn_core::{loglik_in_window, SnParams, TruncationWindow, TsnModel};

/// Newton stops once the scaled residual is this small; the acceptance
/// tolerances are then checked on the raw scale.
const SCALED_TOL: f64 = 1e-11;

/// Location and scale matching the sample mean and variance at a fixed shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocationScale {
    pub xi: f64,
    pub omega: f64,
    pub status: PointStatus,
    /// `(E X - x̄, Var X - s²)` at the returned point.
    pub residual: [f64; 2],
}

/// Solve `E[X] = x̄`, `Var[X] = s²` for `(ξ, ω)` with `α` held fixed.
///
/// Status is `Ok` only when `|E X - x̄| ≤ 1e-8 (1 + |x̄|)` and
/// `|Var X - s²| ≤ 1e-8 (1 + s²)`. Failures never return an error.
pub fn solve_location_scale(alpha: f64, stats: &SampleStats, window: &TruncationWindow) -> LocationScale {
    let (mean, var) = (stats.mean, stats.variance);
    let sd = var.sqrt();
    let failed = |status| LocationScale { xi: f64::NAN, omega: f64::NAN, status, residual: [f64::NAN; 2] };
    if !(var > 0.0) || !alpha.is_finite() {
        return failed(PointStatus::Degenerate);
    }

    let moments_at = |x: &[f64; 2]| -> Result<(f64, f64)> {
        let params = SnParams::new(x[0], x[1].exp(), alpha)?;
        mean_variance(&TsnModel::new(params, *window)?)
    };
    let scaled = |x: &[f64; 2]| -> Result<[f64; 2]> {
        let (m, v) = moments_at(x)?;
        Ok([(m - mean) / sd, v / var - 1.0])
    };

    let (xi0, omega0) = untruncated_location_scale(alpha, mean, var);
    let opts = NewtonOptions {
        max_iter: 100,
        tol: SCALED_TOL,
        max_halvings: 40,
        step: |x: &[f64; 2]| [1e-6 * x[1].exp(), 1e-6],
    };
    let sol = newton::solve(scaled, [xi0, omega0.ln()], &opts);
    if sol.status == NewtonStatus::Undefined {
        return failed(PointStatus::Degenerate);
    }
    let [xi, log_omega] = sol.x;
    let residual = [sol.residual[0] * sd, sol.residual[1] * var];
    let within = residual[0].abs() <= 1e-8 * (1.0 + mean.abs()) && residual[1].abs() <= 1e-8 * (1.0 + var);
    let omega = log_omega.exp();
    let status = if !(omega > 0.0 && omega.is_finite()) {
        PointStatus::Degenerate
    } else if within {
        PointStatus::Ok
    } else {
        PointStatus::NoConverge
    };
    LocationScale { xi, omega, status, residual }
}

/// Shape grid with moment-matched location and scale.
///
/// Every grid point is solved independently; the returned shape is the
/// grid value with the largest likelihood among points that converged.
pub fn fit_grid_mom(data: &[f64], window: &TruncationWindow, grid: &GridSpec) -> Result<FitResult> {
    let stats = prepare(data, window, 2)?;
    let trace: Vec<(GridPoint, f64)> = grid
        .values()
        .into_par_iter()
        .map(|alpha| {
            let ls = solve_location_scale(alpha, &stats, window);
            let mut point = GridPoint { alpha, xi: ls.xi, omega: ls.omega, loglik: f64::NAN, status: ls.status };
            if point.status == PointStatus::Ok {
                match loglik_at(data, window, ls.xi, ls.omega, alpha) {
                    Some(ll) => point.loglik = ll,
                    None => point.status = PointStatus::Degenerate,
                }
            }
            let norm = (ls.residual[0] / stats.variance.sqrt()).hypot(ls.residual[1] / stats.variance);
            (point, norm)
        })
        .collect();
    let best = select(trace.iter().map(|(p, _)| p))?;
    let (point, norm) = trace[best];
    Ok(FitResult {
        method: Method::GridMom,
        estimate: SnParams::new(point.xi, point.omega, point.alpha)?,
        loglik: point.loglik,
        converged: true,
        grid_trace: Some(trace.into_iter().map(|(p, _)| p).collect()),
        residual_norm: Some(norm),
    })
}

/// Shape grid with the likelihood maximized over location and scale at each
/// point (profile likelihood).
pub fn fit_grid_mle(data: &[f64], window: &TruncationWindow, grid: &GridSpec) -> Result<FitResult> {
    let stats = prepare(data, window, 2)?;
    let trace: Vec<GridPoint> =
        grid.values().into_par_iter().map(|alpha| profile_point(data, window, &stats, alpha)).collect();
    let best = select(trace.iter())?;
    let point = trace[best];
    Ok(FitResult {
        method: Method::GridMle,
        estimate: SnParams::new(point.xi, point.omega, point.alpha)?,
        loglik: point.loglik,
        converged: true,
        grid_trace: Some(trace),
        residual_norm: None,
    })
}

fn profile_point(data: &[f64], window: &TruncationWindow, stats: &SampleStats, alpha: f64) -> GridPoint {
    let (xi0, omega0) = untruncated_location_scale(alpha, stats.mean, stats.variance);
    let to_params = |x: &[f64; 2]| (xi0 + omega0 * x[0], omega0 * x[1].exp());
    let objective = |x: &[f64; 2]| {
        let (xi, omega) = to_params(x);
        loglik_at(data, window, xi, omega, alpha).map_or(f64::INFINITY, |ll| -ll)
    };
    let opts = SimplexOptions { xtol: 1e-8, ftol: 1e-13, max_evals: 1000 };
    let r = nelder_mead::minimize(objective, [0.0, 0.0], [0.2, 0.2], opts);
    let (xi, omega) = to_params(&r.x);
    let status = if !r.value.is_finite() {
        PointStatus::Degenerate
    } else if r.converged {
        PointStatus::Ok
    } else {
        PointStatus::NoConverge
    };
    GridPoint { alpha, xi, omega, loglik: -r.value, status }
}

/// Truncated log-likelihood, or `None` if the parameters or window are
/// degenerate.
pub(crate) fn loglik_at(data: &[f64], window: &TruncationWindow, xi: f64, omega: f64, alpha: f64) -> Option<f64> {
    let params = SnParams::new(xi, omega, alpha).ok()?;
    let model = TsnModel::new(params, *window).ok()?;
    let ll = loglik_in_window(data, &model);
    ll.is_finite().then_some(ll)
}

/// Argmax of the log-likelihood over converged points. Ties go to the
/// smallest `|α|`, then to the smaller `α`.
fn select<'a>(points: impl Iterator<Item = &'a GridPoint>) -> Result<usize> {
    let mut best: Option<(usize, &GridPoint)> = None;
    for (i, p) in points.enumerate() {
        if p.status != PointStatus::Ok || !p.loglik.is_finite() {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, b)) => {
                p.loglik > b.loglik
                    || (p.loglik == b.loglik
                        && (p.alpha.abs() < b.alpha.abs() || (p.alpha.abs() == b.alpha.abs() && p.alpha < b.alpha)))
            }
        };
        if better {
            best = Some((i, p));
        }
    }
    best.map(|(i, _)| i).ok_or_else(|| TsnError::EstimationFailed("no grid point produced a valid fit".into()))
}
