//! Parametric bootstrap standard errors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TsnError};
use crate::estimators::{fit, FitConfig, FitResult, Method};
use crate::sampling::{sample_tsn, RngStream};
use crate::sn_core::{TruncationWindow, TsnModel};

/// Conventional replicate count when none is given.
pub const DEFAULT_REPLICATES: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    /// Requested replicate count.
    pub b: usize,
    /// `(ξ*, ω*, α*)` of the successful refits, in replicate order.
    pub replicates: Vec<[f64; 3]>,
    /// Sample standard deviations (divisor `m - 1`) over `replicates`.
    pub se: [f64; 3],
    /// Refits that errored or did not converge.
    pub failures: usize,
}

/// Draw `b` samples of size `n` from the fitted model on `window`, refit each
/// with `method`, and summarize the spread of the estimates.
///
/// Replicate `i` uses `stream.substream(i)`, so results do not depend on
/// scheduling. Non-converged refits are dropped and counted.
pub fn parametric_bootstrap(
    fitted: &FitResult,
    window: &TruncationWindow,
    n: usize,
    b: usize,
    method: Method,
    config: &FitConfig,
    stream: RngStream,
) -> Result<BootstrapSummary> {
    if b < 2 {
        return Err(TsnError::InvalidArgument(format!("bootstrap needs at least 2 replicates, got {b}")));
    }
    if !fitted.converged {
        return Err(TsnError::InvalidArgument("bootstrap requires a converged fit".into()));
    }
    let model = TsnModel::new(fitted.estimate, *window)?;
    let outcomes: Vec<Option<[f64; 3]>> = (0..b as u64)
        .into_par_iter()
        .map(|i| {
            let data = sample_tsn(&model, n, stream.substream(i)).ok()?;
            let refit = fit(method, &data, window, config).ok()?;
            let e = refit.estimate;
            refit.converged.then_some([e.xi, e.omega, e.alpha])
        })
        .collect();

    let replicates: Vec<[f64; 3]> = outcomes.iter().flatten().copied().collect();
    let failures = b - replicates.len();
    if replicates.len() < 2 {
        return Err(TsnError::EstimationFailed(format!("{failures} of {b} bootstrap refits failed")));
    }
    let se = std::array::from_fn(|k| sample_sd(replicates.iter().map(|r| r[k])));
    Ok(BootstrapSummary { b, replicates, se, failures })
}

fn sample_sd(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / m;
    (values.map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::GridSpec;
    use crate::sampling::{truncation_bounds, TruncationDirection};
    use crate::sn_core::SnParams;

    fn setup(n: usize) -> (FitResult, TruncationWindow, FitConfig) {
        let p = SnParams::new(0.0, 1.0, 2.0).unwrap();
        let w = truncation_bounds(TruncationDirection::Right, 0.1, &p).unwrap();
        let data = sample_tsn(&TsnModel::new(p, w).unwrap(), n, RngStream::new(31, 0)).unwrap();
        let config = FitConfig { grid: GridSpec::new(5.0, 41).unwrap(), ..Default::default() };
        (fit(Method::GridMom, &data, &w, &config).unwrap(), w, config)
    }

    #[test]
    fn deterministic_and_nonnegative() {
        let (f, w, c) = setup(300);
        let a = parametric_bootstrap(&f, &w, 300, 6, Method::GridMom, &c, RngStream::new(5, 0)).unwrap();
        let b = parametric_bootstrap(&f, &w, 300, 6, Method::GridMom, &c, RngStream::new(5, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a.se.iter().all(|s| *s >= 0.0));
        assert_eq!(a.replicates.len() + a.failures, 6);
    }

    #[test]
    fn permutation_leaves_se_unchanged() {
        let (f, w, c) = setup(300);
        let s = parametric_bootstrap(&f, &w, 300, 8, Method::GridMom, &c, RngStream::new(6, 0)).unwrap();
        let mut rev = s.replicates.clone();
        rev.reverse();
        for k in 0..3 {
            let se = sample_sd(rev.iter().map(|r| r[k]));
            assert!((se - s.se[k]).abs() <= 1e-12 * s.se[k].max(1e-300));
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let (f, w, c) = setup(200);
        assert!(parametric_bootstrap(&f, &w, 200, 1, Method::GridMom, &c, RngStream::new(1, 0)).is_err());
        let stale = FitResult { converged: false, ..f };
        assert!(parametric_bootstrap(&stale, &w, 200, 5, Method::GridMom, &c, RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn sd_uses_unbiased_divisor() {
        assert!((sample_sd([1.0, 2.0, 3.0, 4.0].into_iter()) - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
