//! The truncated skew-normal distribution.
//!
//! Distribution functions ([`sn_cdf`], [`tsn_pdf`], [`tsn_loglik`]),
//! moments by adaptive quadrature, inversion sampling with reproducible
//! streams, five estimators behind [`fit`], the parametric bootstrap and a
//! Monte Carlo harness.
//!
//! ```
//! use tsn::{fit, sample_tsn, truncation_bounds, FitConfig, Method, RngStream, SnParams, TruncationDirection, TsnModel};
//!
//! let truth = SnParams::new(0.0, 1.0, 3.0).unwrap();
//! let window = truncation_bounds(TruncationDirection::Right, 0.1, &truth).unwrap();
//! let data = sample_tsn(&TsnModel::new(truth, window).unwrap(), 500, RngStream::new(7, 0)).unwrap();
//! let result = fit(Method::GridMom, &data, &window, &FitConfig::default()).unwrap();
//! assert!(result.estimate.alpha > 0.0);
//! ```

// `!(x > 0.0)` is used on purpose so NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod moments;
pub mod sampling;
pub mod sn_core;

pub use bootstrap::{parametric_bootstrap, BootstrapSummary, DEFAULT_REPLICATES};
pub use error::{Result, TsnError};
pub use estimators::{
    compute_stats, fit, fit_grid_mle, fit_grid_mom, fit_mle, fit_mom, fit_mwm, solve_location_scale, FitConfig,
    FitResult, GridPoint, GridSpec, LocationScale, Method, MleOptions, PointStatus, SampleStats,
};
pub use harness::{
    emit_replicates, emit_table, emit_timing, misspecified_range_study, quantile_sorted, run_scenario, summarize,
    timing_design, timing_study, MetricRow, Replicate, ScenarioResult, ScenarioSpec, TableFormat, TimingRow,
};
pub use moments::{
    integrate, integrate_with, mean_variance, tsn_mean, tsn_phi_weighted_moment, tsn_raw_moment, tsn_variance,
    tsn_weighted_moment, MomentRequest, Scaling, Tolerance,
};
pub use sampling::{sample_sn, sample_tsn, truncation_bounds, RngStream, TruncationDirection};
pub use sn_core::{
    log_std_normal_cdf, owen_t, sn_cdf, sn_log_pdf, sn_pdf, sn_quantile, std_normal_cdf, std_normal_pdf, tsn_cdf,
    tsn_loglik, tsn_pdf, SnParams, TruncationWindow, TsnModel, MASS_FLOOR,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/distribution.md")]
    mod distribution {}
    #[doc = include_str!("../../../book/src/moments.md")]
    mod moments {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/bootstrap.md")]
    mod bootstrap {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
