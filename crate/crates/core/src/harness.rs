//! Monte Carlo scenarios: replicate fits, summary metrics and timing.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TsnError};
use crate::estimators::{fit, fit_grid_mom, FitConfig, FitResult, GridSpec, Method};
use crate::sampling::{sample_tsn, truncation_bounds, RngStream, TruncationDirection};
use crate::sn_core::{SnParams, TruncationWindow, TsnModel};

/// Estimates beyond this magnitude are flagged and printed as `>100`.
pub const BLOWUP_THRESHOLD: f64 = 100.0;

pub const PARAMETER_NAMES: [&str; 3] = ["xi", "omega", "alpha"];

/// One simulation cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub direction: TruncationDirection,
    pub tau: f64,
    pub truth: SnParams,
    pub n: usize,
    pub replications: usize,
    pub methods: Vec<Method>,
    pub grid: GridSpec,
    pub base_seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(TsnError::ProbabilityOutOfRange(self.tau));
        }
        if self.replications == 0 {
            return Err(TsnError::InvalidArgument("replications must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(TsnError::InvalidArgument("scenario lists no methods".into()));
        }
        if self.n < 3 {
            return Err(TsnError::TooFewObservations { needed: 3, got: self.n });
        }
        self.truth.validate()
    }

    pub fn window(&self) -> Result<TruncationWindow> {
        truncation_bounds(self.direction, self.tau, &self.truth)
    }
}

/// Outcome of one fit inside a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Replicate {
    /// The fit returned an error.
    Failed,
    Estimate {
        theta: [f64; 3],
        converged: bool,
    },
}

impl Replicate {
    fn from_fit(r: Result<FitResult>) -> Self {
        match r {
            Ok(f) => Replicate::Estimate {
                theta: [f.estimate.xi, f.estimate.omega, f.estimate.alpha],
                converged: f.converged,
            },
            Err(_) => Replicate::Failed,
        }
    }

    pub fn theta(&self) -> Option<[f64; 3]> {
        match self {
            Replicate::Estimate { theta, .. } => Some(*theta),
            Replicate::Failed => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub window: TruncationWindow,
    /// Per method, one entry per replication in replication order.
    pub estimates: Vec<(Method, Vec<Replicate>)>,
}

impl ScenarioResult {
    pub fn method(&self, m: Method) -> Option<&[Replicate]> {
        self.estimates.iter().find(|(k, _)| *k == m).map(|(_, v)| v.as_slice())
    }
}

/// Run every replication of `spec`. Replication `r` draws its data from
/// stream `(base_seed, r)`, whatever the method set or thread count.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    spec.validate()?;
    let window = spec.window()?;
    let model = TsnModel::new(spec.truth, window)?;
    let config = FitConfig { grid: spec.grid, ..Default::default() };
    let per_rep: Vec<Vec<Replicate>> = (0..spec.replications as u64)
        .into_par_iter()
        .map(|r| {
            let data = sample_tsn(&model, spec.n, RngStream::new(spec.base_seed, r));
            spec.methods
                .iter()
                .map(|&m| match &data {
                    Ok(d) => Replicate::from_fit(fit(m, d, &window, &config)),
                    Err(_) => Replicate::Failed,
                })
                .collect()
        })
        .collect();
    let estimates =
        spec.methods.iter().enumerate().map(|(k, &m)| (m, per_rep.iter().map(|row| row[k]).collect())).collect();
    Ok(ScenarioResult { window, estimates })
}

/// Summary of one parameter for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub method: Method,
    pub parameter: String,
    pub bias: f64,
    pub rmse: f64,
    pub median: f64,
    pub iqr: f64,
    pub blowup: bool,
    /// Fits that returned an error; excluded from the metrics.
    pub failures: usize,
    /// Fits kept in the metrics although the method flagged non-convergence.
    pub nonconverged: usize,
}

/// Bias, RMSE, median and IQR of each parameter over the successful
/// replicates. Quantiles interpolate linearly between order statistics.
pub fn summarize(method: Method, replicates: &[Replicate], truth: &SnParams) -> Result<Vec<MetricRow>> {
    if replicates.is_empty() {
        return Err(TsnError::InvalidArgument("no replicates to summarize".into()));
    }
    let thetas: Vec<[f64; 3]> = replicates.iter().filter_map(Replicate::theta).collect();
    let failures = replicates.len() - thetas.len();
    let nonconverged = replicates.iter().filter(|r| matches!(r, Replicate::Estimate { converged: false, .. })).count();
    let truth = [truth.xi, truth.omega, truth.alpha];
    Ok((0..3)
        .map(|k| {
            let mut v: Vec<f64> = thetas.iter().map(|t| t[k]).collect();
            v.sort_by(f64::total_cmp);
            let m = v.len() as f64;
            let bias = v.iter().map(|x| x - truth[k]).sum::<f64>() / m;
            let rmse = (v.iter().map(|x| (x - truth[k]).powi(2)).sum::<f64>() / m).sqrt();
            MetricRow {
                method,
                parameter: PARAMETER_NAMES[k].to_string(),
                bias,
                rmse,
                median: quantile_sorted(&v, 0.5),
                iqr: quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25),
                blowup: v.iter().any(|x| x.abs() > BLOWUP_THRESHOLD),
                failures,
                nonconverged,
            }
        })
        .collect())
}

/// Linear-interpolation quantile of sorted data; NaN when empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        len => {
            let h = (len - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(len - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Text,
}

const COLUMNS: [&str; 8] = ["method", "parameter", "bias", "rmse", "median", "iqr", "failures", "nonconverged"];

/// Render metric rows. Values above the blowup threshold print as `>100`
/// (`<-100` below its negative); CSV keeps full precision otherwise.
///
/// ```
/// use tsn::{emit_table, TableFormat};
/// assert_eq!(emit_table(&[], TableFormat::Csv), "method,parameter,bias,rmse,median,iqr,failures,nonconverged\n");
/// ```
pub fn emit_table(rows: &[MetricRow], format: TableFormat) -> String {
    let cells: Vec<[String; 8]> = rows
        .iter()
        .map(|r| {
            let num = |v: f64| format_value(v, format);
            [
                r.method.to_string(),
                r.parameter.clone(),
                num(r.bias),
                num(r.rmse),
                num(r.median),
                num(r.iqr),
                r.failures.to_string(),
                r.nonconverged.to_string(),
            ]
        })
        .collect();
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str(&COLUMNS.join(","));
            out.push('\n');
            for row in &cells {
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        TableFormat::Text => {
            let widths: Vec<usize> =
                (0..8).map(|c| cells.iter().map(|r| r[c].len()).chain([COLUMNS[c].len()]).max().unwrap_or(0)).collect();
            let line =
                |out: &mut String, row: &[&str]| {
                    let padded: Vec<String> =
                        row.iter()
                            .enumerate()
                            .map(|(c, s)| {
                                if c < 2 {
                                    format!("{s:<w$}", w = widths[c])
                                } else {
                                    format!("{s:>w$}", w = widths[c])
                                }
                            })
                            .collect();
                    let _ = writeln!(out, "{}", padded.join("  ").trim_end());
                };
            line(&mut out, &COLUMNS);
            for row in &cells {
                line(&mut out, &row.iter().map(String::as_str).collect::<Vec<_>>());
            }
        }
    }
    out
}

fn format_value(v: f64, format: TableFormat) -> String {
    if v > BLOWUP_THRESHOLD {
        ">100".into()
    } else if v < -BLOWUP_THRESHOLD {
        "<-100".into()
    } else if v.is_nan() {
        "NA".into()
    } else {
        match format {
            TableFormat::Csv => format!("{v}"),
            TableFormat::Text => format!("{v:.3}"),
        }
    }
}

/// Raw replicate estimates as CSV: one row per replication and method.
pub fn emit_replicates(result: &ScenarioResult) -> String {
    let mut out = String::from("replication,method,xi,omega,alpha,status\n");
    let reps = result.estimates.first().map_or(0, |(_, v)| v.len());
    for r in 0..reps {
        for (m, v) in &result.estimates {
            let _ = match v[r] {
                Replicate::Failed => writeln!(out, "{r},{m},,,,failed"),
                Replicate::Estimate { theta, converged } => {
                    let status = if converged { "ok" } else { "nonconverged" };
                    writeln!(out, "{r},{m},{},{},{},{status}", theta[0], theta[1], theta[2])
                }
            };
        }
    }
    out
}

/// Mean wall-clock time of one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub method: Method,
    pub n: usize,
    pub grid_points: usize,
    pub mean_seconds: f64,
}

/// Sampling design used for timing runs: right truncation at 10% of
/// SN(0, 1, 2).
pub fn timing_design() -> (SnParams, TruncationWindow) {
    let truth = SnParams { xi: 0.0, omega: 1.0, alpha: 2.0 };
    let window = truncation_bounds(TruncationDirection::Right, 0.1, &truth).expect("valid design");
    (truth, window)
}

/// Average fit times of GRID-MOM and GRID-MLE for every `(n, G)` pair.
/// Each repeat fits a fresh sample; sampling is not timed.
pub fn timing_study(n_values: &[usize], grid_sizes: &[usize], repeats: usize, seed: u64) -> Result<Vec<TimingRow>> {
    if repeats < 3 {
        return Err(TsnError::InvalidArgument(format!("timing needs at least 3 repeats, got {repeats}")));
    }
    let (truth, window) = timing_design();
    let model = TsnModel::new(truth, window)?;
    let mut rows = Vec::new();
    for method in [Method::GridMom, Method::GridMle] {
        for &n in n_values {
            for &g in grid_sizes {
                let config = FitConfig { grid: GridSpec::new(5.0, g)?, ..Default::default() };
                let mut total = 0.0;
                for r in 0..repeats as u64 {
                    let data = sample_tsn(&model, n, RngStream::new(seed, r))?;
                    let start = Instant::now();
                    let _ = fit(method, &data, &window, &config);
                    total += start.elapsed().as_secs_f64();
                }
                rows.push(TimingRow { method, n, grid_points: g, mean_seconds: total / repeats as f64 });
            }
        }
    }
    Ok(rows)
}

pub fn emit_timing(rows: &[TimingRow]) -> String {
    let mut out = String::from("method,n,grid_points,mean_seconds\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.method, r.n, r.grid_points, r.mean_seconds);
    }
    out
}

/// GRID-MOM on one right-truncated (τ = 0.1) sample of size `n` from
/// SN(0, 1, α_true), refit under each grid.
pub fn misspecified_range_study(
    alpha_true: f64,
    n: usize,
    grids: &[GridSpec],
    stream: RngStream,
) -> Result<Vec<FitResult>> {
    let truth = SnParams::new(0.0, 1.0, alpha_true)?;
    let window = truncation_bounds(TruncationDirection::Right, 0.1, &truth)?;
    let data = sample_tsn(&TsnModel::new(truth, window)?, n, stream)?;
    grids.iter().map(|g| fit_grid_mom(&data, &window, g)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn est(v: f64) -> Replicate {
        Replicate::Estimate { theta: [v, v, v], converged: true }
    }

    #[test]
    fn hand_metrics() {
        let reps: Vec<Replicate> = [1.0, 2.0, 3.0, 4.0].into_iter().map(est).collect();
        let truth = SnParams { xi: 2.0, omega: 2.0, alpha: 2.0 };
        let rows = summarize(Method::GridMom, &reps, &truth).unwrap();
        let r = &rows[0];
        assert_abs_diff_eq!(r.bias, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.rmse, 1.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(r.median, 2.5);
        assert_eq!(r.iqr, 1.5);
        assert!(!r.blowup);
    }

    #[test]
    fn exact_estimates_give_zero_metrics() {
        let reps = vec![est(1.0); 5];
        let rows = summarize(Method::Mle, &reps, &SnParams { xi: 1.0, omega: 1.0, alpha: 1.0 }).unwrap();
        for r in rows {
            assert_eq!((r.bias, r.rmse, r.iqr), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn failures_are_excluded_and_counted() {
        let reps =
            vec![est(1.0), Replicate::Failed, est(3.0), Replicate::Estimate { theta: [500.0; 3], converged: false }];
        let rows = summarize(Method::Mom, &reps, &SnParams { xi: 0.0, omega: 1.0, alpha: 0.0 }).unwrap();
        assert_eq!(rows[2].failures, 1);
        assert_eq!(rows[2].nonconverged, 1);
        assert!(rows[2].blowup);
        assert!(rows[2].rmse.powi(2) >= rows[2].bias.powi(2));
        assert!(summarize(Method::Mom, &[], &SnParams { xi: 0.0, omega: 1.0, alpha: 0.0 }).is_err());
    }

    #[test]
    fn tables() {
        let reps: Vec<Replicate> = [1.0, 2.0, 300.0].into_iter().map(est).collect();
        let rows = summarize(Method::GridMom, &reps, &SnParams { xi: 0.0, omega: 1.0, alpha: 0.0 }).unwrap();
        let csv = emit_table(&rows, TableFormat::Csv);
        assert!(csv.contains(">100"));
        assert_eq!(csv.lines().count(), 4);
        let text = emit_table(&rows, TableFormat::Text);
        assert!(text.lines().next().unwrap().starts_with("method"));

        // full-precision round trip
        let reps: Vec<Replicate> = [0.1, 0.2, 0.7].into_iter().map(est).collect();
        let rows = summarize(Method::Mwm, &reps, &SnParams { xi: 0.0, omega: 0.3, alpha: 0.0 }).unwrap();
        let csv = emit_table(&rows, TableFormat::Csv);
        for (line, row) in csv.lines().skip(1).zip(&rows) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[0], "mwm");
            assert_eq!(f[2].parse::<f64>().unwrap(), row.bias);
            assert_eq!(f[3].parse::<f64>().unwrap(), row.rmse);
            assert_eq!(f[4].parse::<f64>().unwrap(), row.median);
            assert_eq!(f[5].parse::<f64>().unwrap(), row.iqr);
        }
    }

    fn small_spec(methods: Vec<Method>) -> ScenarioSpec {
        ScenarioSpec {
            name: "t".into(),
            direction: TruncationDirection::Right,
            tau: 0.1,
            truth: SnParams { xi: 0.0, omega: 1.0, alpha: 2.0 },
            n: 200,
            replications: 3,
            methods,
            grid: GridSpec::new(5.0, 21).unwrap(),
            base_seed: 9,
        }
    }

    #[test]
    fn streams_are_isolated_from_method_set() {
        let one = run_scenario(&small_spec(vec![Method::GridMom])).unwrap();
        let two = run_scenario(&small_spec(vec![Method::Mwm, Method::GridMom])).unwrap();
        assert_eq!(one.method(Method::GridMom), two.method(Method::GridMom));
        assert_eq!(one, run_scenario(&small_spec(vec![Method::GridMom])).unwrap());
        let csv = emit_replicates(&two);
        assert_eq!(csv.lines().count(), 1 + 3 * 2);
    }

    #[test]
    fn timing_rows_positive() {
        let rows = timing_study(&[100], &[11], 3, 1).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.mean_seconds > 0.0));
        assert!(timing_study(&[100], &[11], 2, 1).is_err());
    }

    #[test]
    fn misspecified_grid_stays_in_range() {
        let grids = [GridSpec::new(2.0, 21).unwrap(), GridSpec::new(4.0, 41).unwrap()];
        let fits = misspecified_range_study(6.0, 300, &grids, RngStream::new(3, 0)).unwrap();
        for (f, g) in fits.iter().zip(&grids) {
            assert!(f.estimate.alpha.abs() <= g.half_width());
        }
    }
}
