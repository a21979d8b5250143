//! Scenario files for `tsn simulate`.
//!
//! ```toml
//! [[scenario]]
//! name = "right-a4"
//! direction = "right"
//! tau = 0.1
//! alpha0 = 4.0
//! n = 500
//! reps = 200
//! methods = ["grid-mom", "mwm"]
//! grid_a = 5.0        # optional
//! grid_points = 401   # optional
//! seed = 1
//!
//! [timing]            # optional
//! n_values = [500, 2000]
//! grid_sizes = [101, 201, 401]
//! repeats = 3
//! seed = 1
//! ```

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use tsn::{GridSpec, Method, ScenarioSpec, SnParams, TruncationDirection};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    #[serde(default)]
    scenario: Vec<RawScenario>,
    timing: Option<TimingBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    direction: String,
    tau: f64,
    #[serde(default)]
    xi0: f64,
    #[serde(default = "one")]
    omega0: f64,
    alpha0: f64,
    n: usize,
    reps: usize,
    methods: Vec<String>,
    grid_a: Option<f64>,
    grid_points: Option<usize>,
    #[serde(default)]
    seed: u64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingBlock {
    pub n_values: Vec<usize>,
    pub grid_sizes: Vec<usize>,
    #[serde(default = "three")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
}

fn three() -> usize {
    3
}

#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub scenarios: Vec<ScenarioSpec>,
    pub timing: Option<TimingBlock>,
}

pub fn parse(text: &str) -> Result<ScenarioFile> {
    let file: File = toml::from_str(text).context("malformed scenario file")?;
    if file.scenario.is_empty() && file.timing.is_none() {
        bail!("scenario file defines no [[scenario]] or [timing] block");
    }
    let scenarios =
        file.scenario.into_iter().enumerate().map(|(i, raw)| convert(i, raw)).collect::<Result<Vec<_>>>()?;
    let mut names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        bail!("scenario name `{}` is used twice", w[0]);
    }
    Ok(ScenarioFile { scenarios, timing: file.timing })
}

fn convert(i: usize, raw: RawScenario) -> Result<ScenarioSpec> {
    let field = |f: &str| format!("scenario[{i}].{f}");
    let direction: TruncationDirection =
        raw.direction.parse().map_err(|_| anyhow!("{}: unknown direction `{}`", field("direction"), raw.direction))?;
    if raw.methods.is_empty() {
        bail!("{}: at least one method is required", field("methods"));
    }
    let methods = raw
        .methods
        .iter()
        .enumerate()
        .map(|(k, m)| {
            m.parse::<Method>().map_err(|_| anyhow!("{}: unknown method `{m}`", field(&format!("methods[{k}]"))))
        })
        .collect::<Result<Vec<_>>>()?;
    let default = GridSpec::default();
    let grid = GridSpec::new(raw.grid_a.unwrap_or(default.half_width()), raw.grid_points.unwrap_or(default.points()))
        .map_err(|e| anyhow!("{}: {e}", field("grid_a/grid_points")))?;
    let truth = SnParams::new(raw.xi0, raw.omega0, raw.alpha0).map_err(|e| anyhow!("{}: {e}", field("omega0")))?;
    let name = raw.name.unwrap_or_else(|| format!("scenario{i}"));
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
        bail!("{}: `{name}` must be non-empty and use only letters, digits, `-`, `_` or `.`", field("name"));
    }
    let spec = ScenarioSpec {
        name,
        direction,
        tau: raw.tau,
        truth,
        n: raw.n,
        replications: raw.reps,
        methods,
        grid,
        base_seed: raw.seed,
    };
    spec.validate().map_err(|e| {
        let which = match e {
            tsn::TsnError::ProbabilityOutOfRange(_) => "tau",
            tsn::TsnError::TooFewObservations { .. } => "n",
            _ => "reps",
        };
        anyhow!("{}: {e}", field(which))
    })?;
    Ok(spec)
}
