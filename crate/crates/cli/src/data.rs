//! CSV ingestion, window parsing and the optional square-root transform.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use tsn::TruncationWindow;

/// Parse a window endpoint. `-inf` and `inf` are the unbounded tokens.
pub fn parse_bound(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "-inf" => Ok(f64::NEG_INFINITY),
        "inf" | "+inf" => Ok(f64::INFINITY),
        t => match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("expected a number, `-inf` or `inf`, got `{s}`")),
        },
    }
}

/// Which column to read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    FirstNumeric,
    Index(usize),
    Name(String),
}

impl ColumnSelector {
    pub fn parse(s: Option<&str>) -> Self {
        match s {
            None => ColumnSelector::FirstNumeric,
            Some(s) => s.parse().map(ColumnSelector::Index).unwrap_or_else(|_| ColumnSelector::Name(s.to_string())),
        }
    }
}

fn is_number(field: &str) -> bool {
    field.trim().parse::<f64>().is_ok()
}

/// Read one numeric column. A first row with any non-numeric field is taken
/// as a header.
pub fn read_column(path: &Path, column: &ColumnSelector) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        rows.push(rec.with_context(|| format!("malformed CSV in {}", path.display()))?);
    }
    let Some(first) = rows.first() else {
        bail!("no observations in input {}", path.display());
    };
    let header = first.iter().any(|f| !is_number(f));
    let body = if header { &rows[1..] } else { &rows[..] };
    let idx = match column {
        ColumnSelector::Index(i) => *i,
        ColumnSelector::Name(name) => {
            if !header {
                bail!("column `{name}` requested but the input has no header row");
            }
            first.iter().position(|h| h == name).ok_or_else(|| anyhow!("no column named `{name}`"))?
        }
        ColumnSelector::FirstNumeric => body
            .first()
            .and_then(|r| r.iter().position(is_number))
            .ok_or_else(|| anyhow!("no numeric column in {}", path.display()))?,
    };
    body.iter()
        .enumerate()
        .map(|(i, r)| {
            let line = i + 1 + usize::from(header);
            let field = r.get(idx).ok_or_else(|| anyhow!("line {line}: no column {idx}"))?;
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(anyhow!("line {line}: non-numeric value `{field}` in column {idx}")),
            }
        })
        .collect()
}

/// Data and window ready for fitting.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub data: Vec<f64>,
    pub window: TruncationWindow,
}

/// Apply the optional square-root transform to data and bounds, then drop
/// observations outside the window.
pub fn prepare(values: Vec<f64>, lower: f64, upper: f64, sqrt: bool) -> Result<Prepared> {
    let raw_window = TruncationWindow::new(lower, upper)?;
    if values.is_empty() {
        bail!("no observations in input");
    }
    let (values, window) = if sqrt {
        if let Some(v) = values.iter().find(|v| **v < 0.0) {
            bail!("square-root transform needs non-negative data, found {v}");
        }
        if upper <= 0.0 {
            bail!("square-root transform needs a positive upper bound");
        }
        let w = TruncationWindow::new(lower.max(0.0).sqrt(), upper.sqrt())?;
        let kept = values.into_iter().filter(|x| raw_window.contains(*x)).map(f64::sqrt).collect();
        (kept, w)
    } else {
        (values.into_iter().filter(|x| raw_window.contains(*x)).collect::<Vec<_>>(), raw_window)
    };
    if values.is_empty() {
        bail!("no observations in window");
    }
    if values.len() < 2 {
        bail!("need at least 2 observations in window, got {}", values.len());
    }
    Ok(Prepared { data: values, window })
}
