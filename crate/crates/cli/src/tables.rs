//! Artifact readers and writers.
//!
//! All tabular artifacts are CSV with a `#`-comment reproducibility header
//! (see [`crate::stamp`]). Floats are written in shortest round-trip form,
//! so a value read back parses to the identical bit pattern; masked cells in
//! feature tables are written as `NaN`, which the ingest readers mask again
//! on the way in. Forecast tables use the exchange header
//! `origin,h1,...,hH` with ISO-8601 origins.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use dstlab_core::{Error as CoreError, FeatureFrame, Hour, Series, Table};

use crate::stamp::Stamp;

/// Write a finished artifact to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Render a forecast table as `origin,h1,...,hH` CSV.
pub fn forecast_csv(stamp: &Stamp, table: &Table) -> String {
    let h = table.horizons();
    let mut out = stamp.csv_header();
    out.push_str("origin");
    for i in 1..=h {
        let _ = write!(out, ",h{i}");
    }
    out.push('\n');
    for (k, origin) in table.origins().iter().enumerate() {
        out.push_str(&origin.to_iso());
        for i in 1..=h {
            let _ = write!(out, ",{}", table.prediction(k, i));
        }
        out.push('\n');
    }
    out
}

/// A forecast file as read from disk, before an observation is attached.
#[derive(Debug, Clone)]
pub struct ForecastFile {
    pub origins: Vec<Hour>,
    pub horizons: usize,
    pub predictions: Vec<f64>,
}

/// Read an `origin,h1,...,hH` CSV written by `forecast` (or by hand).
pub fn read_forecast_csv(path: &Path) -> Result<ForecastFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;

    let headers = rdr.headers().context("reading forecast header")?.clone();
    let malformed = |line: usize, reason: String| CoreError::MalformedRow { line, reason };
    if headers.is_empty() || &headers[0] != "origin" {
        return Err(malformed(1, "first column must be 'origin'".into()).into());
    }
    let horizons = headers.len() - 1;
    if horizons == 0 {
        return Err(malformed(1, "expected at least one horizon column h1".into()).into());
    }
    for (i, name) in headers.iter().skip(1).enumerate() {
        let expected = format!("h{}", i + 1);
        if name != expected {
            return Err(malformed(
                1,
                format!("horizon column {} is '{name}', expected '{expected}'", i + 2),
            )
            .into());
        }
    }

    let mut origins = Vec::new();
    let mut predictions = Vec::new();
    for record in rdr.records() {
        let record = record.context("reading forecast row")?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != horizons + 1 {
            return Err(malformed(
                line,
                format!("expected {} fields, found {}", horizons + 1, record.len()),
            )
            .into());
        }
        origins.push(Hour::parse(&record[0]).with_context(|| format!("line {line}"))?);
        for field in record.iter().skip(1) {
            let value: f64 = field
                .parse()
                .map_err(|_| malformed(line, format!("'{field}' is not a number")))?;
            predictions.push(value);
        }
    }
    Ok(ForecastFile { origins, horizons, predictions })
}

/// Pair a forecast file with an observation series, validating shape.
pub fn attach_observation(file: ForecastFile, observation: Series) -> Result<Table> {
    Table::new(file.origins, file.horizons, file.predictions, observation)
        .context("pairing forecasts with observations")
}

/// Read an observation series, choosing the value column: an explicit
/// `--obs-column` wins; otherwise `value`, then `dst`, whichever the header
/// has. Returns the series and the column actually used.
pub fn read_observation(path: &Path, column: Option<&str>) -> Result<(Series, String)> {
    let chosen = match column {
        Some(c) => c.to_string(),
        None => {
            let mut rdr = csv::ReaderBuilder::new()
                .comment(Some(b'#'))
                .trim(csv::Trim::All)
                .from_path(path)
                .with_context(|| format!("opening {}", path.display()))?;
            let headers = rdr.headers().context("reading observation header")?;
            ["value", "dst"]
                .into_iter()
                .find(|c| headers.iter().any(|h| h == *c))
                .map(str::to_string)
                .ok_or_else(|| CoreError::InvalidParameter {
                    name: "obs-column".into(),
                    reason: format!(
                        "no 'value' or 'dst' column in {}; pass --obs-column (available: {})",
                        path.display(),
                        headers.iter().collect::<Vec<_>>().join(", ")
                    ),
                })?
        }
    };
    let series = dstlab_core::read_series(path, &chosen)
        .with_context(|| format!("reading {} column '{chosen}'", path.display()))?;
    Ok((series, chosen))
}

/// Render hourly-contiguous frames as one feature-table CSV. Frames follow
/// each other in time order; the gaps between them are simply absent rows,
/// which the segmented reader turns back into frame boundaries. Masked
/// cells are written as `NaN`.
pub fn frame_csv(stamp: &Stamp, frames: &[FeatureFrame<f64>]) -> String {
    let mut out = stamp.csv_header();
    let names: Vec<&str> = frames.first().map(|f| f.names().collect()).unwrap_or_default();
    out.push_str("timestamp");
    for name in &names {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for frame in frames {
        for i in 0..frame.len() {
            out.push_str(&(frame.start() + i as i64).to_iso());
            for (_, series) in frame.features() {
                match series.get(i) {
                    Some(v) => {
                        let _ = write!(out, ",{v}");
                    }
                    None => out.push_str(",NaN"),
                }
            }
            out.push('\n');
        }
    }
    out
}
