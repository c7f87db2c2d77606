//! Pipeline plumbing shared by subcommands: merging per-segment forecasts
//! over a common masked span, the differenced-target transform, skip-aware
//! segment iteration, and the saved-model file format.
//!
//! Split outputs hold non-adjacent months, so most commands see a list of
//! hourly-contiguous frames rather than one series. Forecasters run per
//! segment; their tables are then merged over one masked observation span
//! so alignment and the warp measure keep treating the gaps as gaps.

use anyhow::Result;
use dstlab_core::{
    difference, ARSpec, Error as CoreError, FeatureFrame, ScalingParams, Series, Table,
    TARGET_FEATURE,
};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// Which series the forecaster predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// The index itself.
    Dst,
    /// Its first difference.
    DeltaDst,
}

/// How the differenced target enters the input features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaFeatures {
    /// Keep the undifferenced index as an extra input column (`dst_level`).
    Augment,
    /// Inputs use only the differenced index.
    Replace,
}

/// Union several chronologically ordered, pairwise disjoint series into one
/// dense span, masked where none of them has a value.
pub fn union_series(parts: &[&Series]) -> Result<Series> {
    let first = parts.first().ok_or(CoreError::EmptySeries)?;
    let last = parts.last().expect("nonempty");
    let start = first.start();
    let span = (last.end().0 - start.0 + 1) as usize;
    let mut values = vec![f64::NAN; span];
    let mut valid = vec![false; span];
    for part in parts {
        let offset = (part.start().0 - start.0) as usize;
        for i in 0..part.len() {
            if let Some(v) = part.get(i) {
                values[offset + i] = v;
                valid[offset + i] = true;
            }
        }
    }
    Ok(Series::new(start, values, valid)?)
}

/// Concatenate per-segment forecast tables into one table over the union
/// observation span. Tables must be chronological and disjoint — the shape
/// produced by forecasting the segments of one input file in order.
pub fn merge_tables(mut tables: Vec<Table>) -> Result<Table> {
    if tables.len() == 1 {
        return Ok(tables.remove(0));
    }
    let first = tables.first().ok_or(CoreError::EmptySeries)?;
    let horizons = first.horizons();
    let observations: Vec<&Series> = tables.iter().map(|t| t.observation()).collect();
    let union = union_series(&observations)?;

    let mut origins = Vec::new();
    let mut predictions = Vec::new();
    for table in &tables {
        origins.extend_from_slice(table.origins());
        for k in 0..table.origins().len() {
            for h in 1..=horizons {
                predictions.push(table.prediction(k, h));
            }
        }
    }
    Ok(Table::new(origins, horizons, predictions, union)?)
}

/// Rewrite a frame so the target column holds the first difference of the
/// index. The frame shrinks by its first hour (where no difference exists);
/// under [`DeltaFeatures::Augment`] the undifferenced index stays available
/// as the input column `dst_level`.
pub fn delta_frame(frame: &FeatureFrame<f64>, mode: DeltaFeatures) -> Result<FeatureFrame<f64>> {
    let diff = difference(frame.target()?)?;
    let tail = frame.slice(1..frame.len())?;
    let mut features = IndexMap::new();
    for (name, series) in tail.features() {
        if name == TARGET_FEATURE {
            if mode == DeltaFeatures::Augment {
                features.insert("dst_level".to_string(), series.clone());
            }
        } else {
            features.insert(name.to_string(), series.clone());
        }
    }
    features.insert(TARGET_FEATURE.to_string(), diff);
    Ok(FeatureFrame::new(features)?)
}

/// True when the error only says a segment is too short to work with —
/// the condition segment iteration skips rather than fails on.
fn too_short(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<CoreError>(),
            Some(CoreError::InsufficientData { .. } | CoreError::EmptySeries)
        )
    })
}

/// Forecast each segment with `forecast_one`, skipping segments too short
/// to produce any origin, and merge the rest. Returns the merged table and
/// how many segments were skipped; errors when nothing is long enough.
pub fn forecast_segments(
    frames: &[FeatureFrame<f64>],
    mut forecast_one: impl FnMut(&FeatureFrame<f64>) -> Result<Table>,
) -> Result<(Table, usize)> {
    let mut tables = Vec::new();
    let mut skipped = 0usize;
    for frame in frames {
        match forecast_one(frame) {
            Ok(table) => tables.push(table),
            Err(err) if too_short(&err) => skipped += 1,
            Err(err) => return Err(err),
        }
    }
    if tables.is_empty() {
        return Err(CoreError::InvalidParameter {
            name: "input".into(),
            reason: "no segment is long enough to forecast".into(),
        }
        .into());
    }
    Ok((merge_tables(tables)?, skipped))
}

/// On-disk model: the fitted coefficients plus everything needed to apply
/// them to a fresh cleaned table — input scaling and the target transform.
/// Artifacts add a `config` header key, which deserialization ignores.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub model: ARSpec<f64>,
    pub scaling: ScalingParams<f64>,
    pub target: Target,
    /// Present exactly when `target` is the differenced index.
    pub delta_features: Option<DeltaFeatures>,
}
