//! Data ingestion and preprocessing: CSV reading with fill-value masking,
//! monthly train/validation/test splitting, feature standardization, and
//! sliding-window sample extraction.

use std::path::Path;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::timeseries::{FeatureFrame, Hour, MonthId, TimeSeries, TARGET_FEATURE};

/// The five standard input columns, in canonical order.
pub const STANDARD_FEATURES: [&str; 5] = ["v_sw", "rho_sw", "b_z", "b_mag", TARGET_FEATURE];

/// Maps feature names to CSV column headers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    /// Header of the timestamp column.
    pub timestamp: String,
    /// feature name → column header, in frame order.
    pub columns: IndexMap<String, String>,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            timestamp: "timestamp".into(),
            columns: STANDARD_FEATURES
                .iter()
                .map(|&f| (f.to_string(), f.to_string()))
                .collect(),
        }
    }
}

/// Per-feature fill sentinels: cells equal to any listed value are masked
/// as invalid. Defaults follow hourly solar-wind file conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillPolicy {
    pub sentinels: IndexMap<String, Vec<f64>>,
}

impl Default for FillPolicy {
    fn default() -> Self {
        let mut sentinels = IndexMap::new();
        sentinels.insert("v_sw".to_string(), vec![9999.0, 99999.9]);
        sentinels.insert("rho_sw".to_string(), vec![999.9]);
        sentinels.insert("b_z".to_string(), vec![999.9, 9999.99]);
        sentinels.insert("b_mag".to_string(), vec![999.9, 9999.99]);
        sentinels.insert(TARGET_FEATURE.to_string(), vec![99999.0]);
        FillPolicy { sentinels }
    }
}

impl FillPolicy {
    /// No masking at all.
    pub fn none() -> Self {
        FillPolicy { sentinels: IndexMap::new() }
    }

    fn is_fill(&self, feature: &str, value: f64) -> bool {
        self.sentinels
            .get(feature)
            .is_some_and(|s| s.contains(&value))
    }
}

struct RawTable {
    times: Vec<Hour>,
    /// Per feature (schema order): values and masks, row-aligned with `times`.
    columns: Vec<(String, Vec<f64>, Vec<bool>)>,
}

/// Parse the CSV into timestamped columns, masking fills. Checks timestamps
/// are strictly increasing; cadence is checked by the callers.
fn read_raw(path: &Path, schema: &Schema, fills: &FillPolicy) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?
        .clone();
    let column_index = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::InvalidParameter {
            name: "schema".into(),
            reason: format!("column '{name}' not found in {}", path.display()),
        })
    };
    let time_idx = column_index(&schema.timestamp)?;
    let mut feature_idx = Vec::new();
    for (feature, column) in &schema.columns {
        feature_idx.push((feature.clone(), column_index(column)?));
    }

    let mut times = Vec::new();
    let mut columns: Vec<(String, Vec<f64>, Vec<bool>)> = feature_idx
        .iter()
        .map(|(f, _)| (f.clone(), Vec::new(), Vec::new()))
        .collect();

    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |idx: usize| -> Result<&str> {
            record.get(idx).ok_or_else(|| Error::MalformedRow {
                line,
                reason: format!("missing column {idx}"),
            })
        };
        let t = Hour::parse(field(time_idx)?).map_err(|e| Error::MalformedRow {
            line,
            reason: e.to_string(),
        })?;
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(Error::BrokenCadence {
                    line,
                    found: t.to_iso(),
                    expected: (prev + 1).to_iso(),
                });
            }
        }
        times.push(t);
        for ((feature, idx), (_, values, valid)) in feature_idx.iter().zip(columns.iter_mut()) {
            let text = field(*idx)?;
            let value: f64 = text.parse().map_err(|_| Error::MalformedRow {
                line,
                reason: format!("cannot parse '{text}' in column '{feature}' as a number"),
            })?;
            if fills.is_fill(feature, value) || !value.is_finite() {
                values.push(f64::NAN);
                valid.push(false);
            } else {
                values.push(value);
                valid.push(true);
            }
        }
    }
    if times.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(RawTable { times, columns })
}

fn frame_from_rows<T: Real>(raw: &RawTable, rows: std::ops::Range<usize>) -> Result<FeatureFrame<T>> {
    let mut features = IndexMap::new();
    for (name, values, valid) in &raw.columns {
        let vals: Vec<T> = values[rows.clone()]
            .iter()
            .zip(&valid[rows.clone()])
            .map(|(&v, &ok)| {
                if ok {
                    T::from_f64(v).unwrap_or_else(T::masked_fill)
                } else {
                    T::masked_fill()
                }
            })
            .collect();
        features.insert(
            name.clone(),
            TimeSeries::new(raw.times[rows.start], vals, valid[rows.clone()].to_vec())?,
        );
    }
    FeatureFrame::new(features)
}

/// Read an hourly multivariate CSV into a [`FeatureFrame`].
///
/// Rows must be hourly-consecutive; duplicated, regressing, or gapped
/// timestamps are errors naming the offending line. Cells equal to a fill
/// sentinel become invalid in the mask; row count is preserved.
pub fn read_table<T: Real>(path: &Path, schema: &Schema, fills: &FillPolicy) -> Result<FeatureFrame<T>> {
    let raw = read_raw(path, schema, fills)?;
    for (i, pair) in raw.times.windows(2).enumerate() {
        if pair[1] - pair[0] != 1 {
            return Err(Error::BrokenCadence {
                // header is line 1, row i is line i + 2
                line: i + 3,
                found: pair[1].to_iso(),
                expected: (pair[0] + 1).to_iso(),
            });
        }
    }
    frame_from_rows(&raw, 0..raw.times.len())
}

/// Like [`read_table`], but forward time gaps split the file into multiple
/// hourly-contiguous frames instead of failing — the shape written by the
/// splitter, whose months are not adjacent.
pub fn read_table_segmented<T: Real>(
    path: &Path,
    schema: &Schema,
    fills: &FillPolicy,
) -> Result<Vec<FeatureFrame<T>>> {
    let raw = read_raw(path, schema, fills)?;
    let mut frames = Vec::new();
    let mut start = 0usize;
    for i in 1..raw.times.len() {
        if raw.times[i] - raw.times[i - 1] != 1 {
            frames.push(frame_from_rows(&raw, start..i)?);
            start = i;
        }
    }
    frames.push(frame_from_rows(&raw, start..raw.times.len())?);
    Ok(frames)
}

/// Read a two-column `timestamp,value` CSV into a single series spanning
/// the full time range, with time gaps represented as masked entries.
pub fn read_series<T: Real>(path: &Path, value_column: &str) -> Result<TimeSeries<T>> {
    let schema = Schema {
        timestamp: "timestamp".into(),
        columns: [(value_column.to_string(), value_column.to_string())]
            .into_iter()
            .collect(),
    };
    let raw = read_raw(path, &schema, &FillPolicy::none())?;
    let start = raw.times[0];
    let span = (*raw.times.last().unwrap() - start) as usize + 1;
    let mut values = vec![T::masked_fill(); span];
    let mut valid = vec![false; span];
    let (_, vals, mask) = &raw.columns[0];
    for ((t, &v), &ok) in raw.times.iter().zip(vals).zip(mask) {
        let i = (*t - start) as usize;
        values[i] = if ok { T::from_f64(v).unwrap_or_else(T::masked_fill) } else { T::masked_fill() };
        valid[i] = ok;
    }
    TimeSeries::new(start, values, valid)
}

/// Which split a month landed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitLabel {
    Train,
    Validation,
    Test,
}

/// Monthly splitting policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Calendar months (1–12) reserved for the test split.
    pub test_months: Vec<u32>,
    /// Fraction of the non-test months assigned to training.
    pub train_fraction: f64,
    pub rng_seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        // three test months = 25% of the year; 0.8 of the rest trains,
        // i.e. 60% of all months
        SplitSpec { test_months: vec![4, 8, 12], train_fraction: 0.8, rng_seed: 0 }
    }
}

impl SplitSpec {
    fn validate(&self) -> Result<()> {
        if self.test_months.is_empty() || self.test_months.iter().any(|&m| !(1..=12).contains(&m)) {
            return Err(Error::InvalidParameter {
                name: "test_months".into(),
                reason: "must be a nonempty subset of 1..=12".into(),
            });
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidParameter {
                name: "train_fraction".into(),
                reason: format!("{} is outside (0, 1)", self.train_fraction),
            });
        }
        Ok(())
    }
}

/// Result of [`split_by_month`]: month-frames per split, in chronological
/// order, plus the seed-determined assignment for reproducibility records.
#[derive(Debug, Clone)]
pub struct MonthSplit<T> {
    pub train: Vec<FeatureFrame<T>>,
    pub validation: Vec<FeatureFrame<T>>,
    pub test: Vec<FeatureFrame<T>>,
    pub assignment: Vec<(MonthId, SplitLabel)>,
}

/// Assign each calendar month of the frame to train, validation, or test.
///
/// Months whose calendar month number is in `test_months` are test months;
/// the rest are shuffled with a generator seeded by `rng_seed` and the first
/// `train_fraction` of them train. Deterministic given the seed. Partial
/// months at the frame edges count as months.
pub fn split_by_month<T: Scalar>(frame: &FeatureFrame<T>, spec: &SplitSpec) -> Result<MonthSplit<T>> {
    spec.validate()?;
    let months = frame.months();
    let mut label: IndexMap<MonthId, SplitLabel> = IndexMap::new();
    let mut pool: Vec<MonthId> = Vec::new();
    for (month, _) in &months {
        if spec.test_months.contains(&month.month) {
            label.insert(*month, SplitLabel::Test);
        } else {
            pool.push(*month);
        }
    }
    if !label.values().any(|&l| l == SplitLabel::Test) {
        return Err(Error::EmptySplit("test".into()));
    }
    if pool.len() < 2 {
        return Err(Error::EmptySplit(if pool.is_empty() { "train" } else { "validation" }.into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut shuffled = pool.clone();
    shuffled.shuffle(&mut rng);
    let train_count = ((spec.train_fraction * shuffled.len() as f64).round() as usize)
        .clamp(1, shuffled.len() - 1);
    for (i, month) in shuffled.iter().enumerate() {
        let l = if i < train_count { SplitLabel::Train } else { SplitLabel::Validation };
        label.insert(*month, l);
    }

    let mut split = MonthSplit {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        assignment: Vec::new(),
    };
    for (month, range) in months {
        let sub = frame.slice(range)?;
        let l = label[&month];
        split.assignment.push((month, l));
        match l {
            SplitLabel::Train => split.train.push(sub),
            SplitLabel::Validation => split.validation.push(sub),
            SplitLabel::Test => split.test.push(sub),
        }
    }
    Ok(split)
}

/// Location and scale of one feature on the training split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScale<T> {
    pub mean: T,
    pub std: T,
}

/// Per-feature standardization constants, fitted on training data only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams<T> {
    pub features: IndexMap<String, FeatureScale<T>>,
}

impl<T: Real> ScalingParams<T> {
    pub fn get(&self, feature: &str) -> Result<FeatureScale<T>> {
        self.features
            .get(feature)
            .copied()
            .ok_or_else(|| Error::MissingFeature(feature.to_string()))
    }

    /// `(x - mean) / std` for one value.
    pub fn scale_value(&self, feature: &str, x: T) -> Result<T> {
        let s = self.get(feature)?;
        Ok((x - s.mean) / s.std)
    }

    /// Inverse transform `x * std + mean`.
    pub fn unscale_value(&self, feature: &str, x: T) -> Result<T> {
        let s = self.get(feature)?;
        Ok(x * s.std + s.mean)
    }
}

/// Fit per-feature mean and standard deviation over the valid entries of
/// the training month-frames. The standard deviation is the population one
/// (divide by N). Errors on a constant feature or fewer than 2 valid points.
pub fn fit_scaling<T: Real>(train: &[FeatureFrame<T>]) -> Result<ScalingParams<T>> {
    let first = train.first().ok_or(Error::EmptySeries)?;
    let names: Vec<String> = first.names().map(str::to_string).collect();

    let mut features = IndexMap::new();
    for name in &names {
        let mut count = 0usize;
        let mut sum = T::zero();
        for frame in train {
            let series = frame.feature(name)?;
            for (&v, &ok) in series.values().iter().zip(series.valid()) {
                if ok {
                    sum = sum + v;
                    count += 1;
                }
            }
        }
        if count < 2 {
            return Err(Error::InsufficientData { required: 2, actual: count });
        }
        let mean = sum / T::from_count(count);
        let mut ss = T::zero();
        for frame in train {
            let series = frame.feature(name)?;
            for (&v, &ok) in series.values().iter().zip(series.valid()) {
                if ok {
                    ss = ss + (v - mean) * (v - mean);
                }
            }
        }
        let variance = ss / T::from_count(count);
        if variance <= T::zero() {
            return Err(Error::ZeroVariance { what: name.clone() });
        }
        features.insert(name.clone(), FeatureScale { mean, std: variance.sqrt() });
    }
    Ok(ScalingParams { features })
}

/// Standardize every feature of a frame with the given constants; masked
/// entries stay masked.
pub fn apply_scaling<T: Real>(frame: &FeatureFrame<T>, params: &ScalingParams<T>) -> Result<FeatureFrame<T>> {
    let mut features = IndexMap::new();
    for (name, series) in frame.features() {
        let s = params.get(name)?;
        features.insert(name.to_string(), series.map_valid(|v| (v - s.mean) / s.std)?);
    }
    FeatureFrame::new(features)
}

/// One supervised sample: a fully valid input window and its future targets.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample<T> {
    /// Timestamp of the window's last input hour t.
    pub origin: Hour,
    /// Flattened features × (L+1) input, feature-major (frame order), each
    /// feature's values in time order t−L..=t.
    pub input: Vec<T>,
    /// Target values at t+1..=t+H.
    pub target: Vec<T>,
}

/// Extract every sliding-window sample with a fully valid input window
/// `[t−L, t]` (all features) and targets `[t+1, t+H]` inside the frame.
/// Samples are ordered by origin; may be empty.
pub fn extract_windows<T: Scalar>(
    frame: &FeatureFrame<T>,
    l: usize,
    h: usize,
) -> Result<Vec<WindowSample<T>>> {
    if h == 0 {
        return Err(Error::InvalidParameter {
            name: "horizons".into(),
            reason: "must be at least 1".into(),
        });
    }
    let n = frame.len();
    let target = frame.target()?;

    // prefix counts of rows with any invalid feature
    let mut bad_prefix = vec![0usize; n + 1];
    {
        let masks: Vec<&[bool]> = frame.features().map(|(_, s)| s.valid()).collect();
        for i in 0..n {
            let any_bad = masks.iter().any(|m| !m[i]);
            bad_prefix[i + 1] = bad_prefix[i] + usize::from(any_bad);
        }
    }

    let mut samples = Vec::new();
    if n < l + h + 1 {
        return Ok(samples);
    }
    for t in l..=(n - 1 - h) {
        if bad_prefix[t + 1] - bad_prefix[t - l] != 0 {
            continue;
        }
        let mut input = Vec::with_capacity(frame.feature_count() * (l + 1));
        for (_, series) in frame.features() {
            input.extend_from_slice(&series.values()[t - l..=t]);
        }
        let target_vals = target.values()[t + 1..=t + h].to_vec();
        samples.push(WindowSample {
            origin: frame.start() + t as i64,
            input,
            target: target_vals,
        });
    }
    Ok(samples)
}
