//! Core data model: hourly series, multivariate frames, forecast tables and
//! contiguous-segment extraction.
//!
//! Timestamps are plain hour counts since the Unix epoch; calendar conversion
//! happens only at I/O boundaries. Missing values are carried by a validity
//! mask, never by sentinel magic numbers. All types are immutable after
//! construction.

use std::fmt;
use std::ops::{Add, Range, Sub};

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Hours since 1970-01-01T00:00:00Z. The only time coordinate used internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Hour(pub i64);

impl Hour {
    /// Convert from a UTC datetime; must sit exactly on an hour boundary.
    pub fn from_datetime(dt: DateTime<Utc>) -> Result<Hour> {
        let secs = dt.timestamp();
        if secs % 3600 != 0 {
            return Err(Error::InvalidParameter {
                name: "timestamp".into(),
                reason: format!("{dt} is not on an hour boundary"),
            });
        }
        Ok(Hour(secs / 3600))
    }

    pub fn to_datetime(self) -> DateTime<Utc> {
        Utc.timestamp_opt(self.0 * 3600, 0).unwrap()
    }

    /// Parse an ISO-8601 timestamp (`2001-01-14T00:00:00Z` and common variants).
    pub fn parse(text: &str) -> Result<Hour> {
        let bad = |reason: String| Error::InvalidParameter {
            name: "timestamp".into(),
            reason,
        };
        if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
            return Hour::from_datetime(dt.with_timezone(&Utc));
        }
        for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
            if let Ok(naive) = NaiveDateTime::parse_from_str(text, fmt) {
                return Hour::from_datetime(Utc.from_utc_datetime(&naive));
            }
        }
        Err(bad(format!("cannot parse '{text}' as an ISO-8601 UTC timestamp")))
    }

    /// Render as `YYYY-MM-DDTHH:00:00Z`.
    pub fn to_iso(self) -> String {
        self.to_datetime().format("%Y-%m-%dT%H:%M:%SZ").to_string()
    }

    /// Calendar month containing this hour.
    pub fn month(self) -> MonthId {
        let dt = self.to_datetime();
        MonthId {
            year: dt.year(),
            month: dt.month(),
        }
    }
}

impl Add<i64> for Hour {
    type Output = Hour;
    fn add(self, rhs: i64) -> Hour {
        Hour(self.0 + rhs)
    }
}

impl Sub<i64> for Hour {
    type Output = Hour;
    fn sub(self, rhs: i64) -> Hour {
        Hour(self.0 - rhs)
    }
}

impl Sub<Hour> for Hour {
    type Output = i64;
    fn sub(self, rhs: Hour) -> i64 {
        self.0 - rhs.0
    }
}

impl fmt::Display for Hour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso())
    }
}

/// A calendar month (UTC), the unit of data splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MonthId {
    pub year: i32,
    pub month: u32,
}

impl MonthId {
    /// First hour of the month.
    pub fn first_hour(self) -> Hour {
        let date = NaiveDate::from_ymd_opt(self.year, self.month, 1).unwrap();
        Hour::from_datetime(Utc.from_utc_datetime(&date.and_hms_opt(0, 0, 0).unwrap())).unwrap()
    }

    /// First hour of the following month.
    pub fn next(self) -> MonthId {
        if self.month == 12 {
            MonthId { year: self.year + 1, month: 1 }
        } else {
            MonthId { year: self.year, month: self.month + 1 }
        }
    }
}

impl fmt::Display for MonthId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Uniformly sampled hourly series with a validity mask.
///
/// Index `i` corresponds to `start + i` hours. Valid entries are always
/// finite; masked entries hold [`Scalar::masked_fill`] and must never be read
/// as data.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    start: Hour,
    values: Vec<T>,
    valid: Vec<bool>,
}

impl<T: Scalar> TimeSeries<T> {
    /// Build a series, checking the mask/value contract.
    pub fn new(start: Hour, values: Vec<T>, valid: Vec<bool>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if values.len() != valid.len() {
            return Err(Error::LengthMismatch { left: values.len(), right: valid.len() });
        }
        for (i, (&v, &ok)) in values.iter().zip(&valid).enumerate() {
            if ok && !v.finite() {
                return Err(Error::NonFinite { index: i });
            }
        }
        Ok(TimeSeries { start, values, valid })
    }

    /// Build a fully valid series.
    pub fn dense(start: Hour, values: Vec<T>) -> Result<Self> {
        let valid = vec![true; values.len()];
        TimeSeries::new(start, values, valid)
    }

    pub fn start(&self) -> Hour {
        self.start
    }

    /// Timestamp of the last sample.
    pub fn end(&self) -> Hour {
        self.start + (self.values.len() as i64 - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&b| b).count()
    }

    /// The value at index `i` if it is valid.
    pub fn get(&self, i: usize) -> Option<T> {
        if i < self.values.len() && self.valid[i] {
            Some(self.values[i])
        } else {
            None
        }
    }

    /// Index corresponding to a timestamp, if inside the series range.
    pub fn index_of(&self, t: Hour) -> Option<usize> {
        let offset = t - self.start;
        if offset >= 0 && (offset as usize) < self.values.len() {
            Some(offset as usize)
        } else {
            None
        }
    }

    /// Valid value at a timestamp.
    pub fn value_at(&self, t: Hour) -> Option<T> {
        self.index_of(t).and_then(|i| self.get(i))
    }

    /// Copy out a sub-range as its own series.
    pub fn slice(&self, range: Range<usize>) -> Result<TimeSeries<T>> {
        if range.start >= range.end || range.end > self.values.len() {
            return Err(Error::InvalidParameter {
                name: "range".into(),
                reason: format!("{range:?} out of bounds for length {}", self.values.len()),
            });
        }
        Ok(TimeSeries {
            start: self.start + range.start as i64,
            values: self.values[range.clone()].to_vec(),
            valid: self.valid[range].to_vec(),
        })
    }

    /// Apply a value transform to the valid entries, keeping the mask.
    pub fn map_valid(&self, mut f: impl FnMut(T) -> T) -> Result<TimeSeries<T>> {
        let values = self
            .values
            .iter()
            .zip(&self.valid)
            .map(|(&v, &ok)| if ok { f(v) } else { T::masked_fill() })
            .collect();
        TimeSeries::new(self.start, values, self.valid.clone())
    }
}

/// A maximal run of valid samples inside a parent [`TimeSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    /// Index of the first valid sample in the parent.
    pub offset: usize,
    /// Number of valid samples, at least 1.
    pub len: usize,
}

impl Segment {
    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Maximal, disjoint, ordered runs of valid samples. An all-invalid series
/// yields an empty list.
pub fn contiguous_segments<T: Scalar>(series: &TimeSeries<T>) -> Vec<Segment> {
    let mut segments = Vec::new();
    let mut run_start: Option<usize> = None;
    for (i, &ok) in series.valid().iter().enumerate() {
        match (ok, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                segments.push(Segment { offset: s, len: i - s });
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        segments.push(Segment { offset: s, len: series.len() - s });
    }
    segments
}

/// Name of the forecast target feature inside a [`FeatureFrame`].
pub const TARGET_FEATURE: &str = "dst";

/// Aligned multivariate hourly series sharing one start time and length.
///
/// The target series (`dst`) must be gap-free when present; the other
/// features may carry masked entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrame<T> {
    start: Hour,
    len: usize,
    features: indexmap::IndexMap<String, TimeSeries<T>>,
}

impl<T: Scalar> FeatureFrame<T> {
    pub fn new(features: indexmap::IndexMap<String, TimeSeries<T>>) -> Result<Self> {
        let mut iter = features.iter();
        let (first_name, first) = iter
            .next()
            .ok_or_else(|| Error::InvalidFrame("frame has no features".into()))?;
        let (start, len) = (first.start(), first.len());
        for (name, series) in iter {
            if series.start() != start || series.len() != len {
                return Err(Error::InvalidFrame(format!(
                    "feature '{name}' spans {} x{}, expected {} x{} like '{first_name}'",
                    series.start(),
                    series.len(),
                    start,
                    len
                )));
            }
        }
        if let Some(dst) = features.get(TARGET_FEATURE) {
            if dst.valid_count() != dst.len() {
                return Err(Error::InvalidFrame(format!(
                    "target feature '{TARGET_FEATURE}' must be gap-free"
                )));
            }
        }
        Ok(FeatureFrame { start, len, features })
    }

    pub fn start(&self) -> Hour {
        self.start
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn end(&self) -> Hour {
        self.start + (self.len as i64 - 1)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.keys().map(String::as_str)
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn feature(&self, name: &str) -> Result<&TimeSeries<T>> {
        self.features
            .get(name)
            .ok_or_else(|| Error::MissingFeature(name.to_string()))
    }

    pub fn features(&self) -> impl Iterator<Item = (&str, &TimeSeries<T>)> {
        self.features.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Target (`dst`) series.
    pub fn target(&self) -> Result<&TimeSeries<T>> {
        self.feature(TARGET_FEATURE)
    }

    /// Copy out a sub-range of every feature.
    pub fn slice(&self, range: Range<usize>) -> Result<FeatureFrame<T>> {
        let mut features = indexmap::IndexMap::new();
        for (name, series) in &self.features {
            features.insert(name.clone(), series.slice(range.clone())?);
        }
        FeatureFrame::new(features)
    }

    /// Calendar months covered by the frame, each with its index range
    /// (partial coverage at the edges allowed).
    pub fn months(&self) -> Vec<(MonthId, Range<usize>)> {
        let mut out = Vec::new();
        let mut month = self.start.month();
        loop {
            let lo = self.start.0.max(month.first_hour().0) - self.start.0;
            let next = month.next();
            let hi = (self.start.0 + self.len as i64).min(next.first_hour().0) - self.start.0;
            if hi <= lo {
                break;
            }
            out.push((month, lo as usize..hi as usize));
            if self.start.0 + self.len as i64 <= next.first_hour().0 {
                break;
            }
            month = next;
        }
        out
    }
}

/// Per-origin forecasts for horizons `t+1h ..= t+Hh`, tied to the
/// observation series they predict.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastTable<T> {
    origins: Vec<Hour>,
    horizons: usize,
    /// Row-major `origins x horizons`, all finite.
    predictions: Vec<T>,
    observation: TimeSeries<T>,
}

impl<T: Scalar> ForecastTable<T> {
    pub fn new(
        origins: Vec<Hour>,
        horizons: usize,
        predictions: Vec<T>,
        observation: TimeSeries<T>,
    ) -> Result<Self> {
        if horizons == 0 {
            return Err(Error::InvalidParameter {
                name: "horizons".into(),
                reason: "must be at least 1".into(),
            });
        }
        if origins.is_empty() {
            return Err(Error::EmptySeries);
        }
        if predictions.len() != origins.len() * horizons {
            return Err(Error::LengthMismatch {
                left: predictions.len(),
                right: origins.len() * horizons,
            });
        }
        if let Some(w) = origins.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter {
                name: "origins".into(),
                reason: format!("not strictly increasing at {}", w[1]),
            });
        }
        if let Some(i) = predictions.iter().position(|v| !v.finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(ForecastTable { origins, horizons, predictions, observation })
    }

    pub fn origins(&self) -> &[Hour] {
        &self.origins
    }

    pub fn horizons(&self) -> usize {
        self.horizons
    }

    pub fn observation(&self) -> &TimeSeries<T> {
        &self.observation
    }

    /// Forecast issued at origin `k` for horizon `h` (1-based hours ahead).
    pub fn prediction(&self, k: usize, h: usize) -> T {
        self.predictions[k * self.horizons + (h - 1)]
    }

    /// Pair each horizon-`h` forecast with the observation it predicts,
    /// restricted to evaluable cells (target time in range and valid),
    /// in time order.
    pub fn align(&self, h: usize) -> Result<Aligned<T>> {
        if h < 1 || h > self.horizons {
            return Err(Error::HorizonOutOfRange { horizon: h, max: self.horizons });
        }
        let mut times = Vec::new();
        let mut model = Vec::new();
        let mut observed = Vec::new();
        for (k, &origin) in self.origins.iter().enumerate() {
            let target_time = origin + h as i64;
            if let Some(obs) = self.observation.value_at(target_time) {
                times.push(target_time);
                model.push(self.prediction(k, h));
                observed.push(obs);
            }
        }
        Ok(Aligned { horizon: h, times, model, observed })
    }
}

/// Output of [`ForecastTable::align`]: equal-length model/observation pairs
/// with the target timestamps they refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct Aligned<T> {
    pub horizon: usize,
    pub times: Vec<Hour>,
    pub model: Vec<T>,
    pub observed: Vec<T>,
}

impl<T> Aligned<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index ranges whose timestamps are hourly-consecutive.
    pub fn contiguous_runs(&self) -> Vec<Range<usize>> {
        let mut runs = Vec::new();
        if self.times.is_empty() {
            return runs;
        }
        let mut lo = 0;
        for i in 1..self.times.len() {
            if self.times[i] - self.times[i - 1] != 1 {
                runs.push(lo..i);
                lo = i;
            }
        }
        runs.push(lo..self.times.len());
        runs
    }
}
