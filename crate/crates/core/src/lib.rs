//! Forecast verification for hourly geomagnetic index series.
//!
//! The crate evaluates point forecasts of the Dst index (and similar hourly
//! signals) along two complementary axes:
//!
//! * **Amplitude fit** — classical residual metrics (RMSE, MAE, mean error,
//!   Pearson correlation, linear regression of model on observation, and
//!   prediction efficiency) in [`metrics`].
//! * **Timing fit** — a dynamic-time-warping diagnostic in [`dtw`] and
//!   [`warpmeasure`] that aligns each fixed-horizon forecast track with the
//!   observations and histograms the time shifts along the optimal warping
//!   path. A forecast that merely replays the past (persistence-like
//!   behaviour) concentrates its mass at a nonzero shift even when its
//!   residual metrics look competitive.
//!
//! Around these sit the supporting pieces of an evaluation pipeline:
//! [`ingest`] reads hourly CSV tables with fill-value masking, splits them
//! into train/validation/test by calendar month, standardises features, and
//! extracts sliding windows; [`forecasters`] provides the persistence
//! baseline, first differencing, and a least-squares autoregressive model;
//! [`stats`] computes gap-aware ACF/PACF correlograms; [`crossval`] runs
//! seeded k-fold cross-validation over months. All randomised procedures
//! take explicit seeds and all containers preserve insertion order, so a
//! given input and seed reproduce byte-identical results regardless of
//! thread count.
//!
//! Numeric code is generic over [`Scalar`] (ordered signed arithmetic, e.g.
//! the exact integer DTW used in tests) or [`Real`] (floating point); the
//! aliases at the crate root fix `f64` for ordinary use.

pub mod crossval;
pub mod dtw;
pub mod error;
pub mod forecasters;
pub mod ingest;
pub mod metrics;
pub mod scalar;
pub mod stats;
pub mod timeseries;
pub mod warpmeasure;

pub use crate::crossval::{run_cv, CVReport, ForecasterSpec};
pub use crate::dtw::{cumulative_grid, dtw_cost, WarpPath, WindowConstraint};
pub use crate::error::{Error, Result};
pub use crate::forecasters::{ar_forecast, difference, fit_ar, persistence_forecast, reintegrate, ARSpec};
pub use crate::ingest::{
    apply_scaling, extract_windows, fit_scaling, read_series, read_table, read_table_segmented,
    split_by_month, FillPolicy, ScalingParams, Schema, SplitLabel, SplitSpec,
};
pub use crate::metrics::MetricReport;
pub use crate::scalar::{Real, Scalar};
pub use crate::stats::{acf, lag_pairs, pacf, CorrelogramRow};
pub use crate::timeseries::{
    FeatureFrame, ForecastTable, Hour, MonthId, TimeSeries, TARGET_FEATURE,
};
pub use crate::warpmeasure::{
    default_min_segment_len, measure_all, measure_all_with, measure_horizon,
    measure_horizon_with, ShiftHistogram, WarpMeasureTable,
};

/// Hourly scalar series with validity mask, `f64` values.
pub type Series = timeseries::TimeSeries<f64>;
/// Multivariate hourly frame, `f64` values.
pub type Frame = timeseries::FeatureFrame<f64>;
/// Fixed-horizon forecast table paired with its observations, `f64` values.
pub type Table = timeseries::ForecastTable<f64>;
/// Per-feature standardisation parameters, `f64` values.
pub type Scaling = ingest::ScalingParams<f64>;
/// Autoregressive model specification/fit, `f64` coefficients.
pub type ArModel = forecasters::ARSpec<f64>;
/// Bundle of amplitude metrics for one model/observation pairing.
pub type Report = metrics::MetricReport<f64>;
