//! Point-forecast verification metrics.
//!
//! All metrics take two equal-length slices: `model` (forecasts) and
//! `observed` (what happened). Inputs must be finite — masked values are
//! expected to be filtered out upstream by alignment. Moment-based metrics
//! use the population convention (divide by N).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_pair<T: Real>(model: &[T], observed: &[T]) -> Result<()> {
    if model.is_empty() || observed.is_empty() {
        return Err(Error::EmptySeries);
    }
    if model.len() != observed.len() {
        return Err(Error::LengthMismatch { left: model.len(), right: observed.len() });
    }
    for (i, &v) in model.iter().chain(observed.iter()).enumerate() {
        if !v.finite() {
            return Err(Error::NonFinite { index: i % model.len() });
        }
    }
    Ok(())
}

fn mean<T: Real>(xs: &[T]) -> T {
    let sum = xs.iter().fold(T::zero(), |acc, &x| acc + x);
    sum / T::from_count(xs.len())
}

/// Population covariance of two equal-length slices.
fn covariance<T: Real>(xs: &[T], ys: &[T]) -> T {
    let (mx, my) = (mean(xs), mean(ys));
    let sum = xs
        .iter()
        .zip(ys)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - mx) * (y - my));
    sum / T::from_count(xs.len())
}

/// Mean squared error `mean((model - observed)^2)`.
pub fn mse<T: Real>(model: &[T], observed: &[T]) -> Result<T> {
    check_pair(model, observed)?;
    let sum = model
        .iter()
        .zip(observed)
        .fold(T::zero(), |acc, (&m, &o)| acc + (m - o) * (m - o));
    Ok(sum / T::from_count(model.len()))
}

/// Root mean squared error.
pub fn rmse<T: Real>(model: &[T], observed: &[T]) -> Result<T> {
    Ok(mse(model, observed)?.sqrt())
}

/// Mean absolute error.
pub fn mae<T: Real>(model: &[T], observed: &[T]) -> Result<T> {
    check_pair(model, observed)?;
    let sum = model
        .iter()
        .zip(observed)
        .fold(T::zero(), |acc, (&m, &o)| acc + (m - o).abs());
    Ok(sum / T::from_count(model.len()))
}

/// Mean error (bias), `mean(model - observed)`.
pub fn me<T: Real>(model: &[T], observed: &[T]) -> Result<T> {
    check_pair(model, observed)?;
    let sum = model
        .iter()
        .zip(observed)
        .fold(T::zero(), |acc, (&m, &o)| acc + (m - o));
    Ok(sum / T::from_count(model.len()))
}

/// Pearson linear correlation coefficient, clamped to [-1, 1] to absorb
/// floating-point overshoot. Errors if either side has zero variance.
pub fn pearson_r<T: Real>(model: &[T], observed: &[T]) -> Result<T> {
    check_pair(model, observed)?;
    if model.len() < 2 {
        return Err(Error::InsufficientData { required: 2, actual: model.len() });
    }
    let cov = covariance(model, observed);
    let var_m = covariance(model, model);
    let var_o = covariance(observed, observed);
    if var_m <= T::zero() {
        return Err(Error::ZeroVariance { what: "model".into() });
    }
    if var_o <= T::zero() {
        return Err(Error::ZeroVariance { what: "observed".into() });
    }
    let r = cov / (var_m * var_o).sqrt();
    Ok(r.min(T::one()).max(-T::one()))
}

/// Least-squares line `model = A + B * observed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit<T> {
    /// Intercept A.
    pub intercept: T,
    /// Slope B.
    pub slope: T,
}

/// Fit `model ~ A + B * observed` by least squares. A perfect forecast gives
/// A = 0, B = 1. Errors if the observations have zero variance.
pub fn linear_fit<T: Real>(model: &[T], observed: &[T]) -> Result<LinearFit<T>> {
    check_pair(model, observed)?;
    if model.len() < 2 {
        return Err(Error::InsufficientData { required: 2, actual: model.len() });
    }
    let var_o = covariance(observed, observed);
    if var_o <= T::zero() {
        return Err(Error::ZeroVariance { what: "observed".into() });
    }
    let slope = covariance(model, observed) / var_o;
    let intercept = mean(model) - slope * mean(observed);
    Ok(LinearFit { intercept, slope })
}

/// Prediction efficiency `1 - sum((M-O)^2) / sum((O - mean(O))^2)`.
///
/// 1 is a perfect forecast; 0 matches forecasting the observed mean; negative
/// values are worse than the mean. Errors if the observations have zero
/// variance.
pub fn prediction_efficiency<T: Real>(model: &[T], observed: &[T]) -> Result<T> {
    check_pair(model, observed)?;
    let mo = mean(observed);
    let mut err = T::zero();
    let mut var = T::zero();
    for (&m, &o) in model.iter().zip(observed) {
        err = err + (m - o) * (m - o);
        var = var + (o - mo) * (o - mo);
    }
    if var <= T::zero() {
        return Err(Error::ZeroVariance { what: "observed".into() });
    }
    Ok(T::one() - err / var)
}

/// Every scalar metric for one model/observation pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport<T> {
    pub n: usize,
    pub rmse: T,
    pub mse: T,
    pub mae: T,
    pub me: T,
    pub pearson_r: T,
    pub intercept: T,
    pub slope: T,
    pub prediction_efficiency: T,
}

impl<T: Real> MetricReport<T> {
    /// The report as (name, value) pairs, in stable order; `n` is converted
    /// to the scalar type. Used for tabular export and fold aggregation.
    pub fn fields(&self) -> [(&'static str, T); 9] {
        [
            ("n", T::from_count(self.n)),
            ("rmse", self.rmse),
            ("mse", self.mse),
            ("mae", self.mae),
            ("me", self.me),
            ("pearson_r", self.pearson_r),
            ("intercept", self.intercept),
            ("slope", self.slope),
            ("prediction_efficiency", self.prediction_efficiency),
        ]
    }
}

/// Compute the full [`MetricReport`] in one pass over the inputs.
pub fn report<T: Real>(model: &[T], observed: &[T]) -> Result<MetricReport<T>> {
    let fit = linear_fit(model, observed)?;
    Ok(MetricReport {
        n: model.len(),
        rmse: rmse(model, observed)?,
        mse: mse(model, observed)?,
        mae: mae(model, observed)?,
        me: me(model, observed)?,
        pearson_r: pearson_r(model, observed)?,
        intercept: fit.intercept,
        slope: fit.slope,
        prediction_efficiency: prediction_efficiency(model, observed)?,
    })
}
