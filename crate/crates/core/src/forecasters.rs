//! Baseline forecast generators: persistence, first-difference transforms,
//! and a linear autoregressive multi-horizon forecaster.
//!
//! Persistence ("the value does not change") is the reference any serious
//! forecaster must beat; on strongly autocorrelated series it scores well on
//! pointwise metrics while being pure delay. Differencing removes that
//! inertia so skill can be measured on the part that actually changes. The
//! AR forecaster is a deterministic, fully reproducible stand-in for
//! learned models in pipeline tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{FeatureScale, WindowSample};
use crate::scalar::{Real, Scalar};
use crate::timeseries::{ForecastTable, Hour, TimeSeries};

/// Configuration of the persistence baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersistenceSpec {
    /// Number of forecast horizons H (hours ahead), at least 1.
    pub horizons: usize,
}

/// Persistence forecast: the prediction for every horizon is the observed
/// value at the origin. Origins are all valid observation times; the series
/// must be longer than `horizons`.
pub fn persistence_forecast<T: Scalar>(
    obs: &TimeSeries<T>,
    horizons: usize,
) -> Result<ForecastTable<T>> {
    if horizons == 0 {
        return Err(Error::InvalidParameter {
            name: "horizons".into(),
            reason: "must be at least 1".into(),
        });
    }
    if obs.len() <= horizons {
        return Err(Error::InsufficientData { required: horizons + 1, actual: obs.len() });
    }
    let mut origins = Vec::new();
    let mut predictions = Vec::new();
    for i in 0..obs.len() {
        if let Some(v) = obs.get(i) {
            origins.push(obs.start() + i as i64);
            predictions.extend(std::iter::repeat_n(v, horizons));
        }
    }
    ForecastTable::new(origins, horizons, predictions, obs.clone())
}

/// First difference: value at t is `x[t] - x[t-1]`, defined where both are
/// valid. The result starts one hour after the input and is one shorter.
pub fn difference<T: Scalar>(series: &TimeSeries<T>) -> Result<TimeSeries<T>> {
    if series.len() < 2 {
        return Err(Error::InsufficientData { required: 2, actual: series.len() });
    }
    let values = series.values();
    let valid = series.valid();
    let mut out = Vec::with_capacity(values.len() - 1);
    let mut out_valid = Vec::with_capacity(values.len() - 1);
    for i in 1..values.len() {
        if valid[i] && valid[i - 1] {
            out.push(values[i] - values[i - 1]);
            out_valid.push(true);
        } else {
            out.push(T::masked_fill());
            out_valid.push(false);
        }
    }
    TimeSeries::new(series.start() + 1, out, out_valid)
}

/// Undo [`difference`]: given the differenced series and the original value
/// at the hour preceding it, rebuild the level series by cumulative
/// summation. Exact (bitwise) for integer-valued inputs. The differenced
/// series must be gap-free.
pub fn reintegrate<T: Scalar>(diff: &TimeSeries<T>, anchor: T) -> Result<TimeSeries<T>> {
    if !anchor.finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    if diff.valid_count() != diff.len() {
        return Err(Error::InvalidParameter {
            name: "diff".into(),
            reason: "cannot reintegrate across gaps".into(),
        });
    }
    let mut values = Vec::with_capacity(diff.len() + 1);
    values.push(anchor);
    let mut level = anchor;
    for &d in diff.values() {
        level = level + d;
        values.push(level);
    }
    TimeSeries::dense(diff.start() - 1, values)
}

/// Linear autoregressive forecaster over flattened lag windows: one least-
/// squares model per horizon, sharing the input layout of
/// [`WindowSample`](crate::ingest::WindowSample). Unfitted until
/// [`fit_ar`] fills the coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ARSpec<T> {
    /// Input lag L: the window covers t-L..=t.
    pub lag: usize,
    /// Forecast horizons H.
    pub horizons: usize,
    /// Feature names in window order; informational, checked when present.
    pub features: Vec<String>,
    /// Per-horizon coefficients over the flattened input, length
    /// features·(lag+1) each. Empty until fitted.
    pub coefficients: Vec<Vec<T>>,
    /// Per-horizon intercepts.
    pub intercepts: Vec<T>,
    /// Scale of the target feature when the model was fitted on
    /// standardized data; predictions are mapped back through it.
    pub target_scale: Option<FeatureScale<T>>,
    /// True when the normal equations were rank-deficient and a small ridge
    /// term stabilized the solve.
    pub ridge_fallback: bool,
}

impl<T: Real> ARSpec<T> {
    pub fn new(lag: usize, horizons: usize) -> Self {
        ARSpec {
            lag,
            horizons,
            features: Vec::new(),
            coefficients: Vec::new(),
            intercepts: Vec::new(),
            target_scale: None,
            ridge_fallback: false,
        }
    }

    pub fn is_fitted(&self) -> bool {
        self.coefficients.len() == self.horizons && self.intercepts.len() == self.horizons
    }

    fn predict_scaled(&self, input: &[T], h: usize) -> T {
        let coeffs = &self.coefficients[h - 1];
        let mut y = self.intercepts[h - 1];
        for (&c, &x) in coeffs.iter().zip(input) {
            y = y + c * x;
        }
        y
    }
}

/// Fit per-horizon least squares of targets on the flattened input windows.
///
/// The normal equations are accumulated in f64 over samples sorted by
/// origin, making the fit independent of input order; a rank-deficient
/// system falls back to a fixed small ridge term (1e-6 of the mean diagonal)
/// and reports it via `ridge_fallback`. Requires more samples than
/// coefficients.
pub fn fit_ar<T: Real>(samples: &[WindowSample<T>], spec: &ARSpec<T>) -> Result<ARSpec<T>> {
    let first = samples.first().ok_or(Error::EmptySeries)?;
    let d = first.input.len();
    if samples.len() < d + 1 {
        return Err(Error::InsufficientData { required: d + 1, actual: samples.len() });
    }
    for s in samples {
        if s.input.len() != d {
            return Err(Error::LengthMismatch { left: s.input.len(), right: d });
        }
        if s.target.len() < spec.horizons {
            return Err(Error::LengthMismatch { left: s.target.len(), right: spec.horizons });
        }
    }

    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by_key(|&i| samples[i].origin);

    // design has a leading constant column; xtx is (d+1) x (d+1)
    let dim = d + 1;
    let mut xtx = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    let mut xty = nalgebra::DMatrix::<f64>::zeros(dim, spec.horizons);
    let mut row = vec![0.0f64; dim];
    let mut ys = vec![0.0f64; spec.horizons];
    for &idx in &order {
        let s = &samples[idx];
        row[0] = 1.0;
        for (k, &v) in s.input.iter().enumerate() {
            row[k + 1] = v.to_f64().ok_or(Error::NonFinite { index: k })?;
        }
        for (h, y) in ys.iter_mut().enumerate() {
            *y = s.target[h].to_f64().ok_or(Error::NonFinite { index: h })?;
        }
        for a in 0..dim {
            for b in a..dim {
                xtx[(a, b)] += row[a] * row[b];
            }
            for h in 0..spec.horizons {
                xty[(a, h)] += row[a] * ys[h];
            }
        }
    }
    for a in 0..dim {
        for b in 0..a {
            xtx[(a, b)] = xtx[(b, a)];
        }
    }

    // A rank-deficient system can slip past Cholesky as a zero or tiny
    // pivot, so treat a non-finite solution the same as a failed factor.
    let plain = xtx
        .clone()
        .cholesky()
        .map(|c| c.solve(&xty))
        .filter(|b| b.iter().all(|v| v.is_finite()));
    let mut ridge_fallback = false;
    let beta = match plain {
        Some(b) => b,
        None => {
            ridge_fallback = true;
            let lambda = 1e-6 * xtx.trace() / dim as f64;
            let mut reg = xtx;
            for a in 0..dim {
                reg[(a, a)] += lambda;
            }
            let chol = reg.cholesky().ok_or_else(|| Error::InvalidParameter {
                name: "design".into(),
                reason: "normal equations not solvable even with ridge term".into(),
            })?;
            chol.solve(&xty)
        }
    };

    let from = |v: f64| T::from_f64(v).ok_or(Error::NonFinite { index: 0 });
    let mut fitted = spec.clone();
    fitted.coefficients = Vec::with_capacity(spec.horizons);
    fitted.intercepts = Vec::with_capacity(spec.horizons);
    for h in 0..spec.horizons {
        fitted.intercepts.push(from(beta[(0, h)])?);
        let mut coeffs = Vec::with_capacity(d);
        for k in 0..d {
            coeffs.push(from(beta[(k + 1, h)])?);
        }
        fitted.coefficients.push(coeffs);
    }
    fitted.ridge_fallback = ridge_fallback;
    Ok(fitted)
}

/// Forecast at every extractable origin of the frame. The frame must be in
/// the same (scaled) units the model was fitted on; predictions and the
/// attached observation series are mapped back through `target_scale` when
/// present, so the output table is in original units.
pub fn ar_forecast<T: Real>(
    model: &ARSpec<T>,
    frame: &crate::timeseries::FeatureFrame<T>,
) -> Result<ForecastTable<T>> {
    if !model.is_fitted() {
        return Err(Error::NotFitted);
    }
    if !model.features.is_empty() {
        let names: Vec<&str> = frame.names().collect();
        if names != model.features.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::InvalidParameter {
                name: "features".into(),
                reason: format!("frame features {names:?} do not match the model's {:?}", model.features),
            });
        }
    }
    let expected = frame.feature_count() * (model.lag + 1);
    if model.coefficients[0].len() != expected {
        return Err(Error::LengthMismatch { left: model.coefficients[0].len(), right: expected });
    }

    let samples = crate::ingest::extract_windows(frame, model.lag, model.horizons)?;
    if samples.is_empty() {
        return Err(Error::EmptySeries);
    }
    let unscale = |v: T| match model.target_scale {
        Some(s) => v * s.std + s.mean,
        None => v,
    };

    let mut origins: Vec<Hour> = Vec::with_capacity(samples.len());
    let mut predictions = Vec::with_capacity(samples.len() * model.horizons);
    for s in &samples {
        origins.push(s.origin);
        for h in 1..=model.horizons {
            predictions.push(unscale(model.predict_scaled(&s.input, h)));
        }
    }
    let observation = frame.target()?.map_valid(unscale)?;
    ForecastTable::new(origins, model.horizons, predictions, observation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::extract_windows;
    use crate::timeseries::FeatureFrame;
    use indexmap::IndexMap;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn persistence_aligns_to_the_definition() {
        let obs = TimeSeries::dense(Hour(0), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let table = persistence_forecast(&obs, 1).unwrap();
        let aligned = table.align(1).unwrap();
        assert_eq!(aligned.model, vec![1.0, 2.0, 3.0]);
        assert_eq!(aligned.observed, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn persistence_aligned_model_is_delayed_observation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let values: Vec<f64> = (0..50).map(|_| rng.gen_range(-30.0..5.0)).collect();
        let obs = TimeSeries::dense(Hour(100), values.clone()).unwrap();
        let table = persistence_forecast(&obs, 6).unwrap();
        for h in 1..=6usize {
            let aligned = table.align(h).unwrap();
            assert_eq!(aligned.len(), 50 - h);
            for k in 0..aligned.len() {
                assert_eq!(aligned.model[k], values[k]);
                assert_eq!(aligned.observed[k], values[k + h]);
            }
        }
    }

    #[test]
    fn persistence_needs_enough_data() {
        let obs = TimeSeries::dense(Hour(0), vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            persistence_forecast(&obs, 2),
            Err(Error::InsufficientData { required: 3, actual: 2 })
        ));
    }

    #[test]
    fn difference_examples() {
        let x = TimeSeries::dense(Hour(5), vec![5.0, 5.0, 5.0]).unwrap();
        let d = difference(&x).unwrap();
        assert_eq!(d.values(), &[0.0, 0.0]);
        assert_eq!(d.start(), Hour(6));

        let x = TimeSeries::dense(Hour(0), vec![0.0, 3.0, 1.0]).unwrap();
        let d = difference(&x).unwrap();
        assert_eq!(d.values(), &[3.0, -2.0]);
        let back = reintegrate(&d, 0.0).unwrap();
        assert_eq!(back.values(), &[0.0, 3.0, 1.0]);
        assert_eq!(back.start(), Hour(0));
    }

    #[test]
    fn difference_respects_gaps() {
        let x = TimeSeries::new(
            Hour(0),
            vec![1.0, f64::NAN, 4.0, 6.0],
            vec![true, false, true, true],
        )
        .unwrap();
        let d = difference(&x).unwrap();
        assert_eq!(d.valid(), &[false, false, true]);
        assert_eq!(d.get(2), Some(2.0));
        assert!(reintegrate(&d, 1.0).is_err());
    }

    #[test]
    fn integer_round_trip_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let values: Vec<i64> = (0..10_000).map(|_| rng.gen_range(-400i64..100)).collect();
        let x = TimeSeries::dense(Hour(0), values.clone()).unwrap();
        let d = difference(&x).unwrap();
        let back = reintegrate(&d, values[0]).unwrap();
        assert_eq!(back.values(), x.values());
        assert_eq!(back.start(), x.start());

        // and double-differencing round-trips too
        let d2 = difference(&d).unwrap();
        let d_back = reintegrate(&d2, *d.values().first().unwrap()).unwrap();
        assert_eq!(d_back.values(), d.values());
    }

    /// Frame with two features driven by a seeded generator.
    fn random_frame(n: usize, seed: u64) -> FeatureFrame<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = IndexMap::new();
        let dst: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        features.insert("dst".to_string(), TimeSeries::dense(Hour(0), dst).unwrap());
        let aux: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        features.insert("aux".to_string(), TimeSeries::dense(Hour(0), aux).unwrap());
        FeatureFrame::new(features).unwrap()
    }

    #[test]
    fn exact_linear_targets_are_recovered() {
        // targets constructed as an exact linear function of the inputs
        let frame = random_frame(300, 3);
        let mut samples = extract_windows(&frame, 2, 1).unwrap();
        for s in &mut samples {
            s.target[0] = 0.5 + s.input.iter().enumerate().map(|(i, &v)| (i as f64 - 2.0) * v).sum::<f64>();
        }
        let fitted = fit_ar(&samples, &ARSpec::new(2, 1)).unwrap();
        assert!(!fitted.ridge_fallback);
        assert!((fitted.intercepts[0] - 0.5).abs() < 1e-8);
        for (i, &c) in fitted.coefficients[0].iter().enumerate() {
            assert!((c - (i as f64 - 2.0)).abs() < 1e-8, "coefficient {i}: {c}");
        }
        // residuals vanish
        for s in &samples {
            let y = fitted.predict_scaled(&s.input, 1);
            assert!((y - s.target[0]).abs() < 1e-8);
        }
    }

    #[test]
    fn persistence_targets_identify_the_last_value() {
        let frame = random_frame(400, 4);
        let l = 2;
        let mut samples = extract_windows(&frame, l, 1).unwrap();
        for s in &mut samples {
            // target equals the dst value at the origin (last cell of the
            // first feature block)
            s.target[0] = s.input[l];
        }
        let fitted = fit_ar(&samples, &ARSpec::new(l, 1)).unwrap();
        for (i, &c) in fitted.coefficients[0].iter().enumerate() {
            let want = if i == l { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-8, "coefficient {i}: {c}");
        }
    }

    #[test]
    fn fit_matches_qr_oracle() {
        let frame = random_frame(500, 5);
        let samples = extract_windows(&frame, 2, 2).unwrap();
        let fitted = fit_ar(&samples, &ARSpec::new(2, 2)).unwrap();

        // independent solve: full design matrix through a QR factorization
        let d = samples[0].input.len();
        let x = nalgebra::DMatrix::from_fn(samples.len(), d + 1, |r, c| {
            if c == 0 {
                1.0
            } else {
                samples[r].input[c - 1]
            }
        });
        let qr = x.qr();
        let (q, r) = (qr.q(), qr.r());
        for h in 0..2usize {
            let y = nalgebra::DVector::from_fn(samples.len(), |r, _| samples[r].target[h]);
            // least squares through the thin factorization: R beta = Q^T y
            let beta = r
                .clone()
                .solve_upper_triangular(&(q.transpose() * &y))
                .unwrap();
            assert!((fitted.intercepts[h] - beta[0]).abs() < 1e-6);
            for k in 0..d {
                assert!(
                    (fitted.coefficients[h][k] - beta[k + 1]).abs() < 1e-6,
                    "h={h} k={k}"
                );
            }
        }
    }

    #[test]
    fn fit_is_invariant_to_sample_order() {
        let frame = random_frame(200, 6);
        let samples = extract_windows(&frame, 1, 1).unwrap();
        let mut reversed = samples.clone();
        reversed.reverse();
        let a = fit_ar(&samples, &ARSpec::new(1, 1)).unwrap();
        let b = fit_ar(&reversed, &ARSpec::new(1, 1)).unwrap();
        assert_eq!(a.coefficients, b.coefficients);
        assert_eq!(a.intercepts, b.intercepts);
    }

    #[test]
    fn collinear_inputs_trigger_the_ridge_fallback() {
        // a constant input column duplicates the intercept column exactly;
        // with 64 samples every normal-equation entry is an exact small
        // integer, so the deficiency is not masked by rounding
        let samples: Vec<WindowSample<f64>> = (0..64)
            .map(|i| WindowSample { origin: Hour(i), input: vec![1.0], target: vec![5.0] })
            .collect();
        let fitted = fit_ar(&samples, &ARSpec::new(0, 1)).unwrap();
        assert!(fitted.ridge_fallback);
        assert!(fitted.coefficients[0].iter().all(|c| c.is_finite()));
        // the regularized model still predicts the constant target closely
        let y = fitted.predict_scaled(&[1.0], 1);
        assert!((y - 5.0).abs() < 1e-3, "prediction {y}");
    }

    #[test]
    fn forecast_requires_a_fitted_model() {
        let frame = random_frame(50, 8);
        let spec: ARSpec<f64> = ARSpec::new(2, 1);
        assert!(matches!(ar_forecast(&spec, &frame), Err(Error::NotFitted)));
    }

    #[test]
    fn forecast_reproduces_exact_linear_relations() {
        // build a frame whose dst is an exact function of the aux lag window,
        // fit, forecast, and check the table's aligned errors vanish
        let n = 300;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let aux: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut dst = vec![0.0f64; n];
        for t in 1..n {
            dst[t] = 2.0 * aux[t - 1] + 1.0;
        }
        let mut features = IndexMap::new();
        features.insert("dst".to_string(), TimeSeries::dense(Hour(0), dst).unwrap());
        features.insert("aux".to_string(), TimeSeries::dense(Hour(0), aux).unwrap());
        let frame = FeatureFrame::new(features).unwrap();

        let samples = extract_windows(&frame, 1, 1).unwrap();
        let mut spec = ARSpec::new(1, 1);
        spec.features = vec!["dst".into(), "aux".into()];
        let fitted = fit_ar(&samples, &spec).unwrap();
        let table = ar_forecast(&fitted, &frame).unwrap();
        let aligned = table.align(1).unwrap();
        for (m, o) in aligned.model.iter().zip(&aligned.observed) {
            assert!((m - o).abs() < 1e-7);
        }
    }

    #[test]
    fn target_scale_maps_predictions_back() {
        let frame = random_frame(200, 10);
        let samples = extract_windows(&frame, 1, 1).unwrap();
        let mut spec = ARSpec::new(1, 1);
        spec.target_scale = Some(FeatureScale { mean: -15.0, std: 20.0 });
        let fitted = fit_ar(&samples, &spec).unwrap();
        let plain = {
            let mut s = fitted.clone();
            s.target_scale = None;
            ar_forecast(&s, &frame).unwrap()
        };
        let mapped = ar_forecast(&fitted, &frame).unwrap();
        let a = plain.align(1).unwrap();
        let b = mapped.align(1).unwrap();
        for (x, y) in a.model.iter().zip(&b.model) {
            assert!((x * 20.0 - 15.0 - y).abs() < 1e-9);
        }
        for (x, y) in a.observed.iter().zip(&b.observed) {
            assert!((x * 20.0 - 15.0 - y).abs() < 1e-9);
        }
    }
}
