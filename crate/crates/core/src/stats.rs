//! Serial-correlation diagnostics: autocorrelation, partial autocorrelation
//! and lag-plot pairs.
//!
//! These quantify how much of a series' apparent predictability is plain
//! inertia: a high ACF at small lags with a PACF that dies after lag k means
//! the last k values carry essentially all linear information — the regime
//! in which persistence-like forecasts look deceptively strong.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::timeseries::TimeSeries;

/// One correlogram entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelogramRow<T> {
    pub lag: usize,
    /// Correlation estimate in [-1, 1].
    pub value: T,
    /// Number of valid pairs that entered the lag-`lag` estimate.
    pub n_pairs: usize,
}

/// Sample autocorrelation at lags 0..=max_lag.
///
/// The estimator is the classical biased one: deviations from the overall
/// valid-point mean, lag-k products summed over pairs where both points are
/// valid, normalized by the total sum of squared deviations. Lag 0 is
/// exactly 1. Errors on a constant series or when fewer than `max_lag + 2`
/// valid points exist.
pub fn acf<T: Real>(series: &TimeSeries<T>, max_lag: usize) -> Result<Vec<CorrelogramRow<T>>> {
    let n_valid = series.valid_count();
    if n_valid < max_lag + 2 {
        return Err(Error::InsufficientData { required: max_lag + 2, actual: n_valid });
    }
    let values = series.values();
    let valid = series.valid();

    let mut sum = T::zero();
    for (&v, &ok) in values.iter().zip(valid) {
        if ok {
            sum = sum + v;
        }
    }
    let mean = sum / T::from_count(n_valid);

    let mut denom = T::zero();
    for (&v, &ok) in values.iter().zip(valid) {
        if ok {
            denom = denom + (v - mean) * (v - mean);
        }
    }
    if denom <= T::zero() {
        return Err(Error::ZeroVariance { what: "series".into() });
    }

    let mut rows = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let mut num = T::zero();
        let mut n_pairs = 0usize;
        for t in 0..values.len().saturating_sub(lag) {
            if valid[t] && valid[t + lag] {
                num = num + (values[t] - mean) * (values[t + lag] - mean);
                n_pairs += 1;
            }
        }
        rows.push(CorrelogramRow { lag, value: num / denom, n_pairs });
    }
    Ok(rows)
}

/// Partial autocorrelation at lags 0..=max_lag via the Durbin–Levinson
/// recursion on the sample ACF.
///
/// Lag 1 equals the plain autocorrelation at lag 1 exactly; lag k removes
/// the linear effect of the intermediate lags. Lag 0 is reported as 1 by
/// convention. Errors as [`acf`], plus when the ACF sequence is not
/// positive definite (the recursion's innovation variance hits zero).
pub fn pacf<T: Real>(series: &TimeSeries<T>, max_lag: usize) -> Result<Vec<CorrelogramRow<T>>> {
    let rho = acf(series, max_lag)?;
    let mut rows = Vec::with_capacity(max_lag + 1);
    rows.push(CorrelogramRow { lag: 0, value: T::one(), n_pairs: rho[0].n_pairs });
    if max_lag == 0 {
        return Ok(rows);
    }

    // phi holds the order-k prediction coefficients phi[k][1..=k] (index 0 unused)
    let mut phi = vec![T::zero(); max_lag + 1];
    let mut prev = vec![T::zero(); max_lag + 1];
    phi[1] = rho[1].value;
    let mut variance = T::one() - phi[1] * phi[1];
    rows.push(CorrelogramRow { lag: 1, value: phi[1], n_pairs: rho[1].n_pairs });

    for k in 2..=max_lag {
        if variance <= T::zero() {
            return Err(Error::NotPositiveDefinite { lag: k });
        }
        prev[..k].copy_from_slice(&phi[..k]);
        let mut num = rho[k].value;
        for j in 1..k {
            num = num - prev[j] * rho[k - j].value;
        }
        let last = num / variance;
        phi[k] = last;
        for j in 1..k {
            phi[j] = prev[j] - last * prev[k - j];
        }
        variance = variance * (T::one() - last * last);
        rows.push(CorrelogramRow { lag: k, value: last, n_pairs: rho[k].n_pairs });
    }
    Ok(rows)
}

/// All valid `(x_t, x_{t+lag})` pairs in time order, for lag plots.
/// Requires `lag >= 1`; an exhausted series yields an empty list.
pub fn lag_pairs<T: Real>(series: &TimeSeries<T>, lag: usize) -> Result<Vec<(T, T)>> {
    if lag == 0 {
        return Err(Error::InvalidParameter {
            name: "lag".into(),
            reason: "must be at least 1".into(),
        });
    }
    let values = series.values();
    let valid = series.valid();
    let mut pairs = Vec::new();
    for t in 0..values.len().saturating_sub(lag) {
        if valid[t] && valid[t + lag] {
            pairs.push((values[t], values[t + lag]));
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::Hour;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn white_noise(n: usize, seed: u64) -> TimeSeries<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        TimeSeries::dense(Hour(0), values).unwrap()
    }

    /// Simulate a stationary AR(p) process with unit innovation variance,
    /// discarding a warm-up prefix.
    fn ar_process(coeffs: &[f64], n: usize, seed: u64) -> TimeSeries<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let warmup = 500;
        let mut x = vec![0.0f64; n + warmup];
        for t in 0..x.len() {
            let mut v: f64 = StandardNormal.sample(&mut rng);
            for (j, &c) in coeffs.iter().enumerate() {
                if t > j {
                    v += c * x[t - 1 - j];
                }
            }
            x[t] = v;
        }
        TimeSeries::dense(Hour(0), x[warmup..].to_vec()).unwrap()
    }

    /// Independent PACF oracle: solve the order-k Toeplitz system of the
    /// lag-1..k regression normal equations built from the same sample ACF,
    /// and take the last coefficient.
    fn pacf_by_regression(rho: &[f64], k: usize) -> f64 {
        let r = nalgebra::DMatrix::from_fn(k, k, |i, j| rho[i.abs_diff(j)]);
        let b = nalgebra::DVector::from_fn(k, |i, _| rho[i + 1]);
        let sol = r.lu().solve(&b).expect("ACF Toeplitz system is invertible");
        sol[k - 1]
    }

    #[test]
    fn lag_zero_is_exactly_one() {
        let s = white_noise(100, 1);
        let rows = acf(&s, 5).unwrap();
        assert_eq!(rows[0].value, 1.0);
        assert_eq!(rows[0].n_pairs, 100);
        let p = pacf(&s, 5).unwrap();
        assert_eq!(p[0].value, 1.0);
    }

    #[test]
    fn white_noise_decorrelates() {
        let s = white_noise(10_000, 2);
        for row in acf(&s, 10).unwrap().iter().skip(1) {
            assert!(row.value.abs() < 0.05, "lag {}: {}", row.lag, row.value);
        }
    }

    #[test]
    fn ar1_acf_matches_closed_form() {
        let s = ar_process(&[0.8], 10_000, 3);
        let rows = acf(&s, 8).unwrap();
        for row in &rows {
            let theory = 0.8f64.powi(row.lag as i32);
            assert!(
                (row.value - theory).abs() < 0.05,
                "lag {}: {} vs {}",
                row.lag,
                row.value,
                theory
            );
        }
    }

    #[test]
    fn pacf_lag1_equals_acf_lag1() {
        let s = ar_process(&[0.6, 0.2], 2000, 4);
        let a = acf(&s, 4).unwrap();
        let p = pacf(&s, 4).unwrap();
        assert_eq!(a[1].value, p[1].value);
    }

    #[test]
    fn ar_processes_cut_off_after_their_order() {
        let ar1 = ar_process(&[0.8], 10_000, 5);
        let p1 = pacf(&ar1, 6).unwrap();
        assert!((p1[1].value - 0.8).abs() < 0.05);
        for row in p1.iter().skip(2) {
            assert!(row.value.abs() < 0.05, "lag {}: {}", row.lag, row.value);
        }

        let ar2 = ar_process(&[0.5, 0.3], 10_000, 6);
        let p2 = pacf(&ar2, 6).unwrap();
        assert!((p2[2].value - 0.3).abs() < 0.05);
        for row in p2.iter().skip(3) {
            assert!(row.value.abs() < 0.05, "lag {}: {}", row.lag, row.value);
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)] // k is the lag, not just an index
    fn durbin_levinson_matches_direct_regression_solve() {
        let s = ar_process(&[0.5, 0.3], 4000, 7);
        let rho: Vec<f64> = acf(&s, 15).unwrap().iter().map(|r| r.value).collect();
        let p = pacf(&s, 15).unwrap();
        for k in 1..=15 {
            let oracle = pacf_by_regression(&rho, k);
            assert!(
                (p[k].value - oracle).abs() < 1e-9,
                "lag {k}: {} vs {}",
                p[k].value,
                oracle
            );
        }
    }

    #[test]
    fn acf_is_affine_invariant() {
        let s = white_noise(500, 8);
        let shifted = s.map_valid(|v| 3.0 * v - 40.0).unwrap();
        let a = acf(&s, 6).unwrap();
        let b = acf(&shifted, 6).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.value - y.value).abs() < 1e-12);
        }
    }

    #[test]
    fn gapped_series_uses_pairwise_complete_pairs() {
        let mut values: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut valid = vec![true; 50];
        for &i in &[7usize, 8, 23] {
            valid[i] = false;
            values[i] = f64::NAN;
        }
        let s = TimeSeries::new(Hour(0), values, valid).unwrap();
        let rows = acf(&s, 3).unwrap();
        // lag-1 pairs lose both neighbors of each masked point
        assert_eq!(rows[1].n_pairs, 49 - 5);
        assert!(rows.iter().all(|r| r.value.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn constant_series_rejected() {
        let s = TimeSeries::dense(Hour(0), vec![2.5; 40]).unwrap();
        assert!(matches!(acf(&s, 3), Err(Error::ZeroVariance { .. })));
        assert!(pacf(&s, 3).is_err());
    }

    #[test]
    fn too_few_points_rejected() {
        let s = white_noise(5, 9);
        assert!(matches!(
            acf(&s, 4),
            Err(Error::InsufficientData { required: 6, actual: 5 })
        ));
    }

    #[test]
    fn lag_pairs_examples() {
        let s = TimeSeries::dense(Hour(0), vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(lag_pairs(&s, 1).unwrap(), vec![(1.0, 2.0), (2.0, 3.0)]);
        assert!(lag_pairs(&s, 3).unwrap().is_empty());
        assert!(lag_pairs(&s, 0).is_err());
    }

    #[test]
    fn lag_pairs_skip_masked_points() {
        let s = TimeSeries::new(
            Hour(0),
            vec![1.0, f64::NAN, 3.0, 4.0],
            vec![true, false, true, true],
        )
        .unwrap();
        assert_eq!(lag_pairs(&s, 1).unwrap(), vec![(3.0, 4.0)]);
        assert_eq!(lag_pairs(&s, 2).unwrap(), vec![(1.0, 3.0)]);
    }
}
