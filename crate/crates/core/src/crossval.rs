//! Seeded k-fold cross-validation over monthly partitions.
//!
//! Months are shuffled once with a recorded seed and dealt round-robin into
//! k folds; each fold serves as the held-out set exactly once while the
//! forecaster (and its scaling constants) is fitted on the union of the
//! others. Aggregates are the arithmetic mean and sample standard deviation
//! over folds, per metric and horizon.

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecasters::{ar_forecast, fit_ar, persistence_forecast, ARSpec};
use crate::ingest::{apply_scaling, extract_windows, fit_scaling, ScalingParams, WindowSample};
use crate::metrics::{report, MetricReport};
use crate::scalar::Real;
use crate::timeseries::{FeatureFrame, MonthId, TARGET_FEATURE};

/// Which forecaster a cross-validation run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ForecasterSpec {
    /// No fitting; forecasts the origin value at every horizon.
    Persistence { horizons: usize },
    /// Linear autoregression over lag windows, refitted per fold on scaled
    /// features.
    Ar { lag: usize, horizons: usize },
}

impl ForecasterSpec {
    pub fn horizons(&self) -> usize {
        match *self {
            ForecasterSpec::Persistence { horizons } | ForecasterSpec::Ar { horizons, .. } => {
                horizons
            }
        }
    }
}

/// Mean and sample standard deviation of one metric over folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats<T> {
    pub mean: T,
    pub std: T,
}

/// Per-fold evaluation: one [`MetricReport`] per horizon, plus the scaling
/// constants the fold trained with (absent for persistence).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult<T> {
    pub fold: usize,
    /// Reports indexed by horizon - 1.
    pub reports: Vec<MetricReport<T>>,
    pub scaling: Option<ScalingParams<T>>,
}

/// Fold-aggregated metrics for one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonAggregate<T> {
    pub horizon: usize,
    /// metric name → mean/std over folds, in [`MetricReport::fields`] order.
    pub metrics: IndexMap<String, MetricStats<T>>,
}

/// Complete cross-validation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVReport<T> {
    pub k: usize,
    pub seed: u64,
    pub forecaster: ForecasterSpec,
    /// month → fold index, in chronological month order.
    pub assignment: Vec<(MonthId, usize)>,
    pub folds: Vec<FoldResult<T>>,
    /// Aggregates indexed by horizon - 1.
    pub aggregates: Vec<HorizonAggregate<T>>,
}

/// Deal the months into k folds: seeded shuffle, then round-robin. Fold
/// sizes differ by at most one; the same seed reproduces the assignment.
pub fn kfold_split(months: &[MonthId], k: usize, seed: u64) -> Result<Vec<(MonthId, usize)>> {
    if k < 2 {
        return Err(Error::InvalidParameter {
            name: "folds".into(),
            reason: "need at least 2 folds".into(),
        });
    }
    if months.len() < k {
        return Err(Error::InsufficientData { required: k, actual: months.len() });
    }
    let mut shuffled: Vec<MonthId> = months.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let mut fold_of: IndexMap<MonthId, usize> = IndexMap::new();
    for (position, month) in shuffled.iter().enumerate() {
        fold_of.insert(*month, position % k);
    }
    Ok(months.iter().map(|m| (*m, fold_of[m])).collect())
}

/// Fit and evaluate per fold: the held-out months are forecast by a model
/// (and scaling) derived only from the remaining months. `exclude_months`
/// removes calendar months (1–12) from the pool entirely — by default the
/// fixed test months, so cross-validation never touches them.
pub fn run_cv<T: Real + Send + Sync>(
    frame: &FeatureFrame<T>,
    forecaster: &ForecasterSpec,
    k: usize,
    seed: u64,
    exclude_months: &[u32],
) -> Result<CVReport<T>> {
    let pool: Vec<(MonthId, std::ops::Range<usize>)> = frame
        .months()
        .into_iter()
        .filter(|(m, _)| !exclude_months.contains(&m.month))
        .collect();
    let ids: Vec<MonthId> = pool.iter().map(|(m, _)| *m).collect();
    let assignment = kfold_split(&ids, k, seed)?;

    let month_frames: Vec<(MonthId, usize, FeatureFrame<T>)> = pool
        .iter()
        .zip(&assignment)
        .map(|((m, range), (_, fold))| Ok((*m, *fold, frame.slice(range.clone())?)))
        .collect::<Result<_>>()?;

    let folds: Vec<FoldResult<T>> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let held_out: Vec<&FeatureFrame<T>> = month_frames
                .iter()
                .filter(|(_, f, _)| *f == fold)
                .map(|(_, _, frame)| frame)
                .collect();
            let training: Vec<&FeatureFrame<T>> = month_frames
                .iter()
                .filter(|(_, f, _)| *f != fold)
                .map(|(_, _, frame)| frame)
                .collect();
            evaluate_fold(fold, forecaster, &training, &held_out)
        })
        .collect::<Result<_>>()?;

    let horizons = forecaster.horizons();
    let aggregates = (1..=horizons)
        .map(|h| {
            let field_names: Vec<&'static str> =
                folds[0].reports[h - 1].fields().iter().map(|(n, _)| *n).collect();
            let mut metrics = IndexMap::new();
            for (idx, name) in field_names.iter().enumerate() {
                let values: Vec<T> =
                    folds.iter().map(|f| f.reports[h - 1].fields()[idx].1).collect();
                metrics.insert(name.to_string(), mean_std(&values));
            }
            HorizonAggregate { horizon: h, metrics }
        })
        .collect();

    Ok(CVReport {
        k,
        seed,
        forecaster: *forecaster,
        assignment,
        folds,
        aggregates,
    })
}

/// Arithmetic mean and sample (N-1) standard deviation.
fn mean_std<T: Real>(values: &[T]) -> MetricStats<T> {
    let n = T::from_count(values.len());
    let mean = values.iter().fold(T::zero(), |a, &v| a + v) / n;
    let std = if values.len() < 2 {
        T::zero()
    } else {
        let ss = values
            .iter()
            .fold(T::zero(), |a, &v| a + (v - mean) * (v - mean));
        (ss / (n - T::one())).sqrt()
    };
    MetricStats { mean, std }
}

fn evaluate_fold<T: Real>(
    fold: usize,
    forecaster: &ForecasterSpec,
    training: &[&FeatureFrame<T>],
    held_out: &[&FeatureFrame<T>],
) -> Result<FoldResult<T>> {
    if held_out.is_empty() {
        return Err(Error::EmptySplit(format!("fold {fold}")));
    }
    let horizons = forecaster.horizons();

    // per horizon, concatenated (model, observed) pairs over the held-out months
    let mut model: Vec<Vec<T>> = vec![Vec::new(); horizons];
    let mut observed: Vec<Vec<T>> = vec![Vec::new(); horizons];
    let mut scaling = None;

    match *forecaster {
        ForecasterSpec::Persistence { .. } => {
            for frame in held_out {
                let table = persistence_forecast(frame.target()?, horizons)?;
                for h in 1..=horizons {
                    let aligned = table.align(h)?;
                    model[h - 1].extend(aligned.model);
                    observed[h - 1].extend(aligned.observed);
                }
            }
        }
        ForecasterSpec::Ar { lag, .. } => {
            let owned: Vec<FeatureFrame<T>> = training.iter().map(|f| (*f).clone()).collect();
            let params = fit_scaling(&owned)?;
            let mut samples: Vec<WindowSample<T>> = Vec::new();
            for frame in training {
                let scaled = apply_scaling(frame, &params)?;
                samples.extend(extract_windows(&scaled, lag, horizons)?);
            }
            let mut spec = ARSpec::new(lag, horizons);
            spec.target_scale = Some(params.get(TARGET_FEATURE)?);
            let fitted = fit_ar(&samples, &spec)?;
            for frame in held_out {
                let scaled = apply_scaling(frame, &params)?;
                let table = ar_forecast(&fitted, &scaled)?;
                for h in 1..=horizons {
                    let aligned = table.align(h)?;
                    model[h - 1].extend(aligned.model);
                    observed[h - 1].extend(aligned.observed);
                }
            }
            scaling = Some(params);
        }
    }

    let mut reports = Vec::with_capacity(horizons);
    for h in 1..=horizons {
        if model[h - 1].is_empty() {
            return Err(Error::EmptySplit(format!("fold {fold} horizon {h}")));
        }
        reports.push(report(&model[h - 1], &observed[h - 1])?);
    }
    Ok(FoldResult { fold, reports, scaling })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{Hour, TimeSeries};
    use indexmap::IndexMap as Map;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn month_ids(n: usize) -> Vec<MonthId> {
        (0..n)
            .map(|i| MonthId { year: 2001 + (i / 12) as i32, month: (i % 12) as u32 + 1 })
            .collect()
    }

    #[test]
    fn folds_are_balanced() {
        let months = month_ids(10);
        let assignment = kfold_split(&months, 5, 1).unwrap();
        let mut sizes = vec![0usize; 5];
        for (_, fold) in &assignment {
            sizes[*fold] += 1;
        }
        assert_eq!(sizes, vec![2; 5]);

        let months = month_ids(11);
        let assignment = kfold_split(&months, 5, 1).unwrap();
        let mut sizes = vec![0usize; 5];
        for (_, fold) in &assignment {
            sizes[*fold] += 1;
        }
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 2, 2, 3]);
    }

    #[test]
    fn assignment_is_seed_deterministic() {
        let months = month_ids(24);
        let a = kfold_split(&months, 4, 9).unwrap();
        let b = kfold_split(&months, 4, 9).unwrap();
        assert_eq!(a, b);
        let c = kfold_split(&months, 4, 10).unwrap();
        assert_ne!(a, c);
        // every month appears exactly once
        assert_eq!(a.len(), 24);
    }

    #[test]
    fn degenerate_parameters_rejected() {
        let months = month_ids(3);
        assert!(kfold_split(&months, 1, 0).is_err());
        assert!(matches!(
            kfold_split(&months, 4, 0),
            Err(Error::InsufficientData { required: 4, actual: 3 })
        ));
    }

    /// A year of hourly data: dst follows a slow seeded wave plus noise,
    /// aux is correlated with the future dst.
    fn year_frame(seed: u64) -> FeatureFrame<f64> {
        let start = Hour::parse("2003-01-01T00:00:00Z").unwrap();
        let n = 365 * 24;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dst = Vec::with_capacity(n);
        for i in 0..n {
            let base = (i as f64 * 0.002).sin() * 25.0 - 12.0;
            let noise: f64 = StandardNormal.sample(&mut rng);
            dst.push(base + 3.0 * noise);
        }
        let aux: Vec<f64> = (0..n)
            .map(|i| if i + 1 < n { dst[i + 1] * 0.5 } else { dst[i] * 0.5 })
            .collect();
        let mut features = Map::new();
        features.insert("dst".to_string(), TimeSeries::dense(start, dst).unwrap());
        features.insert("aux".to_string(), TimeSeries::dense(start, aux).unwrap());
        FeatureFrame::new(features).unwrap()
    }

    #[test]
    fn two_fold_aggregates_match_hand_computation() {
        let frame = year_frame(1);
        let spec = ForecasterSpec::Persistence { horizons: 2 };
        let cv = run_cv(&frame, &spec, 2, 3, &[]).unwrap();
        assert_eq!(cv.folds.len(), 2);
        for h in 1..=2usize {
            let a = cv.folds[0].reports[h - 1].rmse;
            let b = cv.folds[1].reports[h - 1].rmse;
            let mean = (a + b) / 2.0;
            let std = (((a - mean).powi(2) + (b - mean).powi(2)) / 1.0).sqrt();
            let agg = &cv.aggregates[h - 1].metrics["rmse"];
            assert!((agg.mean - mean).abs() < 1e-12);
            assert!((agg.std - std).abs() < 1e-12);
        }
    }

    #[test]
    fn fold_variation_is_nonzero_for_persistence() {
        let frame = year_frame(2);
        let cv = run_cv(&frame, &ForecasterSpec::Persistence { horizons: 1 }, 4, 5, &[]).unwrap();
        assert!(cv.aggregates[0].metrics["rmse"].std > 0.0);
        // every month in exactly one fold; every fold validates once
        let mut seen = [0usize; 4];
        for (_, fold) in &cv.assignment {
            seen[*fold] += 1;
        }
        assert!(seen.iter().all(|&c| c > 0));
    }

    #[test]
    fn excluded_months_never_enter_the_pool() {
        let frame = year_frame(3);
        let cv = run_cv(
            &frame,
            &ForecasterSpec::Persistence { horizons: 1 },
            3,
            1,
            &[4, 8, 12],
        )
        .unwrap();
        assert_eq!(cv.assignment.len(), 9);
        assert!(cv.assignment.iter().all(|(m, _)| ![4, 8, 12].contains(&m.month)));
    }

    #[test]
    fn ar_cv_runs_and_beats_noise() {
        let frame = year_frame(4);
        let cv = run_cv(&frame, &ForecasterSpec::Ar { lag: 2, horizons: 2 }, 3, 7, &[]).unwrap();
        for fold in &cv.folds {
            assert!(fold.scaling.is_some());
            for report in &fold.reports {
                assert!(report.rmse.is_finite());
            }
        }
        // aux leaks the next dst value, so horizon 1 should be very accurate
        assert!(cv.aggregates[0].metrics["pearson_r"].mean > 0.9);
    }

    #[test]
    fn fold_scaling_ignores_its_held_out_months() {
        // mutate data inside one fold's held-out months: that fold's scaling
        // must not move (it trains on the others), while other folds' does
        let frame = year_frame(5);
        let spec = ForecasterSpec::Ar { lag: 1, horizons: 1 };
        let cv1 = run_cv(&frame, &spec, 3, 11, &[]).unwrap();

        let victim_fold = 0usize;
        let victim_months: Vec<MonthId> = cv1
            .assignment
            .iter()
            .filter(|(_, f)| *f == victim_fold)
            .map(|(m, _)| *m)
            .collect();
        assert!(!victim_months.is_empty());

        // rebuild the frame with the victim months' dst shifted by +100
        let mut features = Map::new();
        for (name, series) in frame.features() {
            if name == "dst" {
                let mut values = series.values().to_vec();
                for (month, range) in frame.months() {
                    if victim_months.contains(&month) {
                        for v in &mut values[range] {
                            *v += 100.0;
                        }
                    }
                }
                features.insert(
                    name.to_string(),
                    TimeSeries::new(series.start(), values, series.valid().to_vec()).unwrap(),
                );
            } else {
                features.insert(name.to_string(), series.clone());
            }
        }
        let mutated = FeatureFrame::new(features).unwrap();
        let cv2 = run_cv(&mutated, &spec, 3, 11, &[]).unwrap();

        assert_eq!(cv1.assignment, cv2.assignment);
        let s1 = serde_json::to_string(cv1.folds[victim_fold].scaling.as_ref().unwrap()).unwrap();
        let s2 = serde_json::to_string(cv2.folds[victim_fold].scaling.as_ref().unwrap()).unwrap();
        assert_eq!(s1, s2, "held-out mutation leaked into the fold's scaling");

        let o1 = serde_json::to_string(cv1.folds[1].scaling.as_ref().unwrap()).unwrap();
        let o2 = serde_json::to_string(cv2.folds[1].scaling.as_ref().unwrap()).unwrap();
        assert_ne!(o1, o2, "other folds should see the mutated training data");
    }
}
