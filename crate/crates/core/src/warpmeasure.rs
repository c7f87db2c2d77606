//! Shift-histogram evaluation of forecasts via causally-windowed DTW.
//!
//! For each horizon h, the aligned (forecast, observation) pair is warped
//! under a causal window, the per-step warp values Δt = |i - j| are read off
//! the optimal path, and their row-normalized histogram is reported. A
//! forecast that merely reproduces the observations delayed by p hours
//! concentrates its mass at Δt = p; a genuinely anticipating forecast
//! concentrates at Δt = 0.
//!
//! Alignment gaps are handled by warping each contiguous segment
//! independently and summing counts before normalizing; DTW across a gap
//! would align non-adjacent hours. Because DTW's endpoint matching forces
//! Δt toward 0 at segment edges, very short segments are dominated by this
//! boundary artifact — segments shorter than a configurable minimum are
//! skipped and reported, and interior-only fractions (path steps at least w
//! away from both segment ends) are computed alongside the full-path ones.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtw::{backtrack, cumulative_grid, WarpPath, WindowConstraint};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::timeseries::{Aligned, ForecastTable};

/// Default minimum usable segment length for window `w`.
pub fn default_min_segment_len(window: usize) -> usize {
    3 * (window + 1)
}

/// Row-normalized histogram of warp values for one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftHistogram {
    /// Forecast horizon h in hours.
    pub horizon: usize,
    /// Causal window width w; warp values range over 0..=w.
    pub window: usize,
    /// Path-step counts indexed by Δt = 0..=w, summed over segments.
    pub counts: Vec<u64>,
    /// `counts` normalized to sum 1.
    pub fractions: Vec<f64>,
    /// Total path steps K across all used segments.
    pub total_steps: u64,
    pub segments_used: usize,
    /// Segments below the minimum length, excluded from the counts.
    pub segments_skipped: usize,
    /// Counts over interior path steps only: min(i, j) >= w and
    /// max(i, j) <= L - 1 - w within a length-L segment.
    pub interior_counts: Vec<u64>,
    /// Interior counts normalized to sum 1; `None` when no step is interior.
    pub interior_fractions: Option<Vec<f64>>,
}

impl ShiftHistogram {
    /// Δt with the largest fraction (smallest wins ties).
    pub fn dominant_shift(&self) -> usize {
        let mut best = 0;
        for (dt, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = dt;
            }
        }
        best
    }
}

/// One [`ShiftHistogram`] per horizon 1..=H.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpMeasureTable {
    pub histograms: Vec<ShiftHistogram>,
}

impl WarpMeasureTable {
    /// Widest window across rows (the column count of a padded table).
    pub fn max_window(&self) -> usize {
        self.histograms.iter().map(|h| h.window).max().unwrap_or(0)
    }

    /// Fractions as a rectangular table padded with `None`: one row per
    /// horizon, columns Δt = 0..=max_window.
    pub fn padded_fractions(&self) -> Vec<Vec<Option<f64>>> {
        let width = self.max_window() + 1;
        self.histograms
            .iter()
            .map(|h| {
                let mut row: Vec<Option<f64>> = h.fractions.iter().copied().map(Some).collect();
                row.resize(width, None);
                row
            })
            .collect()
    }
}

/// Per-step warp values Δt_k = |i_k - j_k| along a path.
pub fn warp_values(path: &WarpPath) -> Vec<usize> {
    path.steps()
        .iter()
        .map(|&(i, j)| i.abs_diff(j))
        .collect()
}

/// Accumulator shared by the per-segment passes.
#[derive(Debug, Clone)]
struct HistAccum {
    counts: Vec<u64>,
    interior: Vec<u64>,
    used: usize,
    skipped: usize,
}

impl HistAccum {
    fn new(window: usize) -> Self {
        HistAccum {
            counts: vec![0; window + 1],
            interior: vec![0; window + 1],
            used: 0,
            skipped: 0,
        }
    }

    fn add_segment<T: Scalar>(&mut self, model: &[T], observed: &[T], window: usize) -> Result<()> {
        let grid = cumulative_grid(model, observed, WindowConstraint::Causal(window))?;
        let path = backtrack(&grid);
        let len = model.len();
        for &(i, j) in path.steps() {
            let dt = i.abs_diff(j);
            self.counts[dt] += 1;
            if i.min(j) >= window && i.max(j) + window < len {
                self.interior[dt] += 1;
            }
        }
        self.used += 1;
        Ok(())
    }

    fn finish(self, horizon: usize, window: usize, min_len: usize) -> Result<ShiftHistogram> {
        if self.used == 0 {
            return Err(Error::NoUsableSegments { skipped: self.skipped, min_len });
        }
        let total: u64 = self.counts.iter().sum();
        let fractions = self.counts.iter().map(|&c| c as f64 / total as f64).collect();
        let interior_total: u64 = self.interior.iter().sum();
        let interior_fractions = (interior_total > 0).then(|| {
            self.interior
                .iter()
                .map(|&c| c as f64 / interior_total as f64)
                .collect()
        });
        Ok(ShiftHistogram {
            horizon,
            window,
            counts: self.counts,
            fractions,
            total_steps: total,
            segments_used: self.used,
            segments_skipped: self.skipped,
            interior_counts: self.interior,
            interior_fractions,
        })
    }
}

fn measure_aligned<T: Scalar>(
    aligned: &Aligned<T>,
    window: usize,
    min_len: usize,
) -> Result<HistAccum> {
    let mut accum = HistAccum::new(window);
    for run in aligned.contiguous_runs() {
        if run.len() < min_len {
            accum.skipped += 1;
            continue;
        }
        accum.add_segment(&aligned.model[run.clone()], &aligned.observed[run], window)?;
    }
    Ok(accum)
}

/// Shift histogram for horizon `h` under causal window `w` (requires
/// `w >= h`), with an explicit minimum segment length.
pub fn measure_horizon_with<T: Scalar>(
    pred: &ForecastTable<T>,
    h: usize,
    w: usize,
    min_segment_len: usize,
) -> Result<ShiftHistogram> {
    if w < h {
        return Err(Error::InvalidParameter {
            name: "window".into(),
            reason: format!("window {w} must be at least the horizon {h}"),
        });
    }
    let aligned = pred.align(h)?;
    measure_aligned(&aligned, w, min_segment_len)?.finish(h, w, min_segment_len)
}

/// Shift histogram for horizon `h` under causal window `w`, skipping
/// segments shorter than [`default_min_segment_len`]`(w)`.
pub fn measure_horizon<T: Scalar>(
    pred: &ForecastTable<T>,
    h: usize,
    w: usize,
) -> Result<ShiftHistogram> {
    measure_horizon_with(pred, h, w, default_min_segment_len(w))
}

/// Measure every horizon 1..=H with the default window w = h. Horizons run
/// in parallel; the result order is by horizon.
pub fn measure_all<T: Scalar + Send + Sync>(pred: &ForecastTable<T>) -> Result<WarpMeasureTable> {
    measure_all_with(pred, None, None)
}

/// [`measure_all`] with optional overrides: a fixed window for every row
/// (must be >= H) and/or a minimum segment length.
pub fn measure_all_with<T: Scalar + Send + Sync>(
    pred: &ForecastTable<T>,
    window: Option<usize>,
    min_segment_len: Option<usize>,
) -> Result<WarpMeasureTable> {
    let histograms = (1..=pred.horizons())
        .into_par_iter()
        .map(|h| {
            let w = window.unwrap_or(h);
            let min_len = min_segment_len.unwrap_or_else(|| default_min_segment_len(w));
            measure_horizon_with(pred, h, w, min_len)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WarpMeasureTable { histograms })
}
