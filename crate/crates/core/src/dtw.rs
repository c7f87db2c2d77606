//! Dynamic time warping on uniformly sampled series.
//!
//! The classic dynamic program over the pointwise distance `|x - y|`:
//! a cumulative-distance grid, optional warping-window constraints with
//! banded O(n·w) storage, and deterministic backtracking of the optimal
//! alignment path.
//!
//! Grid cells are addressed `(i, j)` with `i` indexing the query series
//! (the forecast, in this toolkit) and `j` the subject series (the
//! observations). Indices are 0-based. The reported cost is the raw
//! minimal path sum of pointwise distances — no root or normalization is
//! applied, so integer inputs yield exact integer costs.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Warping-window constraint on admissible grid cells (i, j).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "w", rename_all = "lowercase")]
pub enum WindowConstraint {
    /// Every cell admissible.
    None,
    /// `|i - j| <= w`.
    Symmetric(usize),
    /// `0 <= i - j <= w`: the query point may only be matched to subject
    /// points at its own position or up to `w` steps earlier. With the query
    /// as forecast and the subject as observations, this forbids matching a
    /// forecast to observations from its future.
    Causal(usize),
}

impl WindowConstraint {
    /// Is cell (i, j) admissible under this window?
    pub fn admits(&self, i: usize, j: usize) -> bool {
        let (i, j) = (i as i64, j as i64);
        match *self {
            WindowConstraint::None => true,
            WindowConstraint::Symmetric(w) => (i - j).abs() <= w as i64,
            WindowConstraint::Causal(w) => i - j >= 0 && i - j <= w as i64,
        }
    }

    /// Admissible j-range (clamped to `0..m`) for grid row i.
    fn row_range(&self, i: usize, m: usize) -> Range<usize> {
        match *self {
            WindowConstraint::None => 0..m,
            WindowConstraint::Symmetric(w) => i.saturating_sub(w)..m.min(i + w + 1),
            WindowConstraint::Causal(w) => i.saturating_sub(w)..m.min(i + 1),
        }
    }

    /// Does any monotone boundary-to-boundary path on an n x m grid exist
    /// under this window?
    fn admits_grid(&self, n: usize, m: usize) -> bool {
        // A staircase path exists exactly when both corners are admissible:
        // the band is connected along diagonals.
        self.admits(0, 0) && self.admits(n - 1, m - 1)
    }
}

impl fmt::Display for WindowConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowConstraint::None => write!(f, "none"),
            WindowConstraint::Symmetric(w) => write!(f, "symmetric({w})"),
            WindowConstraint::Causal(w) => write!(f, "causal({w})"),
        }
    }
}

/// Pointwise distance `|x - y|`. Errors if either argument is non-finite
/// (the index in the error names the offending argument, 0 or 1).
pub fn distance<S: Scalar>(x: S, y: S) -> Result<S> {
    if !x.finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    if !y.finite() {
        return Err(Error::NonFinite { index: 1 });
    }
    Ok((x - y).abs())
}

/// Cumulative-distance grid, stored banded to the window.
///
/// Cell (i, j) holds the minimal summed distance over admissible monotone
/// paths from (0, 0) to (i, j); cells outside the window are absent
/// (conceptually infinite cost).
#[derive(Debug, Clone)]
pub struct CostGrid<S> {
    n: usize,
    m: usize,
    window: WindowConstraint,
    /// Band start column per row.
    lo: Vec<usize>,
    /// Prefix offsets into `cells`, length n + 1.
    offsets: Vec<usize>,
    cells: Vec<Option<S>>,
}

impl<S: Scalar> CostGrid<S> {
    /// Query length n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Subject length m.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn window(&self) -> WindowConstraint {
        self.window
    }

    /// Cumulative distance at (i, j), `None` outside the band.
    pub fn get(&self, i: usize, j: usize) -> Option<S> {
        let idx = self.band_index(i, j)?;
        self.cells[idx]
    }

    /// Minimal total path cost, the value at (n-1, m-1).
    pub fn final_cost(&self) -> S {
        self.get(self.n - 1, self.m - 1)
            .expect("construction guarantees the final cell is reachable")
    }

    fn band_index(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.m {
            return None;
        }
        let lo = self.lo[i];
        let width = self.offsets[i + 1] - self.offsets[i];
        if j < lo || j >= lo + width {
            return None;
        }
        Some(self.offsets[i] + (j - lo))
    }
}

/// Fill the cumulative-distance grid for `query` against `subject`.
///
/// Recursion: `grid[i, j] = |query[i] - subject[j]| + min` over the
/// admissible predecessors `(i-1, j-1)`, `(i-1, j)`, `(i, j-1)`, anchored at
/// `grid[0, 0] = |query[0] - subject[0]|`. Work and storage are O(n·w) under
/// a width-w window.
///
/// Errors if either series is empty or contains non-finite values, or if the
/// window admits no boundary-to-boundary path.
pub fn cumulative_grid<S: Scalar>(
    query: &[S],
    subject: &[S],
    window: WindowConstraint,
) -> Result<CostGrid<S>> {
    let (n, m) = (query.len(), subject.len());
    if n == 0 || m == 0 {
        return Err(Error::EmptySeries);
    }
    for (i, &v) in query.iter().enumerate() {
        if !v.finite() {
            return Err(Error::NonFinite { index: i });
        }
    }
    for (j, &v) in subject.iter().enumerate() {
        if !v.finite() {
            return Err(Error::NonFinite { index: j });
        }
    }
    if !window.admits_grid(n, m) {
        return Err(Error::WindowTooNarrow { n, m, window: window.to_string() });
    }

    let mut lo = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for i in 0..n {
        let range = window.row_range(i, m);
        lo.push(range.start);
        offsets.push(offsets[i] + (range.end - range.start));
    }
    let mut cells: Vec<Option<S>> = vec![None; offsets[n]];

    // Band lookup over the partially filled `cells`.
    let at = |cells: &[Option<S>], i: usize, j: usize| -> Option<S> {
        let start = lo[i];
        let width = offsets[i + 1] - offsets[i];
        if j < start || j >= start + width {
            return None;
        }
        cells[offsets[i] + (j - start)]
    };

    for i in 0..n {
        for j in window.row_range(i, m) {
            let d = (query[i] - subject[j]).abs();
            let value = if i == 0 && j == 0 {
                Some(d)
            } else {
                let mut best: Option<S> = None;
                if i > 0 && j > 0 {
                    best = at(&cells, i - 1, j - 1);
                }
                if j > 0 {
                    if let Some(v) = at(&cells, i, j - 1) {
                        if best.is_none_or(|b| v < b) {
                            best = Some(v);
                        }
                    }
                }
                if i > 0 {
                    if let Some(v) = at(&cells, i - 1, j) {
                        if best.is_none_or(|b| v < b) {
                            best = Some(v);
                        }
                    }
                }
                best.map(|b| b + d)
            };
            cells[offsets[i] + (j - lo[i])] = value;
        }
    }

    let grid = CostGrid { n, m, window, lo, offsets, cells };
    if grid.get(n - 1, m - 1).is_none() {
        // Unreachable after admits_grid, kept as defense in depth.
        return Err(Error::WindowTooNarrow { n, m, window: window.to_string() });
    }
    Ok(grid)
}

/// An alignment path through the grid: index pairs from (0, 0) to
/// (n-1, m-1), each step incrementing i, j, or both by exactly 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WarpPath {
    steps: Vec<(usize, usize)>,
}

impl WarpPath {
    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    /// Number of path steps K; `max(n, m) <= K <= n + m - 1`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Check every path invariant against grid shape and window: boundary
    /// cells matched, monotone/continuous unit steps, length bounds, and
    /// window admissibility of every pair.
    pub fn satisfies(&self, n: usize, m: usize, window: WindowConstraint) -> bool {
        let k = self.steps.len();
        if k < n.max(m) || k > n + m - 1 {
            return false;
        }
        if self.steps[0] != (0, 0) || self.steps[k - 1] != (n - 1, m - 1) {
            return false;
        }
        for w in self.steps.windows(2) {
            let (di, dj) = (w[1].0 as i64 - w[0].0 as i64, w[1].1 as i64 - w[0].1 as i64);
            if !matches!((di, dj), (1, 0) | (0, 1) | (1, 1)) {
                return false;
            }
        }
        self.steps.iter().all(|&(i, j)| window.admits(i, j))
    }

    /// Sum of pointwise distances along the path.
    pub fn cost<S: Scalar>(&self, query: &[S], subject: &[S]) -> S {
        self.steps
            .iter()
            .fold(S::zero(), |acc, &(i, j)| acc + (query[i] - subject[j]).abs())
    }
}

/// Trace the optimal path back from (n-1, m-1) to (0, 0), choosing at each
/// step the admissible predecessor with the smallest cumulative distance.
/// Ties break deterministically: diagonal first, then (i, j-1), then
/// (i-1, j) — biasing toward zero shift. Returned in forward order.
pub fn backtrack<S: Scalar>(grid: &CostGrid<S>) -> WarpPath {
    let (mut i, mut j) = (grid.n - 1, grid.m - 1);
    let mut steps = vec![(i, j)];
    while i > 0 || j > 0 {
        let mut best: Option<(S, (usize, usize))> = None;
        let mut consider = |cell: Option<S>, pos: (usize, usize)| {
            if let Some(v) = cell {
                if best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, pos));
                }
            }
        };
        if i > 0 && j > 0 {
            consider(grid.get(i - 1, j - 1), (i - 1, j - 1));
        }
        if j > 0 {
            consider(grid.get(i, j - 1), (i, j - 1));
        }
        if i > 0 {
            consider(grid.get(i - 1, j), (i - 1, j));
        }
        let (_, pos) = best.expect("every reachable cell has a reachable predecessor");
        steps.push(pos);
        (i, j) = pos;
    }
    steps.reverse();
    WarpPath { steps }
}

/// Minimal total alignment cost: the path sum of pointwise distances at
/// (n-1, m-1). Errors as [`cumulative_grid`].
pub fn dtw_cost<S: Scalar>(query: &[S], subject: &[S], window: WindowConstraint) -> Result<S> {
    Ok(cumulative_grid(query, subject, window)?.final_cost())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distance_is_absolute_difference() {
        assert_eq!(distance(3i64, 3).unwrap(), 0);
        assert_eq!(distance(1i64, -2).unwrap(), 3);
        assert_eq!(distance(-5i64, -1).unwrap(), 4);
        assert_eq!(distance(1.5f64, -2.0).unwrap(), 3.5);
        assert!(distance(f64::NAN, 0.0).is_err());
        assert!(distance(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn identical_series_cost_zero_diagonal_path() {
        let q = [3i64, 1, 4, 1, 5];
        for window in [
            WindowConstraint::None,
            WindowConstraint::Symmetric(0),
            WindowConstraint::Causal(0),
            WindowConstraint::Causal(3),
        ] {
            let grid = cumulative_grid(&q, &q, window).unwrap();
            assert_eq!(grid.final_cost(), 0);
            let path = backtrack(&grid);
            let diagonal: Vec<(usize, usize)> = (0..q.len()).map(|i| (i, i)).collect();
            assert_eq!(path.steps(), diagonal.as_slice());
        }
    }

    #[test]
    fn hand_worked_three_by_three() {
        // brute-force enumerable: minimal cost 2, reached on the diagonal
        let q = [1i64, 2, 3];
        let s = [2i64, 2, 2];
        let grid = cumulative_grid(&q, &s, WindowConstraint::None).unwrap();
        assert_eq!(grid.final_cost(), 2);
        let path = backtrack(&grid);
        assert_eq!(path.steps(), &[(0, 0), (1, 1), (2, 2)]);
        assert_eq!(path.cost(&q, &s), 2);
        // symmetry of the unconstrained cost
        assert_eq!(dtw_cost(&s, &q, WindowConstraint::None).unwrap(), 2);
    }

    #[test]
    fn hand_worked_two_by_three_path() {
        let q = [0i64, 5];
        let s = [0i64, 0, 5];
        let grid = cumulative_grid(&q, &s, WindowConstraint::None).unwrap();
        assert_eq!(grid.final_cost(), 0);
        assert_eq!(backtrack(&grid).steps(), &[(0, 0), (0, 1), (1, 2)]);
    }

    #[test]
    fn causal_zero_window_forces_diagonal() {
        let q = [4i64, -2, 7, 0];
        let s = [1i64, 1, 1, 1];
        let expected: i64 = q.iter().zip(&s).map(|(&a, &b)| (a - b).abs()).sum();
        assert_eq!(dtw_cost(&q, &s, WindowConstraint::Causal(0)).unwrap(), expected);
    }

    #[test]
    fn infeasible_windows_rejected() {
        let q = [0i64];
        let s = [0i64, 0, 0];
        assert!(matches!(
            cumulative_grid(&q, &s, WindowConstraint::Symmetric(1)),
            Err(Error::WindowTooNarrow { n: 1, m: 3, .. })
        ));
        // causal forbids the query being shorter than the subject
        assert!(cumulative_grid(&q, &s, WindowConstraint::Causal(5)).is_err());
        // and limits how much longer it may be
        let long = [0i64; 5];
        let short = [0i64; 2];
        assert!(cumulative_grid(&long, &short, WindowConstraint::Causal(2)).is_err());
        assert!(cumulative_grid(&long, &short, WindowConstraint::Causal(3)).is_ok());
    }

    #[test]
    fn empty_and_non_finite_rejected() {
        assert!(matches!(
            dtw_cost::<i64>(&[], &[1], WindowConstraint::None),
            Err(Error::EmptySeries)
        ));
        assert!(dtw_cost(&[1.0, f64::NAN], &[1.0, 2.0], WindowConstraint::None).is_err());
    }

    #[test]
    fn widening_the_window_never_increases_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(2..20);
            let q: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
            let s: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
            let mut prev: Option<i64> = None;
            for w in 0..n {
                let c = dtw_cost(&q, &s, WindowConstraint::Symmetric(w)).unwrap();
                if let Some(p) = prev {
                    assert!(c <= p, "cost rose from {p} to {c} when widening to w={w}");
                }
                prev = Some(c);
            }
            // the unconstrained cost is the floor
            let free = dtw_cost(&q, &s, WindowConstraint::None).unwrap();
            assert!(free <= prev.unwrap());
        }
    }

    #[test]
    fn path_invariants_hold_on_randomized_pairs() {
        // 10,000 randomized pairs across window kinds; every invariant checked
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..10_000 {
            let n = rng.gen_range(1..=30);
            let (m, window) = match trial % 3 {
                0 => (rng.gen_range(1..=30), WindowConstraint::None),
                1 => {
                    let m = rng.gen_range(1..=30usize);
                    let w = (n as i64 - m as i64).unsigned_abs() as usize + rng.gen_range(0..4);
                    (m, WindowConstraint::Symmetric(w))
                }
                _ => {
                    let d = rng.gen_range(0..4).min(n - 1);
                    let w = d + rng.gen_range(0..4);
                    (n - d, WindowConstraint::Causal(w))
                }
            };
            let q: Vec<i64> = (0..n).map(|_| rng.gen_range(-50..=50)).collect();
            let s: Vec<i64> = (0..m).map(|_| rng.gen_range(-50..=50)).collect();
            let grid = cumulative_grid(&q, &s, window).unwrap();
            let path = backtrack(&grid);
            assert!(
                path.satisfies(n, m, window),
                "invalid path for n={n} m={m} window={window}"
            );
            assert_eq!(
                path.cost(&q, &s),
                grid.final_cost(),
                "path sum disagrees with grid cost for n={n} m={m} window={window}"
            );
        }
    }

    #[test]
    fn banded_grid_matches_full_grid_when_window_covers_it() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(1..=15);
            let m = rng.gen_range(1..=15);
            let q: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
            let s: Vec<i64> = (0..m).map(|_| rng.gen_range(-9..=9)).collect();
            let free = dtw_cost(&q, &s, WindowConstraint::None).unwrap();
            let wide = dtw_cost(&q, &s, WindowConstraint::Symmetric(n + m)).unwrap();
            assert_eq!(free, wide);
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)] // (i, j) indexing mirrors the recursion
    fn grid_cells_satisfy_recursion() {
        let q = [3i64, 0, 2, 8];
        let s = [1i64, 1, 6, 6];
        let grid = cumulative_grid(&q, &s, WindowConstraint::Symmetric(2)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let Some(v) = grid.get(i, j) else { continue };
                let d = (q[i] - s[j]).abs();
                if i == 0 && j == 0 {
                    assert_eq!(v, d);
                    continue;
                }
                let preds = [
                    (i > 0 && j > 0).then(|| grid.get(i - 1, j - 1)).flatten(),
                    (j > 0).then(|| grid.get(i, j - 1)).flatten(),
                    (i > 0).then(|| grid.get(i - 1, j)).flatten(),
                ];
                let best = preds.into_iter().flatten().min().unwrap();
                assert_eq!(v, d + best, "recursion violated at ({i}, {j})");
            }
        }
    }
}
