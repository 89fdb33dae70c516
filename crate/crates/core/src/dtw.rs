//! Dependent multivariate dynamic time warping.
//!
//! Point cost between samples is the squared Euclidean distance over all
//! channels jointly. The DTW cost is the raw sum of point costs along the
//! optimal warping path: no square root, no length normalization.
//!
//! Cumulative costs are accumulated from the end cell `(m-1, n-1)` backwards,
//! so `acc[i][j]` is the cheapest cost of finishing the alignment from `(i, j)`.
//! The optimal path is then read forwards from `(0, 0)`. When several
//! successors tie, the diagonal step wins, then the step advancing the first
//! series, then the step advancing the second. This keeps optimal paths as
//! short as the ties allow and makes the output fully deterministic.

use crate::error::{Error, Result};
use crate::series::MultivariateTimeSeries;

/// Squared Euclidean distance between two samples of equal dimension.
#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Dense `rows × cols` grid of point-wise costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl CostMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// Sum of the costs of the cells visited by `path`.
    pub fn path_cost(&self, path: &[(usize, usize)]) -> f64 {
        path.iter().map(|&(i, j)| self.get(i, j)).sum()
    }
}

/// Point-wise squared Euclidean cost between every sample of `a` and every sample of `b`.
pub fn cost_matrix(a: &MultivariateTimeSeries, b: &MultivariateTimeSeries) -> Result<CostMatrix> {
    check_dims(a, b)?;
    let mut values = Vec::with_capacity(a.len() * b.len());
    for ai in a.samples() {
        values.extend(b.samples().map(|bj| squared_euclidean(ai, bj)));
    }
    Ok(CostMatrix {
        rows: a.len(),
        cols: b.len(),
        values,
    })
}

/// A monotone, continuous alignment from `(0, 0)` to `(m-1, n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingPath {
    steps: Vec<(usize, usize)>,
    cost: f64,
}

impl WarpingPath {
    /// Wrap externally produced steps after checking every path condition
    /// against series lengths `m` and `n`. The cost is taken as given.
    pub fn new(steps: Vec<(usize, usize)>, cost: f64, m: usize, n: usize) -> Result<Self> {
        validate_steps(&steps, m, n)?;
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(Error::InvalidParameter(format!("path cost {cost} is not a non-negative real")));
        }
        Ok(Self { steps, cost })
    }

    /// 0-based `(i, j)` index pairs, first `(0, 0)`, last `(m-1, n-1)`.
    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The same alignment seen from the other series.
    pub fn transposed(&self) -> Self {
        Self {
            steps: self.steps.iter().map(|&(i, j)| (j, i)).collect(),
            cost: self.cost,
        }
    }

    pub fn into_steps(self) -> Vec<(usize, usize)> {
        self.steps
    }
}

/// Check the boundary, continuity and monotonicity conditions of a path.
pub fn validate_steps(steps: &[(usize, usize)], m: usize, n: usize) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidParameter(format!("invalid warping path: {msg}")));
    if m == 0 || n == 0 {
        return bad("series lengths must be positive".into());
    }
    match (steps.first(), steps.last()) {
        (Some(&(0, 0)), Some(&last)) if last == (m - 1, n - 1) => {}
        _ => return bad(format!("path must run from (0, 0) to ({}, {})", m - 1, n - 1)),
    }
    for (k, w) in steps.windows(2).enumerate() {
        let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
        if di > 1 || dj > 1 || (di == 0 && dj == 0) {
            return bad(format!("step {k} goes from {:?} to {:?}", w[0], w[1]));
        }
    }
    if steps.len() < m.max(n) || steps.len() > m + n - 1 {
        return bad(format!("length {} outside [{}, {}]", steps.len(), m.max(n), m + n - 1));
    }
    Ok(())
}

/// Optional Sakoe-Chiba band. `None` means unconstrained.
///
/// A band of half-width `w` admits cells with `|i - j| <= max(w, |m - n|)`;
/// the widening to `|m - n|` keeps the end cell reachable for unequal lengths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DtwOptions {
    pub window: Option<usize>,
}

impl DtwOptions {
    pub fn unconstrained() -> Self {
        Self { window: None }
    }

    pub fn with_window(window: usize) -> Self {
        Self { window: Some(window) }
    }
}

#[derive(Clone, Copy)]
struct Band {
    half_width: usize,
    cols: usize,
}

impl Band {
    fn new(m: usize, n: usize, opts: &DtwOptions) -> Self {
        let half_width = match opts.window {
            Some(w) => w.max(m.abs_diff(n)),
            None => m.max(n),
        };
        Self { half_width, cols: n }
    }

    /// Inclusive column range admitted on row `i`.
    #[inline]
    fn cols(&self, i: usize) -> (usize, usize) {
        (i.saturating_sub(self.half_width), (i + self.half_width).min(self.cols - 1))
    }
}

fn check_dims(a: &MultivariateTimeSeries, b: &MultivariateTimeSeries) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

// Cheapest continuation cost given the three successor values. The operand
// order is fixed so the full-grid and rolling-row variants agree bit for bit.
#[inline]
fn best_next(diag: f64, down: f64, right: f64) -> f64 {
    diag.min(down).min(right)
}

/// Optimal warping path between `a` and `b`, unconstrained.
pub fn dtw(a: &MultivariateTimeSeries, b: &MultivariateTimeSeries) -> Result<WarpingPath> {
    dtw_with(a, b, &DtwOptions::default())
}

pub fn dtw_with(a: &MultivariateTimeSeries, b: &MultivariateTimeSeries, opts: &DtwOptions) -> Result<WarpingPath> {
    check_dims(a, b)?;
    let (m, n) = (a.len(), b.len());
    let band = Band::new(m, n, opts);

    let mut acc = vec![f64::INFINITY; m * n];
    let at = |i: usize, j: usize| i * n + j;
    for i in (0..m).rev() {
        let (lo, hi) = band.cols(i);
        let ai = a.sample(i);
        for j in (lo..=hi).rev() {
            let cell = squared_euclidean(ai, b.sample(j));
            acc[at(i, j)] = if i + 1 == m && j + 1 == n {
                cell
            } else {
                let diag = if i + 1 < m && j + 1 < n { acc[at(i + 1, j + 1)] } else { f64::INFINITY };
                let down = if i + 1 < m { acc[at(i + 1, j)] } else { f64::INFINITY };
                let right = if j + 1 < n { acc[at(i, j + 1)] } else { f64::INFINITY };
                cell + best_next(diag, down, right)
            };
        }
    }

    let mut steps = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    steps.push((0, 0));
    while (i, j) != (m - 1, n - 1) {
        let diag = if i + 1 < m && j + 1 < n { acc[at(i + 1, j + 1)] } else { f64::INFINITY };
        let down = if i + 1 < m { acc[at(i + 1, j)] } else { f64::INFINITY };
        let right = if j + 1 < n { acc[at(i, j + 1)] } else { f64::INFINITY };
        if diag <= down && diag <= right {
            i += 1;
            j += 1;
        } else if down <= right {
            i += 1;
        } else {
            j += 1;
        }
        steps.push((i, j));
    }

    Ok(WarpingPath { steps, cost: acc[0] })
}

/// DTW cost between `a` and `b` using two rolling rows instead of the full grid.
pub fn dtw_cost(a: &MultivariateTimeSeries, b: &MultivariateTimeSeries) -> Result<f64> {
    dtw_cost_with(a, b, &DtwOptions::default())
}

pub fn dtw_cost_with(a: &MultivariateTimeSeries, b: &MultivariateTimeSeries, opts: &DtwOptions) -> Result<f64> {
    check_dims(a, b)?;
    let (m, n) = (a.len(), b.len());
    let band = Band::new(m, n, opts);

    // `next` holds row i+1, `cur` row i.
    let mut next = vec![f64::INFINITY; n];
    let mut cur = vec![f64::INFINITY; n];
    for i in (0..m).rev() {
        cur.fill(f64::INFINITY);
        let (lo, hi) = band.cols(i);
        let ai = a.sample(i);
        for j in (lo..=hi).rev() {
            let cell = squared_euclidean(ai, b.sample(j));
            cur[j] = if i + 1 == m && j + 1 == n {
                cell
            } else {
                let diag = if i + 1 < m && j + 1 < n { next[j + 1] } else { f64::INFINITY };
                let down = if i + 1 < m { next[j] } else { f64::INFINITY };
                let right = if j + 1 < n { cur[j + 1] } else { f64::INFINITY };
                cell + best_next(diag, down, right)
            };
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(next[0])
}
