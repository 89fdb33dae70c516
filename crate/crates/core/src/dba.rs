//! DTW barycenter averaging.
//!
//! The average starts as a copy of the longest member of the set and is
//! refined by alternating two steps: align every member to the current
//! average (the compact multiple alignment), then replace each sample of the
//! average by the mean of all member samples associated to it. With squared
//! Euclidean point costs the mean is the exact minimizer for a fixed
//! alignment, so the summed DTW cost never increases from one iteration to
//! the next.

use std::ops::Range;

use rayon::prelude::*;

use crate::dtw::{dtw_with, DtwOptions, WarpingPath};
use crate::error::{Error, Result};
use crate::series::MultivariateTimeSeries;

/// Iteration budget and stopping rule for [`dba`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbaParams {
    pub max_iterations: usize,
    /// Stop once `(previous - current) / previous` drops below this.
    pub rel_tolerance: f64,
    pub dtw: DtwOptions,
}

impl Default for DbaParams {
    fn default() -> Self {
        Self {
            max_iterations: 10,
            rel_tolerance: 1e-6,
            dtw: DtwOptions::default(),
        }
    }
}

impl DbaParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if !(self.rel_tolerance.is_finite() && self.rel_tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rel_tolerance must be positive, got {}",
                self.rel_tolerance
            )));
        }
        Ok(())
    }
}

/// For every member of the set and every index of the average, the
/// contiguous range of member indices aligned to it.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactAlignment {
    /// `associations[k][t]` is the range of indices of member `k` aligned to `t`.
    associations: Vec<Vec<Range<usize>>>,
    /// DTW cost between the average and each member.
    costs: Vec<f64>,
    average_len: usize,
}

impl CompactAlignment {
    fn from_paths(paths: Vec<WarpingPath>, average_len: usize) -> Self {
        let mut associations = Vec::with_capacity(paths.len());
        let mut costs = Vec::with_capacity(paths.len());
        for path in paths {
            let mut per_t: Vec<Range<usize>> = vec![0..0; average_len];
            for &(t, j) in path.steps() {
                let r = &mut per_t[t];
                if r.start == r.end {
                    *r = j..j + 1;
                } else {
                    // Paths are monotone, so indices for a fixed t arrive in order.
                    debug_assert_eq!(r.end, j);
                    r.end = j + 1;
                }
            }
            associations.push(per_t);
            costs.push(path.cost());
        }
        Self {
            associations,
            costs,
            average_len,
        }
    }

    pub fn members(&self) -> usize {
        self.associations.len()
    }

    pub fn average_len(&self) -> usize {
        self.average_len
    }

    /// Range of indices of member `k` aligned to average index `t`.
    pub fn range(&self, k: usize, t: usize) -> Range<usize> {
        self.associations[k][t].clone()
    }

    /// All ranges for member `k`, indexed by average position.
    pub fn member(&self, k: usize) -> &[Range<usize>] {
        &self.associations[k]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Sum of the per-member DTW costs, reduced in member order.
    pub fn total_cost(&self) -> f64 {
        self.costs.iter().sum()
    }
}

/// Result of [`dba`].
#[derive(Debug, Clone, PartialEq)]
pub struct AverageSeries {
    pub series: MultivariateTimeSeries,
    /// Sum of DTW costs between `series` and every member of the set.
    pub total_cost: f64,
    pub iterations_run: usize,
    /// Total cost of the initial average followed by the cost after each iteration.
    pub cost_history: Vec<f64>,
}

fn check_set(set: &[MultivariateTimeSeries]) -> Result<usize> {
    let first = set.first().ok_or(Error::EmptySet)?;
    for s in &set[1..] {
        if s.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                left: first.dim(),
                right: s.dim(),
            });
        }
    }
    Ok(first.dim())
}

/// Copy of the longest member; ties go to the earliest in input order.
pub fn initialize_average(set: &[MultivariateTimeSeries]) -> Result<MultivariateTimeSeries> {
    check_set(set)?;
    let mut best = &set[0];
    for s in &set[1..] {
        if s.len() > best.len() {
            best = s;
        }
    }
    Ok(best.clone())
}

/// Align every member of `set` to `average`.
pub fn compact_alignment(average: &MultivariateTimeSeries, set: &[MultivariateTimeSeries]) -> Result<CompactAlignment> {
    compact_alignment_with(average, set, &DtwOptions::default())
}

pub fn compact_alignment_with(
    average: &MultivariateTimeSeries,
    set: &[MultivariateTimeSeries],
    opts: &DtwOptions,
) -> Result<CompactAlignment> {
    check_set(set)?;
    // collect() keeps input order regardless of scheduling.
    let paths = set
        .par_iter()
        .map(|s| dtw_with(average, s, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(CompactAlignment::from_paths(paths, average.len()))
}

/// One barycenter update of `average` given its alignment to `set`.
pub fn dba_iterate(
    average: &MultivariateTimeSeries,
    set: &[MultivariateTimeSeries],
    alignment: &CompactAlignment,
) -> Result<MultivariateTimeSeries> {
    let dim = average.dim();
    let len = average.len();
    if alignment.average_len() != len || alignment.members() != set.len() {
        return Err(Error::InvalidParameter(
            "alignment does not match the average and set it is applied to".into(),
        ));
    }
    let mut sums = vec![0.0; len * dim];
    let mut counts = vec![0usize; len];
    for (k, member) in set.iter().enumerate() {
        for (t, range) in alignment.member(k).iter().enumerate() {
            let acc = &mut sums[t * dim..(t + 1) * dim];
            for j in range.clone() {
                for (a, v) in acc.iter_mut().zip(member.sample(j)) {
                    *a += v;
                }
            }
            counts[t] += range.len();
        }
    }
    for (t, &count) in counts.iter().enumerate() {
        // Every path visits every row of the average.
        assert!(count > 0, "average index {t} has no associated samples");
        for v in &mut sums[t * dim..(t + 1) * dim] {
            *v /= count as f64;
        }
    }
    MultivariateTimeSeries::from_flat(sums, dim, average.sample_rate_hz())
}

/// Average a set of series.
pub fn dba(set: &[MultivariateTimeSeries], params: &DbaParams) -> Result<AverageSeries> {
    params.validate()?;
    let mut average = initialize_average(set)?;
    let mut alignment = compact_alignment_with(&average, set, &params.dtw)?;
    let mut cost = alignment.total_cost();
    let mut history = vec![cost];
    let mut iterations_run = 0;

    while iterations_run < params.max_iterations {
        let next = dba_iterate(&average, set, &alignment)?;
        let next_alignment = compact_alignment_with(&next, set, &params.dtw)?;
        let next_cost = next_alignment.total_cost();
        iterations_run += 1;
        history.push(next_cost);

        let converged = cost == 0.0 || (cost - next_cost) / cost < params.rel_tolerance;
        if next_cost <= cost {
            average = next;
            alignment = next_alignment;
            cost = next_cost;
        }
        log::debug!("dba iteration {iterations_run}: total cost {next_cost}");
        if converged {
            break;
        }
    }

    Ok(AverageSeries {
        series: average,
        total_cost: cost,
        iterations_run,
        cost_history: history,
    })
}
