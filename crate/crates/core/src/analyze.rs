//! Relating DTW dissimilarity between trials to their skill-score gap.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::dtw::{dtw_cost_with, DtwOptions};
use crate::error::{Error, Result};
use crate::series::TrialRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct ScorePair {
    pub trial_a: String,
    pub trial_b: String,
    pub osats_diff: u32,
    pub dtw_cost: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairOptions {
    /// Also pair trials from different tasks.
    pub cross_task: bool,
    /// Divide each DTW cost by `m + n`.
    pub length_normalize: bool,
    pub dtw: DtwOptions,
}

/// One entry per unordered pair of scored trials, in input order
/// (`(0,1), (0,2), …, (1,2), …`). Unscored trials are skipped.
pub fn score_pairs(trials: &[TrialRecord], opts: &PairOptions) -> Result<Vec<ScorePair>> {
    let scored: Vec<(&TrialRecord, u32)> = trials
        .iter()
        .filter_map(|t| match t.osats_score {
            Some(s) => Some((t, s)),
            None => {
                log::warn!("trial {} has no score; skipped", t.id);
                None
            }
        })
        .collect();
    if scored.len() < 2 {
        return Err(Error::NotEnoughScored {
            needed: 2,
            found: scored.len(),
        });
    }

    let mut index_pairs = Vec::new();
    for i in 0..scored.len() {
        for j in i + 1..scored.len() {
            if opts.cross_task || scored[i].0.task() == scored[j].0.task() {
                index_pairs.push((i, j));
            }
        }
    }

    index_pairs
        .par_iter()
        .map(|&(i, j)| {
            let ((a, sa), (b, sb)) = (scored[i], scored[j]);
            let mut cost = dtw_cost_with(&a.series, &b.series, &opts.dtw)?;
            if opts.length_normalize {
                cost /= (a.series.len() + b.series.len()) as f64;
            }
            Ok(ScorePair {
                trial_a: a.id.clone(),
                trial_b: b.id.clone(),
                osats_diff: sa.abs_diff(sb),
                dtw_cost: cost,
            })
        })
        .collect()
}

/// Least-squares cubic `c0 + c1 x + c2 x² + c3 x³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyFit {
    pub coefficients: [f64; 4],
    pub residual_sum_squares: f64,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        let c = &self.coefficients;
        ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Fit a cubic by least squares.
///
/// The design matrix is built on `u = (x - mean) / scale` and solved with a
/// QR factorization; the coefficients are then expanded back to powers of `x`.
pub fn polyfit3(points: &[(f64, f64)]) -> Result<PolyFit> {
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidParameter("fit points must be finite".into()));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 4 {
        return Err(Error::RankDeficient { distinct: xs.len() });
    }

    let n = points.len();
    let mean = points.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let scale = points.iter().map(|p| (p.0 - mean).abs()).fold(0.0, f64::max);

    let design = DMatrix::from_fn(n, 4, |r, c| ((points[r].0 - mean) / scale).powi(c as i32));
    let rhs = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let qr = design.qr();
    let qty = qr.q().transpose() * rhs;
    let scaled = qr
        .r()
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { distinct: xs.len() })?;

    // p(x) = Σ_k s_k ((x - mean)/scale)^k = Σ_j c_j x^j
    let mut coefficients = [0.0; 4];
    for (k, s) in scaled.iter().enumerate() {
        let sk = s / scale.powi(k as i32);
        for (j, c) in coefficients.iter_mut().enumerate().take(k + 1) {
            *c += sk * binomial(k, j) * (-mean).powi((k - j) as i32);
        }
    }
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::RankDeficient { distinct: xs.len() });
    }
    let fit = PolyFit {
        coefficients,
        residual_sum_squares: 0.0,
    };
    let residual_sum_squares = points.iter().map(|&(x, y)| (y - fit.eval(x)).powi(2)).sum();
    Ok(PolyFit {
        residual_sum_squares,
        ..fit
    })
}

/// Points `(osats_diff, dtw_cost)` ready for [`polyfit3`].
pub fn fit_points(pairs: &[ScorePair]) -> Vec<(f64, f64)> {
    pairs.iter().map(|p| (p.osats_diff as f64, p.dtw_cost)).collect()
}

/// Render the report: a pair table followed by a coefficient table.
///
/// ```text
/// trial_a,trial_b,osats_diff,dtw_cost
/// Suturing_B001,Suturing_C001,6,1.23456789e2
/// ...
/// coefficient,value
/// c0,...
/// c1,...
/// c2,...
/// c3,...
/// rss,...
/// ```
///
/// Reals are written in scientific notation with 9 significant digits.
pub fn format_fit_report(pairs: &[ScorePair], fit: &PolyFit) -> Result<String> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("report needs at least one pair".into()));
    }
    let mut out = String::from("trial_a,trial_b,osats_diff,dtw_cost\n");
    for p in pairs {
        let _ = writeln!(out, "{},{},{},{:.8e}", p.trial_a, p.trial_b, p.osats_diff, p.dtw_cost);
    }
    out.push_str("coefficient,value\n");
    for (k, c) in fit.coefficients.iter().enumerate() {
        let _ = writeln!(out, "c{k},{c:.8e}");
    }
    let _ = writeln!(out, "rss,{:.8e}", fit.residual_sum_squares);
    Ok(out)
}

pub fn emit_fit_report(pairs: &[ScorePair], fit: &PolyFit, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = format_fit_report(pairs, fit)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
