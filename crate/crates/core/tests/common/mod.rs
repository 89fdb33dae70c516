//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use kinsync::MultivariateTimeSeries;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rows(s: &MultivariateTimeSeries) -> Vec<Vec<f64>> {
    (0..s.len()).map(|i| s.sample(i).to_vec()).collect()
}

fn point_cost(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..a.len() {
        let d = a[k] - b[k];
        acc += d * d;
    }
    acc
}

/// Minimum cost over every warping path, found by exhaustive enumeration.
pub fn brute_force_dtw(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    fn walk(a: &[Vec<f64>], b: &[Vec<f64>], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + point_cost(&a[i], &b[j]);
        if i + 1 == a.len() && j + 1 == b.len() {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Number of distinct warping paths through an `m × n` grid.
pub fn count_paths(m: usize, n: usize) -> u64 {
    let mut grid = vec![vec![0u64; n]; m];
    for i in 0..m {
        for j in 0..n {
            grid[i][j] = if i == 0 && j == 0 {
                1
            } else {
                let mut s = 0;
                if i > 0 {
                    s += grid[i - 1][j];
                }
                if j > 0 {
                    s += grid[i][j - 1];
                }
                if i > 0 && j > 0 {
                    s += grid[i - 1][j - 1];
                }
                s
            };
        }
    }
    grid[m - 1][n - 1]
}

/// Least-squares cubic via the 4×4 normal equations and Gaussian elimination
/// with partial pivoting, in the raw monomial basis.
pub fn normal_equations_cubic(points: &[(f64, f64)]) -> [f64; 4] {
    let mut a = [[0.0f64; 5]; 4];
    for &(x, y) in points {
        let pw = [1.0, x, x * x, x * x * x];
        for r in 0..4 {
            for c in 0..4 {
                a[r][c] += pw[r] * pw[c];
            }
            a[r][4] += pw[r] * y;
        }
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
        a.swap(col, piv);
        for r in col + 1..4 {
            let f = a[r][col] / a[col][col];
            let pivot = a[col];
            for (dst, p) in a[r][col..].iter_mut().zip(&pivot[col..]) {
                *dst -= f * p;
            }
        }
    }
    let mut x = [0.0; 4];
    for r in (0..4).rev() {
        let mut s = a[r][4];
        for c in r + 1..4 {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    x
}

pub fn eval_cubic(c: &[f64; 4], x: f64) -> f64 {
    c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x
}

pub fn rss(c: &[f64; 4], points: &[(f64, f64)]) -> f64 {
    points.iter().map(|&(x, y)| (y - eval_cubic(c, x)).powi(2)).sum()
}

pub fn random_series(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> MultivariateTimeSeries {
    let data = (0..len * dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    MultivariateTimeSeries::from_flat(data, dim, 30.0).unwrap()
}

/// A smooth `dim`-channel trajectory of `len` samples.
pub fn smooth_series(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> MultivariateTimeSeries {
    let phases: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    let freqs: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.5..2.0)).collect();
    let mut data = Vec::with_capacity(len * dim);
    for i in 0..len {
        let t = i as f64 / len as f64 * std::f64::consts::TAU;
        for c in 0..dim {
            data.push((freqs[c] * t + phases[c]).sin());
        }
    }
    MultivariateTimeSeries::from_flat(data, dim, 30.0).unwrap()
}

/// `base` resampled through a random monotone time warp of length `len`.
pub fn time_warped(rng: &mut ChaCha8Rng, base: &MultivariateTimeSeries, len: usize) -> MultivariateTimeSeries {
    let m = base.len();
    let mut weights: Vec<f64> = (0..len).map(|_| rng.gen_range(0.2..1.8)).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for w in weights.iter_mut() {
        acc += *w / total;
        *w = acc;
    }
    let mut data = Vec::with_capacity(len * base.dim());
    for k in 0..len {
        let pos = if k == 0 { 0.0 } else { weights[k - 1] };
        let src = ((pos * (m - 1) as f64).round() as usize).min(m - 1);
        let src = if k + 1 == len { m - 1 } else { src };
        data.extend_from_slice(base.sample(src));
    }
    MultivariateTimeSeries::from_flat(data, base.dim(), base.sample_rate_hz()).unwrap()
}

pub fn with_noise(rng: &mut ChaCha8Rng, s: &MultivariateTimeSeries, amplitude: f64) -> MultivariateTimeSeries {
    let data = s.as_flat().iter().map(|v| v + amplitude * rng.gen_range(-1.0..=1.0)).collect();
    MultivariateTimeSeries::from_flat(data, s.dim(), s.sample_rate_hz()).unwrap()
}
