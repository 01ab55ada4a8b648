//! Integration errors and their summaries across seeds and sizes.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointset::PointSet;

/// Points per parallel chunk; fixed so the summation order never depends on
/// the thread count.
const CHUNK: usize = 4096;

/// Sample mean of `f` over `points`, summed in fixed-size chunks.
pub fn sample_mean<F>(points: &PointSet, f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = points.dim();
    let partial: Vec<f64> = points
        .coords()
        .par_chunks(CHUNK * d)
        .map(|chunk| chunk.chunks_exact(d).map(&f).sum())
        .collect();
    partial.iter().sum::<f64>() / points.len() as f64
}

/// Signed error `mean_A f - exact`.
pub fn integration_error<F>(points: &PointSet, f: F, exact: f64) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    sample_mean(points, f) - exact
}

/// Linear-interpolation (type 7) quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Statistics of one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub errors: Vec<f64>,
    pub mae: f64,
    /// Interquartile range of the signed errors.
    pub iqr: f64,
    /// Lower and upper quartiles of the absolute errors.
    pub abs_q1: f64,
    pub abs_q3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub sizes: Vec<SizeSummary>,
    /// Convergence rate: minus the least-squares slope of `log MAE` on
    /// `log n`. Absent with fewer than two sizes or a vanishing MAE.
    pub alpha: Option<f64>,
}

impl ErrorSummary {
    pub fn get(&self, n: usize) -> Option<&SizeSummary> {
        self.sizes.iter().find(|s| s.n == n)
    }
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Summarize signed errors given as `(n, error)` pairs.
pub fn summarize(errors: &[(usize, f64)]) -> Result<ErrorSummary> {
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &(n, e) in errors {
        by_n.entry(n).or_default().push(e);
    }
    let mut sizes = Vec::with_capacity(by_n.len());
    for (n, errs) in by_n {
        if errs.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "n = {n} has {} error(s); at least 2 seeds are needed",
                errs.len()
            )));
        }
        let signed = sorted(errs.iter().copied());
        let abs = sorted(errs.iter().map(|e| e.abs()));
        let mae = abs.iter().sum::<f64>() / abs.len() as f64;
        sizes.push(SizeSummary {
            n,
            mae,
            iqr: quantile_sorted(&signed, 0.75) - quantile_sorted(&signed, 0.25),
            abs_q1: quantile_sorted(&abs, 0.25),
            abs_q3: quantile_sorted(&abs, 0.75),
            errors: errs,
        });
    }
    let alpha = if sizes.iter().all(|s| s.mae > 0.0) {
        let x: Vec<f64> = sizes.iter().map(|s| (s.n as f64).ln()).collect();
        let y: Vec<f64> = sizes.iter().map(|s| s.mae.ln()).collect();
        ols_slope(&x, &y).map(|s| -s)
    } else {
        None
    };
    Ok(ErrorSummary { sizes, alpha })
}
