//! Star discrepancy.
//!
//! The supremum over anchored boxes `[0, a)` is approached either by boxes
//! whose corner sits on the critical grid (point coordinates together with
//! `1` in every dimension) with the strict count, or by boxes shrinking onto
//! a closed box `[0, a]` with `a` on the same grid. Evaluating both
//! `vol(a) - open(a)/n` and `closed(a)/n - vol(a)` on every critical corner
//! therefore gives the exact value.
//!
//! The sweep fixes one coordinate at a time, filtering the open and closed
//! candidate sets separately, and handles the last dimension with a single
//! two-pointer pass over points pre-sorted by that coordinate: `O(n^d)`
//! corners with `O(1)` work per corner in the last dimension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointset::PointSet;

pub const MAX_EXACT_DIM: usize = 3;

/// Largest number of corners evaluated by [`star_discrepancy_grid`].
pub const MAX_GRID_CORNERS: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `vol(a) - open(a)/n`
    Deficiency,
    /// `closed(a)/n - vol(a)`
    Excess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    ExactGrid,
    /// A lower bound from the uniform grid with this many cells per side.
    GridLowerBound { resolution: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub value: f64,
    pub argmax_corner: Vec<f64>,
    pub side: Side,
    pub method: Method,
}

struct Sweep<'a> {
    points: &'a PointSet,
    grids: Vec<Vec<f64>>,
    n: f64,
    best: f64,
    corner: Vec<f64>,
    side: Side,
    scratch: Vec<f64>,
}

impl Sweep<'_> {
    fn record(&mut self, value: f64, side: Side, last: f64) {
        if value > self.best {
            self.best = value;
            self.side = side;
            self.corner.clone_from(&self.scratch);
            *self.corner.last_mut().unwrap() = last;
        }
    }

    /// `open` and `closed` are indices of points strictly below / at most
    /// the fixed prefix of the corner, each sorted by the last coordinate.
    fn descend(&mut self, dim: usize, vol: f64, open: &[usize], closed: &[usize]) {
        let d = self.points.dim();
        if dim + 1 == d {
            self.last_dimension(vol, open, closed);
            return;
        }
        let grid = std::mem::take(&mut self.grids[dim]);
        let mut sub_open = Vec::with_capacity(open.len());
        let mut sub_closed = Vec::with_capacity(closed.len());
        for &a in &grid {
            sub_open.clear();
            sub_open.extend(open.iter().copied().filter(|&i| self.points.point(i)[dim] < a));
            sub_closed.clear();
            sub_closed.extend(closed.iter().copied().filter(|&i| self.points.point(i)[dim] <= a));
            self.scratch[dim] = a;
            let v = vol * a;
            let (o, c) = (std::mem::take(&mut sub_open), std::mem::take(&mut sub_closed));
            self.descend(dim + 1, v, &o, &c);
            sub_open = o;
            sub_closed = c;
        }
        self.grids[dim] = grid;
    }

    fn last_dimension(&mut self, vol: f64, open: &[usize], closed: &[usize]) {
        let last = self.points.dim() - 1;
        let grid = std::mem::take(&mut self.grids[last]);
        let (mut o, mut c) = (0usize, 0usize);
        for &a in &grid {
            while o < open.len() && self.points.point(open[o])[last] < a {
                o += 1;
            }
            while c < closed.len() && self.points.point(closed[c])[last] <= a {
                c += 1;
            }
            let v = vol * a;
            self.record(v - o as f64 / self.n, Side::Deficiency, a);
            self.record(c as f64 / self.n - v, Side::Excess, a);
        }
        self.grids[last] = grid;
    }
}

/// Exact star discrepancy for `d <= 3`.
pub fn star_discrepancy_exact(points: &PointSet) -> Result<DiscrepancyReport> {
    let d = points.dim();
    if d == 0 || d > MAX_EXACT_DIM {
        return Err(Error::ExactDimension(d));
    }
    let n = points.len();
    if n == 0 {
        return Err(Error::SizeMismatch { expected: 1, got: 0 });
    }
    let grids: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let mut g: Vec<f64> = points.iter().map(|p| p[j]).collect();
            g.push(1.0);
            g.sort_by(f64::total_cmp);
            g.dedup();
            g
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points.point(a)[d - 1].total_cmp(&points.point(b)[d - 1]));
    let mut sweep = Sweep {
        points,
        grids,
        n: n as f64,
        best: f64::NEG_INFINITY,
        corner: vec![0.0; d],
        side: Side::Deficiency,
        scratch: vec![0.0; d],
    };
    sweep.descend(0, 1.0, &order, &order);
    Ok(DiscrepancyReport {
        value: sweep.best.clamp(0.0, 1.0),
        argmax_corner: sweep.corner,
        side: sweep.side,
        method: Method::ExactGrid,
    })
}

/// Lower bound from corners on the uniform grid `{1/r, ..., 1}^d`, with both
/// the open and the closed count at each corner. Works in any dimension as
/// long as `r^d` stays within [`MAX_GRID_CORNERS`].
pub fn star_discrepancy_grid(points: &PointSet, resolution: u32) -> Result<DiscrepancyReport> {
    let d = points.dim();
    let r = resolution.max(1) as u64;
    let corners = (0..d).try_fold(1u64, |acc, _| acc.checked_mul(r).filter(|&c| c <= MAX_GRID_CORNERS));
    let corners = corners.ok_or_else(|| {
        Error::InvalidConfig(format!("{r}^{d} grid corners exceed the limit of {MAX_GRID_CORNERS}"))
    })?;
    let n = points.len().max(1) as f64;
    // Per point and dimension, the first grid step whose corner is above
    // (open) or at least (closed) the coordinate.
    let step_open: Vec<u64> = points
        .coords()
        .iter()
        .map(|&x| (x * r as f64).floor() as u64 + 1)
        .collect();
    let step_closed: Vec<u64> = points
        .coords()
        .iter()
        .map(|&x| (x * r as f64).ceil().max(1.0) as u64)
        .collect();
    let mut best = (f64::NEG_INFINITY, vec![0.0; d], Side::Deficiency);
    let mut idx = vec![1u64; d];
    for _ in 0..corners {
        let corner: Vec<f64> = idx.iter().map(|&i| i as f64 / r as f64).collect();
        let vol: f64 = corner.iter().product();
        let (mut open, mut closed) = (0usize, 0usize);
        for p in 0..points.len() {
            let row = p * d;
            if (0..d).all(|j| step_open[row + j] <= idx[j]) {
                open += 1;
            }
            if (0..d).all(|j| step_closed[row + j] <= idx[j]) {
                closed += 1;
            }
        }
        for (v, side) in [(vol - open as f64 / n, Side::Deficiency), (closed as f64 / n - vol, Side::Excess)] {
            if v > best.0 {
                best = (v, corner.clone(), side);
            }
        }
        for i in idx.iter_mut() {
            if *i < r {
                *i += 1;
                break;
            }
            *i = 1;
        }
    }
    Ok(DiscrepancyReport {
        value: best.0.clamp(0.0, 1.0),
        argmax_corner: best.1,
        side: best.2,
        method: Method::GridLowerBound { resolution },
    })
}

/// Exact value when `d <= 3`, otherwise the grid lower bound at the finest
/// resolution that fits in [`MAX_GRID_CORNERS`] (capped at `fallback_resolution`).
pub fn star_discrepancy(points: &PointSet, fallback_resolution: u32) -> Result<DiscrepancyReport> {
    if points.dim() <= MAX_EXACT_DIM {
        return star_discrepancy_exact(points);
    }
    let d = points.dim() as f64;
    let fit = (MAX_GRID_CORNERS as f64).powf(1.0 / d).floor() as u32;
    star_discrepancy_grid(points, fallback_resolution.min(fit).max(1))
}
