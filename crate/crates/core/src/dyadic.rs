//! Dyadic boxes, product weights and weighted incidence vectors.
//!
//! A dyadic interval of level `l` is `(o / 2^l, (o + 1) / 2^l]` with
//! `0 <= o < 2^l`; level 0 is the trivial interval `(0, 1]`. A box is one
//! interval per coordinate, and its weight is the product of `gamma_j` over
//! the coordinates where it is nontrivial.
//!
//! # Index layout
//!
//! Per coordinate, interval `(l, o)` has index `0` when trivial and
//! `(2^l - 1) + o` otherwise, so the indices for levels `<= h` fill
//! `0 ..= 2^(h+1) - 2` and the radix is `R = 2^(h+1) - 1`.
//!
//! * `Full`: box index is `sum_j i_j * R^j` (coordinate 0 least significant).
//! * `Truncation(s)`: the same layout over the first `s` coordinates only;
//!   boxes nontrivial elsewhere carry weight 0 and are not indexed.
//! * `Superposition(s)`: boxes with nontrivial set `u`, `|u| = k <= s`, are
//!   laid out in blocks by `k`. Inside a block, `u` is ranked in
//!   colexicographic order and the nontrivial intervals form a mixed-radix
//!   number with radix `Q = R - 1` over the sorted elements of `u` (the
//!   smallest coordinate least significant):
//!   `offset(k) + rank(u) * Q^k + sum_t (i_{u_t} - 1) * Q^t`.
//!
//! All layouts are bijections onto `0..len()`, stable across runs.
//!
//! # Boundary convention
//!
//! Point coordinates live in `[0, 1)` while intervals are left-open; a
//! coordinate `x` is placed in offset `floor(x * 2^l)`, so a point exactly on
//! a dyadic boundary (including 0) is assigned to the interval to its right.
//! After a uniform random shift this happens with probability zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseVec;

/// Largest supported level; keeps `2^(h+1)` inside `u64` with room to spare.
pub const MAX_LEVEL: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub level: u32,
    pub offset: u64,
}

impl DyadicInterval {
    pub const TRIVIAL: DyadicInterval = DyadicInterval { level: 0, offset: 0 };

    pub fn new(level: u32, offset: u64) -> Result<Self> {
        if level > MAX_LEVEL || offset >= 1u64 << level {
            return Err(Error::InvalidConfig(format!(
                "dyadic interval level {level} offset {offset} out of range"
            )));
        }
        Ok(Self { level, offset })
    }

    pub fn is_trivial(&self) -> bool {
        self.level == 0
    }

    /// Lower and upper endpoints of `(lo, hi]`.
    pub fn bounds(&self) -> (f64, f64) {
        let w = 1.0 / (1u64 << self.level) as f64;
        (self.offset as f64 * w, (self.offset + 1) as f64 * w)
    }

    /// Per-coordinate index in `0 ..= 2^(h+1) - 2`.
    pub fn index(&self) -> u64 {
        if self.level == 0 {
            0
        } else {
            (1u64 << self.level) - 1 + self.offset
        }
    }

    pub fn from_index(index: u64) -> Self {
        if index == 0 {
            return Self::TRIVIAL;
        }
        let level = 63 - (index + 1).leading_zeros();
        Self {
            level,
            offset: index + 1 - (1u64 << level),
        }
    }

    /// Membership under the `floor(x * 2^l)` convention.
    pub fn contains(&self, x: f64) -> bool {
        self.level == 0 || locate(x, self.level) == self.offset
    }
}

/// A product of dyadic intervals, one per coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicBox {
    dims: Vec<DyadicInterval>,
}

impl DyadicBox {
    pub fn new(dims: Vec<DyadicInterval>) -> Self {
        Self { dims }
    }

    pub fn trivial(d: usize) -> Self {
        Self {
            dims: vec![DyadicInterval::TRIVIAL; d],
        }
    }

    /// Build from `(level, offset)` pairs, validating each.
    pub fn from_pairs(pairs: &[(u32, u64)]) -> Result<Self> {
        pairs
            .iter()
            .map(|&(l, o)| DyadicInterval::new(l, o))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn intervals(&self) -> &[DyadicInterval] {
        &self.dims
    }

    pub fn max_level(&self) -> u32 {
        self.dims.iter().map(|i| i.level).max().unwrap_or(0)
    }

    pub fn nontrivial(&self) -> impl Iterator<Item = usize> + '_ {
        self.dims
            .iter()
            .enumerate()
            .filter(|(_, i)| !i.is_trivial())
            .map(|(j, _)| j)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.dims.iter().zip(x).all(|(i, &v)| i.contains(v))
    }
}

/// Structural restriction applied on top of the product weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "s_eff")]
pub enum Mode {
    Full,
    Superposition(usize),
    Truncation(usize),
}

impl Mode {
    pub fn s_eff(&self) -> Option<usize> {
        match *self {
            Mode::Full => None,
            Mode::Superposition(s) | Mode::Truncation(s) => Some(s),
        }
    }
}

/// Non-increasing coordinate weights plus a structural mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    gammas: Vec<f64>,
    mode: Mode,
}

impl WeightProfile {
    pub fn new(gammas: Vec<f64>, mode: Mode) -> Result<Self> {
        let d = gammas.len();
        if d == 0 {
            return Err(Error::InvalidWeights("need at least one coordinate".into()));
        }
        if let Some(g) = gammas.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::InvalidWeights(format!("weight {g} is not a finite non-negative number")));
        }
        if gammas.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidWeights("weights must be non-increasing".into()));
        }
        if let Some(s) = mode.s_eff() {
            if s == 0 || s > d {
                return Err(Error::InvalidWeights(format!("s_eff = {s} must lie in [1, {d}]")));
            }
        }
        if let Mode::Truncation(s) = mode {
            let expected = (0..d).map(|j| if j < s { 1.0 } else { 0.0 });
            if !gammas.iter().copied().eq(expected) {
                return Err(Error::InvalidWeights(
                    "truncation weights must be s_eff ones followed by zeros".into(),
                ));
            }
        }
        Ok(Self { gammas, mode })
    }

    pub fn unit(d: usize) -> Self {
        Self::new(vec![1.0; d], Mode::Full).expect("unit weights are valid")
    }

    pub fn full(gammas: Vec<f64>) -> Result<Self> {
        Self::new(gammas, Mode::Full)
    }

    pub fn superposition(gammas: Vec<f64>, s_eff: usize) -> Result<Self> {
        Self::new(gammas, Mode::Superposition(s_eff))
    }

    /// Weights `(1, .., 1, 0, .., 0)` with `s_eff` ones.
    pub fn truncation(d: usize, s_eff: usize) -> Result<Self> {
        let gammas = (0..d).map(|j| if j < s_eff { 1.0 } else { 0.0 }).collect();
        Self::new(gammas, Mode::Truncation(s_eff))
    }

    pub fn dim(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Exact `sum_B gamma(B)^2 1{z in B}` over admissible boxes, the same
    /// for every point: `prod_j (1 + h gamma_j^2)` in full/truncation mode,
    /// and the elementary symmetric sums of `h gamma_j^2` up to order `s`
    /// in superposition mode.
    pub fn incidence_norm_sq(&self, h: u32) -> f64 {
        let h = h as f64;
        match self.mode {
            Mode::Full | Mode::Truncation(_) => self.gammas.iter().map(|g| 1.0 + h * g * g).product(),
            Mode::Superposition(s) => {
                let mut e = vec![0.0; s + 1];
                e[0] = 1.0;
                for g in &self.gammas {
                    let x = h * g * g;
                    for k in (1..=s).rev() {
                        e[k] += e[k - 1] * x;
                    }
                }
                e.iter().sum()
            }
        }
    }
}

/// `gamma(B)`: product of weights over the nontrivial coordinates of `B`.
pub fn box_weight(b: &DyadicBox, profile: &WeightProfile) -> Result<f64> {
    if b.dim() != profile.dim() {
        return Err(Error::DimensionMismatch {
            expected: profile.dim(),
            got: b.dim(),
        });
    }
    Ok(b.nontrivial().map(|j| profile.gammas[j]).product())
}

/// `floor(x * 2^level)`, clamped into `0 .. 2^level`.
#[inline]
pub fn locate(x: f64, level: u32) -> u64 {
    let scale = (1u64 << level) as f64;
    ((x * scale) as u64).min((1u64 << level) - 1)
}

/// `ceil(log2(x))` for `x >= 1`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Default refinement level: `ceil(log2(d n))`, or `ceil(log2(s n))` when an
/// effective dimension is in play.
pub fn default_level(d: usize, n: usize, mode: Mode) -> u32 {
    let dim = mode.s_eff().unwrap_or(d);
    ceil_log2((dim as u64).saturating_mul(n as u64))
}

fn binomial(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// The ordered index of admissible boxes for `(d, h, mode)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpace {
    d: usize,
    h: u32,
    mode: Mode,
    radix: u64,
    len: u64,
    /// Superposition only: `C(j, t)` for `j < d`, `t <= s`.
    binom: Vec<Vec<u64>>,
    /// Superposition only: start of block `k`.
    block_offset: Vec<u64>,
    /// Superposition only: `Q^k`.
    q_pow: Vec<u64>,
}

/// Alias matching the operation name; see [`BoxSpace::new`].
pub fn enumerate_boxes(d: usize, h: u32, mode: Mode) -> Result<BoxSpace> {
    BoxSpace::new(d, h, mode)
}

impl BoxSpace {
    pub fn new(d: usize, h: u32, mode: Mode) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if let Some(s) = mode.s_eff() {
            if s == 0 || s > d {
                return Err(Error::InvalidConfig(format!("s_eff = {s} must lie in [1, {d}]")));
            }
        }
        let overflow = Error::IndexOverflow { d, h };
        if h > MAX_LEVEL {
            return Err(overflow);
        }
        let radix = (1u64 << (h + 1)) - 1;
        let mut space = Self {
            d,
            h,
            mode,
            radix,
            len: 0,
            binom: Vec::new(),
            block_offset: Vec::new(),
            q_pow: Vec::new(),
        };
        space.len = match mode {
            Mode::Full | Mode::Truncation(_) => {
                let dims = if let Mode::Truncation(s) = mode { s } else { d };
                (0..dims).try_fold(1u64, |acc, _| acc.checked_mul(radix)).ok_or(overflow)?
            }
            Mode::Superposition(s) => {
                let q = radix - 1;
                let mut q_pow = vec![1u64];
                for _ in 0..s {
                    let next = q_pow.last().unwrap().checked_mul(q).ok_or_else(|| overflow.clone())?;
                    q_pow.push(next);
                }
                let mut binom = Vec::with_capacity(d);
                for j in 0..d {
                    binom.push(
                        (0..=s)
                            .map(|t| binomial(j, t))
                            .collect::<Option<Vec<_>>>()
                            .ok_or_else(|| overflow.clone())?,
                    );
                }
                let mut block_offset = Vec::with_capacity(s + 2);
                let mut total = 0u64;
                for k in 0..=s {
                    block_offset.push(total);
                    let block = binomial(d, k)
                        .and_then(|c| c.checked_mul(q_pow[k]))
                        .ok_or_else(|| overflow.clone())?;
                    total = total.checked_add(block).ok_or_else(|| overflow.clone())?;
                }
                space.binom = binom;
                space.block_offset = block_offset;
                space.q_pow = q_pow;
                total
            }
        };
        Ok(space)
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn level(&self) -> u32 {
        self.h
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn colex_rank(&self, u: &[usize]) -> u64 {
        u.iter().enumerate().map(|(t, &j)| self.binom[j][t + 1]).sum()
    }

    /// Index of `b`, or `None` if `b` is not admissible (level above `h`,
    /// too many nontrivial coordinates, or nontrivial outside the
    /// truncation prefix).
    pub fn index_of(&self, b: &DyadicBox) -> Option<u64> {
        if b.dim() != self.d || b.max_level() > self.h {
            return None;
        }
        match self.mode {
            Mode::Full => Some(
                b.intervals()
                    .iter()
                    .rev()
                    .fold(0u64, |acc, i| acc * self.radix + i.index()),
            ),
            Mode::Truncation(s) => {
                if b.nontrivial().any(|j| j >= s) {
                    return None;
                }
                Some(
                    b.intervals()[..s]
                        .iter()
                        .rev()
                        .fold(0u64, |acc, i| acc * self.radix + i.index()),
                )
            }
            Mode::Superposition(s) => {
                let u: Vec<usize> = b.nontrivial().collect();
                let k = u.len();
                if k > s {
                    return None;
                }
                let q = self.radix - 1;
                let local = u
                    .iter()
                    .rev()
                    .fold(0u64, |acc, &j| acc * q + b.intervals()[j].index() - 1);
                Some(self.block_offset[k] + self.colex_rank(&u) * self.q_pow[k] + local)
            }
        }
    }

    /// Inverse of [`BoxSpace::index_of`].
    pub fn box_at(&self, mut index: u64) -> Option<DyadicBox> {
        if index >= self.len {
            return None;
        }
        let mut dims = vec![DyadicInterval::TRIVIAL; self.d];
        match self.mode {
            Mode::Full | Mode::Truncation(_) => {
                let n = self.mode.s_eff().unwrap_or(self.d);
                for dim in dims.iter_mut().take(n) {
                    *dim = DyadicInterval::from_index(index % self.radix);
                    index /= self.radix;
                }
            }
            Mode::Superposition(s) => {
                let k = (0..=s).rev().find(|&k| self.block_offset[k] <= index)?;
                index -= self.block_offset[k];
                let mut rank = index / self.q_pow[k];
                let mut local = index % self.q_pow[k];
                let mut u = vec![0usize; k];
                for t in (0..k).rev() {
                    let c = (t..self.d).rev().find(|&c| self.binom[c][t + 1] <= rank)?;
                    u[t] = c;
                    rank -= self.binom[c][t + 1];
                }
                let q = self.radix - 1;
                for &j in &u {
                    dims[j] = DyadicInterval::from_index(local % q + 1);
                    local /= q;
                }
            }
        }
        Some(DyadicBox::new(dims))
    }

    /// All admissible boxes in index order.
    pub fn iter(&self) -> impl Iterator<Item = DyadicBox> + '_ {
        (0..self.len).map(move |i| self.box_at(i).expect("index in range"))
    }
}

/// Weighted indicator of a point against the admissible dyadic boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseIncidence {
    vector: SparseVec,
    dimension_count: u64,
}

impl SparseIncidence {
    pub fn entries(&self) -> &[(u64, f64)] {
        self.vector.entries()
    }

    pub fn dimension_count(&self) -> u64 {
        self.dimension_count
    }

    pub fn nnz(&self) -> usize {
        self.vector.nnz()
    }

    /// Squared norm with Neumaier-compensated summation; supports can reach
    /// millions of entries.
    pub fn norm_sq(&self) -> f64 {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for &(_, w) in self.entries() {
            let x = w * w;
            let t = sum + x;
            comp += if sum.abs() >= x { (sum - t) + x } else { (x - t) + sum };
            sum = t;
        }
        sum + comp
    }

    pub fn as_vec(&self) -> &SparseVec {
        &self.vector
    }

    pub fn into_vec(self) -> SparseVec {
        self.vector
    }
}

/// Precomputed state for incidence vectors under one `(h, profile, shift)`.
#[derive(Debug, Clone)]
pub struct IncidenceBuilder {
    space: BoxSpace,
    profile: WeightProfile,
    shift: Vec<f64>,
    /// Coordinates that may be nontrivial (positive weight, inside the
    /// truncation prefix).
    active: Vec<usize>,
    active_gamma_sq: Vec<f64>,
}

impl IncidenceBuilder {
    pub fn new(h: u32, profile: WeightProfile, shift: Vec<f64>) -> Result<Self> {
        let d = profile.dim();
        if shift.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: shift.len(),
            });
        }
        check_unit(&shift)?;
        let space = BoxSpace::new(d, h, profile.mode())?;
        let limit = match profile.mode() {
            Mode::Truncation(s) => s,
            _ => d,
        };
        let active: Vec<usize> = (0..limit).filter(|&j| profile.gammas()[j] > 0.0).collect();
        let active_gamma_sq = active.iter().map(|&j| profile.gammas()[j].powi(2)).collect();
        Ok(Self {
            space,
            profile,
            shift,
            active,
            active_gamma_sq,
        })
    }

    pub fn space(&self) -> &BoxSpace {
        &self.space
    }

    pub fn profile(&self) -> &WeightProfile {
        &self.profile
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn level(&self) -> u32 {
        self.space.h
    }

    /// `(x - shift) mod 1`, kept strictly below 1.
    pub fn shifted(&self, point: &[f64]) -> Vec<f64> {
        point
            .iter()
            .zip(&self.shift)
            .map(|(&x, &s)| {
                let mut y = x - s;
                if y < 0.0 {
                    y += 1.0;
                }
                if y >= 1.0 {
                    y = 1.0 - f64::EPSILON / 2.0;
                }
                y
            })
            .collect()
    }

    pub fn active_dims(&self) -> &[usize] {
        &self.active
    }

    /// Level-`h` cell indices of the shifted point on the active
    /// coordinates; enough to recover every box containing it.
    pub fn digits_into(&self, point: &[f64], out: &mut Vec<u64>) -> Result<()> {
        if point.len() != self.space.d {
            return Err(Error::DimensionMismatch {
                expected: self.space.d,
                got: point.len(),
            });
        }
        check_unit(point)?;
        let p = self.shifted(point);
        out.clear();
        out.extend(self.active.iter().map(|&j| locate(p[j], self.space.h)));
        Ok(())
    }

    /// Inner product of the incidence vectors of two points, from their
    /// digits: coordinate `j` contributes `gamma_j^2` times the number of
    /// levels `1..=h` at which the points share a dyadic interval.
    pub fn kernel(&self, a: &[u64], b: &[u64]) -> f64 {
        // leading_zeros(0) = 64 covers identical cells
        let offset = 64 - self.space.h;
        let shared = |x: u64, y: u64| ((x ^ y).leading_zeros() - offset) as f64;
        let terms = a.iter().zip(b).zip(&self.active_gamma_sq).map(|((&x, &y), &g)| g * shared(x, y));
        match self.space.mode {
            Mode::Full | Mode::Truncation(_) => terms.map(|t| 1.0 + t).product(),
            Mode::Superposition(1) => 1.0 + terms.sum::<f64>(),
            Mode::Superposition(2) => {
                // e_1 + e_2 from power sums
                let (p1, p2) = terms.fold((0.0, 0.0), |(p1, p2), t| (p1 + t, p2 + t * t));
                1.0 + p1 + 0.5 * (p1 * p1 - p2)
            }
            Mode::Superposition(s) => {
                let mut e = vec![0.0; s + 1];
                e[0] = 1.0;
                for t in terms {
                    for k in (1..=s).rev() {
                        e[k] += e[k - 1] * t;
                    }
                }
                e.iter().sum()
            }
        }
    }

    pub fn incidence(&self, point: &[f64]) -> Result<SparseIncidence> {
        let mut entries = Vec::new();
        self.incidence_into(point, &mut entries)?;
        Ok(SparseIncidence {
            vector: SparseVec::from_sorted_unchecked(entries),
            dimension_count: self.space.len,
        })
    }

    /// Write the sorted `(box index, weight)` entries for `point` into `out`.
    pub(crate) fn incidence_into(&self, point: &[f64], out: &mut Vec<(u64, f64)>) -> Result<()> {
        if point.len() != self.space.d {
            return Err(Error::DimensionMismatch {
                expected: self.space.d,
                got: point.len(),
            });
        }
        check_unit(point)?;
        out.clear();
        let p = self.shifted(point);
        let h = self.space.h;
        // Per active coordinate: interval index (minus nothing) at levels 1..=h.
        let chains: Vec<Vec<u64>> = self
            .active
            .iter()
            .map(|&j| (1..=h).map(|l| (1u64 << l) - 1 + locate(p[j], l)).collect())
            .collect();
        let gammas = self.profile.gammas();
        match self.space.mode {
            Mode::Full | Mode::Truncation(_) => {
                // Odometer over (trivial | level 1..h) per active coordinate,
                // the lowest coordinate varying fastest, which yields
                // increasing indices.
                let radix_pow: Vec<u64> = self
                    .active
                    .iter()
                    .map(|&j| self.space.radix.pow(j as u32))
                    .collect();
                let m = self.active.len();
                let mut choice = vec![0usize; m];
                loop {
                    let mut idx = 0u64;
                    let mut w = 1.0;
                    for (a, &c) in choice.iter().enumerate() {
                        if c > 0 {
                            idx += chains[a][c - 1] * radix_pow[a];
                            w *= gammas[self.active[a]];
                        }
                    }
                    out.push((idx, w));
                    let mut a = 0;
                    loop {
                        if a == m {
                            debug_assert!(out.windows(2).all(|w| w[0].0 < w[1].0));
                            return Ok(());
                        }
                        choice[a] += 1;
                        if choice[a] <= h as usize {
                            break;
                        }
                        choice[a] = 0;
                        a += 1;
                    }
                }
            }
            Mode::Superposition(s) => {
                let q = self.space.radix - 1;
                let m = self.active.len();
                let mut subset: Vec<usize> = Vec::with_capacity(s);
                out.push((0, 1.0));
                if h == 0 {
                    return Ok(());
                }
                let mut u: Vec<usize> = Vec::with_capacity(s);
                let mut levels: Vec<usize> = Vec::with_capacity(s);
                for k in 1..=s.min(m) {
                    // Subsets of positions into `active` in colex order, so
                    // block bases and hence indices come out increasing.
                    subset.clear();
                    subset.extend(0..k);
                    loop {
                        u.clear();
                        u.extend(subset.iter().map(|&a| self.active[a]));
                        let base = self.space.block_offset[k] + self.space.colex_rank(&u) * self.space.q_pow[k];
                        let w: f64 = u.iter().map(|&j| gammas[j]).product();
                        levels.clear();
                        levels.resize(k, 0);
                        loop {
                            let mut local = 0u64;
                            for t in (0..k).rev() {
                                local = local * q + chains[subset[t]][levels[t]] - 1;
                            }
                            out.push((base + local, w));
                            let mut t = 0;
                            while t < k {
                                levels[t] += 1;
                                if levels[t] < h as usize {
                                    break;
                                }
                                levels[t] = 0;
                                t += 1;
                            }
                            if t == k {
                                break;
                            }
                        }
                        // Next k-subset of 0..m in colex order.
                        let mut t = 0;
                        while t < k {
                            let cap = if t + 1 < k { subset[t + 1] } else { m };
                            if subset[t] + 1 < cap {
                                break;
                            }
                            t += 1;
                        }
                        if t == k {
                            break;
                        }
                        subset[t] += 1;
                        for (r, slot) in subset.iter_mut().enumerate().take(t) {
                            *slot = r;
                        }
                    }
                }
                debug_assert!(out.windows(2).all(|w| w[0].0 < w[1].0));
                Ok(())
            }
        }
    }
}

fn check_unit(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !(0.0..1.0).contains(v)) {
        Some(index) => Err(Error::OutOfUnitCube {
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}

/// Weighted incidence of one point against the shifted dyadic system.
pub fn incidence(point: &[f64], h: u32, profile: &WeightProfile, shift: &[f64]) -> Result<SparseIncidence> {
    IncidenceBuilder::new(h, profile.clone(), shift.to_vec())?.incidence(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn boxes_of(inc: &SparseIncidence, space: &BoxSpace) -> Vec<DyadicBox> {
        inc.entries().iter().map(|e| space.box_at(e.0).unwrap()).collect()
    }

    #[test]
    fn box_weight_examples() {
        let p = WeightProfile::full(vec![0.5, 0.25]).unwrap();
        let b = DyadicBox::from_pairs(&[(0, 0), (1, 0)]).unwrap();
        assert_eq!(box_weight(&b, &p).unwrap(), 0.25);
        assert_eq!(box_weight(&DyadicBox::trivial(2), &p).unwrap(), 1.0);
        let unit = WeightProfile::unit(3);
        let b3 = DyadicBox::from_pairs(&[(2, 3), (1, 0), (3, 5)]).unwrap();
        assert_eq!(box_weight(&b3, &unit).unwrap(), 1.0);
        assert!(matches!(box_weight(&b3, &p), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn weights_validated() {
        assert!(WeightProfile::full(vec![0.5, 1.0]).is_err());
        assert!(WeightProfile::full(vec![1.0, -0.1]).is_err());
        assert!(WeightProfile::superposition(vec![1.0; 3], 4).is_err());
        assert!(WeightProfile::new(vec![1.0, 1.0], Mode::Truncation(1)).is_err());
        let t = WeightProfile::truncation(4, 2).unwrap();
        assert_eq!(t.gammas(), &[1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(enumerate_boxes(1, 1, Mode::Full).unwrap().len(), 3);
        assert_eq!(enumerate_boxes(2, 1, Mode::Superposition(1)).unwrap().len(), 5);
        assert_eq!(enumerate_boxes(2, 0, Mode::Full).unwrap().len(), 1);
        assert_eq!(enumerate_boxes(3, 2, Mode::Full).unwrap().len(), 7u64.pow(3));
        assert_eq!(enumerate_boxes(5, 2, Mode::Truncation(2)).unwrap().len(), 49);
        // 1 + 4*6 + 6*36 + 4*216
        assert_eq!(enumerate_boxes(4, 2, Mode::Superposition(3)).unwrap().len(), 1 + 24 + 216 + 864);
    }

    #[test]
    fn d1_h1_boxes_in_order() {
        let space = enumerate_boxes(1, 1, Mode::Full).unwrap();
        let bounds: Vec<(f64, f64)> = space.iter().map(|b| b.intervals()[0].bounds()).collect();
        assert_eq!(bounds, vec![(0.0, 1.0), (0.0, 0.5), (0.5, 1.0)]);
    }

    #[test]
    fn index_space_overflow_is_reported() {
        assert!(matches!(
            enumerate_boxes(100, 9, Mode::Full),
            Err(Error::IndexOverflow { d: 100, h: 9 })
        ));
        assert!(enumerate_boxes(100, 9, Mode::Truncation(2)).is_ok());
        assert!(enumerate_boxes(12, 9, Mode::Superposition(2)).is_ok());
    }

    #[test]
    fn index_round_trip_all_modes() {
        for mode in [Mode::Full, Mode::Truncation(2), Mode::Superposition(2), Mode::Superposition(3)] {
            let space = enumerate_boxes(3, 2, mode).unwrap();
            for i in 0..space.len() {
                let b = space.box_at(i).unwrap();
                assert_eq!(space.index_of(&b), Some(i), "{mode:?} {b:?}");
            }
            assert!(space.box_at(space.len()).is_none());
        }
    }

    #[test]
    fn locate_examples() {
        assert_eq!(locate(0.3, 2), 1);
        assert_eq!(locate(0.0, 5), 0);
        assert_eq!(locate(0.999, 1), 1);
    }

    #[test]
    fn incidence_d1_h2() {
        let p = WeightProfile::unit(1);
        let inc = incidence(&[0.3], 2, &p, &[0.0]).unwrap();
        let space = enumerate_boxes(1, 2, Mode::Full).unwrap();
        let bounds: Vec<(f64, f64)> = boxes_of(&inc, &space)
            .iter()
            .map(|b| b.intervals()[0].bounds())
            .collect();
        assert_eq!(bounds, vec![(0.0, 1.0), (0.0, 0.5), (0.25, 0.5)]);
        assert!(inc.entries().iter().all(|e| e.1 == 1.0));
        assert_eq!(inc.norm_sq(), 3.0);
    }

    #[test]
    fn incidence_d2_h1() {
        let p = WeightProfile::unit(2);
        let inc = incidence(&[0.3, 0.7], 1, &p, &[0.0, 0.0]).unwrap();
        let space = enumerate_boxes(2, 1, Mode::Full).unwrap();
        let got: Vec<DyadicBox> = boxes_of(&inc, &space);
        let want = [
            [(0, 0), (0, 0)],
            [(1, 0), (0, 0)],
            [(0, 0), (1, 1)],
            [(1, 0), (1, 1)],
        ];
        assert_eq!(got.len(), 4);
        for w in want {
            assert!(got.contains(&DyadicBox::from_pairs(&w).unwrap()));
        }
        assert_eq!(inc.norm_sq(), 4.0);
    }

    #[test]
    fn incidence_with_shift_folds() {
        let p = WeightProfile::unit(1);
        let inc = incidence(&[0.1], 1, &p, &[0.25]).unwrap();
        let space = enumerate_boxes(1, 1, Mode::Full).unwrap();
        let bounds: Vec<(f64, f64)> = boxes_of(&inc, &space)
            .iter()
            .map(|b| b.intervals()[0].bounds())
            .collect();
        assert_eq!(bounds, vec![(0.0, 1.0), (0.5, 1.0)]);
    }

    #[test]
    fn incidence_rejects_points_outside_cube() {
        let p = WeightProfile::unit(1);
        assert!(matches!(
            incidence(&[1.0], 2, &p, &[0.0]),
            Err(Error::OutOfUnitCube { .. })
        ));
    }

    #[test]
    fn weighted_entries_carry_box_weights() {
        let p = WeightProfile::full(vec![0.5, 0.25]).unwrap();
        let inc = incidence(&[0.3, 0.6], 2, &p, &[0.0, 0.0]).unwrap();
        let space = enumerate_boxes(2, 2, Mode::Full).unwrap();
        for (idx, w) in inc.entries() {
            let b = space.box_at(*idx).unwrap();
            assert_eq!(*w, box_weight(&b, &p).unwrap());
            assert!(b.contains(&[0.3, 0.6]));
        }
    }

    #[test]
    fn zero_weight_coordinates_stay_trivial() {
        let p = WeightProfile::full(vec![1.0, 0.0]).unwrap();
        let inc = incidence(&[0.3, 0.6], 3, &p, &[0.0, 0.0]).unwrap();
        assert_eq!(inc.nnz(), 4);
        assert!(inc.entries().iter().all(|e| e.1 > 0.0));
    }

    fn brute_incidence(point: &[f64], space: &BoxSpace, profile: &WeightProfile) -> Vec<(u64, f64)> {
        space
            .iter()
            .enumerate()
            .filter(|(_, b)| b.contains(point))
            .map(|(i, b)| (i as u64, box_weight(&b, profile).unwrap()))
            .filter(|e| e.1 > 0.0)
            .collect()
    }

    fn profile_strategy() -> impl Strategy<Value = (WeightProfile, u32)> {
        (1usize..=3, 0u32..=3, 0usize..3, proptest::collection::vec(0.05f64..2.0, 3)).prop_map(
            |(d, h, m, mut g)| {
                g.truncate(d);
                g.sort_by(|a, b| b.partial_cmp(a).unwrap());
                let mode = match m {
                    0 => Mode::Full,
                    1 => Mode::Superposition(1 + (h as usize) % d),
                    _ => Mode::Truncation(1 + (h as usize) % d),
                };
                let p = match mode {
                    Mode::Truncation(s) => WeightProfile::truncation(d, s).unwrap(),
                    _ => WeightProfile::new(g, mode).unwrap(),
                };
                (p, h)
            },
        )
    }

    proptest! {
        #[test]
        fn incidence_matches_brute_force(
            (profile, h) in profile_strategy(),
            pt in proptest::collection::vec(0.0f64..1.0, 3),
            sh in proptest::collection::vec(0.0f64..1.0, 3),
        ) {
            let d = profile.dim();
            let builder = IncidenceBuilder::new(h, profile.clone(), sh[..d].to_vec()).unwrap();
            let inc = builder.incidence(&pt[..d]).unwrap();
            let shifted = builder.shifted(&pt[..d]);
            let want = brute_incidence(&shifted, builder.space(), &profile);
            prop_assert_eq!(inc.entries(), &want[..]);
        }

        #[test]
        fn kernel_is_incidence_inner_product(
            (profile, h) in profile_strategy(),
            a in proptest::collection::vec(0u32..16, 3),
            b in proptest::collection::vec(0u32..16, 3),
            jitter in proptest::collection::vec(0.0f64..1.0 / 16.0, 6),
            sh in proptest::collection::vec(0.0f64..1.0, 3),
        ) {
            let d = profile.dim();
            let builder = IncidenceBuilder::new(h, profile, sh[..d].to_vec()).unwrap();
            let pa: Vec<f64> = (0..d).map(|j| a[j] as f64 / 16.0 + jitter[j]).collect();
            let pb: Vec<f64> = (0..d).map(|j| b[j] as f64 / 16.0 + jitter[3 + j]).collect();
            let va = builder.incidence(&pa).unwrap().into_vec();
            let vb = builder.incidence(&pb).unwrap().into_vec();
            let mut i = 0;
            let mut dot = 0.0;
            for &(k, x) in va.entries() {
                while i < vb.entries().len() && vb.entries()[i].0 < k {
                    i += 1;
                }
                if i < vb.entries().len() && vb.entries()[i].0 == k {
                    dot += x * vb.entries()[i].1;
                }
            }
            let (mut da, mut db) = (Vec::new(), Vec::new());
            builder.digits_into(&pa, &mut da).unwrap();
            builder.digits_into(&pb, &mut db).unwrap();
            let k = builder.kernel(&da, &db);
            prop_assert!((k - dot).abs() <= 1e-12 * dot.max(1.0), "{} vs {}", k, dot);
            prop_assert!((builder.kernel(&da, &da) - va.norm_sq()).abs() <= 1e-12 * va.norm_sq());
        }

        #[test]
        fn norm_identity(
            (profile, h) in profile_strategy(),
            pt in proptest::collection::vec(0.0f64..1.0, 3),
            sh in proptest::collection::vec(0.0f64..1.0, 3),
        ) {
            let d = profile.dim();
            let inc = incidence(&pt[..d], h, &profile, &sh[..d]).unwrap();
            let bound = profile.incidence_norm_sq(h);
            prop_assert!((inc.norm_sq() - bound).abs() <= 1e-12 * bound.max(1.0));
            if profile.mode() == Mode::Full {
                let prod: f64 = profile.gammas().iter().map(|g| 1.0 + h as f64 * g * g).product();
                prop_assert!((inc.norm_sq() - prod).abs() <= 1e-12 * prod);
            }
        }

        #[test]
        fn shift_equivalence(
            pt in proptest::collection::vec(0.0f64..1.0, 2),
            sh in proptest::collection::vec(0.0f64..1.0, 2),
            h in 0u32..5,
        ) {
            let profile = WeightProfile::full(vec![1.0, 0.5]).unwrap();
            let a = incidence(&pt, h, &profile, &sh).unwrap();
            let b = IncidenceBuilder::new(h, profile.clone(), sh.clone()).unwrap();
            let moved = b.shifted(&pt);
            let c = incidence(&moved, h, &profile, &[0.0, 0.0]).unwrap();
            prop_assert_eq!(a, c);
        }

        #[test]
        fn superposition_count(
            d in 1usize..=6,
            s_raw in 1usize..=6,
            h in 0u32..=4,
            pt in proptest::collection::vec(0.0f64..1.0, 6),
        ) {
            let s = 1 + (s_raw - 1) % d;
            let profile = WeightProfile::superposition(vec![1.0; d], s).unwrap();
            let inc = incidence(&pt[..d], h, &profile, &vec![0.0; d]).unwrap();
            let want: u64 = (0..=s).map(|k| binomial(d, k).unwrap() * (h as u64).pow(k as u32)).sum();
            prop_assert_eq!(inc.nnz() as u64, want);
        }

        #[test]
        fn truncation_equals_full_on_prefix(
            pt in proptest::collection::vec(0.0f64..1.0, 5),
            h in 0u32..=3,
        ) {
            let t = WeightProfile::truncation(5, 2).unwrap();
            let full = WeightProfile::unit(2);
            let a = incidence(&pt, h, &t, &[0.0; 5]).unwrap();
            let b = incidence(&pt[..2], h, &full, &[0.0; 2]).unwrap();
            prop_assert_eq!(a.entries(), b.entries());
        }
    }
}
