//! Axis-aligned test regions with per-side open/closed endpoints.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicBox;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    /// `(lo, hi]`
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: false,
            hi_closed: true,
        }
    }

    /// `[lo, hi)`
    pub fn right_open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: false,
        }
    }

    /// `[lo, hi]`
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Length of the intersection with `[0, 1]`.
    pub fn length(&self) -> f64 {
        (self.hi.min(1.0) - self.lo.max(0.0)).max(0.0)
    }

    fn length_exact(&self) -> BigRational {
        let lo = self.lo.max(0.0);
        let hi = self.hi.min(1.0);
        if hi <= lo {
            return BigRational::zero();
        }
        let r = |x: f64| BigRational::from_float(x).expect("finite endpoint");
        r(hi) - r(lo)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    sides: Vec<Interval>,
}

impl Region {
    pub fn new(sides: Vec<Interval>) -> Self {
        Self { sides }
    }

    /// The closed unit cube, which contains every point.
    pub fn unit(d: usize) -> Self {
        Self::new(vec![Interval::closed(0.0, 1.0); d])
    }

    /// The origin-anchored box `[0, a)`.
    pub fn anchored(corner: &[f64]) -> Self {
        Self::new(corner.iter().map(|&a| Interval::right_open(0.0, a)).collect())
    }

    /// The left-open box of a dyadic box, in the unshifted frame.
    pub fn from_dyadic(b: &DyadicBox) -> Self {
        Self::new(
            b.intervals()
                .iter()
                .map(|i| {
                    let (lo, hi) = i.bounds();
                    Interval::left_open(lo, hi)
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[Interval] {
        &self.sides
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        self.sides.iter().zip(x).all(|(s, &v)| s.contains(v))
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().map(Interval::length).product()
    }

    pub fn volume_exact(&self) -> BigRational {
        self.sides
            .iter()
            .fold(BigRational::one(), |acc, s| acc * s.length_exact())
    }
}

/// Exact rational `count / n`.
pub(crate) fn ratio(count: i64, n: usize) -> BigRational {
    BigRational::new(BigInt::from(count), BigInt::from(n as u64))
}
