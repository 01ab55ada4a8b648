//! Sobol' sequence with Joe–Kuo direction numbers.
//!
//! Points are produced in Gray-code order with 32-bit direction vectors, so
//! any prefix of length `2^m` is the same point set as the natural-order
//! prefix. Dimension 1 is the van der Corput sequence; dimensions 2 and up
//! come from the embedded `new-joe-kuo-6` table.
//!
//! Randomizations:
//! * [`Scramble::DigitalShift`] XORs a random 32-bit word into each
//!   coordinate.
//! * [`Scramble::Owen`] applies nested uniform scrambling to the leading 32
//!   digits: the flip applied to digit `b` is a hash of the seed, the
//!   dimension, `b`, and the unscrambled digits above `b`. The digits below
//!   32 are filled uniformly from a hash of the full 32-bit prefix, which is
//!   what an infinitely deep nested scramble would produce.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{derive_seed, splitmix64, Rng};
use crate::error::{Error, Result};
use crate::pointset::{PointSet, Provenance};

/// Raw direction-number table, `d s a m_1 .. m_s` per row.
pub const DIRECTION_TABLE: &str = include_str!("../../data/new-joe-kuo-6.1024.txt");

const BITS: usize = 32;
const INV_2_32: f64 = 1.0 / 4_294_967_296.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scramble {
    None,
    DigitalShift(u64),
    Owen(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Primitive {
    degree: usize,
    coeffs: u32,
    m: Vec<u32>,
}

fn parse_table(text: &str) -> Result<Vec<Primitive>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || lineno == 0 && line.starts_with('d') {
            continue;
        }
        let fields: Vec<u32> = line
            .split_whitespace()
            .map(|f| f.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
        let bad = |message: &str| Error::Parse {
            line: lineno + 1,
            message: message.to_string(),
        };
        if fields.len() < 3 {
            return Err(bad("expected `d s a m_1..m_s`"));
        }
        let degree = fields[1] as usize;
        if fields.len() != 3 + degree || degree == 0 || degree >= BITS {
            return Err(bad("row length does not match degree"));
        }
        if fields[0] as usize != rows.len() + 2 {
            return Err(bad("rows must list dimensions 2, 3, ... in order"));
        }
        let m = fields[3..].to_vec();
        for (k, &mk) in m.iter().enumerate() {
            if mk % 2 == 0 || mk >= 1 << (k + 1) {
                return Err(bad("m_k must be odd and below 2^k"));
            }
        }
        rows.push(Primitive {
            degree,
            coeffs: fields[2],
            m,
        });
    }
    Ok(rows)
}

fn table() -> &'static [Primitive] {
    static TABLE: OnceLock<Vec<Primitive>> = OnceLock::new();
    TABLE.get_or_init(|| parse_table(DIRECTION_TABLE).expect("embedded direction table is valid"))
}

/// Largest dimension supported by the shipped table.
pub fn max_dimension() -> usize {
    table().len() + 1
}

fn direction_vectors(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let p = &table()[dim - 1];
    let s = p.degree;
    for k in 0..s {
        v[k] = p.m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (p.coeffs >> (s - 1 - j)) & 1 == 1 {
                x ^= v[k - j];
            }
        }
        v[k] = x;
    }
    v
}

/// Generator for the raw 32-bit integer Sobol' digits.
#[derive(Debug, Clone)]
pub struct SobolSequence {
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
}

impl SobolSequence {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 || d > max_dimension() {
            return Err(Error::SobolDimension {
                requested: d,
                available: max_dimension(),
            });
        }
        Ok(Self {
            directions: (0..d).map(direction_vectors).collect(),
            state: vec![0; d],
            index: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    /// The next point as 32-bit integers (coordinate = value / 2^32).
    pub fn next_raw(&mut self) -> Option<&[u32]> {
        if self.index > u32::MAX as u64 {
            return None;
        }
        if self.index > 0 {
            let c = (self.index.trailing_zeros()) as usize;
            // Gray code: point i differs from point i-1 in direction c.
            let c = c.min(BITS - 1);
            for (x, v) in self.state.iter_mut().zip(&self.directions) {
                *x ^= v[c];
            }
        }
        self.index += 1;
        Some(&self.state)
    }
}

#[inline]
fn hash3(seed: u64, a: u64, b: u64) -> u64 {
    splitmix64(seed ^ splitmix64(a ^ splitmix64(b)))
}

/// Nested uniform scramble of a 32-bit digit word, returned as a value in
/// [0, 1) with 53 significant bits.
pub fn owen_scramble(x: u32, dim_seed: u64) -> f64 {
    let mut out = 0u32;
    for b in 0..BITS {
        // Unscrambled digits strictly above digit b, tagged by b.
        let prefix = if b == 0 { 0 } else { (x >> (BITS - b)) as u64 };
        let flip = (hash3(dim_seed, b as u64, prefix) >> 63) as u32;
        let bit = (x >> (BITS - 1 - b)) & 1;
        out |= (bit ^ flip) << (BITS - 1 - b);
    }
    let tail = hash3(dim_seed, BITS as u64, x as u64) >> 43; // 21 bits
    (out as f64 + tail as f64 / (1u64 << 21) as f64) * INV_2_32
}

/// The first `n` points of the (optionally randomized) Sobol' sequence.
pub fn sobol(n: usize, d: usize, scramble: Scramble) -> Result<PointSet> {
    if n as u64 > 1u64 << 32 {
        return Err(Error::SobolLength(n as u64));
    }
    let mut seq = SobolSequence::new(d)?;
    let mut raw = Vec::with_capacity(n * d);
    for _ in 0..n {
        raw.extend_from_slice(seq.next_raw().expect("length checked above"));
    }
    let coords: Vec<f64> = match scramble {
        Scramble::None => raw.iter().map(|&x| x as f64 * INV_2_32).collect(),
        Scramble::DigitalShift(seed) => {
            let mut rng = Rng::new(seed);
            let shifts: Vec<u32> = (0..d).map(|_| rng.next_u32()).collect();
            raw.chunks_exact(d.max(1))
                .flat_map(|p| {
                    p.iter()
                        .zip(&shifts)
                        .map(|(&x, &s)| (x ^ s) as f64 * INV_2_32)
                })
                .collect()
        }
        Scramble::Owen(seed) => {
            let dim_seeds: Vec<u64> = (0..d).map(|j| derive_seed(seed, &[j as u64])).collect();
            raw.par_chunks(d.max(1) * 1024)
                .flat_map_iter(|block| {
                    let dim_seeds = &dim_seeds;
                    block
                        .iter()
                        .enumerate()
                        .map(move |(k, &x)| owen_scramble(x, dim_seeds[k % d]))
                })
                .collect()
        }
    };
    let (seed, label) = match scramble {
        Scramble::None => (0, "sobol"),
        Scramble::DigitalShift(s) => (s, "sobol-shift"),
        Scramble::Owen(s) => (s, "sobol-owen"),
    };
    PointSet::new(d, coords, Provenance::new(seed, label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_dimension_gray_code_order() {
        let p = sobol(4, 1, Scramble::None).unwrap();
        let xs: Vec<f64> = p.iter().map(|x| x[0]).collect();
        assert_eq!(xs, vec![0.0, 0.5, 0.75, 0.25]);
    }

    #[test]
    fn second_dimension_first_points() {
        // dimension 2 has polynomial x + 1 and m_1 = 1.
        let p = sobol(4, 2, Scramble::None).unwrap();
        let ys: Vec<f64> = p.iter().map(|x| x[1]).collect();
        assert_eq!(ys, vec![0.0, 0.5, 0.25, 0.75]);
    }

    #[test]
    fn known_direction_rows() {
        let t = table();
        assert_eq!(t[0], Primitive { degree: 1, coeffs: 0, m: vec![1] });
        assert_eq!(t[5], Primitive { degree: 4, coeffs: 4, m: vec![1, 3, 5, 13] });
        assert!(max_dimension() >= 64);
    }

    #[test]
    fn rejects_dimension_beyond_table() {
        assert!(matches!(
            sobol(4, max_dimension() + 1, Scramble::None),
            Err(Error::SobolDimension { .. })
        ));
    }

    #[test]
    fn malformed_rows_rejected() {
        assert!(parse_table("2 1 0 2\n").is_err());
        assert!(parse_table("2 2 1 1\n").is_err());
        assert!(parse_table("3 1 0 1\n").is_err());
    }

    #[test]
    fn one_dimensional_stratification() {
        let n = 256;
        let p = sobol(n, 8, Scramble::None).unwrap();
        for j in 0..8 {
            for m in 0..=8 {
                let mut counts = vec![0usize; 1 << m];
                for x in p.iter() {
                    counts[(x[j] * (1u64 << m) as f64) as usize] += 1;
                }
                assert!(counts.iter().all(|&c| c == n >> m), "dim {j} level {m}");
            }
        }
    }

    #[test]
    fn digital_shift_keeps_stratification() {
        let n = 128;
        let p = sobol(n, 3, Scramble::DigitalShift(9)).unwrap();
        for j in 0..3 {
            for m in 0..=7 {
                let mut counts = vec![0usize; 1 << m];
                for x in p.iter() {
                    counts[(x[j] * (1u64 << m) as f64) as usize] += 1;
                }
                assert!(counts.iter().all(|&c| c == n >> m));
            }
        }
    }

    #[test]
    fn owen_keeps_stratification_and_is_seeded() {
        let n = 256;
        let a = sobol(n, 4, Scramble::Owen(5)).unwrap();
        let b = sobol(n, 4, Scramble::Owen(5)).unwrap();
        let c = sobol(n, 4, Scramble::Owen(6)).unwrap();
        assert_eq!(a.coords(), b.coords());
        assert_ne!(a.coords(), c.coords());
        for j in 0..4 {
            for m in 0..=8 {
                let mut counts = vec![0usize; 1 << m];
                for x in a.iter() {
                    counts[(x[j] * (1u64 << m) as f64) as usize] += 1;
                }
                assert!(counts.iter().all(|&c| c == n >> m));
            }
        }
        assert!(a.iter().flatten().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn direction_table_checksum() {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(DIRECTION_TABLE.as_bytes());
        assert_eq!(
            hex::encode(digest),
            "1a6218e27b049859bb2a2b8d62723b1045bec6a615b69c69c244215f8140d46c"
        );
    }
}
