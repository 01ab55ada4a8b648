//! Point sets in the unit cube and the `qmcpts v1` text format.
//!
//! ```text
//! # qmcpts v1 d=2 n=3 seed=7 label=iid
//! 1.2345678901234567e-1 9.8765432109876543e-1
//! ...
//! ```
//!
//! Coordinates are written with 17 significant digits, which round-trips
//! every `f64` exactly.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub label: String,
}

impl Provenance {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        Self {
            seed,
            label: label.into(),
        }
    }
}

/// Ordered points in `[0, 1)^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    d: usize,
    coords: Vec<f64>,
    provenance: Provenance,
}

impl PointSet {
    pub fn new(d: usize, coords: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if coords.len() % d != 0 {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: coords.len() % d,
            });
        }
        if let Some((index, &value)) = coords
            .iter()
            .enumerate()
            .find(|(_, &x)| !(0.0..1.0).contains(&x))
        {
            return Err(Error::OutOfUnitCube { index, value });
        }
        Ok(Self {
            d,
            coords,
            provenance,
        })
    }

    pub fn from_points<P: AsRef<[f64]>>(d: usize, points: &[P], provenance: Provenance) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * d);
        for p in points {
            let p = p.as_ref();
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::new(d, coords, provenance)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.provenance.label = label.into();
        self
    }

    /// Subset by indices, in the given order.
    pub fn select(&self, indices: &[usize], provenance: Provenance) -> PointSet {
        let mut coords = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointSet {
            d: self.d,
            coords,
            provenance,
        }
    }

    pub fn to_qmcpts(&self) -> String {
        let mut out = format!(
            "# qmcpts v1 d={} n={} seed={} label={}\n",
            self.d,
            self.len(),
            self.provenance.seed,
            self.provenance.label
        );
        for p in self.iter() {
            for (j, x) in p.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                write!(out, "{x:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn read_qmcpts<R: Read>(reader: R) -> Result<PointSet> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty file"))??;
        let (d, n, seed, label) = parse_header(&header)?;
        let mut coords = Vec::with_capacity(n * d);
        let mut rows = 0usize;
        for (k, line) in lines.enumerate() {
            let line = line?;
            let lineno = k + 2;
            if line.trim().is_empty() {
                continue;
            }
            let before = coords.len();
            for field in line.split_whitespace() {
                let x: f64 = field
                    .parse()
                    .map_err(|_| parse_err(lineno, &format!("bad coordinate `{field}`")))?;
                coords.push(x);
            }
            if coords.len() - before != d {
                return Err(parse_err(lineno, &format!("expected {d} coordinates")));
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: rows,
            });
        }
        PointSet::new(d, coords, Provenance::new(seed, label))
    }
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn parse_header(header: &str) -> Result<(usize, usize, u64, String)> {
    let rest = header
        .strip_prefix("# qmcpts v1 ")
        .ok_or_else(|| parse_err(1, "missing `# qmcpts v1` header"))?;
    let (fields, label) = match rest.find("label=") {
        Some(pos) => (&rest[..pos], rest[pos + 6..].to_string()),
        None => return Err(parse_err(1, "missing label=")),
    };
    let (mut d, mut n, mut seed) = (None, None, None);
    for tok in fields.split_whitespace() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(1, &format!("bad header field `{tok}`")))?;
        let bad = || parse_err(1, &format!("bad value in `{tok}`"));
        match key {
            "d" => d = Some(value.parse().map_err(|_| bad())?),
            "n" => n = Some(value.parse().map_err(|_| bad())?),
            "seed" => seed = Some(value.parse().map_err(|_| bad())?),
            _ => return Err(parse_err(1, &format!("unknown header field `{key}`"))),
        }
    }
    match (d, n, seed) {
        (Some(d), Some(n), Some(seed)) => Ok((d, n, seed, label)),
        _ => Err(parse_err(1, "header needs d=, n=, seed=")),
    }
}
