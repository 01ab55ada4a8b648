//! Sparse real vectors with sorted `u64` coordinates.

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVec {
    entries: Vec<(u64, f64)>,
}

impl SparseVec {
    /// Build from entries; sorts by coordinate and merges duplicates.
    pub fn from_entries(mut entries: Vec<(u64, f64)>) -> Self {
        entries.sort_unstable_by_key(|e| e.0);
        let mut merged: Vec<(u64, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        Self { entries: merged }
    }

    /// Wrap entries that are already strictly sorted and nonzero.
    pub(crate) fn from_sorted_unchecked(entries: Vec<(u64, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        Self { entries }
    }

    pub fn unit(index: u64) -> Self {
        Self {
            entries: vec![(index, 1.0)],
        }
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum()
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for e in &mut self.entries {
            e.1 *= factor;
        }
        self
    }

    /// `self - other`, dropping coordinates that cancel exactly.
    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((b[j].0, -b[j].1));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let v = a[i].1 - b[j].1;
                    if v != 0.0 {
                        out.push((a[i].0, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend(b[j..].iter().map(|&(k, v)| (k, -v)));
        SparseVec { entries: out }
    }

    pub fn max_index(&self) -> Option<u64> {
        self.entries.last().map(|e| e.0)
    }
}
