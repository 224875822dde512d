//! The finite state space `M = {1..m}` and the lexicographic codec for
//! tuples in `M^n`.
//!
//! States are 1-based at every interface and 0-based inside the codec.
//! The index of a tuple `(x_1, ..., x_n)` is `sum_j (x_j - 1) * m^(n-j)`,
//! a bijection onto `[0, m^n)`; matrices, measures, and map tables all
//! share this ordering.

use crate::error::{Error, Result};

/// The finite space `{1, ..., m}`, `m >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteSpace {
    m: usize,
}

impl FiniteSpace {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("state count m={m} must be at least 2")));
        }
        Ok(FiniteSpace { m })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// `m^n`, guarded against overflow.
    pub fn tuple_count(&self, n: usize) -> Result<usize> {
        checked_pow(self.m, n)
            .ok_or_else(|| Error::Resource(format!("m^n = {}^{n} overflows", self.m)))
    }

    /// Lexicographic index of `t` in `[0, m^n)`.
    pub fn encode(&self, t: &PointTuple) -> Result<usize> {
        if t.m() != self.m {
            return Err(Error::Domain(format!(
                "tuple over m={} cannot be encoded in space m={}",
                t.m(),
                self.m
            )));
        }
        Ok(t.index())
    }

    /// Inverse of [`encode`](Self::encode) at level `n`.
    pub fn decode(&self, n: usize, idx: usize) -> Result<PointTuple> {
        if n == 0 {
            return Err(Error::Domain("tuple level n must be at least 1".into()));
        }
        let count = self.tuple_count(n)?;
        if idx >= count {
            return Err(Error::Domain(format!(
                "index {idx} out of range for m={}, n={n} (< {count})",
                self.m
            )));
        }
        let mut entries = vec![0usize; n];
        let mut rest = idx;
        for j in (0..n).rev() {
            entries[j] = rest % self.m + 1;
            rest /= self.m;
        }
        Ok(PointTuple { m: self.m, entries })
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc = 1usize;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// A point of `M^n`, entries 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointTuple {
    m: usize,
    entries: Vec<usize>,
}

impl PointTuple {
    pub fn new(space: FiniteSpace, entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("tuple level n must be at least 1".into()));
        }
        for (pos, &x) in entries.iter().enumerate() {
            if x < 1 || x > space.size() {
                return Err(Error::Domain(format!(
                    "entry {x} at position {} is outside 1..={}",
                    pos + 1,
                    space.size()
                )));
            }
        }
        Ok(PointTuple { m: space.size(), entries })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The level `n`.
    pub fn level(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// Lexicographic index; inverse of [`FiniteSpace::decode`].
    pub fn index(&self) -> usize {
        self.entries.iter().fold(0, |acc, &x| acc * self.m + (x - 1))
    }

    /// True when no two entries coincide (the tuple avoids every
    /// sub-diagonal of `M^n`).
    pub fn has_distinct_entries(&self) -> bool {
        let mut seen = vec![false; self.m];
        for &x in &self.entries {
            if seen[x - 1] {
                return false;
            }
            seen[x - 1] = true;
        }
        true
    }

    /// Removes the coordinate at 1-based position `r`.
    pub fn delete_coord(&self, r: usize) -> Result<PointTuple> {
        if self.level() < 2 {
            return Err(Error::Domain("cannot project a level-1 tuple".into()));
        }
        if r < 1 || r > self.level() {
            return Err(Error::Domain(format!(
                "coordinate r={r} out of range 1..={}",
                self.level()
            )));
        }
        let mut entries = self.entries.clone();
        entries.remove(r - 1);
        Ok(PointTuple { m: self.m, entries })
    }
}

/// Deletes the digit for coordinate `r` (1-based) from a level-`n` index.
///
/// Index-level counterpart of [`PointTuple::delete_coord`]; `dim_low`
/// must equal `m^(n-r)` (the place value of coordinate `r`).
pub(crate) fn delete_coord_index(idx: usize, m: usize, dim_low: usize) -> usize {
    let high = idx / (dim_low * m);
    let low = idx % dim_low;
    high * dim_low + low
}

/// Inserts digit `value0` (0-based) as coordinate `r` into a level-`(n-1)`
/// index; `dim_low = m^(n-r)` as in [`delete_coord_index`].
pub(crate) fn insert_coord_index(idx: usize, m: usize, dim_low: usize, value0: usize) -> usize {
    let high = idx / dim_low;
    let low = idx % dim_low;
    (high * m + value0) * dim_low + low
}
