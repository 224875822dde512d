//! Self-maps of `M = {1..m}` as explicit image tables.
//!
//! A table encodes `f` by the image tuple `(f(1), ..., f(m))`; its
//! canonical key is the lexicographic index of that tuple (the same codec
//! as [`PointTuple`](crate::space::PointTuple) with `n = m`).

use crate::error::{Error, Result};
use crate::space::{FiniteSpace, PointTuple};

/// The map `j -> images[j-1]` on `{1..m}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MapTable {
    m: usize,
    images: Vec<usize>,
}

impl MapTable {
    pub fn new(space: FiniteSpace, images: Vec<usize>) -> Result<Self> {
        if images.len() != space.size() {
            return Err(Error::Domain(format!(
                "map over m={} needs {} images, got {}",
                space.size(),
                space.size(),
                images.len()
            )));
        }
        for (pos, &x) in images.iter().enumerate() {
            if x < 1 || x > space.size() {
                return Err(Error::Domain(format!(
                    "image {x} of state {} is outside 1..={}",
                    pos + 1,
                    space.size()
                )));
            }
        }
        Ok(MapTable { m: space.size(), images })
    }

    pub fn identity(m: usize) -> Result<Self> {
        let space = FiniteSpace::new(m)?;
        MapTable::new(space, (1..=m).collect())
    }

    pub fn constant(m: usize, value: usize) -> Result<Self> {
        let space = FiniteSpace::new(m)?;
        MapTable::new(space, vec![value; m])
    }

    /// Map with the given canonical index (lexicographic index of its
    /// image tuple in `[0, m^m)`).
    pub fn from_index(m: usize, idx: usize) -> Result<Self> {
        let space = FiniteSpace::new(m)?;
        let t = space.decode(m, idx)?;
        MapTable::new(space, t.entries().to_vec())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The image tuple `(f(1), ..., f(m))`.
    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `f(x)` for a 1-based state `x`.
    pub fn image_of(&self, x: usize) -> usize {
        self.images[x - 1]
    }

    /// Canonical lexicographic key.
    pub fn index(&self) -> usize {
        self.images.iter().fold(0, |acc, &x| acc * self.m + (x - 1))
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.m];
        for &x in &self.images {
            if seen[x - 1] {
                return false;
            }
            seen[x - 1] = true;
        }
        true
    }

    /// Inverse map, when `self` is a bijection.
    pub fn inverse(&self) -> Option<MapTable> {
        if !self.is_bijection() {
            return None;
        }
        let mut images = vec![0usize; self.m];
        for (j, &fj) in self.images.iter().enumerate() {
            images[fj - 1] = j + 1;
        }
        Some(MapTable { m: self.m, images })
    }

    /// Diagonal action on a tuple: `(x_1, ..., x_n) -> (f(x_1), ..., f(x_n))`.
    pub fn apply(&self, t: &PointTuple) -> Result<PointTuple> {
        if t.m() != self.m {
            return Err(Error::Domain(format!(
                "map over m={} applied to tuple over m={}",
                self.m,
                t.m()
            )));
        }
        let space = FiniteSpace::new(self.m)?;
        let entries = t.entries().iter().map(|&x| self.image_of(x)).collect();
        PointTuple::new(space, entries)
    }

    /// Diagonal action on a lexicographic level-`n` tuple index.
    pub fn apply_index(&self, n: usize, idx: usize) -> usize {
        let mut digits = vec![0usize; n];
        let mut rest = idx;
        for j in (0..n).rev() {
            digits[j] = rest % self.m;
            rest /= self.m;
        }
        digits
            .iter()
            .fold(0, |acc, &d| acc * self.m + (self.image_of(d + 1) - 1))
    }

    /// Composition `self . g`, i.e. `j -> self(g(j))`.
    pub fn compose(&self, g: &MapTable) -> Result<MapTable> {
        if g.m != self.m {
            return Err(Error::Domain(format!(
                "cannot compose maps over m={} and m={}",
                self.m, g.m
            )));
        }
        let images = g.images.iter().map(|&x| self.image_of(x)).collect();
        Ok(MapTable { m: self.m, images })
    }
}

/// All `m^m` self-maps in canonical (lexicographic) order.
pub fn all_maps(m: usize) -> Result<Vec<MapTable>> {
    let space = FiniteSpace::new(m)?;
    let count = space.tuple_count(m)?;
    (0..count).map(|idx| MapTable::from_index(m, idx)).collect()
}

/// All `m!` bijections in canonical (lexicographic) order.
pub fn all_permutations(m: usize) -> Result<Vec<MapTable>> {
    Ok(all_maps(m)?.into_iter().filter(|f| f.is_bijection()).collect())
}
