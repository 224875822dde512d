//! n-point transition matrices and their coordinate projections.
//!
//! `lift` builds the `m^n x m^n` right-stochastic matrix of the n-point
//! motion: one arc per atom of the generating distribution, so rows carry
//! at most `|supp nu|` nonzeros. Projections are applied as index maps
//! rather than materialized 0/1 matrices; `dense_p`/`dense_q` exist for
//! inspection and tests.

use std::collections::BTreeMap;

use crate::dist::MapDistribution;
use crate::error::{Error, Result};
use crate::ratio::{format_ratio, parse_ratio, Ratio};
use crate::space::{delete_coord_index, insert_coord_index, FiniteSpace, PointTuple};

/// Hard cap on `m^n` for full matrix construction.
pub const SIZE_GUARD: usize = 10_000_000;

/// Sparse right-stochastic matrix of an n-point motion, exact entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    m: usize,
    n: usize,
    rows: Vec<Vec<(usize, Ratio)>>,
}

impl TransitionMatrix {
    /// Transition matrix of the n-point motion of `nu`:
    /// `A[x][y] = sum { nu(f) : f(x) = y }` entry-wise over tuples.
    pub fn lift(nu: &MapDistribution, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("level n must be at least 1".into()));
        }
        let m = nu.m();
        let space = FiniteSpace::new(m)?;
        let dim = space.tuple_count(n)?;
        if dim > SIZE_GUARD {
            return Err(Error::Resource(format!(
                "m^n = {m}^{n} = {dim} exceeds the size guard {SIZE_GUARD}; \
                 compute rows on demand with transition_row instead"
            )));
        }
        // Image of a whole tuple index under f, computed digit by digit.
        let mut rows = Vec::with_capacity(dim);
        let mut entries = vec![0usize; n];
        for x in 0..dim {
            let mut rest = x;
            for j in (0..n).rev() {
                entries[j] = rest % m; // 0-based state
                rest /= m;
            }
            let mut row: BTreeMap<usize, Ratio> = BTreeMap::new();
            for (f, w) in nu.atoms() {
                let mut y = 0usize;
                for &e in &entries {
                    y = y * m + (f.image_of(e + 1) - 1);
                }
                *row.entry(y).or_insert_with(crate::ratio::zero) += w;
            }
            rows.push(row.into_iter().collect());
        }
        Ok(TransitionMatrix { m, n, rows })
    }

    /// Identity matrix (the deterministic identity flow).
    pub fn identity(m: usize, n: usize) -> Result<Self> {
        let space = FiniteSpace::new(m)?;
        let dim = space.tuple_count(n)?;
        if dim > SIZE_GUARD {
            return Err(Error::Resource(format!("m^n = {dim} exceeds the size guard")));
        }
        let rows = (0..dim).map(|x| vec![(x, crate::ratio::one())]).collect();
        Ok(TransitionMatrix { m, n, rows })
    }

    /// Builds a matrix from explicit sparse rows (for hand-supplied data).
    pub fn from_rows(m: usize, n: usize, raw: Vec<Vec<(usize, Ratio)>>) -> Result<Self> {
        let space = FiniteSpace::new(m)?;
        let dim = space.tuple_count(n)?;
        if raw.len() != dim {
            return Err(Error::Input(format!("expected {dim} rows, got {}", raw.len())));
        }
        let mut rows = Vec::with_capacity(dim);
        for (i, entries) in raw.into_iter().enumerate() {
            let mut row: BTreeMap<usize, Ratio> = BTreeMap::new();
            for (col, val) in entries {
                if col >= dim {
                    return Err(Error::Input(format!("column {col} out of range in row {i}")));
                }
                use num_traits::Signed;
                if val.is_negative() {
                    return Err(Error::Input(format!(
                        "negative entry {} at ({i}, {col})",
                        format_ratio(&val)
                    )));
                }
                *row.entry(col).or_insert_with(crate::ratio::zero) += val;
            }
            let row: Vec<(usize, Ratio)> = row
                .into_iter()
                .filter(|(_, v)| !num_traits::Zero::is_zero(v))
                .collect();
            let total: Ratio = row.iter().map(|(_, v)| v.clone()).sum();
            if !num_traits::One::is_one(&total) {
                return Err(Error::Input(format!(
                    "row {i} sums to {}, not 1",
                    format_ratio(&total)
                )));
            }
            rows.push(row);
        }
        Ok(TransitionMatrix { m, n, rows })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn level(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Sparse row, sorted by column; zero entries are never stored.
    pub fn row(&self, x: usize) -> &[(usize, Ratio)] {
        &self.rows[x]
    }

    pub fn get(&self, x: usize, y: usize) -> Ratio {
        match self.rows[x].binary_search_by_key(&y, |(c, _)| *c) {
            Ok(pos) => self.rows[x][pos].1.clone(),
            Err(_) => crate::ratio::zero(),
        }
    }

    pub fn is_right_stochastic(&self) -> bool {
        use num_traits::One;
        self.rows.iter().all(|row| {
            let total: Ratio = row.iter().map(|(_, v)| v.clone()).sum();
            total.is_one()
        })
    }

    /// Column sums (used by the bistochasticity check at level 1).
    pub fn column_sums(&self) -> Vec<Ratio> {
        let mut sums = vec![crate::ratio::zero(); self.dim()];
        for row in &self.rows {
            for (col, val) in row {
                sums[*col] += val;
            }
        }
        sums
    }

    /// First differing cell between two same-shape matrices.
    pub fn first_difference(&self, other: &TransitionMatrix) -> Option<(usize, usize)> {
        debug_assert_eq!(self.dim(), other.dim());
        for x in 0..self.dim() {
            let a = &self.rows[x];
            let b = &other.rows[x];
            // Rows are canonical (sorted, no zeros), so walk them in lockstep.
            let mut ia = 0;
            let mut ib = 0;
            while ia < a.len() || ib < b.len() {
                match (a.get(ia), b.get(ib)) {
                    (Some((ca, va)), Some((cb, vb))) => {
                        if ca == cb {
                            if va != vb {
                                return Some((x, *ca));
                            }
                            ia += 1;
                            ib += 1;
                        } else if ca < cb {
                            return Some((x, *ca));
                        } else {
                            return Some((x, *cb));
                        }
                    }
                    (Some((ca, _)), None) => return Some((x, *ca)),
                    (None, Some((cb, _))) => return Some((x, *cb)),
                    (None, None) => unreachable!(),
                }
            }
        }
        None
    }

    /// Sparse text export: header plus `row<TAB>col<TAB>p/q` lines sorted
    /// by (row, col).
    pub fn to_sparse_text(&self) -> String {
        let mut out = format!("# m={} n={} format=npoint-sparse-v1\n", self.m, self.n);
        for (x, row) in self.rows.iter().enumerate() {
            for (col, val) in row {
                out.push_str(&format!("{x}\t{col}\t{}\n", format_ratio(val)));
            }
        }
        out
    }

    pub fn from_sparse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Input("empty sparse matrix file".into()))?;
        let (m, n) = parse_sparse_header(header)?;
        let space = FiniteSpace::new(m)?;
        let dim = space.tuple_count(n)?;
        let mut raw: Vec<Vec<(usize, Ratio)>> = vec![Vec::new(); dim];
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let parse_idx = |p: Option<&str>| -> Result<usize> {
                p.and_then(|s| s.trim().parse().ok()).ok_or_else(|| {
                    Error::Input(format!("bad sparse entry on line {}", lineno + 2))
                })
            };
            let row = parse_idx(parts.next())?;
            let col = parse_idx(parts.next())?;
            let val = parse_ratio(parts.next().ok_or_else(|| {
                Error::Input(format!("missing value on line {}", lineno + 2))
            })?)?;
            if row >= dim {
                return Err(Error::Input(format!("row {row} out of range on line {}", lineno + 2)));
            }
            raw[row].push((col, val));
        }
        TransitionMatrix::from_rows(m, n, raw)
    }
}

/// One row of `A^(n)` computed on demand: the lazy alternative when
/// `m^n` is too large to materialize. Agrees cell-exactly with
/// [`TransitionMatrix::lift`] where both are defined.
pub fn transition_row(
    nu: &MapDistribution,
    n: usize,
    source: usize,
) -> Result<Vec<(usize, Ratio)>> {
    if n == 0 {
        return Err(Error::Domain("level n must be at least 1".into()));
    }
    let m = nu.m();
    let mut count: u128 = 1;
    for _ in 0..n {
        count = count.checked_mul(m as u128).ok_or_else(|| {
            Error::Resource(format!("m^n = {m}^{n} overflows the index space"))
        })?;
    }
    if source as u128 >= count {
        return Err(Error::Domain(format!(
            "source index {source} out of range for m={m}, n={n}"
        )));
    }
    let mut row: BTreeMap<usize, Ratio> = BTreeMap::new();
    for (f, w) in nu.atoms() {
        *row.entry(f.apply_index(n, source)).or_insert_with(crate::ratio::zero) += w;
    }
    Ok(row.into_iter().collect())
}

fn parse_sparse_header(header: &str) -> Result<(usize, usize)> {
    let err = || Error::Input(format!("bad sparse matrix header {header:?}"));
    if !header.starts_with('#') {
        return Err(err());
    }
    let mut m = None;
    let mut n = None;
    let mut format_ok = false;
    for field in header.trim_start_matches('#').split_whitespace() {
        match field.split_once('=') {
            Some(("m", v)) => m = v.parse().ok(),
            Some(("n", v)) => n = v.parse().ok(),
            Some(("format", v)) => format_ok = v == "npoint-sparse-v1",
            _ => {}
        }
    }
    if !format_ok {
        return Err(err());
    }
    match (m, n) {
        (Some(m), Some(n)) if n >= 1 => Ok((m, n)),
        _ => Err(err()),
    }
}

/// The pair `(P, Q)` realizing deletion of coordinate `r` with source
/// value fixed to `i_r`: `P A^(n) Q = A^(n-1)`.
///
/// `P` is `m^(n-1) x m^n` with a single 1 per row; `Q` is `m^n x m^(n-1)`
/// with a single 1 per row. Both are stored as the column index of that 1.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    m: usize,
    n: usize,
    r: usize,
    i_r: usize,
    dim_low: usize, // m^(n-r), place value of coordinate r
}

impl ProjectionPair {
    pub fn new(m: usize, n: usize, r: usize, i_r: usize) -> Result<Self> {
        let space = FiniteSpace::new(m)?;
        if n < 2 {
            return Err(Error::Domain("projections need level n >= 2".into()));
        }
        if r < 1 || r > n {
            return Err(Error::Domain(format!("coordinate r={r} out of range 1..={n}")));
        }
        if i_r < 1 || i_r > m {
            return Err(Error::Domain(format!("fixed value i_r={i_r} out of range 1..={m}")));
        }
        space.tuple_count(n)?;
        let dim_low = space.tuple_count(n - r)?;
        Ok(ProjectionPair { m, n, r, i_r, dim_low })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn fixed_value(&self) -> usize {
        self.i_r
    }

    /// Column of the unique 1 in row `row` of `P`: the level-n index with
    /// `i_r` inserted as coordinate `r` of the level-(n-1) tuple `row`.
    pub fn p_col(&self, row: usize) -> usize {
        insert_coord_index(row, self.m, self.dim_low, self.i_r - 1)
    }

    /// Column of the unique 1 in row `row` of `Q`: the level-(n-1) index
    /// with coordinate `r` of the level-n tuple `row` deleted.
    pub fn q_col(&self, row: usize) -> usize {
        delete_coord_index(row, self.m, self.dim_low)
    }

    /// Materializes `P` (for inspection; the product path never does).
    pub fn dense_p(&self) -> Vec<Vec<u8>> {
        let space = FiniteSpace::new(self.m).unwrap();
        let rows = space.tuple_count(self.n - 1).unwrap();
        let cols = space.tuple_count(self.n).unwrap();
        let mut p = vec![vec![0u8; cols]; rows];
        for (row, line) in p.iter_mut().enumerate() {
            line[self.p_col(row)] = 1;
        }
        p
    }

    /// Materializes `Q`.
    pub fn dense_q(&self) -> Vec<Vec<u8>> {
        let space = FiniteSpace::new(self.m).unwrap();
        let rows = space.tuple_count(self.n).unwrap();
        let cols = space.tuple_count(self.n - 1).unwrap();
        let mut q = vec![vec![0u8; cols]; rows];
        for (row, line) in q.iter_mut().enumerate() {
            line[self.q_col(row)] = 1;
        }
        q
    }
}

/// `P A Q`: the level-(n-1) matrix obtained by fixing source coordinate
/// `r` to `i_r` and summing targets over coordinate `r`.
pub fn project_matrix(a: &TransitionMatrix, pair: &ProjectionPair) -> Result<TransitionMatrix> {
    if a.m() != pair.m || a.level() != pair.n {
        return Err(Error::Domain(format!(
            "projection pair for (m={}, n={}) applied to matrix (m={}, n={})",
            pair.m,
            pair.n,
            a.m(),
            a.level()
        )));
    }
    let space = FiniteSpace::new(a.m())?;
    let dim_out = space.tuple_count(a.level() - 1)?;
    let mut rows = Vec::with_capacity(dim_out);
    for u in 0..dim_out {
        let x = pair.p_col(u);
        let mut row: BTreeMap<usize, Ratio> = BTreeMap::new();
        for (y, val) in a.row(x) {
            *row.entry(pair.q_col(*y)).or_insert_with(crate::ratio::zero) += val;
        }
        rows.push(row.into_iter().collect());
    }
    Ok(TransitionMatrix { m: a.m(), n: a.level() - 1, rows })
}

/// One mismatching cell of a consistency check.
#[derive(Debug, Clone)]
pub struct ConsistencyMismatch {
    pub r: usize,
    pub i_r: usize,
    pub row: usize,
    pub col: usize,
    pub got: Ratio,
    pub want: Ratio,
}

/// Outcome of checking `P A^(n) Q = A^(n-1)` over every `(r, i_r)`.
#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub m: usize,
    pub n: usize,
    pub pairs_checked: usize,
    pub mismatches: Vec<ConsistencyMismatch>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Verifies that every projection of `a` equals `expected` (one mismatch
/// cell recorded per failing `(r, i_r)` pair).
pub fn consistency_against(
    a: &TransitionMatrix,
    expected: &TransitionMatrix,
) -> Result<ConsistencyReport> {
    if a.level() < 2 {
        return Err(Error::Domain("consistency check needs level n >= 2".into()));
    }
    if expected.m() != a.m() || expected.level() != a.level() - 1 {
        return Err(Error::Domain(format!(
            "expected matrix must be level {} over m={}",
            a.level() - 1,
            a.m()
        )));
    }
    let mut mismatches = Vec::new();
    let mut pairs_checked = 0;
    for r in 1..=a.level() {
        for i_r in 1..=a.m() {
            let pair = ProjectionPair::new(a.m(), a.level(), r, i_r)?;
            let projected = project_matrix(a, &pair)?;
            pairs_checked += 1;
            if let Some((row, col)) = projected.first_difference(expected) {
                mismatches.push(ConsistencyMismatch {
                    r,
                    i_r,
                    row,
                    col,
                    got: projected.get(row, col),
                    want: expected.get(row, col),
                });
            }
        }
    }
    Ok(ConsistencyReport { m: a.m(), n: a.level(), pairs_checked, mismatches })
}

/// Flow-lifted consistency: projections of `lift(nu, n)` against
/// `lift(nu, n-1)`. Always passes for genuine flows; exists to validate
/// the construction and hand-supplied matrices.
pub fn check_consistency(nu: &MapDistribution, n: usize) -> Result<ConsistencyReport> {
    if n < 2 {
        return Err(Error::Domain("consistency check needs level n >= 2".into()));
    }
    let a_n = TransitionMatrix::lift(nu, n)?;
    let a_prev = TransitionMatrix::lift(nu, n - 1)?;
    consistency_against(&a_n, &a_prev)
}

/// k-point transition probability `p_{source, target}`:
/// the total weight of maps sending `source` to `target` entry-wise.
pub fn kpoint_probability(
    nu: &MapDistribution,
    source: &PointTuple,
    target: &PointTuple,
) -> Result<Ratio> {
    if source.m() != nu.m() || target.m() != nu.m() {
        return Err(Error::Domain("tuple space does not match the distribution".into()));
    }
    if source.level() != target.level() {
        return Err(Error::Domain(format!(
            "source level {} differs from target level {}",
            source.level(),
            target.level()
        )));
    }
    let mut total = crate::ratio::zero();
    for (f, w) in nu.atoms() {
        let hits = source
            .entries()
            .iter()
            .zip(target.entries())
            .all(|(&s, &t)| f.image_of(s) == t);
        if hits {
            total += w;
        }
    }
    Ok(total)
}

/// Smallest level `n <= n_max` where the two flows' transition matrices
/// differ, or `None` when they agree through `n_max`.
pub fn first_characteristic_divergence(
    nu1: &MapDistribution,
    nu2: &MapDistribution,
    n_max: usize,
) -> Result<Option<usize>> {
    if nu1.m() != nu2.m() {
        return Err(Error::Domain(format!(
            "cannot compare flows over m={} and m={}",
            nu1.m(),
            nu2.m()
        )));
    }
    if n_max > nu1.m() {
        return Err(Error::Domain(format!(
            "comparison level n_max={n_max} exceeds m={} (the m-point law already determines the flow)",
            nu1.m()
        )));
    }
    for n in 1..=n_max {
        let a1 = TransitionMatrix::lift(nu1, n)?;
        let a2 = TransitionMatrix::lift(nu2, n)?;
        if a1 != a2 {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
