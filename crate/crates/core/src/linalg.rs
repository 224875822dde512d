//! Exact linear algebra over the integers and rationals.
//!
//! Rank and null spaces are computed by integer-preserving Gaussian
//! elimination (cross-multiplication by lcm cofactors, then stripping the
//! row content), with the deterministic pivot rule "first nonzero in
//! row-major order". No floating point anywhere.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ratio::Ratio;

/// Row-echelon data of an integer matrix.
pub struct Echelon {
    pub rows: Vec<Vec<BigInt>>,
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
    pub cols: usize,
}

/// Reduces `rows` to row echelon form in place semantics (consumes the
/// input), eliminating column by column with the first nonzero row as
/// pivot.
pub fn echelonize(mut rows: Vec<Vec<BigInt>>, cols: usize) -> Echelon {
    let nrows = rows.len();
    let mut rank = 0;
    let mut pivot_cols = Vec::new();
    for col in 0..cols {
        // First row at or below `rank` with a nonzero entry in `col`.
        let pivot_row = (rank..nrows).find(|&r| !rows[r][col].is_zero());
        let Some(pivot_row) = pivot_row else { continue };
        rows.swap(rank, pivot_row);
        let (pivot, rest) = rows[rank..].split_first_mut().expect("nonempty");
        let p = pivot[col].clone();
        for row in rest {
            if row[col].is_zero() {
                continue;
            }
            let g = p.gcd(&row[col]);
            let row_m = &p / &g;
            let piv_m = &row[col] / &g;
            for c in col..cols {
                row[c] = &row[c] * &row_m - &pivot[c] * &piv_m;
            }
            strip_content(row);
        }
        pivot_cols.push(col);
        rank += 1;
    }
    Echelon { rows, rank, pivot_cols, cols }
}

/// Divides a row by the gcd of its entries (keeps entries small).
fn strip_content(row: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for v in row.iter() {
        if !v.is_zero() {
            g = g.gcd(v);
            if g.is_one() {
                return;
            }
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for v in row.iter_mut() {
        *v = &*v / &g;
    }
}

impl Echelon {
    /// Basis of the homogeneous null space, one vector per free column.
    ///
    /// Each vector is normalized to a primitive integer vector (entries
    /// coprime, first nonzero positive) and returned as exact rationals.
    pub fn nullspace_basis(&self) -> Vec<Vec<Ratio>> {
        let mut is_pivot = vec![false; self.cols];
        for &c in &self.pivot_cols {
            is_pivot[c] = true;
        }
        let free_cols: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = Vec::with_capacity(free_cols.len());
        for &f in &free_cols {
            let mut x = vec![Ratio::zero(); self.cols];
            x[f] = Ratio::one();
            // Back-substitute pivot variables bottom-up.
            for i in (0..self.rank).rev() {
                let pc = self.pivot_cols[i];
                let mut acc = Ratio::zero();
                for c in pc + 1..self.cols {
                    let coeff = &self.rows[i][c];
                    if !coeff.is_zero() && !x[c].is_zero() {
                        acc += Ratio::from_integer(coeff.clone()) * &x[c];
                    }
                }
                if !acc.is_zero() {
                    x[pc] = -acc / Ratio::from_integer(self.rows[i][pc].clone());
                }
            }
            basis.push(normalize_primitive(x));
        }
        basis
    }
}

/// Scales a rational vector to a primitive integer vector with positive
/// leading entry.
fn normalize_primitive(x: Vec<Ratio>) -> Vec<Ratio> {
    let mut lcm = BigInt::one();
    for v in &x {
        if !v.is_zero() {
            lcm = lcm.lcm(v.denom());
        }
    }
    let ints: Vec<BigInt> = x
        .iter()
        .map(|v| v.numer() * (&lcm / v.denom()))
        .collect();
    let mut g = BigInt::zero();
    for v in &ints {
        if !v.is_zero() {
            g = g.gcd(v);
        }
    }
    if g.is_zero() {
        return x;
    }
    let first_nonzero_neg = ints.iter().find(|v| !v.is_zero()).map(|v| v.is_negative());
    let sign = if first_nonzero_neg == Some(true) { -BigInt::one() } else { BigInt::one() };
    let scale = g * sign;
    ints.into_iter()
        .map(|v| Ratio::from_integer(v / &scale))
        .collect()
}

/// Rank of a set of rational vectors (clears denominators, echelonizes).
pub fn rank_of_rational_rows(vectors: &[Vec<Ratio>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let cols = vectors[0].len();
    let rows: Vec<Vec<BigInt>> = vectors
        .iter()
        .map(|v| {
            let mut lcm = BigInt::one();
            for x in v {
                if !x.is_zero() {
                    lcm = lcm.lcm(x.denom());
                }
            }
            v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
        })
        .collect();
    echelonize(rows, cols).rank
}

/// Solves a square rational system `mat * x = rhs` by Gaussian
/// elimination with first-nonzero pivoting.
pub fn solve_dense(mut mat: Vec<Vec<Ratio>>, mut rhs: Vec<Ratio>) -> Result<Vec<Ratio>> {
    let n = mat.len();
    if mat.iter().any(|row| row.len() != n) || rhs.len() != n {
        return Err(Error::Internal("solve_dense expects a square system".into()));
    }
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !mat[r][col].is_zero());
        let Some(pivot_row) = pivot_row else {
            return Err(Error::Internal("singular linear system".into()));
        };
        mat.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        let pivot = mat[col][col].clone();
        for r in col + 1..n {
            if mat[r][col].is_zero() {
                continue;
            }
            let factor = &mat[r][col] / &pivot;
            for c in col..n {
                let delta = &factor * &mat[col][c];
                mat[r][c] -= delta;
            }
            let delta = &factor * &rhs[col];
            rhs[r] -= delta;
        }
    }
    let mut x = vec![Ratio::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for c in row + 1..n {
            acc -= &mat[row][c] * &x[c];
        }
        x[row] = acc / &mat[row][row];
    }
    Ok(x)
}
