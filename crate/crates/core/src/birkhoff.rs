//! Birkhoff-von Neumann decomposition of exactly doubly stochastic
//! rational matrices into convex combinations of permutation matrices.
//!
//! Greedy peeling: find a perfect matching on the positivity pattern
//! (one always exists by Hall's theorem), subtract the minimal matched
//! entry times that permutation matrix, repeat. Each step zeroes at
//! least one entry, so at most `(m-1)^2 + 1` atoms are produced.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::maps::MapTable;
use crate::ratio::{format_ratio, Ratio};
use crate::space::FiniteSpace;

/// Transition-style permutation matrix of a bijection: entry `(i, f(i))`
/// is 1. Equals `lift(dirac(f), 1)` as a dense array.
pub fn permutation_matrix(f: &MapTable) -> Vec<Vec<Ratio>> {
    let m = f.m();
    let mut rows = vec![vec![Ratio::zero(); m]; m];
    for i in 1..=m {
        rows[i - 1][f.image_of(i) - 1] = Ratio::one();
    }
    rows
}

/// Weighted sum of permutation matrices (the reconstruction oracle).
pub fn reconstruct(m: usize, decomposition: &[(MapTable, Ratio)]) -> Vec<Vec<Ratio>> {
    let mut acc = vec![vec![Ratio::zero(); m]; m];
    for (f, w) in decomposition {
        for i in 1..=m {
            acc[i - 1][f.image_of(i) - 1] += w;
        }
    }
    acc
}

fn check_doubly_stochastic(b: &[Vec<Ratio>]) -> Result<usize> {
    let m = b.len();
    FiniteSpace::new(m)?;
    for (i, row) in b.iter().enumerate() {
        if row.len() != m {
            return Err(Error::Input(format!("row {i} has {} entries, expected {m}", row.len())));
        }
        for (j, x) in row.iter().enumerate() {
            if x.is_negative() {
                return Err(Error::Input(format!(
                    "entry ({i}, {j}) is negative: {}",
                    format_ratio(x)
                )));
            }
        }
        let sum: Ratio = row.iter().cloned().sum();
        if !sum.is_one() {
            return Err(Error::Input(format!(
                "row {i} sums to {}, not 1",
                format_ratio(&sum)
            )));
        }
    }
    for j in 0..m {
        let sum: Ratio = b.iter().map(|row| row[j].clone()).sum();
        if !sum.is_one() {
            return Err(Error::Input(format!(
                "column {j} sums to {}, not 1",
                format_ratio(&sum)
            )));
        }
    }
    Ok(m)
}

/// Kuhn's augmenting-path matching on the positivity pattern; returns
/// `match_of_row[i] = j` for a perfect matching, if one exists.
fn perfect_matching(positive: &[Vec<bool>]) -> Option<Vec<usize>> {
    let m = positive.len();
    let mut match_of_col: Vec<Option<usize>> = vec![None; m];

    fn try_augment(
        row: usize,
        positive: &[Vec<bool>],
        seen: &mut [bool],
        match_of_col: &mut [Option<usize>],
    ) -> bool {
        for col in 0..positive.len() {
            if positive[row][col] && !seen[col] {
                seen[col] = true;
                let free = match match_of_col[col] {
                    None => true,
                    Some(other) => try_augment(other, positive, seen, match_of_col),
                };
                if free {
                    match_of_col[col] = Some(row);
                    return true;
                }
            }
        }
        false
    }

    for row in 0..m {
        let mut seen = vec![false; m];
        if !try_augment(row, positive, &mut seen, &mut match_of_col) {
            return None;
        }
    }
    let mut match_of_row = vec![0usize; m];
    for (col, row) in match_of_col.into_iter().enumerate() {
        match_of_row[row.expect("perfect matching")] = col;
    }
    Some(match_of_row)
}

/// Decomposes an exactly doubly stochastic matrix into permutation
/// atoms: positive weights summing to 1 with
/// `sum_i w_i * P(sigma_i) = B` cell-exact. The representation is not
/// unique; this one is deterministic (greedy, row-major matching order).
pub fn birkhoff_decompose(b: &[Vec<Ratio>]) -> Result<Vec<(MapTable, Ratio)>> {
    let m = check_doubly_stochastic(b)?;
    let space = FiniteSpace::new(m)?;
    let mut rest: Vec<Vec<Ratio>> = b.to_vec();
    let mut remaining = Ratio::one();
    let mut atoms = Vec::new();
    while !remaining.is_zero() {
        let positive: Vec<Vec<bool>> = rest
            .iter()
            .map(|row| row.iter().map(|x| x.is_positive()).collect())
            .collect();
        let matching = perfect_matching(&positive).ok_or_else(|| {
            Error::Internal("no perfect matching on a doubly stochastic residual".into())
        })?;
        let weight = matching
            .iter()
            .enumerate()
            .map(|(i, &j)| rest[i][j].clone())
            .min()
            .expect("m >= 2");
        for (i, &j) in matching.iter().enumerate() {
            rest[i][j] -= &weight;
        }
        remaining -= &weight;
        let images: Vec<usize> = matching.iter().map(|&j| j + 1).collect();
        atoms.push((MapTable::new(space, images)?, weight));
    }
    Ok(atoms)
}
