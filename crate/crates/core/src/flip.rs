//! Built-in generator for the pair-flip example: the group `G` of maps
//! that swap selected adjacent pairs of `{1..m}` (m even) and its index-2
//! subgroup `H` of even-flip maps, together with the epsilon-perturbed
//! family that moves mass from `H` onto `G \ H`.
//!
//! For m = 6 this is the 8-vs-4 support-split example; smaller even m give
//! scaled-down versions for fast property tests.

use num_traits::{One, Signed, Zero};

use crate::dist::{DistMode, MapDistribution};
use crate::error::{Error, Result};
use crate::invariant::seeded_invariant_measure;
use crate::maps::MapTable;
use crate::ratio::{format_ratio, Ratio};
use crate::space::{FiniteSpace, PointTuple};
use crate::chain::TransitionMatrix;

/// The flip group `G` and subgroup `H` over the blocks `(1,2),(3,4),...`.
#[derive(Debug, Clone)]
pub struct FlipGroupSpec {
    m: usize,
    pairs: Vec<(usize, usize)>,
    group: Vec<MapTable>,
    subgroup: Vec<MapTable>,
}

impl FlipGroupSpec {
    pub fn m(&self) -> usize {
        self.m
    }

    /// The m/2 swapped blocks, in order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// All `2^(m/2)` flip maps, sorted by canonical map index.
    pub fn group(&self) -> &[MapTable] {
        &self.group
    }

    /// The even-flip subgroup, `2^(m/2 - 1)` elements.
    pub fn subgroup(&self) -> &[MapTable] {
        &self.subgroup
    }

    /// Elements of `G \ H` (odd flip count).
    pub fn coset(&self) -> Vec<MapTable> {
        self.group
            .iter()
            .filter(|f| !self.subgroup.contains(f))
            .cloned()
            .collect()
    }
}

/// Enumerates the flip maps of `{1..m}` by subset of flipped blocks.
pub fn flip_group(m: usize) -> Result<FlipGroupSpec> {
    if m % 2 != 0 || m < 4 {
        return Err(Error::Domain(format!(
            "flip group needs an even m >= 4, got {m}"
        )));
    }
    let space = FiniteSpace::new(m)?;
    let blocks = m / 2;
    let pairs: Vec<(usize, usize)> = (0..blocks).map(|b| (2 * b + 1, 2 * b + 2)).collect();
    let mut group = Vec::with_capacity(1 << blocks);
    let mut subgroup = Vec::with_capacity(1 << (blocks - 1));
    for mask in 0u32..(1 << blocks) {
        let mut images: Vec<usize> = (1..=m).collect();
        for (b, &(lo, hi)) in pairs.iter().enumerate() {
            if mask & (1 << b) != 0 {
                images[lo - 1] = hi;
                images[hi - 1] = lo;
            }
        }
        let f = MapTable::new(space, images)?;
        if mask.count_ones() % 2 == 0 {
            subgroup.push(f.clone());
        }
        group.push(f);
    }
    group.sort_by_key(|f| f.index());
    subgroup.sort_by_key(|f| f.index());
    Ok(FlipGroupSpec { m, pairs, group, subgroup })
}

/// The epsilon-perturbed law: weight `(1-eps)/|H|` on each even-flip map
/// and `eps/|G \ H|` on each odd-flip map. `eps = 0` is uniform on `H`.
pub fn example_distribution(m: usize, eps: &Ratio) -> Result<MapDistribution> {
    if eps.is_negative() || eps > &Ratio::one() {
        return Err(Error::Domain(format!(
            "epsilon must lie in [0, 1], got {}",
            format_ratio(eps)
        )));
    }
    let spec = flip_group(m)?;
    let h_size = spec.subgroup().len() as i64;
    let coset = spec.coset();
    let coset_size = coset.len() as i64;
    let w_h = (Ratio::one() - eps) / Ratio::from_integer(h_size.into());
    let w_c = eps / Ratio::from_integer(coset_size.into());
    let mut atoms: Vec<(MapTable, Ratio)> = spec
        .subgroup()
        .iter()
        .map(|f| (f.clone(), w_h.clone()))
        .collect();
    atoms.extend(coset.into_iter().map(|f| (f, w_c.clone())));
    MapDistribution::new(m, DistMode::BijectionsOnly, atoms)
}

/// Outcome of the built-in example verification over an epsilon grid.
#[derive(Debug, Clone)]
pub struct ExampleReport {
    pub m: usize,
    pub grid: Vec<Ratio>,
    /// Level-1 and level-2 matrices equal the unperturbed ones for every
    /// grid epsilon.
    pub onepoint_invariant: bool,
    pub twopoint_invariant: bool,
    /// For every grid epsilon > 0 the level-3 matrix differs; one witness
    /// cell (row, col) of the first such difference.
    pub threepoint_differs: bool,
    pub threepoint_witness: Option<(usize, usize)>,
    /// Support cardinality of the seeded level-m invariant measure at
    /// eps = 0 and max over grid eps > 0.
    pub support_card_unperturbed: usize,
    pub support_cards_perturbed: Vec<(Ratio, usize)>,
    pub support_split_ok: bool,
}

impl ExampleReport {
    pub fn passed(&self) -> bool {
        self.onepoint_invariant
            && self.twopoint_invariant
            && self.threepoint_differs
            && self.support_split_ok
    }
}

/// Checks the example's advertised behavior on a grid of epsilons:
/// 1- and 2-point laws constant, 3-point law different for eps > 0, and
/// the 4-vs-8 support split of the seeded top-level invariant measure.
pub fn verify_example(m: usize, grid: &[Ratio]) -> Result<ExampleReport> {
    let zero = Ratio::zero();
    let nu0 = example_distribution(m, &zero)?;
    let a1_0 = TransitionMatrix::lift(&nu0, 1)?;
    let a2_0 = TransitionMatrix::lift(&nu0, 2)?;
    let a3_0 = TransitionMatrix::lift(&nu0, 3)?;

    let mut onepoint_invariant = true;
    let mut twopoint_invariant = true;
    let mut threepoint_differs = true;
    let mut threepoint_witness = None;

    for eps in grid {
        let nu = example_distribution(m, eps)?;
        if TransitionMatrix::lift(&nu, 1)? != a1_0 {
            onepoint_invariant = false;
        }
        if TransitionMatrix::lift(&nu, 2)? != a2_0 {
            twopoint_invariant = false;
        }
        if eps.is_positive() {
            let a3 = TransitionMatrix::lift(&nu, 3)?;
            match a3.first_difference(&a3_0) {
                Some(cell) => threepoint_witness = Some(cell),
                None => threepoint_differs = false,
            }
        }
    }

    let space = FiniteSpace::new(m)?;
    let seed = PointTuple::new(space, (1..=m).collect())?;
    let support_card_unperturbed = seeded_invariant_measure(&nu0, &seed)?.support().len();
    let h_card = 1usize << (m / 2 - 1);
    let g_card = 1usize << (m / 2);
    let mut support_split_ok = support_card_unperturbed == h_card;
    let mut support_cards_perturbed = Vec::new();
    for eps in grid {
        if eps.is_positive() {
            let nu = example_distribution(m, eps)?;
            let card = seeded_invariant_measure(&nu, &seed)?.support().len();
            support_split_ok &= card == g_card;
            support_cards_perturbed.push((eps.clone(), card));
        }
    }

    Ok(ExampleReport {
        m,
        grid: grid.to_vec(),
        onepoint_invariant,
        twopoint_invariant,
        threepoint_differs,
        threepoint_witness,
        support_card_unperturbed,
        support_cards_perturbed,
        support_split_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::ratio;

    fn map(m: usize, images: &[usize]) -> MapTable {
        MapTable::new(FiniteSpace::new(m).unwrap(), images.to_vec()).unwrap()
    }

    #[test]
    fn m6_group_matches_displayed_sets() {
        let spec = flip_group(6).unwrap();
        assert_eq!(spec.group().len(), 8);
        assert_eq!(spec.subgroup().len(), 4);
        let expected_h = vec![
            map(6, &[1, 2, 3, 4, 5, 6]),
            map(6, &[2, 1, 4, 3, 5, 6]),
            map(6, &[2, 1, 3, 4, 6, 5]),
            map(6, &[1, 2, 4, 3, 6, 5]),
        ];
        for f in &expected_h {
            assert!(spec.subgroup().contains(f), "missing {:?}", f.images());
        }
    }

    #[test]
    fn m4_group_sizes() {
        let spec = flip_group(4).unwrap();
        assert_eq!(spec.group().len(), 4);
        assert_eq!(spec.subgroup().len(), 2);
    }

    #[test]
    fn odd_m_rejected() {
        assert!(flip_group(5).is_err());
        assert!(flip_group(2).is_err());
    }

    #[test]
    fn subgroup_closed_under_composition() {
        let spec = flip_group(6).unwrap();
        for f in spec.subgroup() {
            for g in spec.subgroup() {
                let fg = f.compose(g).unwrap();
                assert!(spec.subgroup().contains(&fg));
            }
        }
    }

    #[test]
    fn every_flip_is_an_involution() {
        let spec = flip_group(6).unwrap();
        let id = MapTable::identity(6).unwrap();
        for f in spec.group() {
            assert_eq!(f.compose(f).unwrap(), id);
        }
    }

    #[test]
    fn distribution_weights_at_endpoints_and_midpoint() {
        let nu0 = example_distribution(6, &ratio(0, 1)).unwrap();
        assert_eq!(nu0.atoms().len(), 4);
        assert!(nu0.atoms().iter().all(|(_, w)| *w == ratio(1, 4)));

        let nu1 = example_distribution(6, &ratio(1, 1)).unwrap();
        assert_eq!(nu1.atoms().len(), 4);
        assert!(nu1.atoms().iter().all(|(_, w)| *w == ratio(1, 4)));
        // Disjoint supports at the two endpoints.
        let spec = flip_group(6).unwrap();
        for f in nu1.support() {
            assert!(!spec.subgroup().contains(f));
        }

        let nu_half = example_distribution(6, &ratio(1, 2)).unwrap();
        assert_eq!(nu_half.atoms().len(), 8);
        assert!(nu_half.atoms().iter().all(|(_, w)| *w == ratio(1, 8)));
    }

    #[test]
    fn epsilon_outside_unit_interval_rejected() {
        assert!(example_distribution(6, &ratio(2, 1)).is_err());
        assert!(example_distribution(6, &ratio(-1, 2)).is_err());
    }

    #[test]
    fn displayed_signed_form_equals_closed_form() {
        // The perturbed law as literally displayed: 1/4 on each element of
        // H plus (eps/4) * (sum over G\H minus sum over H) of Dirac terms.
        let spec = flip_group(6).unwrap();
        for eps in [ratio(0, 1), ratio(1, 3), ratio(1, 2), ratio(1, 1)] {
            let quarter = ratio(1, 4);
            let eps_quarter = &eps * &quarter;
            let mut atoms = Vec::new();
            for f in spec.subgroup() {
                atoms.push((f.clone(), &quarter - &eps_quarter));
            }
            for f in spec.coset() {
                atoms.push((f, eps_quarter.clone()));
            }
            let literal = MapDistribution::new(6, DistMode::BijectionsOnly, atoms).unwrap();
            assert_eq!(literal, example_distribution(6, &eps).unwrap());
        }
    }

    #[test]
    fn affine_in_epsilon() {
        // nu^eps = (1-eps) nu^0 + eps nu^1, atom by atom.
        let nu0 = example_distribution(6, &ratio(0, 1)).unwrap();
        let nu1 = example_distribution(6, &ratio(1, 1)).unwrap();
        for eps in [ratio(1, 4), ratio(2, 7), ratio(5, 6)] {
            let nu = example_distribution(6, &eps).unwrap();
            let one_minus = ratio(1, 1) - &eps;
            for (f, w) in nu.atoms() {
                let expected = &one_minus * nu0.weight_of(f) + &eps * nu1.weight_of(f);
                assert_eq!(*w, expected);
            }
        }
    }

    #[test]
    fn lifted_matrices_are_affine_in_epsilon() {
        // lift is linear in nu, so lift(nu^eps, k) interpolates the two
        // endpoint matrices; at k <= 2 the eps coefficient vanishes.
        let a_at = |eps: &Ratio, k: usize| {
            TransitionMatrix::lift(&example_distribution(6, eps).unwrap(), k).unwrap()
        };
        for k in 1..=3 {
            let a0 = a_at(&ratio(0, 1), k);
            let a1 = a_at(&ratio(1, 1), k);
            for eps in [ratio(1, 4), ratio(3, 5)] {
                let a = a_at(&eps, k);
                let one_minus = ratio(1, 1) - &eps;
                for x in 0..a.dim() {
                    for (y, val) in a.row(x) {
                        let expected = &one_minus * a0.get(x, *y) + &eps * a1.get(x, *y);
                        assert_eq!(*val, expected, "k={k} cell ({x},{y})");
                    }
                }
            }
            let endpoint_coeffs_equal = a0 == a1;
            assert_eq!(endpoint_coeffs_equal, k <= 2, "k={k}");
        }
    }
}
