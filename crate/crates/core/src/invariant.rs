//! Invariant measures of n-point chains, projection cascades, and the
//! bifurcation-level detector.
//!
//! A seeded invariant measure is the stationary measure of the unique
//! recurrent class reachable from a seed tuple; reaching more than one
//! class is an explicit error, never a silent choice. Detection compares
//! the support cascades of two flows level by level.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;

use crate::chain::{first_characteristic_divergence, TransitionMatrix, SIZE_GUARD};
use crate::dist::MapDistribution;
use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::ratio::Ratio;
use crate::space::{delete_coord_index, FiniteSpace, PointTuple};

/// Stationary measure of an n-point chain, sparse over tuple indices.
///
/// `class_id` is the smallest tuple index of the recurrent class the
/// measure lives on (`None` for projected measures, whose carrier class
/// is not recomputed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantMeasure {
    m: usize,
    n: usize,
    masses: Vec<(usize, Ratio)>,
    class_id: Option<usize>,
}

impl InvariantMeasure {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn level(&self) -> usize {
        self.n
    }

    /// Positive masses sorted by tuple index; they sum to exactly 1.
    pub fn masses(&self) -> &[(usize, Ratio)] {
        &self.masses
    }

    pub fn class_id(&self) -> Option<usize> {
        self.class_id
    }

    pub fn support(&self) -> Vec<usize> {
        self.masses.iter().map(|(i, _)| *i).collect()
    }

    pub fn mass_at(&self, idx: usize) -> Ratio {
        match self.masses.binary_search_by_key(&idx, |(i, _)| *i) {
            Ok(pos) => self.masses[pos].1.clone(),
            Err(_) => crate::ratio::zero(),
        }
    }

    pub fn total_mass(&self) -> Ratio {
        self.masses.iter().map(|(_, v)| v.clone()).sum()
    }

    /// Marginalizes coordinate `r` (1-based): the pushforward under
    /// deletion of that coordinate. Mass-preserving.
    pub fn project(&self, r: usize) -> Result<InvariantMeasure> {
        if self.n < 2 {
            return Err(Error::Domain("cannot project a level-1 measure".into()));
        }
        if r < 1 || r > self.n {
            return Err(Error::Domain(format!("coordinate r={r} out of range 1..={}", self.n)));
        }
        let space = FiniteSpace::new(self.m)?;
        let dim_low = space.tuple_count(self.n - r)?;
        let mut acc: BTreeMap<usize, Ratio> = BTreeMap::new();
        for (idx, mass) in &self.masses {
            let target = delete_coord_index(*idx, self.m, dim_low);
            *acc.entry(target).or_insert_with(crate::ratio::zero) += mass;
        }
        Ok(InvariantMeasure {
            m: self.m,
            n: self.n - 1,
            masses: acc.into_iter().collect(),
            class_id: None,
        })
    }

    /// Repeated projection along the first coordinate: all levels from
    /// `n` down to 1, starting with this measure.
    pub fn cascade(&self) -> Result<Vec<InvariantMeasure>> {
        self.cascade_along(&vec![1; self.n.saturating_sub(1)])
    }

    /// Cascade with a caller-chosen coordinate per step (`coords[j]` is
    /// deleted at the j-th projection, 1-based within the current level).
    /// Different routes generally produce different lower-level measures.
    pub fn cascade_along(&self, coords: &[usize]) -> Result<Vec<InvariantMeasure>> {
        if coords.len() + 1 != self.n {
            return Err(Error::Domain(format!(
                "a level-{} cascade needs {} projection steps, got {}",
                self.n,
                self.n - 1,
                coords.len()
            )));
        }
        let mut out = vec![self.clone()];
        for &r in coords {
            out.push(out.last().expect("nonempty").project(r)?);
        }
        Ok(out)
    }

    /// Decoded, sorted support.
    pub fn support_profile(&self) -> SupportProfile {
        let space = FiniteSpace::new(self.m).expect("measure has valid m");
        let tuples = self
            .masses
            .iter()
            .map(|(idx, _)| {
                space
                    .decode(self.n, *idx)
                    .expect("support index in range")
                    .entries()
                    .to_vec()
            })
            .collect();
        SupportProfile { m: self.m, level: self.n, tuples }
    }
}

/// The support of a measure at one level, as sorted decoded tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportProfile {
    pub m: usize,
    pub level: usize,
    pub tuples: Vec<Vec<usize>>,
}

impl SupportProfile {
    pub fn cardinality(&self) -> usize {
        self.tuples.len()
    }
}

/// In the discrete topology, two finite supports are homeomorphic exactly
/// when their cardinalities agree.
pub fn supports_homeomorphic(a: &SupportProfile, b: &SupportProfile) -> Result<bool> {
    if a.level != b.level {
        return Err(Error::Domain(format!(
            "cannot compare supports at levels {} and {}",
            a.level, b.level
        )));
    }
    Ok(a.cardinality() == b.cardinality())
}

/// Iterative Tarjan over an adjacency list.
fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut components = Vec::new();
    let mut counter = 0usize;
    let mut dfs: Vec<(usize, usize)> = Vec::new();

    for start in 0..n {
        if index[start] != UNSEEN {
            continue;
        }
        index[start] = counter;
        low[start] = counter;
        counter += 1;
        stack.push(start);
        on_stack[start] = true;
        dfs.push((start, 0));
        while let Some(frame) = dfs.last_mut() {
            let (v, child) = *frame;
            if child < adj[v].len() {
                frame.1 += 1;
                let w = adj[v][child];
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    dfs.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                dfs.pop();
                if let Some(&(parent, _)) = dfs.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
    }
    components
}

/// Components with no outgoing arcs, sorted members, classes ordered by
/// smallest member.
fn recurrent_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let comps = strongly_connected_components(adj);
    let mut comp_of = vec![usize::MAX; adj.len()];
    for (cid, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = cid;
        }
    }
    let mut recurrent: Vec<Vec<usize>> = comps
        .iter()
        .enumerate()
        .filter(|(cid, comp)| {
            comp.iter().all(|&v| adj[v].iter().all(|&w| comp_of[w] == *cid))
        })
        .map(|(_, comp)| comp.clone())
        .collect();
    recurrent.sort_by_key(|comp| comp[0]);
    recurrent
}

/// Recurrent classes of a transition matrix: strongly connected
/// components of the positive-entry digraph with no outgoing arcs,
/// ordered by smallest member index.
pub fn recurrent_classes(a: &TransitionMatrix) -> Vec<Vec<usize>> {
    let adj: Vec<Vec<usize>> = (0..a.dim())
        .map(|x| a.row(x).iter().map(|(y, _)| *y).collect())
        .collect();
    recurrent_components(&adj)
}

/// Exact stationary measure of one recurrent class of `a`.
pub fn stationary_distribution(a: &TransitionMatrix, class: &[usize]) -> Result<InvariantMeasure> {
    let mut members: Vec<usize> = class.to_vec();
    members.sort_unstable();
    members.dedup();
    if members.is_empty() {
        return Err(Error::Domain("empty recurrent class".into()));
    }
    if members.iter().any(|&x| x >= a.dim()) {
        return Err(Error::Domain("class member out of range".into()));
    }
    let rows: Vec<Vec<(usize, Ratio)>> = members
        .iter()
        .map(|&x| a.row(x).to_vec())
        .collect();
    solve_stationary(a.m(), a.level(), &members, &rows)
}

fn solve_stationary(
    m: usize,
    n: usize,
    members: &[usize],
    rows: &[Vec<(usize, Ratio)>],
) -> Result<InvariantMeasure> {
    let c = members.len();
    let local: HashMap<usize, usize> =
        members.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    // Dense local transition matrix; mass leaving the class means the
    // supplied set is not recurrent.
    let mut t = vec![vec![crate::ratio::zero(); c]; c];
    for (i, row) in rows.iter().enumerate() {
        for (y, val) in row {
            match local.get(y) {
                Some(&j) => t[i][j] += val,
                None => {
                    return Err(Error::Internal(format!(
                        "state {} leaves the supplied class: not recurrent",
                        members[i]
                    )))
                }
            }
        }
    }
    // Unknowns mu_0..mu_{c-1}: stationarity on the first c-1 columns plus
    // normalization (the dropped column is implied by stochasticity).
    let mut mat = vec![vec![crate::ratio::zero(); c]; c];
    let mut rhs = vec![crate::ratio::zero(); c];
    for j in 0..c - 1 {
        for i in 0..c {
            mat[j][i] = t[i][j].clone();
        }
        mat[j][j] -= crate::ratio::one();
    }
    for slot in mat[c - 1].iter_mut() {
        *slot = crate::ratio::one();
    }
    rhs[c - 1] = crate::ratio::one();
    let mu = solve_dense(mat, rhs).map_err(|_| {
        Error::Internal("stationary system is singular: class misidentified".into())
    })?;
    use num_traits::Signed;
    if mu.iter().any(|v| v.is_negative()) {
        return Err(Error::Internal("stationary solve produced a negative mass".into()));
    }
    let masses: Vec<(usize, Ratio)> = members
        .iter()
        .zip(mu)
        .filter(|(_, v)| !num_traits::Zero::is_zero(v))
        .map(|(&x, v)| (x, v))
        .collect();
    Ok(InvariantMeasure { m, n, masses, class_id: Some(members[0]) })
}

/// Stationary measure of the unique recurrent class reachable from
/// `seed` under the support of `nu`.
///
/// Explores the orbit closure breadth-first, so the full `m^n` matrix is
/// never built. Multiple reachable recurrent classes yield
/// [`Error::AmbiguousSeed`].
pub fn seeded_invariant_measure(
    nu: &MapDistribution,
    seed: &PointTuple,
) -> Result<InvariantMeasure> {
    if seed.m() != nu.m() {
        return Err(Error::Domain(format!(
            "seed over m={} does not match distribution over m={}",
            seed.m(),
            nu.m()
        )));
    }
    let m = nu.m();
    let n = seed.level();
    FiniteSpace::new(m)?.tuple_count(n)?;

    // Orbit closure of the seed under the support maps.
    let seed_idx = seed.index();
    let mut local_of: HashMap<usize, usize> = HashMap::new();
    let mut global_of: Vec<usize> = Vec::new();
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    local_of.insert(seed_idx, 0);
    global_of.push(seed_idx);
    adj.push(Vec::new());
    queue.push_back(seed_idx);
    while let Some(x) = queue.pop_front() {
        let lx = local_of[&x];
        let mut out = Vec::new();
        for (f, _) in nu.atoms() {
            let y = f.apply_index(n, x);
            let ly = match local_of.get(&y) {
                Some(&ly) => ly,
                None => {
                    let ly = global_of.len();
                    if ly >= SIZE_GUARD {
                        return Err(Error::Resource(format!(
                            "orbit closure of the seed exceeds {SIZE_GUARD} states"
                        )));
                    }
                    local_of.insert(y, ly);
                    global_of.push(y);
                    adj.push(Vec::new());
                    queue.push_back(y);
                    ly
                }
            };
            if !out.contains(&ly) {
                out.push(ly);
            }
        }
        adj[lx] = out;
    }

    let recurrent = recurrent_components(&adj);
    if recurrent.len() > 1 {
        let mut classes: Vec<Vec<usize>> = recurrent
            .iter()
            .map(|comp| {
                let mut g: Vec<usize> = comp.iter().map(|&l| global_of[l]).collect();
                g.sort_unstable();
                g
            })
            .collect();
        classes.sort_by_key(|c| c[0]);
        return Err(Error::AmbiguousSeed { classes });
    }
    let class = recurrent
        .into_iter()
        .next()
        .ok_or_else(|| Error::Internal("orbit closure has no recurrent class".into()))?;

    let mut members: Vec<usize> = class.iter().map(|&l| global_of[l]).collect();
    members.sort_unstable();
    let rows: Vec<Vec<(usize, Ratio)>> = members
        .iter()
        .map(|&x| {
            let mut row: BTreeMap<usize, Ratio> = BTreeMap::new();
            for (f, w) in nu.atoms() {
                *row.entry(f.apply_index(n, x)).or_insert_with(crate::ratio::zero) += w;
            }
            row.into_iter().collect()
        })
        .collect();
    solve_stationary(m, n, &members, &rows)
}

/// One-step pushforward of a measure under the flow at the measure's own
/// level; stationarity means the pushforward equals the measure.
pub fn is_stationary(mu: &InvariantMeasure, nu: &MapDistribution) -> Result<bool> {
    if mu.m() != nu.m() {
        return Err(Error::Domain("measure and distribution spaces differ".into()));
    }
    let mut pushed: BTreeMap<usize, Ratio> = BTreeMap::new();
    for (idx, mass) in mu.masses() {
        for (f, w) in nu.atoms() {
            let target = f.apply_index(mu.level(), *idx);
            *pushed.entry(target).or_insert_with(crate::ratio::zero) += mass * w;
        }
    }
    let pushed: Vec<(usize, Ratio)> = pushed
        .into_iter()
        .filter(|(_, v)| !num_traits::Zero::is_zero(v))
        .collect();
    Ok(pushed == mu.masses)
}

/// Projection invariance: the marginal of a stationary measure is
/// stationary for the projected chain.
pub fn check_projection_invariance(
    mu: &InvariantMeasure,
    nu: &MapDistribution,
    r: usize,
) -> Result<bool> {
    let projected = mu.project(r)?;
    is_stationary(&projected, nu)
}

/// Level-by-level support comparison of two flows seeded at the same
/// tuple.
#[derive(Debug, Clone)]
pub struct LevelComparison {
    pub level: usize,
    pub support_a: SupportProfile,
    pub support_b: SupportProfile,
    /// Exact set equality of the supports.
    pub equal: bool,
    /// Cardinality equality (homeomorphism of finite discrete spaces).
    pub homeomorphic: bool,
}

/// Full outcome of a bifurcation-level detection run.
#[derive(Debug, Clone)]
pub struct BifurcationReport {
    pub m: usize,
    pub seed: Vec<usize>,
    /// Largest level where supports differ while agreeing at every level
    /// below; `None` when all levels agree.
    pub detected_level: Option<usize>,
    /// Smallest level where the transition matrices differ.
    pub characteristic_level: Option<usize>,
    /// Comparisons from the top level down to 1.
    pub levels: Vec<LevelComparison>,
}

impl BifurcationReport {
    pub fn to_json_string(&self) -> String {
        #[derive(Serialize)]
        struct ReportFile<'a> {
            seed: &'a [usize],
            detected_level: Option<usize>,
            characteristic_level: Option<usize>,
            levels: Vec<LevelFile<'a>>,
        }
        #[derive(Serialize)]
        struct LevelFile<'a> {
            level: usize,
            support_a: &'a [Vec<usize>],
            support_b: &'a [Vec<usize>],
            equal: bool,
            homeomorphic: bool,
        }
        let file = ReportFile {
            seed: &self.seed,
            detected_level: self.detected_level,
            characteristic_level: self.characteristic_level,
            levels: self
                .levels
                .iter()
                .map(|lc| LevelFile {
                    level: lc.level,
                    support_a: &lc.support_a.tuples,
                    support_b: &lc.support_b.tuples,
                    equal: lc.equal,
                    homeomorphic: lc.homeomorphic,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("serialization cannot fail");
        s.push('\n');
        s
    }
}

/// Runs both seeded cascades and locates the bifurcation level: the
/// boundary where supports differ above and agree below.
pub fn detect_bifurcation_level(
    nu1: &MapDistribution,
    nu2: &MapDistribution,
    seed: &PointTuple,
) -> Result<BifurcationReport> {
    if nu1.m() != nu2.m() {
        return Err(Error::Domain(format!(
            "cannot compare flows over m={} and m={}",
            nu1.m(),
            nu2.m()
        )));
    }
    let top = seed.level();
    if top > nu1.m() {
        return Err(Error::Domain(format!(
            "seed level {top} exceeds m={}; detection runs at levels n <= m",
            nu1.m()
        )));
    }
    let mu1 = seeded_invariant_measure(nu1, seed)?;
    let mu2 = seeded_invariant_measure(nu2, seed)?;
    let cascade1 = mu1.cascade()?;
    let cascade2 = mu2.cascade()?;

    let mut levels = Vec::with_capacity(top);
    let mut agree = vec![true; top + 1];
    for (a, b) in cascade1.iter().zip(&cascade2) {
        let support_a = a.support_profile();
        let support_b = b.support_profile();
        let equal = support_a.tuples == support_b.tuples;
        let homeomorphic = supports_homeomorphic(&support_a, &support_b)?;
        agree[a.level()] = equal;
        levels.push(LevelComparison { level: a.level(), support_a, support_b, equal, homeomorphic });
    }
    let detected_level = (1..=top)
        .rev()
        .find(|&lvl| !agree[lvl] && (1..lvl).all(|j| agree[j]));
    let characteristic_level = first_characteristic_divergence(nu1, nu2, top)?;

    Ok(BifurcationReport {
        m: nu1.m(),
        seed: seed.entries().to_vec(),
        detected_level,
        characteristic_level,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flip::example_distribution;
    use crate::maps::MapTable;
    use crate::ratio::ratio;

    fn tuple(m: usize, entries: &[usize]) -> PointTuple {
        PointTuple::new(FiniteSpace::new(m).unwrap(), entries.to_vec()).unwrap()
    }

    fn indices(m: usize, tuples: &[&[usize]]) -> Vec<usize> {
        let mut v: Vec<usize> = tuples.iter().map(|t| tuple(m, t).index()).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn identity_matrix_has_singleton_classes() {
        let a = TransitionMatrix::identity(2, 2).unwrap();
        let classes = recurrent_classes(&a);
        assert_eq!(classes, vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn symmetric_two_state_chain_is_uniform() {
        let h = ratio(1, 2);
        let a = TransitionMatrix::from_rows(
            2,
            1,
            vec![vec![(0, h.clone()), (1, h.clone())], vec![(0, h.clone()), (1, h.clone())]],
        )
        .unwrap();
        let classes = recurrent_classes(&a);
        assert_eq!(classes.len(), 1);
        let mu = stationary_distribution(&a, &classes[0]).unwrap();
        assert_eq!(mu.masses(), &[(0, ratio(1, 2)), (1, ratio(1, 2))]);
        assert_eq!(mu.class_id(), Some(0));
    }

    #[test]
    fn dirac_identity_gives_point_mass() {
        let nu = crate::dist::MapDistribution::dirac(MapTable::identity(3).unwrap()).unwrap();
        let seed = tuple(3, &[2, 3]);
        let mu = seeded_invariant_measure(&nu, &seed).unwrap();
        assert_eq!(mu.masses(), &[(seed.index(), ratio(1, 1))]);
    }

    #[test]
    fn unperturbed_seed_orbit_has_four_elements() {
        let nu = example_distribution(6, &ratio(0, 1)).unwrap();
        let mu = seeded_invariant_measure(&nu, &tuple(6, &[1, 2, 3, 4, 5, 6])).unwrap();
        let expected = indices(
            6,
            &[
                &[1, 2, 3, 4, 5, 6],
                &[1, 2, 4, 3, 6, 5],
                &[2, 1, 3, 4, 6, 5],
                &[2, 1, 4, 3, 5, 6],
            ],
        );
        assert_eq!(mu.support(), expected);
        for (_, w) in mu.masses() {
            assert_eq!(*w, ratio(1, 4));
        }
    }

    #[test]
    fn perturbed_seed_orbit_has_eight_elements() {
        let nu = example_distribution(6, &ratio(1, 2)).unwrap();
        let mu = seeded_invariant_measure(&nu, &tuple(6, &[1, 2, 3, 4, 5, 6])).unwrap();
        let expected = indices(
            6,
            &[
                &[1, 2, 3, 4, 5, 6],
                &[1, 2, 3, 4, 6, 5],
                &[1, 2, 4, 3, 5, 6],
                &[1, 2, 4, 3, 6, 5],
                &[2, 1, 3, 4, 5, 6],
                &[2, 1, 3, 4, 6, 5],
                &[2, 1, 4, 3, 5, 6],
                &[2, 1, 4, 3, 6, 5],
            ],
        );
        assert_eq!(mu.support(), expected);
        for (_, w) in mu.masses() {
            assert_eq!(*w, ratio(1, 8));
        }
    }

    #[test]
    fn subdiagonal_seed_orbit_matches_displayed_vectors() {
        let nu = example_distribution(6, &ratio(0, 1)).unwrap();
        let mu = seeded_invariant_measure(&nu, &tuple(6, &[1, 2, 1, 4, 1, 6])).unwrap();
        let expected = indices(
            6,
            &[
                &[1, 2, 1, 4, 1, 6],
                &[1, 2, 1, 3, 1, 5],
                &[2, 1, 2, 4, 2, 5],
                &[2, 1, 2, 3, 2, 6],
            ],
        );
        assert_eq!(mu.support(), expected);
    }

    #[test]
    fn cascade_of_unperturbed_reaches_half_half_at_level_1() {
        let nu = example_distribution(6, &ratio(0, 1)).unwrap();
        let mu = seeded_invariant_measure(&nu, &tuple(6, &[1, 2, 3, 4, 5, 6])).unwrap();
        let cascade = mu.cascade().unwrap();
        assert_eq!(cascade.len(), 6);
        let level1 = cascade.last().unwrap();
        assert_eq!(level1.level(), 1);
        assert_eq!(level1.masses(), &[(4, ratio(1, 2)), (5, ratio(1, 2))]);
        for measure in &cascade {
            assert_eq!(measure.total_mass(), ratio(1, 1));
        }
    }

    #[test]
    fn custom_cascade_route_differs_but_stays_stationary() {
        let nu = example_distribution(6, &ratio(0, 1)).unwrap();
        let mu = seeded_invariant_measure(&nu, &tuple(6, &[1, 2, 1, 4, 1, 6])).unwrap();
        let standard = mu.cascade().unwrap();
        assert_eq!(standard.len(), 6);
        // Delete the last coordinate at every step instead.
        let route: Vec<usize> = (2..=6).rev().collect();
        let alternate = mu.cascade_along(&route).unwrap();
        assert_eq!(alternate.len(), 6);
        for measure in &alternate {
            assert_eq!(measure.total_mass(), ratio(1, 1));
            assert!(is_stationary(measure, &nu).unwrap());
        }
        // The two routes land on different level-1 marginals here:
        // first-coordinate deletions keep {5,6}, trailing deletions {1,2}.
        assert_ne!(standard.last().unwrap(), alternate.last().unwrap());
        assert!(mu.cascade_along(&[1, 1]).is_err());
    }

    #[test]
    fn projected_level5_support_matches_displayed_vector() {
        let nu = example_distribution(6, &ratio(0, 1)).unwrap();
        let mu = seeded_invariant_measure(&nu, &tuple(6, &[1, 2, 3, 4, 5, 6])).unwrap();
        let v5 = mu.project(1).unwrap();
        let expected = indices(
            6,
            &[&[1, 3, 4, 6, 5], &[1, 4, 3, 5, 6], &[2, 3, 4, 5, 6], &[2, 4, 3, 6, 5]],
        );
        assert_eq!(v5.support(), expected);
    }

    #[test]
    fn product_form_marginal_recovers_factor() {
        // mu (x) delta_3 at level 2 over m=3: project the last coordinate.
        let nu = example_distribution(4, &ratio(1, 4)).unwrap();
        let mu1 = seeded_invariant_measure(&nu, &tuple(4, &[1])).unwrap();
        let product_masses: Vec<(usize, Ratio)> = mu1
            .masses()
            .iter()
            .map(|(idx, w)| (idx * 4 + 2, w.clone()))
            .collect();
        let product = InvariantMeasure { m: 4, n: 2, masses: product_masses, class_id: None };
        let back = product.project(2).unwrap();
        assert_eq!(back.masses(), mu1.masses());
    }

    #[test]
    fn stationarity_is_exact_for_seeded_measures() {
        let nu = example_distribution(6, &ratio(1, 3)).unwrap();
        let mu = seeded_invariant_measure(&nu, &tuple(6, &[1, 2, 3, 4, 5, 6])).unwrap();
        assert!(is_stationary(&mu, &nu).unwrap());
    }

    #[test]
    fn projection_invariance_passes_for_example() {
        for eps in [ratio(0, 1), ratio(1, 2)] {
            let nu = example_distribution(6, &eps).unwrap();
            let mu = seeded_invariant_measure(&nu, &tuple(6, &[1, 2, 3, 4, 5, 6])).unwrap();
            for r in 1..=6 {
                assert!(check_projection_invariance(&mu, &nu, r).unwrap(), "r={r}");
            }
        }
    }

    #[test]
    fn detection_finds_level_5_for_off_diagonal_seed() {
        let nu0 = example_distribution(6, &ratio(0, 1)).unwrap();
        let nu_half = example_distribution(6, &ratio(1, 2)).unwrap();
        let report =
            detect_bifurcation_level(&nu0, &nu_half, &tuple(6, &[1, 2, 3, 4, 5, 6])).unwrap();
        assert_eq!(report.detected_level, Some(5));
        assert_eq!(report.characteristic_level, Some(3));
        for lc in &report.levels {
            let expect_equal = lc.level <= 4;
            assert_eq!(lc.equal, expect_equal, "level {}", lc.level);
        }
    }

    #[test]
    fn detection_finds_level_3_for_subdiagonal_seed() {
        let nu0 = example_distribution(6, &ratio(0, 1)).unwrap();
        let nu_half = example_distribution(6, &ratio(1, 2)).unwrap();
        let report =
            detect_bifurcation_level(&nu0, &nu_half, &tuple(6, &[1, 2, 1, 4, 1, 6])).unwrap();
        assert_eq!(report.detected_level, Some(3));
        for lc in &report.levels {
            let expect_equal = lc.level <= 2;
            assert_eq!(lc.equal, expect_equal, "level {}", lc.level);
        }
    }

    #[test]
    fn detection_of_flow_against_itself_is_empty() {
        let nu = example_distribution(6, &ratio(1, 2)).unwrap();
        let report = detect_bifurcation_level(&nu, &nu, &tuple(6, &[1, 2, 3, 4, 5, 6])).unwrap();
        assert_eq!(report.detected_level, None);
        assert_eq!(report.characteristic_level, None);
        assert!(report.levels.iter().all(|lc| lc.equal && lc.homeomorphic));
    }

    #[test]
    fn homeomorphism_is_cardinality_equality() {
        let a = SupportProfile { m: 6, level: 2, tuples: vec![vec![1, 2], vec![2, 1]] };
        let b = SupportProfile { m: 6, level: 2, tuples: vec![vec![3, 4], vec![4, 3]] };
        assert!(supports_homeomorphic(&a, &b).unwrap());
        let c = SupportProfile { m: 6, level: 2, tuples: vec![vec![1, 2]] };
        assert!(!supports_homeomorphic(&a, &c).unwrap());
        let d = SupportProfile { m: 6, level: 3, tuples: vec![] };
        assert!(supports_homeomorphic(&a, &d).is_err());
    }

    #[test]
    fn ambiguous_seed_lists_both_classes() {
        // f and g both fix 2 and 3; from seed 1 the chain falls into
        // either fixed point depending on the first draw, so two
        // recurrent classes are reachable.
        let space = FiniteSpace::new(3).unwrap();
        let f = MapTable::new(space, vec![2, 2, 3]).unwrap();
        let g = MapTable::new(space, vec![3, 2, 3]).unwrap();
        let nu = crate::dist::MapDistribution::new(
            3,
            crate::dist::DistMode::AllMaps,
            vec![(f, ratio(1, 2)), (g, ratio(1, 2))],
        )
        .unwrap();
        let err = seeded_invariant_measure(&nu, &tuple(3, &[1])).unwrap_err();
        match err {
            Error::AmbiguousSeed { classes } => {
                assert_eq!(classes, vec![vec![1], vec![2]]);
            }
            other => panic!("expected ambiguity, got {other:?}"),
        }
    }

    #[test]
    fn transient_seed_resolves_to_unique_class() {
        // Identity mixed with a constant: state 2 leaks to the absorbing
        // state 1, so the reachable recurrent class is unique.
        let id = MapTable::identity(2).unwrap();
        let const1 = MapTable::constant(2, 1).unwrap();
        let nu = crate::dist::MapDistribution::new(
            2,
            crate::dist::DistMode::AllMaps,
            vec![(id, ratio(1, 2)), (const1, ratio(1, 2))],
        )
        .unwrap();
        let mu = seeded_invariant_measure(&nu, &tuple(2, &[2])).unwrap();
        assert_eq!(mu.masses(), &[(0, ratio(1, 1))]);
    }
}
