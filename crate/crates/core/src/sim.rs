//! Monte Carlo side: the discrete composition walk, its Poisson
//! subordination, the 0/1 linear embedding, and empirical transition
//! estimates used to cross-check the exact matrices.
//!
//! Map identities stay exact; floating point appears only in jump times
//! and estimates. All sampling is ChaCha12-based and splits streams
//! deterministically: stream 0 drives the discrete walk, stream 1 the
//! Poisson clock, and stream `2 + i` the i-th source row of an empirical
//! estimate, so results never depend on execution order.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::dist::MapDistribution;
use crate::error::{Error, Result};
use crate::maps::MapTable;
use crate::ratio::Ratio;
use crate::space::PointTuple;

const WALK_STREAM: u64 = 0;
const CLOCK_STREAM: u64 = 1;
const ESTIMATE_STREAM_BASE: u64 = 2;

fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Inverse-CDF sampler over the canonical (sorted) atom order.
///
/// Draws a 64-bit uniform `u = k / 2^64` and compares it against exact
/// rational cumulative boundaries, so atom selection is independent of
/// any floating-point rounding.
struct AtomSampler<'a> {
    atoms: &'a [(MapTable, Ratio)],
    boundaries: Vec<Ratio>,
}

impl<'a> AtomSampler<'a> {
    fn new(nu: &'a MapDistribution) -> Self {
        let mut acc = crate::ratio::zero();
        let boundaries = nu
            .atoms()
            .iter()
            .map(|(_, w)| {
                acc += w;
                acc.clone()
            })
            .collect();
        AtomSampler { atoms: nu.atoms(), boundaries }
    }

    fn draw(&self, rng: &mut ChaCha12Rng) -> &'a MapTable {
        let k: u64 = rng.random();
        let u = Ratio::new(BigInt::from(k), BigInt::from(1u128 << 64));
        for (i, bound) in self.boundaries.iter().enumerate() {
            if u < *bound {
                return &self.atoms[i].0;
            }
        }
        // u < 1 and the last boundary is exactly 1.
        &self.atoms.last().expect("validated distribution is nonempty").0
    }
}

/// Running compositions `R_1, ..., R_steps` of i.i.d. draws from `nu`
/// (`R_j = xi_j . R_{j-1}`). Deterministic in `seed`.
pub fn sample_discrete_walk(nu: &MapDistribution, steps: usize, seed: u64) -> Vec<MapTable> {
    let sampler = AtomSampler::new(nu);
    let mut rng = stream_rng(seed, WALK_STREAM);
    let mut current = MapTable::identity(nu.m()).expect("m >= 2");
    let mut walk = Vec::with_capacity(steps);
    for _ in 0..steps {
        let xi = sampler.draw(&mut rng);
        current = xi.compose(&current).expect("same space");
        walk.push(current.clone());
    }
    walk
}

/// Jump times of a rate-`lambda` Poisson process on `[0, horizon]`:
/// exponential inter-arrivals by inverse CDF, truncated at the horizon.
pub fn poisson_subordinate(rate: f64, horizon: f64, seed: u64) -> Result<Vec<f64>> {
    if !rate.is_finite() || rate <= 0.0 {
        return Err(Error::Domain(format!("rate must be positive, got {rate}")));
    }
    if !horizon.is_finite() || horizon < 0.0 {
        return Err(Error::Domain(format!("horizon must be nonnegative, got {horizon}")));
    }
    let mut rng = stream_rng(seed, CLOCK_STREAM);
    let mut times = Vec::new();
    let mut t = 0.0_f64;
    loop {
        let u: f64 = rng.random(); // [0, 1)
        t += -(1.0 - u).ln() / rate;
        if t > horizon {
            return Ok(times);
        }
        times.push(t);
    }
}

/// 0/1 matrix with exactly one 1 per column: column `j` is `e_{f(j)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroOneMatrix {
    m: usize,
    rows: Vec<Vec<u8>>,
}

impl ZeroOneMatrix {
    pub fn identity(m: usize) -> Self {
        let mut rows = vec![vec![0u8; m]; m];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1;
        }
        ZeroOneMatrix { m, rows }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.rows[i][j]
    }

    pub fn matmul(&self, other: &ZeroOneMatrix) -> Result<ZeroOneMatrix> {
        if self.m != other.m {
            return Err(Error::Domain("matrix sizes differ".into()));
        }
        let m = self.m;
        let mut rows = vec![vec![0u8; m]; m];
        for i in 0..m {
            for j in 0..m {
                let mut acc = 0u32;
                for l in 0..m {
                    acc += u32::from(self.rows[i][l] & other.rows[l][j]);
                }
                debug_assert!(acc <= 1, "embedding products stay 0/1");
                rows[i][j] = acc.min(1) as u8;
            }
        }
        Ok(ZeroOneMatrix { m, rows })
    }

    /// `K^T K = I`, i.e. the columns are orthonormal.
    pub fn is_orthogonal(&self) -> bool {
        let m = self.m;
        for a in 0..m {
            for b in 0..m {
                let dot: u32 = (0..m).map(|i| u32::from(self.rows[i][a] & self.rows[i][b])).sum();
                let expected = u32::from(a == b);
                if dot != expected {
                    return false;
                }
            }
        }
        true
    }

    /// Column rank over the rationals (0/1 structure makes this the
    /// number of distinct nonzero columns here, but compute it honestly).
    pub fn rank(&self) -> usize {
        let rows: Vec<Vec<Ratio>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&x| Ratio::from_integer(x.into())).collect())
            .collect();
        crate::linalg::rank_of_rational_rows(&rows)
    }
}

/// The linear embedding `K(f)`: sends `e_j` to `e_{f(j)}`; orthogonal
/// exactly when `f` is a bijection.
pub fn embed_linear(f: &MapTable) -> ZeroOneMatrix {
    let m = f.m();
    let mut rows = vec![vec![0u8; m]; m];
    for j in 1..=m {
        rows[f.image_of(j) - 1][j - 1] = 1;
    }
    ZeroOneMatrix { m, rows }
}

/// One simulated continuous-time path: Poisson jump times plus the
/// composed map after each jump (right-continuous piecewise-constant
/// convention), optionally with the embedded matrices.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub seed: u64,
    pub rate: f64,
    pub horizon: f64,
    pub jump_times: Vec<f64>,
    /// `R_n` after the n-th jump.
    pub maps: Vec<MapTable>,
    pub embedded: Option<Vec<ZeroOneMatrix>>,
}

impl TrajectorySample {
    /// JSON-lines export: one record per jump.
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            t: f64,
            map: &'a [usize],
            #[serde(skip_serializing_if = "Option::is_none")]
            k: Option<&'a [Vec<u8>]>,
        }
        let mut out = String::new();
        for (i, t) in self.jump_times.iter().enumerate() {
            let record = Record {
                t: *t,
                map: self.maps[i].images(),
                k: self.embedded.as_ref().map(|ks| ks[i].rows()),
            };
            out.push_str(&serde_json::to_string(&record).expect("serialization cannot fail"));
            out.push('\n');
        }
        out
    }
}

/// Poisson-subordinated composition walk `X_t = K(R_{pi_t})`.
pub fn simulate_flow(
    nu: &MapDistribution,
    rate: f64,
    horizon: f64,
    seed: u64,
    embed: bool,
) -> Result<TrajectorySample> {
    let jump_times = poisson_subordinate(rate, horizon, seed)?;
    let maps = sample_discrete_walk(nu, jump_times.len(), seed);
    let embedded = embed.then(|| maps.iter().map(embed_linear).collect());
    Ok(TrajectorySample { seed, rate, horizon, jump_times, maps, embedded })
}

/// Monte Carlo estimate of one-step n-point transition rows.
#[derive(Debug, Clone)]
pub struct EmpiricalEstimate {
    pub m: usize,
    pub n: usize,
    pub steps_per_row: usize,
    pub seed: u64,
    /// Per source index: sorted target counts.
    pub rows: Vec<(usize, Vec<(usize, u64)>)>,
}

impl EmpiricalEstimate {
    pub fn estimate(&self, source: usize, target: usize) -> Option<f64> {
        let row = self
            .rows
            .iter()
            .find(|(s, _)| *s == source)
            .map(|(_, counts)| counts)?;
        let count = row
            .binary_search_by_key(&target, |(c, _)| *c)
            .map(|pos| row[pos].1)
            .unwrap_or(0);
        Some(count as f64 / self.steps_per_row as f64)
    }

    /// Largest |empirical - exact| over the sampled rows, scanning the
    /// union of supports.
    pub fn max_abs_error_vs(&self, exact: &crate::chain::TransitionMatrix) -> f64 {
        let mut worst = 0.0_f64;
        for (source, counts) in &self.rows {
            let exact_row = exact.row(*source);
            let mut cols: Vec<usize> = exact_row.iter().map(|(c, _)| *c).collect();
            cols.extend(counts.iter().map(|(c, _)| *c));
            cols.sort_unstable();
            cols.dedup();
            for col in cols {
                let est = self.estimate(*source, col).unwrap_or(0.0);
                let truth = exact.get(*source, col).to_f64().unwrap_or(f64::NAN);
                worst = worst.max((est - truth).abs());
            }
        }
        worst
    }

    /// Sparse text export with float estimates.
    pub fn to_sparse_text(&self) -> String {
        let mut out = format!("# m={} n={} format=npoint-sparse-v1\n", self.m, self.n);
        out.push_str(&format!("# empirical steps={} seed={}\n", self.steps_per_row, self.seed));
        for (source, counts) in &self.rows {
            for (target, count) in counts {
                let est = *count as f64 / self.steps_per_row as f64;
                out.push_str(&format!("{source}\t{target}\t{est}\n"));
            }
        }
        out
    }
}

/// The default source set for estimation: the recurrent class reached
/// from a seed, as decoded tuples.
pub fn seed_class_sources(nu: &MapDistribution, seed: &PointTuple) -> Result<Vec<PointTuple>> {
    let mu = crate::invariant::seeded_invariant_measure(nu, seed)?;
    let space = crate::space::FiniteSpace::new(nu.m())?;
    mu.support()
        .into_iter()
        .map(|idx| space.decode(mu.level(), idx))
        .collect()
}

/// Estimates one-step transition probabilities out of each source tuple
/// by `steps` independent single-map draws per row. Each row's stream is
/// keyed by the source's tuple index, so neither caller ordering nor
/// row parallelism can change the counts.
pub fn empirical_transition_estimate(
    nu: &MapDistribution,
    steps: usize,
    seed: u64,
    sources: &[PointTuple],
) -> Result<EmpiricalEstimate> {
    if steps == 0 {
        return Err(Error::Domain("need at least one step per row".into()));
    }
    if sources.is_empty() {
        return Err(Error::Domain("need at least one source tuple".into()));
    }
    let n = sources[0].level();
    for s in sources {
        if s.m() != nu.m() || s.level() != n {
            return Err(Error::Domain(
                "all source tuples must share the distribution's m and one level".into(),
            ));
        }
    }
    let sampler = AtomSampler::new(nu);
    let mut rows = Vec::with_capacity(sources.len());
    for source in sources {
        let src_idx = source.index();
        let mut rng = stream_rng(seed, ESTIMATE_STREAM_BASE + src_idx as u64);
        let mut counts: std::collections::BTreeMap<usize, u64> = std::collections::BTreeMap::new();
        for _ in 0..steps {
            let f = sampler.draw(&mut rng);
            *counts.entry(f.apply_index(n, src_idx)).or_insert(0) += 1;
        }
        rows.push((src_idx, counts.into_iter().collect()));
    }
    rows.sort_by_key(|(s, _)| *s);
    Ok(EmpiricalEstimate { m: nu.m(), n, steps_per_row: steps, seed, rows })
}
