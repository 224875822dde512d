//! Probability distributions over self-maps: the generator of the flow.
//!
//! A distribution is canonical by construction: atoms sorted by the map's
//! lexicographic index, zero weights dropped, exact unit total mass. The
//! JSON file format mirrors this canonical form byte-for-byte, so equal
//! distributions serialize identically.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::MapTable;
use crate::ratio::{check_unit_mass, format_ratio, parse_ratio, Ratio};
use crate::space::FiniteSpace;

/// Which map space the atoms live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistMode {
    /// All `m^m` self-maps are admissible.
    AllMaps,
    /// Only the `m!` bijections are admissible.
    BijectionsOnly,
}

impl DistMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DistMode::AllMaps => "all-maps",
            DistMode::BijectionsOnly => "bijections-only",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "all-maps" => Ok(DistMode::AllMaps),
            "bijections-only" => Ok(DistMode::BijectionsOnly),
            other => Err(Error::Input(format!(
                "unknown mode {other:?}; expected \"all-maps\" or \"bijections-only\""
            ))),
        }
    }
}

/// A finitely supported probability measure on the maps of `{1..m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapDistribution {
    m: usize,
    mode: DistMode,
    atoms: Vec<(MapTable, Ratio)>,
}

impl MapDistribution {
    /// Validates and canonicalizes: weights nonnegative, exact total mass 1,
    /// mode consistency; duplicate atoms merged, zero weights dropped, atoms
    /// sorted by map index.
    pub fn new(m: usize, mode: DistMode, atoms: Vec<(MapTable, Ratio)>) -> Result<Self> {
        FiniteSpace::new(m)?;
        let mut merged: std::collections::BTreeMap<usize, (MapTable, Ratio)> =
            std::collections::BTreeMap::new();
        let mut total = Ratio::zero();
        for (map, weight) in atoms {
            if map.m() != m {
                return Err(Error::Domain(format!(
                    "atom over m={} in distribution over m={m}",
                    map.m()
                )));
            }
            if weight.is_negative() {
                return Err(Error::Domain(format!(
                    "negative weight {} on map {:?}",
                    format_ratio(&weight),
                    map.images()
                )));
            }
            if mode == DistMode::BijectionsOnly && !map.is_bijection() {
                return Err(Error::Mode(format!(
                    "map {:?} is not a bijection but the mode is bijections-only",
                    map.images()
                )));
            }
            total += &weight;
            let entry = merged.entry(map.index()).or_insert_with(|| (map, Ratio::zero()));
            entry.1 += weight;
        }
        check_unit_mass(&total)?;
        let atoms = merged
            .into_values()
            .filter(|(_, w)| !w.is_zero())
            .collect();
        Ok(MapDistribution { m, mode, atoms })
    }

    /// Point mass at a single map.
    pub fn dirac(map: MapTable) -> Result<Self> {
        let m = map.m();
        let mode = if map.is_bijection() { DistMode::BijectionsOnly } else { DistMode::AllMaps };
        MapDistribution::new(m, mode, vec![(map, crate::ratio::one())])
    }

    /// Uniform distribution on a set of maps.
    pub fn uniform(m: usize, mode: DistMode, support: &[MapTable]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Domain("uniform distribution needs a nonempty support".into()));
        }
        let w = Ratio::new(1.into(), (support.len() as i64).into());
        MapDistribution::new(m, mode, support.iter().map(|f| (f.clone(), w.clone())).collect())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mode(&self) -> DistMode {
        self.mode
    }

    /// Atoms in canonical order (ascending map index), all weights positive.
    pub fn atoms(&self) -> &[(MapTable, Ratio)] {
        &self.atoms
    }

    pub fn support(&self) -> impl Iterator<Item = &MapTable> {
        self.atoms.iter().map(|(f, _)| f)
    }

    /// Weight of a map (zero off the support).
    pub fn weight_of(&self, map: &MapTable) -> Ratio {
        let idx = map.index();
        match self.atoms.binary_search_by_key(&idx, |(f, _)| f.index()) {
            Ok(pos) => self.atoms[pos].1.clone(),
            Err(_) => Ratio::zero(),
        }
    }

    pub fn is_bijections_only(&self) -> bool {
        self.mode == DistMode::BijectionsOnly
    }

    /// Canonical JSON form. Byte-stable: equal distributions render to
    /// identical bytes.
    pub fn to_json_string(&self) -> String {
        let file = DistFile {
            m: self.m,
            mode: self.mode.as_str().to_string(),
            atoms: self
                .atoms
                .iter()
                .map(|(f, w)| AtomFile { map: f.images().to_vec(), weight: format_ratio(w) })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: DistFile = serde_json::from_str(s)
            .map_err(|e| Error::Input(format!("invalid distribution file: {e}")))?;
        let mode = DistMode::parse(&file.mode)?;
        let space = FiniteSpace::new(file.m)?;
        let mut atoms = Vec::with_capacity(file.atoms.len());
        for atom in file.atoms {
            let map = MapTable::new(space, atom.map)?;
            let weight = parse_ratio(&atom.weight)?;
            atoms.push((map, weight));
        }
        MapDistribution::new(file.m, mode, atoms)
    }

    pub fn read_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn write_file(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
    }
}

#[derive(Serialize, Deserialize)]
struct DistFile {
    m: usize,
    mode: String,
    atoms: Vec<AtomFile>,
}

#[derive(Serialize, Deserialize)]
struct AtomFile {
    map: Vec<usize>,
    weight: String,
}
