//! Exact analysis of stochastic flows of maps on a finite space
//! `M = {1..m}`.
//!
//! A flow here is the composition semigroup of i.i.d. random self-maps
//! drawn from a [`dist::MapDistribution`]. The library lifts such a flow
//! to its n-point Markov chain, projects transition matrices and
//! invariant measures between levels, detects the exact level at which
//! two flows' invariant-measure supports split, and computes the exact
//! degrees of freedom left to a map distribution by prescribed k-point
//! transition probabilities.
//!
//! Analysis paths run entirely in arbitrary-precision rational
//! arithmetic; floating point is confined to the Monte Carlo simulator
//! in [`sim`].

pub mod birkhoff;
pub mod chain;
pub mod constraint;
pub mod dist;
pub mod error;
pub mod flip;
pub mod invariant;
pub mod linalg;
pub mod maps;
pub mod ratio;
pub mod sim;
pub mod space;

pub use chain::{
    check_consistency, consistency_against, first_characteristic_divergence, kpoint_probability,
    project_matrix, transition_row, ConsistencyReport, ProjectionPair, TransitionMatrix,
};
pub use dist::{DistMode, MapDistribution};
pub use error::{Error, Result};
pub use invariant::{
    check_projection_invariance, detect_bifurcation_level, is_stationary, recurrent_classes,
    seeded_invariant_measure, stationary_distribution, supports_homeomorphic, BifurcationReport,
    InvariantMeasure, SupportProfile,
};
pub use maps::MapTable;
pub use ratio::Ratio;
pub use space::{FiniteSpace, PointTuple};
