//! Order and disorder measures for finite binary strings, with an
//! application to binary-encoded lattice knots.
//!
//! The core measure is BiEntropy: a weighted average of the Shannon
//! entropies of a string and its binary derivatives, which — unlike plain
//! Shannon entropy — penalises periodic structure. The cyclic (knot)
//! variants are invariant under rotation of the input, so a closed loop can
//! be measured without choosing a start point.
//!
//! On top of the measures sit the tools of a reproducible measurement
//! pipeline for knots on the simple cubic lattice:
//!
//! - [`bitstring`]: packed bit strings, binary derivatives, periodicity.
//! - [`entropy`]: Shannon entropy and the BiEntropy family.
//! - [`lattice`]: NEWSUD direction strings and polygon validation.
//! - [`encoding`]: random injective direction-to-bits encoding tables.
//! - [`dataset`]: annotated knot datasets and randomised controls.
//! - [`experiment`]: the (items x encodings) grid, aggregation, grouping.
//! - [`stats`]: Pearson correlation and Welch's t-test.
//!
//! Everything downstream of a seed is deterministic; grids may be computed
//! in parallel but always assemble in a canonical order, so outputs are
//! byte-stable across runs and thread counts.

pub mod bitstring;
pub mod dataset;
pub mod encoding;
pub mod entropy;
pub mod experiment;
pub mod lattice;
pub mod rng;
pub mod stats;

pub use bitstring::{BitString, DerivativeMode};
pub use dataset::{ControlMode, KnotDataset, KnotRecord};
pub use encoding::{EncodingSet, EncodingTable};
pub use entropy::{bien, bientropy, kbien, ktbien, shannon, tbien, WeightScheme};
pub use experiment::{Grouping, Measure, Observations, ResultTable};
pub use lattice::{Direction, DirectionSequence};

/// Crate version, recorded in output provenance blocks.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
