//! Induces if-then decision rules from tabular data via rough set
//! approximations, with a genetic algorithm tuning the discretization cut
//! points of numeric attributes to maximise rough set accuracy.
//!
//! The pipeline runs: load (or synthesize) a table, clean it, discretize the
//! numeric attributes into bins, partition the records into equivalence
//! classes of indiscernible objects, compute lower/upper approximations of
//! the decision classes, and extract certain and plausibility-weighted rules
//! from the pure and mixed attribute patterns. [`evolve`] searches the cut
//! point space; [`pipeline`] wires the equal-width baseline against the
//! optimised cuts end to end.
//!
//! All numeric machinery is generic over a [`Scalar`] float type; the
//! `*64` aliases at the crate root fix `f64` for ordinary use.

pub mod discretize;
pub mod error;
pub mod evolve;
pub mod pipeline;
pub mod rough;
pub mod rules;
mod scalar;
pub mod synth;
pub mod table;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` instantiations of the generic core types.
pub type Schema64 = table::Schema<f64>;
pub type Table64 = table::InformationTable<f64>;
pub type Cuts64 = discretize::CutPointSet<f64>;
pub type Discretized64 = discretize::DiscretizedTable<f64>;
pub type RuleSet64 = rules::RuleSet<f64>;
pub type SynthSpec64 = synth::SynthSpec<f64>;
pub type GaConfig64 = evolve::GaConfig<f64>;
pub type History64 = evolve::EvolutionHistory<f64>;
