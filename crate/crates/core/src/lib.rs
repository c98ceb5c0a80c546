//! Exact analysis of feature-importance scores as functions of coalition
//! value functions.
//!
//! A value function assigns a real number to every subset of a feature set.
//! This crate stores it densely over all `2^n` subsets ([`ValueTable`]) and
//! builds everything else on top of that table:
//!
//! * [`importance`]: Bivariate, Ablation, Shapley and MCI scores, grouped
//!   (meta-feature) scores and a linearity probe.
//! * [`separability`]: separable-set tests and the unique maximal partition
//!   into separable sets, computed from the Möbius (Harsanyi dividend)
//!   interaction graph and cross-checked by an exhaustive oracle.
//! * [`axioms`]: mechanical checkers for the importance axioms, each
//!   returning a replayable witness on failure.
//! * [`sample_space`]: weighted collections of local tables and the
//!   local/global consistency checks.
//! * [`dataset`]: value tables from raw data via intercept-free weighted
//!   least-squares R².
//! * [`scenarios`]: deterministic reproductions of the worked examples.
//! * [`io`] and [`report`]: file formats and report rendering used by the CLI.

pub mod axioms;
pub mod dataset;
mod error;
pub mod importance;
pub mod io;
pub mod report;
pub mod sample_space;
pub mod scenarios;
pub mod separability;
pub mod subset;

pub use error::{Error, Result};
pub use importance::{ImportanceVector, ScoreMethod};
pub use separability::{Partition, SeparabilityReport};
pub use subset::{FeatureIndex, MobiusTable, SubsetMask, Tolerance, ValueTable};
