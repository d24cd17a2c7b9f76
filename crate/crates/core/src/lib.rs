//! Statistical significance of triclusters in three-way tensor data.
//!
//! The crate estimates how likely a tricluster's pattern is under a null
//! model of the data (variables and contexts mutually independent,
//! mutually dependent, or temporally contiguous), turns that probability
//! into a binomial-tail p-value, optionally corrects it for the variables
//! the pattern could have spanned, and controls the false discovery rate
//! across a batch with Benjamini-Hochberg.
//!
//! Modules:
//! * [`tensor`] data model, I/O, discretization and PAA.
//! * [`estimation`] empirical marginals, joints, transitions and the
//!   identically-distributed gate.
//! * [`significance`] pattern probability, binomial tail, span correction,
//!   minimum observations and batch assessment.
//! * [`multiplicity`] Benjamini-Hochberg and significance tiers.
//! * [`synthgen`] planted-tricluster generator.
//! * [`harness`] oracles, a naive miner and the minimum-observation grid.

pub mod error;
pub mod estimation;
pub mod format;
pub mod harness;
pub mod multiplicity;
pub mod significance;
pub mod synthgen;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{Category, Pattern, Tensor3, TensorBuilder, Tricluster, Value, VariableDomain};
