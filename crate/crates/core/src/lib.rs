//! Data-driven geometric control.
//!
//! This crate computes the fundamental invariant subspaces of geometric
//! control theory (V*, S*, R*) for an unknown discrete-time LTI system
//! directly from experimental input/state/output data, along with
//! subspace-confining feedback gains and invariant zeros. A model-based
//! oracle implements the classical recursive algorithms so that every
//! data-driven result can be verified, and an attack designer shows how a
//! nontrivial R* yields input sequences that perturb the state without
//! touching the monitored output.
//!
//! Module map:
//! - [`linalg`], [`subspace`]: tolerance-aware dense primitives and
//!   subspace operations.
//! - [`lti`]: ground-truth system, simulation, data collection, and the
//!   persistency-of-excitation check.
//! - [`oracle`]: model-based V*/S*/R*, friends, and invariant zeros.
//! - [`data_driven`]: the closed-form data-driven formulas.
//! - [`attack`]: stealthy attack design and simulation.
//! - [`io`], [`verify`], [`systems`]: formats, the randomized
//!   oracle-agreement suite, and builtin systems.

pub mod attack;
pub mod data_driven;
pub mod error;
pub mod io;
pub mod linalg;
pub mod lti;
pub mod oracle;
pub mod subspace;
pub mod systems;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{Mat, Tolerances, Vector};
pub use subspace::Subspace;
