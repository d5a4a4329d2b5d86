//! Entanglement-based necessary conditions for perfect LOCC discrimination
//! of mutually orthogonal bipartite quantum states.
//!
//! The crate evaluates the hierarchy of upper bounds on the number of
//! perfectly locally distinguishable states (pure-state chain, maximal
//! support entanglement, optimized mixed-state chain) together with a
//! PPT-relaxed POVM feasibility test. Every relaxation used (PPT in place of
//! separability, heuristic maxima in place of exact ones) is recorded in the
//! reports so that a weakened bound is never mistaken for the exact one.
//!
//! Module map:
//! - [`qla`]: dense complex linear algebra for small bipartite systems.
//! - [`measures`]: pure-state closed forms, entropy, PPT global robustness.
//! - [`subspaces`]: entanglement extrema and product vectors inside subspaces.
//! - [`bounds`]: bound chains, `d(σ)` estimates, POVM feasibility, `analyze`.
//! - [`ensembles`]: catalog constructions and the JSON ensemble file format.

pub mod bounds;
pub mod ensembles;
mod error;
pub mod json;
pub mod measures;
pub mod qla;
mod solver;
pub mod subspaces;

pub use error::{Error, Result};
pub use solver::{Decision, InnerOptions};
pub use qla::{BipartiteDims, CMatrix, CVector, DensityMatrix, PureState, SchmidtData, Subspace};
