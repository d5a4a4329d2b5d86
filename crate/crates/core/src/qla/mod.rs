//! Dense complex linear algebra for small bipartite systems.
//!
//! Dimensions here are desk scale (`D = dA·dB ≤ 36`), so everything is dense
//! and allocation-happy. Eigen- and singular-value decompositions come back in
//! a fixed order with a fixed phase convention so that every downstream result
//! is reproducible run to run.

mod linalg;
mod state;
mod subspace;

pub use linalg::{
    c64, dagger, fix_phase, hermitian_eigen, hermitian_part, inner, max_abs, norm, outer, partial_trace,
    partial_transpose, psd_part, reshape, tensor, tensor_vec, trace_product, unreshape, CMatrix,
    CVector, HermitianEigen, Subsystem,
};
pub use state::{schmidt_decompose, BipartiteDims, DensityMatrix, PureState, SchmidtData};
pub use subspace::{mutually_orthogonal, support_projector, Subspace};
pub(crate) use subspace::{max_overlap, min_eigenvalue_on};

/// Maximum tolerated `‖M − M†‖_max` for a density matrix.
pub const TOL_HERM: f64 = 1e-9;
/// Most negative eigenvalue tolerated for a density matrix.
pub const TOL_PSD: f64 = 1e-9;
/// Maximum tolerated `|Tr ρ − 1|`.
pub const TOL_TRACE: f64 = 1e-9;
/// Maximum tolerated `|‖ψ‖₂ − 1|` for pure states.
pub const TOL_NORM: f64 = 1e-9;
/// Schmidt reconstruction tolerance.
pub const TOL_RECON: f64 = 1e-10;
/// Maximum deviation of a subspace basis Gram matrix from the identity.
pub const TOL_ORTH: f64 = 1e-10;
/// Default relative eigenvalue cutoff used to extract supports.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
