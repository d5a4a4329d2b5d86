use std::fmt;
use std::sync::OnceLock;

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use super::linalg::{c64, fix_phase, hermitian_eigen, lex_cmp, max_abs, outer, reshape, tensor_vec};
use super::linalg::{partial_trace, partial_transpose, CMatrix, CVector, HermitianEigen, Subsystem};
use super::{TOL_HERM, TOL_NORM, TOL_PSD, TOL_TRACE};
use crate::{Error, Result};

/// Schmidt amplitudes at or below this are treated as exact zeros.
const SCHMIDT_ZERO: f64 = 1e-13;

/// Local dimensions of a bipartite Hilbert space `C^dA ⊗ C^dB`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 2]", into = "[usize; 2]")]
pub struct BipartiteDims {
    da: usize,
    db: usize,
}

impl BipartiteDims {
    pub fn new(da: usize, db: usize) -> Result<Self> {
        if da < 2 || db < 2 {
            return Err(Error::InvalidDims { da, db });
        }
        Ok(Self { da, db })
    }

    pub fn da(&self) -> usize {
        self.da
    }

    pub fn db(&self) -> usize {
        self.db
    }

    /// Total dimension `D = dA·dB`.
    pub fn total(&self) -> usize {
        self.da * self.db
    }

    pub fn min_local(&self) -> usize {
        self.da.min(self.db)
    }

    /// Computational basis vector `|i⟩⊗|j⟩`.
    pub fn basis_ket(&self, i: usize, j: usize) -> CVector {
        let mut v = CVector::zeros(self.total());
        v[i * self.db + j] = c64(1.0, 0.0);
        v
    }
}

impl TryFrom<[usize; 2]> for BipartiteDims {
    type Error = Error;

    fn try_from(v: [usize; 2]) -> Result<Self> {
        BipartiteDims::new(v[0], v[1])
    }
}

impl From<BipartiteDims> for [usize; 2] {
    fn from(d: BipartiteDims) -> Self {
        [d.da, d.db]
    }
}

impl fmt::Display for BipartiteDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}⊗{}", self.da, self.db)
    }
}

/// Positive semidefinite, unit-trace operator on `C^dA ⊗ C^dB`.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dims: BipartiteDims,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates and stores the Hermitian part of `mat`.
    pub fn new(dims: BipartiteDims, mat: CMatrix) -> Result<Self> {
        let d = dims.total();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "density matrix for {dims} must be {d}x{d}, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        for r in 0..d {
            for c in 0..d {
                let z = mat[(r, c)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        let asym = max_abs(&(&mat - mat.adjoint()));
        if asym > TOL_HERM {
            return Err(Error::physics(
                None,
                format!("not Hermitian: max |M - M†| = {asym:e}"),
                "tol_herm",
                TOL_HERM,
            ));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::physics(
                None,
                format!("trace is {} + {}i, expected 1", tr.re, tr.im),
                "tol_trace",
                TOL_TRACE,
            ));
        }
        let mat = super::hermitian_part(&mat);
        let min = hermitian_eigen(&mat).min();
        if min < -TOL_PSD {
            return Err(Error::physics(
                None,
                format!("not positive semidefinite: min eigenvalue {min:e}"),
                "tol_psd",
                TOL_PSD,
            ));
        }
        Ok(Self { dims, mat })
    }

    /// `|ψ⟩⟨ψ|`
    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            dims: psi.dims,
            mat: outer(&psi.vec),
        }
    }

    pub fn maximally_mixed(dims: BipartiteDims) -> Self {
        let d = dims.total();
        Self {
            dims,
            mat: CMatrix::identity(d, d) * c64(1.0 / d as f64, 0.0),
        }
    }

    /// Convex mixture `Σ p_k |v_k⟩⟨v_k|` of normalized vectors.
    pub fn mixture(dims: BipartiteDims, terms: &[(f64, CVector)]) -> Result<Self> {
        let d = dims.total();
        let mut mat = CMatrix::zeros(d, d);
        for (p, v) in terms {
            if v.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "mixture component has length {}, expected {d}",
                    v.len()
                )));
            }
            mat += outer(v) * c64(*p, 0.0);
        }
        Self::new(dims, mat)
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn eigen(&self) -> HermitianEigen {
        hermitian_eigen(&self.mat)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigen().max()
    }

    /// Number of eigenvalues above `rank_tol` times the largest.
    pub fn rank(&self, rank_tol: f64) -> usize {
        let eig = self.eigen();
        let cut = rank_tol * eig.max();
        eig.values.iter().filter(|&&l| l > cut).count()
    }

    /// `Tr(σ τ)`
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        super::trace_product(&self.mat, &other.mat)
    }

    pub fn partial_trace(&self, which: Subsystem) -> CMatrix {
        partial_trace(&self.mat, &self.dims, which).expect("dims checked at construction")
    }

    pub fn partial_transpose(&self) -> CMatrix {
        partial_transpose(&self.mat, &self.dims).expect("dims checked at construction")
    }

    pub fn is_ppt(&self, tol: f64) -> bool {
        hermitian_eigen(&self.partial_transpose()).min() >= -tol
    }

    /// The dominant eigenvector when the state is rank one at `rank_tol`.
    pub fn as_pure(&self, rank_tol: f64) -> Option<PureState> {
        let eig = self.eigen();
        if eig.values.iter().skip(1).any(|&l| l > rank_tol * eig.max()) {
            return None;
        }
        Some(PureState {
            dims: self.dims,
            vec: eig.vector(0),
            schmidt: OnceLock::new(),
        })
    }
}

/// Unit vector on `C^dA ⊗ C^dB`; its Schmidt decomposition is computed lazily
/// and cached.
#[derive(Debug, Clone)]
pub struct PureState {
    dims: BipartiteDims,
    vec: CVector,
    schmidt: OnceLock<SchmidtData>,
}

impl PureState {
    /// Accepts `vec` only if it is normalized within `tol_norm`.
    pub fn new(dims: BipartiteDims, vec: CVector) -> Result<Self> {
        check_len(&dims, &vec)?;
        check_finite(&vec)?;
        let n = vec.norm();
        if (n - 1.0).abs() > TOL_NORM {
            return Err(Error::physics(
                None,
                format!("vector norm is {n}, expected 1"),
                "tol_norm",
                TOL_NORM,
            ));
        }
        Ok(Self {
            dims,
            vec,
            schmidt: OnceLock::new(),
        })
    }

    pub fn normalized(dims: BipartiteDims, vec: CVector) -> Result<Self> {
        check_len(&dims, &vec)?;
        check_finite(&vec)?;
        let n = vec.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            dims,
            vec: vec / c64(n, 0.0),
            schmidt: OnceLock::new(),
        })
    }

    /// `|a⟩⊗|b⟩`, normalized.
    pub fn product(dims: BipartiteDims, a: &CVector, b: &CVector) -> Result<Self> {
        if a.len() != dims.da() || b.len() != dims.db() {
            return Err(Error::DimensionMismatch(format!(
                "local vectors of length {} and {} do not match {dims}",
                a.len(),
                b.len()
            )));
        }
        Self::normalized(dims, tensor_vec(a, b))
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn vector(&self) -> &CVector {
        &self.vec
    }

    pub fn schmidt(&self) -> &SchmidtData {
        self.schmidt.get_or_init(|| schmidt_of(&self.vec, &self.dims))
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

fn check_len(dims: &BipartiteDims, vec: &CVector) -> Result<()> {
    if vec.len() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "state vector for {dims} must have length {}, got {}",
            dims.total(),
            vec.len()
        )));
    }
    Ok(())
}

fn check_finite(vec: &CVector) -> Result<()> {
    match vec.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        Some(k) => Err(Error::NonFinite { row: k, col: 0 }),
        None => Ok(()),
    }
}

/// `|ψ⟩ = Σ_k √λ_k |u_k⟩⊗|v_k⟩` with `λ` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtData {
    /// Squared Schmidt coefficients; they sum to one.
    pub coefficients: Vec<f64>,
    pub left: Vec<CVector>,
    pub right: Vec<CVector>,
}

impl SchmidtData {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn max_coefficient(&self) -> f64 {
        self.coefficients[0]
    }

    /// `Σ_k √λ_k`, the nuclear norm of the coefficient matrix.
    pub fn amplitude_sum(&self) -> f64 {
        self.coefficients.iter().map(|l| l.sqrt()).sum()
    }

    pub fn reconstruct(&self) -> CVector {
        let n = self.left[0].len() * self.right[0].len();
        let mut out = CVector::zeros(n);
        for k in 0..self.rank() {
            out += tensor_vec(&self.left[k], &self.right[k]) * c64(self.coefficients[k].sqrt(), 0.0);
        }
        out
    }
}

/// Schmidt decomposition of a pure state.
pub fn schmidt_decompose(psi: &PureState) -> Result<SchmidtData> {
    if psi.vec.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(psi.schmidt().clone())
}

fn schmidt_of(vec: &CVector, dims: &BipartiteDims) -> SchmidtData {
    let m = reshape(vec, dims);
    let svd = SVD::new(m, true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V†");
    let mut terms: Vec<(f64, CVector, CVector)> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > SCHMIDT_ZERO)
        .map(|k| {
            let mut left = u.column(k).into_owned();
            let mut right = v_t.row(k).transpose();
            // Move the phase freedom onto the right vector.
            let before = left.clone();
            fix_phase(&mut left);
            let phase = left
                .iter()
                .zip(before.iter())
                .find(|(_, b)| b.norm() > 0.0)
                .map(|(a, b)| b / a)
                .unwrap_or(c64(1.0, 0.0));
            right *= phase;
            (svd.singular_values[k], left, right)
        })
        .collect();
    let total: f64 = terms.iter().map(|t| t.0 * t.0).sum();
    terms.sort_by(|a, b| {
        let tie = (a.0 - b.0).abs() <= 1e-12 * a.0.max(b.0);
        if tie {
            lex_cmp(&a.1, &b.1).reverse()
        } else {
            b.0.total_cmp(&a.0)
        }
    });
    let coefficients = terms.iter().map(|t| t.0 * t.0 / total).collect();
    let (left, right) = terms.into_iter().map(|t| (t.1, t.2 / c64(total.sqrt(), 0.0))).unzip();
    SchmidtData {
        coefficients,
        left,
        right,
    }
}
