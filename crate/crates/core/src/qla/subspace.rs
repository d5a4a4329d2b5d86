use super::linalg::{c64, hermitian_eigen, outer, CMatrix, CVector};
use super::state::{BipartiteDims, DensityMatrix};
use super::TOL_ORTH;
use crate::{Error, Result};

/// Residual norm below which a Gram–Schmidt candidate is treated as linearly
/// dependent on the vectors already accepted.
const SPAN_DEPENDENCE: f64 = 1e-10;

/// Subspace of `C^dA ⊗ C^dB` held as an orthonormal basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    dims: BipartiteDims,
    basis: Vec<CVector>,
}

impl Subspace {
    /// Wraps an already orthonormal basis, checking its Gram matrix.
    pub fn new(dims: BipartiteDims, basis: Vec<CVector>) -> Result<Self> {
        for (i, v) in basis.iter().enumerate() {
            if v.len() != dims.total() {
                return Err(Error::DimensionMismatch(format!(
                    "basis vector {i} has length {}, expected {}",
                    v.len(),
                    dims.total()
                )));
            }
        }
        for i in 0..basis.len() {
            for j in 0..=i {
                let g = basis[i].dotc(&basis[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - c64(target, 0.0)).norm() > TOL_ORTH {
                    return Err(Error::physics(
                        None,
                        format!("basis Gram entry ({i},{j}) = {g}"),
                        "tol_orth",
                        TOL_ORTH,
                    ));
                }
            }
        }
        Ok(Self { dims, basis })
    }

    /// Orthonormalizes `vectors` (modified Gram–Schmidt with one
    /// reorthogonalization pass) dropping dependent ones.
    pub fn span(dims: BipartiteDims, vectors: &[CVector]) -> Result<Self> {
        let mut basis: Vec<CVector> = Vec::new();
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dims.total() {
                return Err(Error::DimensionMismatch(format!(
                    "spanning vector {i} has length {}, expected {}",
                    v.len(),
                    dims.total()
                )));
            }
            let scale = v.norm();
            if scale == 0.0 {
                continue;
            }
            let mut w = v.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dotc(&w);
                    w -= b * c;
                }
            }
            let n = w.norm();
            if n > SPAN_DEPENDENCE * scale {
                basis.push(w / c64(n, 0.0));
            }
        }
        Ok(Self { dims, basis })
    }

    pub fn full(dims: BipartiteDims) -> Self {
        let d = dims.total();
        let basis = (0..d)
            .map(|k| {
                let mut v = CVector::zeros(d);
                v[k] = c64(1.0, 0.0);
                v
            })
            .collect();
        Self { dims, basis }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CVector] {
        &self.basis
    }

    /// `D×k` matrix whose columns are the basis vectors.
    pub fn basis_matrix(&self) -> CMatrix {
        if self.basis.is_empty() {
            return CMatrix::zeros(self.dims.total(), 0);
        }
        CMatrix::from_columns(&self.basis)
    }

    pub fn projector(&self) -> CMatrix {
        let d = self.dims.total();
        self.basis
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, b| acc + outer(b))
    }

    /// `Σ_k c_k |b_k⟩`
    pub fn embed(&self, coeffs: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dims.total());
        for (b, c) in self.basis.iter().zip(coeffs.iter()) {
            out += b * *c;
        }
        out
    }

    /// `⟨b_k|v⟩` for every basis vector.
    pub fn coefficients(&self, v: &CVector) -> CVector {
        CVector::from_iterator(self.dim(), self.basis.iter().map(|b| b.dotc(v)))
    }

    /// `‖(I − P)v‖`
    pub fn residual(&self, v: &CVector) -> f64 {
        (v - self.embed(&self.coefficients(v))).norm()
    }

    pub fn orthogonal_complement(&self) -> Subspace {
        let mut vectors = self.basis.clone();
        vectors.extend(Subspace::full(self.dims).basis);
        let all = Subspace::span(self.dims, &vectors).expect("lengths agree");
        Subspace {
            dims: self.dims,
            basis: all.basis[self.dim()..].to_vec(),
        }
    }

    /// Normalized projector `P / dim`.
    pub fn normalized_projector(&self) -> Result<DensityMatrix> {
        if self.dim() == 0 {
            return Err(Error::EmptySubspace);
        }
        DensityMatrix::new(self.dims, self.projector() * c64(1.0 / self.dim() as f64, 0.0))
    }
}

/// Span of the eigenvectors of `σ` whose eigenvalue exceeds
/// `rank_tol · λ_max`.
pub fn support_projector(sigma: &DensityMatrix, rank_tol: f64) -> Subspace {
    let eig = sigma.eigen();
    let cut = rank_tol * eig.max();
    let basis = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > cut)
        .map(|(k, _)| eig.vector(k))
        .collect();
    Subspace {
        dims: sigma.dims(),
        basis,
    }
}

/// True iff `max_{i≠j} Tr(σ_i σ_j) ≤ tol`.
pub fn mutually_orthogonal(states: &[DensityMatrix], tol: f64) -> Result<bool> {
    if let Some(first) = states.first() {
        if let Some(bad) = states.iter().find(|s| s.dims() != first.dims()) {
            return Err(Error::DimensionMismatch(format!(
                "ensemble mixes {} and {}",
                first.dims(),
                bad.dims()
            )));
        }
    }
    Ok(max_overlap(states).is_none_or(|(_, _, o)| o <= tol))
}

/// Largest pairwise `Tr(σ_i σ_j)` with its indices.
pub(crate) fn max_overlap(states: &[DensityMatrix]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..states.len() {
        for j in (i + 1)..states.len() {
            let o = states[i].overlap(&states[j]);
            if best.is_none_or(|b| o > b.2) {
                best = Some((i, j, o));
            }
        }
    }
    best
}

/// Smallest eigenvalue of `σ` restricted to `space`.
pub(crate) fn min_eigenvalue_on(sigma: &DensityMatrix, space: &Subspace) -> f64 {
    let b = space.basis_matrix();
    let compressed = b.adjoint() * sigma.matrix() * &b;
    hermitian_eigen(&compressed).min()
}
