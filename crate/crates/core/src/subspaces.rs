//! Entanglement extrema and product vectors inside a subspace.
//!
//! Both objectives, `(Σ√λ)²` (nuclear norm squared of the coefficient
//! matrix) and `λ_max` (spectral norm squared), are convex in the state
//! vector, so a linearized step `c ← normalize(P_S ∇f)` never decreases them.
//! The ascent below interpolates between small gradient steps and that
//! linearized step, halving the step on non-improvement. Runs from many seeded
//! random starts; the best value is a lower bound on the true maximum.

use nalgebra::SVD;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::measures::{geometric_pure, robustness_pure};
use crate::qla::{c64, hermitian_eigen, reshape, tensor_vec, unreshape, BipartiteDims, CMatrix, CVector, PureState, Subspace};
use crate::{Error, Result};

/// Geometric measure below which a vector counts as a product vector.
pub const PRODUCT_TOL: f64 = 1e-7;
/// Two product vectors with overlap modulus above `1 − PHASE_DEDUP` are the
/// same direction.
pub const PHASE_DEDUP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AscentOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Relative improvement below which an accepted step ends a run.
    pub rel_tol: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: 0,
            max_iter: 5000,
            rel_tol: 1e-10,
        }
    }
}

impl AscentOptions {
    pub fn with_starts(starts: usize, seed: u64) -> Self {
        Self {
            starts,
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubspaceExtremum {
    pub argmax: PureState,
    pub value: f64,
    pub starts: usize,
    pub converged: bool,
    pub per_start_values: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Objective {
    /// `(Σ_k s_k)²`
    Nuclear,
    /// `s_1²`
    Spectral,
}

/// Objective value and ascent direction for a vector of the ambient space.
fn evaluate(obj: Objective, psi: &CVector, dims: &BipartiteDims) -> (f64, CVector) {
    let m = reshape(psi, dims);
    let svd = SVD::new(m, true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V†");
    let s = &svd.singular_values;
    match obj {
        Objective::Nuclear => {
            let n: f64 = s.iter().sum();
            // U V† over the full thin SVD: a valid subgradient of the
            // nuclear norm even when some singular values vanish.
            let g: CMatrix = &u * &v_t;
            (n * n, unreshape(&g) * c64(2.0 * n, 0.0))
        }
        Objective::Spectral => {
            let top = (0..s.len()).max_by(|&a, &b| s[a].total_cmp(&s[b]).then(b.cmp(&a))).unwrap_or(0);
            let g: CMatrix = u.column(top) * v_t.row(top);
            (s[top] * s[top], unreshape(&g) * c64(2.0 * s[top], 0.0))
        }
    }
}

struct Penalty<'a> {
    weight: f64,
    avoid: &'a [CVector],
}

fn objective_on(
    obj: Objective,
    space: &Subspace,
    c: &CVector,
    penalty: Option<&Penalty<'_>>,
) -> (f64, CVector) {
    let psi = space.embed(c);
    let (mut f, grad) = evaluate(obj, &psi, &space.dims());
    let mut g = space.coefficients(&grad);
    if let Some(p) = penalty {
        for a in p.avoid {
            let ac = space.coefficients(a);
            let ov = ac.dotc(c);
            f -= p.weight * ov.norm_sqr();
            g -= ac * (ov * c64(2.0 * p.weight, 0.0));
        }
    }
    (f, g)
}

fn normalize(c: CVector) -> CVector {
    let n = c.norm();
    c / c64(n, 0.0)
}

struct RunResult {
    coeffs: CVector,
    converged: bool,
}

fn ascend(
    obj: Objective,
    space: &Subspace,
    start: CVector,
    opts: &AscentOptions,
    penalty: Option<&Penalty<'_>>,
) -> RunResult {
    let mut c = normalize(start);
    let (mut f, mut g) = objective_on(obj, space, &c, penalty);
    let mut step = 1.0f64;
    for _ in 0..opts.max_iter {
        let radial = c.dotc(&g);
        let tangent = &g - &c * radial;
        let tn = tangent.norm();
        if tn <= 1e-14 * g.norm().max(1e-300) {
            return RunResult { coeffs: c, converged: true };
        }
        let dir = tangent / c64(tn, 0.0);
        let mut accepted = false;
        while step >= 1e-12 {
            let cand = normalize(&c + &dir * c64(step, 0.0));
            let (fc, gc) = objective_on(obj, space, &cand, penalty);
            if fc > f {
                let rel = (fc - f) / f.abs().max(1e-300);
                c = cand;
                f = fc;
                g = gc;
                step = (step * 2.0).min(1e6);
                accepted = true;
                if rel < opts.rel_tol {
                    return RunResult { coeffs: c, converged: true };
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return RunResult { coeffs: c, converged: true };
        }
    }
    RunResult { coeffs: c, converged: false }
}

fn random_coefficients(dim: usize, seed: u64, stream: u64) -> CVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    CVector::from_fn(dim, |_, _| {
        c64(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    })
}

fn to_state(space: &Subspace, coeffs: &CVector) -> PureState {
    let mut v = space.embed(coeffs);
    crate::qla::fix_phase(&mut v);
    PureState::normalized(space.dims(), v).expect("unit coefficients embed to a unit vector")
}

fn multi_start(
    obj: Objective,
    space: &Subspace,
    opts: &AscentOptions,
    measure: impl Fn(&PureState) -> f64,
    better: impl Fn(f64, f64) -> bool,
) -> Result<SubspaceExtremum> {
    if space.dim() == 0 {
        return Err(Error::EmptySubspace);
    }
    let starts = opts.starts.max(1);
    let mut best: Option<(PureState, f64, bool)> = None;
    let mut per_start_values = Vec::with_capacity(starts);
    for k in 0..starts {
        let run = ascend(obj, space, random_coefficients(space.dim(), opts.seed, k as u64), opts, None);
        let state = to_state(space, &run.coeffs);
        let value = measure(&state);
        per_start_values.push(value);
        // strict comparison: ties keep the lowest start index
        if best.as_ref().is_none_or(|b| better(value, b.1)) {
            best = Some((state, value, run.converged));
        }
    }
    let (argmax, value, converged) = best.expect("at least one start");
    Ok(SubspaceExtremum {
        argmax,
        value,
        starts,
        converged,
        per_start_values,
    })
}

/// Largest pure-state robustness `(Σ√λ)² − 1` over unit vectors of `space`.
pub fn max_robustness_in_subspace(space: &Subspace, opts: &AscentOptions) -> Result<SubspaceExtremum> {
    multi_start(Objective::Nuclear, space, opts, robustness_pure, |a, b| a > b)
}

/// Smallest geometric measure `−log₂ λ_max` over unit vectors of `space`;
/// zero exactly when the subspace contains a product vector.
pub fn min_geometric_in_subspace(space: &Subspace, opts: &AscentOptions) -> Result<SubspaceExtremum> {
    multi_start(Objective::Spectral, space, opts, geometric_pure, |a, b| a < b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductMethod {
    Exact,
    Numeric,
}

#[derive(Debug, Clone)]
pub struct ProductContent {
    /// Product vectors found in the subspace, distinct up to phase.
    pub product_vectors: Vec<PureState>,
    pub is_product_spanned: bool,
    pub method: ProductMethod,
    /// Exact path only: the subspace contains a continuum of product vectors.
    pub infinite_family: bool,
    pub converged: bool,
}

fn same_direction(a: &CVector, b: &CVector) -> bool {
    a.dotc(b).norm() > 1.0 - PHASE_DEDUP
}

fn push_distinct(list: &mut Vec<PureState>, candidate: PureState) -> bool {
    if list.iter().any(|p| same_direction(p.vector(), candidate.vector())) {
        return false;
    }
    list.push(candidate);
    true
}

/// Rank of a set of unit vectors, via Gram–Schmidt residuals.
fn independent_count(vectors: &[PureState], dims: BipartiteDims) -> usize {
    let raw: Vec<CVector> = vectors.iter().map(|p| p.vector().clone()).collect();
    independent_span(&raw, dims).dim()
}

fn independent_span(vectors: &[CVector], dims: BipartiteDims) -> Subspace {
    let mut kept: Vec<CVector> = Vec::new();
    for v in vectors {
        let trial = Subspace::span(dims, &kept).expect("consistent lengths");
        if trial.residual(v) > 1e-6 {
            kept.push(v.clone());
        }
    }
    Subspace::span(dims, &kept).expect("consistent lengths")
}

/// Product vectors of a two-dimensional subspace of `C²⊗C²`.
///
/// A vector is product iff its 2×2 coefficient matrix is singular. Along the
/// pencil `s·b₁ + t·b₂` the determinant is the binary quadratic
/// `c s² + b s t + a t²`, whose projective roots are the product directions.
pub fn product_vectors_2x2(space: &Subspace) -> Result<ProductContent> {
    let dims = space.dims();
    if dims.da() != 2 || dims.db() != 2 || space.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "exact product-vector search needs a 2-dimensional subspace of 2⊗2, got dim {} in {dims}",
            space.dim()
        )));
    }
    let m1 = reshape(&space.basis()[0], &dims);
    let m2 = reshape(&space.basis()[1], &dims);
    let det = |m: &CMatrix| m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let c = det(&m1);
    let a = det(&m2);
    let b = m1[(0, 0)] * m2[(1, 1)] + m2[(0, 0)] * m1[(1, 1)] - m1[(0, 1)] * m2[(1, 0)] - m2[(0, 1)] * m1[(1, 0)];
    let tol = 1e-12;
    let b1 = &space.basis()[0];
    let b2 = &space.basis()[1];
    let along = |t: nalgebra::Complex<f64>| PureState::normalized(dims, b1 + b2 * t).expect("independent basis");

    let mut vectors = Vec::new();
    let mut infinite = false;
    if a.norm() <= tol && b.norm() <= tol && c.norm() <= tol {
        infinite = true;
        vectors.push(PureState::normalized(dims, b1.clone())?);
        vectors.push(PureState::normalized(dims, b2.clone())?);
    } else if a.norm() <= tol {
        // root at t = ∞
        vectors.push(PureState::normalized(dims, b2.clone())?);
        if b.norm() > tol {
            push_distinct(&mut vectors, along(-c / b));
        }
    } else {
        let disc = b * b - a * c * c64(4.0, 0.0);
        let scale = (b.norm_sqr()).max((a * c).norm() * 4.0).max(1e-300);
        let root = disc.sqrt();
        let t1 = (-b + root) / (a * c64(2.0, 0.0));
        vectors.push(along(t1));
        if disc.norm() > 1e-10 * scale {
            let t2 = (-b - root) / (a * c64(2.0, 0.0));
            push_distinct(&mut vectors, along(t2));
        }
    }
    let is_product_spanned = independent_count(&vectors, dims) >= 2;
    Ok(ProductContent {
        product_vectors: vectors,
        is_product_spanned,
        method: ProductMethod::Exact,
        infinite_family: infinite,
        converged: true,
    })
}

/// Squared distance from `x⊗y` to `space` below which a refined candidate is
/// accepted as a product vector of the subspace.
const REFINE_ACCEPT: f64 = 1e-20;

/// Alternating minimization of `‖(I − P_S)(x⊗y)‖²` started from the best
/// product approximation of `psi`. Linear convergence at isolated product
/// vectors; returns `None` when the residual does not reach `REFINE_ACCEPT`.
fn refine_product(space: &Subspace, psi: &CVector) -> Option<CVector> {
    let dims = space.dims();
    let (da, db) = (dims.da(), dims.db());
    let svd = SVD::new(reshape(psi, &dims), true, true);
    let mut x: CVector = svd.u.as_ref()?.column(0).into_owned();
    let mut y: CVector = svd.v_t.as_ref()?.row(0).transpose();
    let q = CMatrix::identity(da * db, da * db) - space.projector();
    let residual = |x: &CVector, y: &CVector| {
        let p = tensor_vec(x, y);
        (&q * &p).norm_squared()
    };
    let mut last = residual(&x, &y);
    for _ in 0..4000 {
        if last <= REFINE_ACCEPT * 1e-6 {
            break;
        }
        let ay = CMatrix::from_fn(da, da, |i, k| {
            let mut acc = c64(0.0, 0.0);
            for j in 0..db {
                for l in 0..db {
                    acc += y[j].conj() * q[(i * db + j, k * db + l)] * y[l];
                }
            }
            acc
        });
        let nx = hermitian_eigen(&ay).vector(da - 1);
        let bx = CMatrix::from_fn(db, db, |j, l| {
            let mut acc = c64(0.0, 0.0);
            for i in 0..da {
                for k in 0..da {
                    acc += nx[i].conj() * q[(i * db + j, k * db + l)] * nx[k];
                }
            }
            acc
        });
        let ny = hermitian_eigen(&bx).vector(db - 1);
        let r = residual(&nx, &ny);
        if r >= last {
            break;
        }
        x = nx;
        y = ny;
        last = r;
    }
    if last > REFINE_ACCEPT {
        return None;
    }
    let prod = tensor_vec(&x, &y);
    let mut v = space.projector() * prod;
    crate::qla::fix_phase(&mut v);
    Some(v)
}

/// Whether `space` admits a basis of product vectors. Two-dimensional
/// subspaces of `2⊗2` are decided exactly; everything else numerically.
pub fn is_product_spanned(space: &Subspace, opts: &AscentOptions) -> Result<ProductContent> {
    let dims = space.dims();
    if dims.da() == 2 && dims.db() == 2 && space.dim() == 2 {
        return product_vectors_2x2(space);
    }
    is_product_spanned_numeric(space, opts)
}

/// Numeric product-vector search: multi-start maximization of `λ_max`, then
/// deflation rounds that penalize overlap with the vectors already found and
/// polish the result without the penalty. Every candidate is refined by
/// alternating projection; a product vector at a degenerate (double) root
/// converges too slowly to be accepted and is not reported.
pub fn is_product_spanned_numeric(space: &Subspace, opts: &AscentOptions) -> Result<ProductContent> {
    if space.dim() == 0 {
        return Err(Error::EmptySubspace);
    }
    let dims = space.dims();
    let target = space.dim();
    let mut found: Vec<PureState> = Vec::new();
    let mut converged = true;
    let consider = |run: RunResult, found: &mut Vec<PureState>| {
        let psi = space.embed(&run.coeffs);
        if let Some(v) = refine_product(space, &psi) {
            let state = PureState::normalized(dims, v).expect("nonzero refined vector");
            if geometric_pure(&state) <= PRODUCT_TOL {
                push_distinct(found, state);
            }
        }
        run.converged
    };

    let starts = opts.starts.max(1);
    for k in 0..starts {
        let run = ascend(Objective::Spectral, space, random_coefficients(target, opts.seed, k as u64), opts, None);
        converged &= consider(run, &mut found);
        if independent_count(&found, dims) >= target {
            break;
        }
    }
    let mut round = 0u64;
    while independent_count(&found, dims) < target && round < (target as u64) * 4 {
        let avoid: Vec<CVector> = found.iter().map(|p| p.vector().clone()).collect();
        let penalty = Penalty { weight: 2.0, avoid: &avoid };
        let before = found.len();
        for k in 0..starts.min(16) {
            let stream = (starts as u64) + round * 16 + k as u64;
            let seeded = ascend(
                Objective::Spectral,
                space,
                random_coefficients(target, opts.seed, stream),
                opts,
                Some(&penalty),
            );
            let run = ascend(Objective::Spectral, space, seeded.coeffs, opts, None);
            converged &= consider(run, &mut found);
            if independent_count(&found, dims) >= target {
                break;
            }
        }
        if found.len() == before && round > 0 {
            break;
        }
        round += 1;
    }
    let is_product_spanned = independent_count(&found, dims) >= target;
    Ok(ProductContent {
        product_vectors: found,
        is_product_spanned,
        method: ProductMethod::Numeric,
        infinite_family: false,
        converged,
    })
}
