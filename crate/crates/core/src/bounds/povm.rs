//! PPT-relaxed POVM feasibility: does a measurement `{Π_i}` with every
//! `Π_i ⪰ 0`, `Π_i^Γ ⪰ 0`, `Σ Π_i = I` and `Tr(Π_i σ_j) = 0` for `i ≠ j`
//! exist?
//!
//! Cyclic projections over the N-tuple, in the fixed order PSD, PPT, then the
//! affine set of complete tuples vanishing on the other supports. Dykstra
//! corrections are left out: they steer towards the nearest feasible point,
//! which nobody asks for here, and they crawl when the sets meet tangentially
//! (some orthogonal pure pairs in 2⊗2 still sat near 2e-5 after 20000 sweeps).
//! Since `Tr(Π_i σ_j) = 0` iff `Π_i` vanishes on the support of `σ_j`, only
//! the support projectors enter, and an ensemble and its support-projector
//! ensemble follow the same trajectory.

use serde::Serialize;

use super::Ensemble;
use crate::qla::{c64, hermitian_eigen, max_abs, partial_transpose, psd_part, support_projector, BipartiteDims, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PovmOptions {
    /// Residual below which the tuple is declared feasible.
    pub threshold: f64,
    pub max_sweeps: usize,
    pub plateau_window: usize,
    pub plateau_rel: f64,
}

impl Default for PovmOptions {
    fn default() -> Self {
        Self {
            threshold: 1e-7,
            max_sweeps: 20000,
            plateau_window: 500,
            plateau_rel: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PovmStop {
    Converged,
    /// Residual stalled: a heuristic infeasibility signal, not a certificate.
    Plateau,
    MaxSweeps,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Largest constraint violation in max-norm at the last iterate.
    pub residual: f64,
    pub iterations: usize,
    pub stop: PovmStop,
    /// Infeasibility is never certified by this solver.
    pub certified: bool,
    #[serde(serialize_with = "crate::json::serialize_matrices")]
    pub povm: Option<Vec<CMatrix>>,
}

fn pt(m: &CMatrix, dims: &BipartiteDims) -> CMatrix {
    partial_transpose(m, dims).expect("square operator")
}

fn residual(pis: &[CMatrix], dims: &BipartiteDims) -> f64 {
    let n = pis[0].nrows();
    let mut total = CMatrix::zeros(n, n);
    let mut worst = 0.0f64;
    for p in pis {
        total += p;
        worst = worst.max(-hermitian_eigen(p).min());
        worst = worst.max(-hermitian_eigen(&pt(p, dims)).min());
    }
    worst.max(max_abs(&(total - CMatrix::identity(n, n))))
}

/// The supports `P_i` and the uncovered part `Q = I − Σ P_i`.
struct Blocks {
    supports: Vec<CMatrix>,
    rest: CMatrix,
    share: nalgebra::Complex<f64>,
}

/// Exact projection of the tuple onto `{Σ Π_i = I, Π_i = M_i Π_i M_i}` with
/// `M_i = P_i + Q`. Both constraints are block diagonal in the decomposition
/// `P_1, …, P_N, Q`: the multiplier `Λ` enters `Π_i` through the blocks
/// `(P_i, P_i)`, `(P_i, Q)`, `(Q, P_i)` and, shared by all N elements,
/// `(Q, Q)`.
fn project_affine(pis: &mut [CMatrix], masks: &[CMatrix], b: &Blocks) {
    let d = b.rest.nrows();
    let mut r = CMatrix::identity(d, d);
    for (p, m) in pis.iter_mut().zip(masks) {
        *p = m * &*p * m;
        r -= &*p;
    }
    let qr = &b.rest * &r;
    let qrq = &qr * &b.rest * b.share;
    for (p, s) in pis.iter_mut().zip(&b.supports) {
        let sr = s * &r;
        *p += &sr * s + &sr * &b.rest + &qr * s + &qrq;
    }
}

/// Searches for a PPT POVM that perfectly discriminates the ensemble.
pub fn ppt_povm_feasibility(e: &Ensemble, rank_tol: f64, opts: &PovmOptions) -> FeasibilityReport {
    let dims = e.dims();
    let d = dims.total();
    let n = e.len();
    let identity = CMatrix::identity(d, d);
    let projectors: Vec<CMatrix> = e.states().iter().map(|s| support_projector(s, rank_tol).projector()).collect();
    let covered: CMatrix = projectors.iter().fold(CMatrix::zeros(d, d), |acc, p| acc + p);
    let masks: Vec<CMatrix> = projectors.iter().map(|p| &identity - (&covered - p)).collect();
    let share = c64(1.0 / n as f64, 0.0);
    let rest = &identity - &covered;
    let mut pis: Vec<CMatrix> = projectors.iter().map(|p| p + &rest * share).collect();
    let blocks = Blocks {
        supports: projectors.clone(),
        rest,
        share,
    };

    let mut history: Vec<f64> = Vec::new();
    let mut res = residual(&pis, &dims);
    let mut sweeps = 0;
    let stop = loop {
        if res < opts.threshold {
            break PovmStop::Converged;
        }
        if sweeps >= opts.max_sweeps {
            break PovmStop::MaxSweeps;
        }
        for p in pis.iter_mut() {
            *p = psd_part(p);
            *p = pt(&psd_part(&pt(p, &dims)), &dims);
        }
        project_affine(&mut pis, &masks, &blocks);
        sweeps += 1;
        res = residual(&pis, &dims);
        history.push(res);
        if history.len() > opts.plateau_window {
            let old = history[history.len() - 1 - opts.plateau_window];
            if old - res < opts.plateau_rel * old {
                break PovmStop::Plateau;
            }
        }
    };
    let feasible = stop == PovmStop::Converged;
    FeasibilityReport {
        feasible,
        residual: res,
        iterations: sweeps,
        stop,
        certified: false,
        povm: feasible.then_some(pis),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qla::{trace_product, CVector, DensityMatrix, PureState, DEFAULT_RANK_TOL};

    fn d22() -> BipartiteDims {
        BipartiteDims::new(2, 2).unwrap()
    }

    fn pure(v: CVector) -> DensityMatrix {
        PureState::normalized(d22(), v).unwrap().density()
    }

    fn bell4() -> Ensemble {
        let k = |i, j| d22().basis_ket(i, j);
        Ensemble::new(
            vec![
                pure(k(0, 0) + k(1, 1)),
                pure(k(0, 0) - k(1, 1)),
                pure(k(0, 1) + k(1, 0)),
                pure(k(0, 1) - k(1, 0)),
            ],
            vec![],
        )
        .unwrap()
    }

    fn check_povm(e: &Ensemble, povm: &[CMatrix]) {
        let dims = e.dims();
        let sum: CMatrix = povm.iter().fold(CMatrix::zeros(4, 4), |a, p| a + p);
        assert!(max_abs(&(sum - CMatrix::identity(4, 4))) < 1e-6);
        for (i, p) in povm.iter().enumerate() {
            assert!(hermitian_eigen(p).min() > -1e-7);
            assert!(hermitian_eigen(&pt(p, &dims)).min() > -1e-7);
            for (j, s) in e.states().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((trace_product(p, s.matrix()) - want).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn product_pair_is_feasible_at_once() {
        let k = |i, j| d22().basis_ket(i, j);
        let e = Ensemble::new(vec![pure(k(0, 0)), pure(k(0, 1))], vec![]).unwrap();
        let r = ppt_povm_feasibility(&e, DEFAULT_RANK_TOL, &PovmOptions::default());
        assert!(r.feasible);
        check_povm(&e, r.povm.as_ref().unwrap());
    }

    #[test]
    fn bell_basis_stalls() {
        let r = ppt_povm_feasibility(&bell4(), DEFAULT_RANK_TOL, &PovmOptions::default());
        assert!(!r.feasible);
        assert_eq!(r.stop, PovmStop::Plateau);
        assert!(r.residual > 0.1, "{}", r.residual);
        assert!(r.povm.is_none());
    }

    #[test]
    fn entangled_pair_is_feasible() {
        let k = |i, j| d22().basis_ket(i, j);
        let e = Ensemble::new(vec![pure(k(0, 0) + k(1, 1)), pure(k(0, 0) - k(1, 1))], vec![]).unwrap();
        let r = ppt_povm_feasibility(&e, DEFAULT_RANK_TOL, &PovmOptions::default());
        assert!(r.feasible, "{r:?}");
        check_povm(&e, r.povm.as_ref().unwrap());
    }
}
