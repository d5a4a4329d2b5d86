//! PPT-relaxed estimate of `d(σ) = min Tr Π / Tr(σΠ)` over separable
//! `0 ⪯ Π/Tr(σΠ) ⪯ I`.
//!
//! Writing `Π̃ = Π/Tr(σΠ)`, the constraints `Tr(σΠ̃) = 1` and `Π̃ ⪯ I` force
//! `Π̃ = P + Q` with `P` the support projector and `0 ⪯ Q ⪯ I − P` supported
//! on the complement. So `d = |P| + min Tr Q` subject to `P + Q` being
//! separable, here relaxed to `(P + Q)^Γ ⪰ 0`. Feasibility is monotone in
//! `τ = Tr Q` and `τ = D − |P|` (`Π̃ = I`) is always feasible, so bisection
//! on `[0, D − |P|]` applies.
//!
//! For a pure state `ψ = Σ √λ_i |ii⟩` the minimum is `(Σ √λ_i)²`: the
//! diagonal `Q = Σ_{i≠j} √(λ_i λ_j) |ij⟩⟨ij|` is feasible, and any feasible
//! `Q` makes `(ψψ† + Q)/(1 + Tr Q)` PPT, so `Tr Q` is at least the PPT
//! robustness `(Σ √λ_i)² − 1`.

use serde::Serialize;

use crate::measures::{robustness_pure, BisectionOptions};
use crate::qla::{c64, hermitian_eigen, hermitian_part, partial_transpose, support_projector, BipartiteDims, CMatrix, DensityMatrix};
use crate::solver::{self, bisect_feasibility, capped_top_sum, PptIntersection};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DEstimate {
    /// `|P| + τ_lo`, a lower bound on the PPT-relaxed minimum up to the
    /// bisection width.
    pub value: f64,
    pub bracket: (f64, f64),
    pub support_rank: usize,
    pub bisection_steps: usize,
    pub inner_iterations: usize,
    pub uncertified_steps: usize,
}

struct ComplementProblem {
    dims: BipartiteDims,
    p: CMatrix,
    p_pt: CMatrix,
    /// Orthonormal basis of the complement of the support, as columns.
    w: CMatrix,
    tau: f64,
}

impl ComplementProblem {
    fn compress(&self, x: &CMatrix) -> CMatrix {
        hermitian_part(&(self.w.adjoint() * x * &self.w))
    }
}

impl PptIntersection for ComplementProblem {
    fn dims(&self) -> BipartiteDims {
        self.dims
    }

    fn offset(&self) -> &CMatrix {
        &self.p
    }

    fn offset_pt(&self) -> &CMatrix {
        &self.p_pt
    }

    fn project_spectral(&self, x: &CMatrix) -> CMatrix {
        let c = solver::project_spectrum(&self.compress(x), self.tau, 1.0);
        &self.w * c * self.w.adjoint()
    }

    fn support_function(&self, z: &CMatrix) -> f64 {
        capped_top_sum(&hermitian_eigen(&self.compress(z)).values, self.tau, 1.0)
    }
}

/// PPT-relaxed `d(σ)`; depends on `σ` only through its support.
pub fn d_ppt_estimate(sigma: &DensityMatrix, rank_tol: f64, opts: &BisectionOptions) -> Result<DEstimate> {
    match sigma.as_pure(rank_tol) {
        Some(psi) => {
            let v = 1.0 + robustness_pure(&psi);
            Ok(DEstimate {
                value: v,
                bracket: (v, v),
                support_rank: 1,
                bisection_steps: 0,
                inner_iterations: 0,
                uncertified_steps: 0,
            })
        }
        None => d_ppt_bisection(sigma, rank_tol, opts),
    }
}

/// The bisection behind [`d_ppt_estimate`], for any support.
pub(crate) fn d_ppt_bisection(sigma: &DensityMatrix, rank_tol: f64, opts: &BisectionOptions) -> Result<DEstimate> {
    let dims = sigma.dims();
    let d = dims.total();
    let support = support_projector(sigma, rank_tol);
    let k = support.dim();
    let p = support.projector();
    let p_pt = partial_transpose(&p, &dims)?;
    let exact = |v: f64| DEstimate {
        value: v,
        bracket: (v, v),
        support_rank: k,
        bisection_steps: 0,
        inner_iterations: 0,
        uncertified_steps: 0,
    };
    if k == d || hermitian_eigen(&p_pt).min() >= -opts.inner.threshold {
        return Ok(exact(k as f64));
    }
    let w = support.orthogonal_complement().basis_matrix();
    let complement = &w * w.adjoint();
    let m = (d - k) as f64;
    let mut problem = ComplementProblem {
        dims,
        p,
        p_pt,
        w,
        tau: 0.0,
    };
    let run = bisect_feasibility(0.0, m, opts.bisect_tol, |tau, warm| {
        problem.tau = tau;
        let start = match warm {
            Some(x) => x.clone(),
            None => &complement * c64(tau / m, 0.0),
        };
        solver::solve_intersection(&problem, &start, &opts.inner)
    })
    .map_err(|(lo, hi)| Error::NonConvergence {
        what: "d(σ) bisection",
        lo: k as f64 + lo,
        hi: k as f64 + hi,
    })?;
    Ok(DEstimate {
        value: k as f64 + run.lo,
        bracket: (k as f64 + run.lo, k as f64 + run.hi),
        support_rank: k,
        bisection_steps: run.steps,
        inner_iterations: run.inner_iterations,
        uncertified_steps: run.uncertified,
    })
}
