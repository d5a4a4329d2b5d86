//! Entanglement and mixedness measures.
//!
//! Logarithms are base 2 throughout. Pure-state quantities use the Schmidt
//! closed forms; for mixed states only the von Neumann entropy and a
//! PPT-relaxed global robustness are computed.

use serde::Serialize;

use crate::qla::{c64, hermitian_eigen, partial_transpose, BipartiteDims, CMatrix, DensityMatrix, PureState};
use crate::solver::{self, bisect_feasibility, InnerOptions, PptIntersection};
use crate::{Error, Result};

/// Robustness, relative entropy of entanglement and geometric measure of a
/// pure state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PureMeasures {
    pub robustness: f64,
    pub rel_entropy: f64,
    pub geometric: f64,
}

pub fn pure_measures(psi: &PureState) -> PureMeasures {
    PureMeasures {
        robustness: robustness_pure(psi),
        rel_entropy: rel_entropy_pure(psi),
        geometric: geometric_pure(psi),
    }
}

/// `(Σ_k √λ_k)² − 1`, the global robustness of a pure state, summed as
/// `2 Σ_{j<k} √(λ_j λ_k)` so that no cancellation against the 1 occurs.
pub fn robustness_pure(psi: &PureState) -> f64 {
    let c = &psi.schmidt().coefficients;
    let mut r = 0.0;
    for j in 0..c.len() {
        for k in j + 1..c.len() {
            r += 2.0 * (c[j] * c[k]).sqrt();
        }
    }
    r
}

/// Entropy of entanglement `−Σ λ_k log₂ λ_k`.
pub fn rel_entropy_pure(psi: &PureState) -> f64 {
    shannon_bits(&psi.schmidt().coefficients)
}

/// `−log₂ λ_max`, the geometric measure of a bipartite pure state.
pub fn geometric_pure(psi: &PureState) -> f64 {
    (-psi.schmidt().max_coefficient().log2()).max(0.0)
}

fn shannon_bits(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
    h.max(0.0)
}

/// Von Neumann entropy in bits.
pub fn vn_entropy(sigma: &DensityMatrix) -> f64 {
    shannon_bits(&sigma.eigen().values)
}

/// Controls for the bisection estimators ([`global_robustness_ppt`] and the
/// `d(σ)` estimate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BisectionOptions {
    /// Width of the final bisection bracket.
    pub bisect_tol: f64,
    pub inner: InnerOptions,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        Self {
            bisect_tol: 1e-5,
            inner: InnerOptions::default(),
        }
    }
}

/// Output of the PPT-relaxed robustness bisection.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RobustnessEstimate {
    /// Lower end of the final bracket.
    pub value: f64,
    pub bracket: (f64, f64),
    pub bisection_steps: usize,
    pub inner_iterations: usize,
    /// Bisection steps declared infeasible by stall or iteration cap rather
    /// than by a separating witness.
    pub uncertified_steps: usize,
}

struct MixingProblem {
    dims: BipartiteDims,
    sigma: CMatrix,
    sigma_pt: CMatrix,
    weight: f64,
}

impl PptIntersection for MixingProblem {
    fn dims(&self) -> BipartiteDims {
        self.dims
    }

    fn offset(&self) -> &CMatrix {
        &self.sigma
    }

    fn offset_pt(&self) -> &CMatrix {
        &self.sigma_pt
    }

    fn project_spectral(&self, x: &CMatrix) -> CMatrix {
        solver::project_spectrum(x, self.weight, f64::INFINITY)
    }

    fn support_function(&self, w: &CMatrix) -> f64 {
        self.weight * hermitian_eigen(w).max()
    }
}

/// Global robustness with the separable set relaxed to PPT states.
///
/// Finds the smallest `t` such that some state `ϱ` makes `(σ + tϱ)/(1 + t)`
/// PPT, bisecting over `[0, D]`. For each `t` the unnormalized admixture
/// `tϱ` is sought by alternating projections between `{X ⪰ 0, Tr X = t}` and
/// `{X : (σ + X)^Γ ⪰ 0}`. Because PPT contains the separable states, the
/// result lower-bounds the true global robustness.
pub fn global_robustness_ppt(sigma: &DensityMatrix, opts: &BisectionOptions) -> Result<RobustnessEstimate> {
    let dims = sigma.dims();
    let sigma_pt = partial_transpose(sigma.matrix(), &dims)?;
    if hermitian_eigen(&sigma_pt).min() >= -opts.inner.threshold {
        return Ok(RobustnessEstimate {
            value: 0.0,
            bracket: (0.0, 0.0),
            bisection_steps: 0,
            inner_iterations: 0,
            uncertified_steps: 0,
        });
    }
    let d = dims.total();
    let mut problem = MixingProblem {
        dims,
        sigma: sigma.matrix().clone(),
        sigma_pt,
        weight: 0.0,
    };
    let identity = CMatrix::identity(d, d);
    let run = bisect_feasibility(0.0, d as f64, opts.bisect_tol, |t, warm| {
        problem.weight = t;
        let start = match warm {
            Some(p) => p.clone(),
            None => &identity * c64(t / d as f64, 0.0),
        };
        solver::solve_intersection(&problem, &start, &opts.inner)
    })
    .map_err(|(lo, hi)| Error::NonConvergence {
        what: "global robustness bisection",
        lo,
        hi,
    })?;
    Ok(RobustnessEstimate {
        value: run.lo,
        bracket: (run.lo, run.hi),
        bisection_steps: run.steps,
        inner_iterations: run.inner_iterations,
        uncertified_steps: run.uncertified,
    })
}

/// How the global robustness inside [`MixedMeasures`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RobustnessSource {
    /// Rank-one input: exact pure-state formula.
    PureClosedForm,
    /// PPT-relaxed bisection: a lower bound.
    PptLowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MixedMeasures {
    pub vn_entropy: f64,
    pub global_robustness: f64,
    pub robustness_source: RobustnessSource,
    /// Largest eigenvalue `α`.
    pub alpha: f64,
    /// `α⁻¹ (1 + R_g)`
    pub cal_r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<RobustnessEstimate>,
}

/// Entropy, global robustness and `α⁻¹(1 + R_g)` of a state. Rank-one states
/// use the exact pure-state robustness; everything else goes through
/// [`global_robustness_ppt`].
pub fn mixed_measures(sigma: &DensityMatrix, rank_tol: f64, opts: &BisectionOptions) -> Result<MixedMeasures> {
    let alpha = sigma.max_eigenvalue();
    let (rg, source, solver) = match sigma.as_pure(rank_tol) {
        Some(psi) => (robustness_pure(&psi), RobustnessSource::PureClosedForm, None),
        None => {
            let est = global_robustness_ppt(sigma, opts)?;
            (est.value, RobustnessSource::PptLowerBound, Some(est))
        }
    };
    Ok(MixedMeasures {
        vn_entropy: vn_entropy(sigma),
        global_robustness: rg,
        robustness_source: source,
        alpha,
        cal_r: (1.0 + rg) / alpha,
        solver,
    })
}
