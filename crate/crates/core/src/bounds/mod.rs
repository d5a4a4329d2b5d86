//! Bound chains, `d(σ)` estimates, PPT POVM feasibility and the aggregate
//! `analyze` entry point.
//!
//! Every bound has the form `N ≤ D / x̄` for a per-state quantity `x`. The
//! quantities are computed with relaxations (PPT for separable) or heuristics
//! (multi-start maxima) that can only underestimate `x`, so each reported
//! bound is an upper estimate of the exact one and a violation is still a
//! valid certificate. The direction of every such substitution is recorded in
//! [`BoundReport::directions`].

mod analyze;
mod chains;
mod dppt;
mod povm;

use std::collections::BTreeMap;

use serde::Serialize;

pub use analyze::{analyze, AnalysisReport, AnalyzeConfig, HeuristicOptions, Overall, ProductAdvisory};
pub use chains::{
    bound_candidate_chain, bound_optimized_chain, bound_projector_chain, bound_pure_chain,
    bound_support_maximum,
};
pub use dppt::{d_ppt_estimate, DEstimate};
pub use povm::{ppt_povm_feasibility, FeasibilityReport, PovmOptions, PovmStop};

use crate::qla::{max_overlap, mutually_orthogonal, support_projector, BipartiteDims, DensityMatrix, PureState};
use crate::{Error, Result};

/// Pairwise `Tr(σ_i σ_j)` above which an ensemble is rejected.
pub const ENSEMBLE_ORTH_TOL: f64 = 1e-8;
/// `N > min bound + VERDICT_SLACK` marks a violation.
pub const VERDICT_SLACK: f64 = 1e-9;

/// Mutually orthogonal states `σ_1, …, σ_N` on a common bipartite space.
#[derive(Debug, Clone)]
pub struct Ensemble {
    dims: BipartiteDims,
    states: Vec<DensityMatrix>,
    names: Vec<String>,
}

impl Ensemble {
    /// Labels default to `s1, s2, …` when `names` is empty.
    pub fn new(states: Vec<DensityMatrix>, names: Vec<String>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::TooFewStates(states.len()));
        }
        let names = if names.is_empty() {
            (1..=states.len()).map(|i| format!("s{i}")).collect()
        } else {
            names
        };
        if names.len() != states.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} states",
                names.len(),
                states.len()
            )));
        }
        if !mutually_orthogonal(&states, ENSEMBLE_ORTH_TOL)? {
            let (i, j, o) = max_overlap(&states).expect("at least two states");
            return Err(Error::NotOrthogonal(i, j, o));
        }
        Ok(Self {
            dims: states[0].dims(),
            states,
            names,
        })
    }

    pub fn from_pure(states: &[PureState], names: Vec<String>) -> Result<Self> {
        Self::new(states.iter().map(PureState::density).collect(), names)
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The states as pure states, when every one has rank one.
    pub fn pure_states(&self, rank_tol: f64) -> Option<Vec<PureState>> {
        self.states.iter().map(|s| s.as_pure(rank_tol)).collect()
    }

    /// Same labels, each state replaced by its normalized support projector.
    pub fn support_projectors(&self, rank_tol: f64) -> Result<Ensemble> {
        let states = self
            .states
            .iter()
            .map(|s| support_projector(s, rank_tol).normalized_projector())
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(states, self.names.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Satisfied,
    Violated,
}

impl Verdict {
    pub fn for_bound(n: usize, bound: f64) -> Self {
        if n as f64 > bound + VERDICT_SLACK {
            Verdict::Violated
        } else {
            Verdict::Satisfied
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Satisfied => "SATISFIED",
            Verdict::Violated => "VIOLATED",
        }
    }
}

/// Which bound chain a report evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inequality {
    /// `D/avg(1+R) ≤ D/avg 2^{E_R} ≤ D/avg 2^{G}` for pure states.
    PureChain,
    /// The pure chain evaluated at the most entangled vector of each support.
    SupportMaximum,
    /// `D/avg d ≤ D/avg r ≤ D/avg 2^E ≤ D/avg 2^G` with `r = rank·(1+R_g)` of
    /// the normalized support projector.
    ProjectorChain,
    /// `D/avg d ≤ D/avg 𝓡 ≤ …` at caller-supplied full-rank states on the
    /// supports, `𝓡 = α⁻¹(1+R_g)`.
    CandidateChain,
    /// The candidate chain with `𝓡` heuristically maximized over each support.
    OptimizedChainHeuristic,
}

impl Inequality {
    pub fn as_str(self) -> &'static str {
        match self {
            Inequality::PureChain => "pure-chain",
            Inequality::SupportMaximum => "support-maximum",
            Inequality::ProjectorChain => "projector-chain",
            Inequality::CandidateChain => "candidate-chain",
            Inequality::OptimizedChainHeuristic => "optimized-chain-heuristic",
        }
    }
}

/// How a per-state quantity was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimate {
    /// Closed form; no relaxation.
    Exact,
    /// PPT relaxation of the separable set: a lower bound on the quantity.
    PptLowerBound,
    /// Best of a multi-start local search for a maximum: a lower bound.
    MultiStartLowerBound,
    /// Heuristic maximization over states on the support, each evaluated with
    /// the PPT relaxation: a lower bound.
    HeuristicPptLowerBound,
    /// Not computable for mixed states here; excluded from the verdict.
    NotEvaluated,
}

impl Estimate {
    /// Effect of the estimate on `D / x̄`.
    pub fn bound_effect(self) -> &'static str {
        match self {
            Estimate::Exact => "exact",
            Estimate::NotEvaluated => "not-evaluated",
            _ => "upper-estimate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DirectionNote {
    pub quantity: String,
    pub estimate: Estimate,
    pub bound_effect: &'static str,
    pub note: String,
}

impl DirectionNote {
    pub fn new(quantity: &str, estimate: Estimate, note: impl Into<String>) -> Self {
        Self {
            quantity: quantity.to_string(),
            estimate,
            bound_effect: estimate.bound_effect(),
            note: note.into(),
        }
    }
}

/// Named quantities of one state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateQuantities {
    pub name: String,
    pub quantities: BTreeMap<String, f64>,
}

/// One link `D / avg(x)` of a chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundLink {
    /// The averaged quantity, e.g. `1+R` or `2^G`.
    pub quantity: String,
    pub average: Option<f64>,
    pub bound: Option<f64>,
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub inequality: Inequality,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "D")]
    pub dimension: usize,
    pub per_state: Vec<StateQuantities>,
    pub links: Vec<BoundLink>,
    /// Evaluated bounds, left to right.
    pub bound_values: Vec<f64>,
    pub verdict: Verdict,
    pub directions: Vec<DirectionNote>,
}

impl BoundReport {
    /// Assembles a report from per-state link quantities. `columns[k][i]` is
    /// quantity `k` of state `i`; a `None` anywhere in a column leaves that
    /// link unevaluated.
    pub(crate) fn assemble(
        inequality: Inequality,
        dims: BipartiteDims,
        per_state: Vec<StateQuantities>,
        columns: Vec<(&str, Vec<Option<f64>>)>,
        directions: Vec<DirectionNote>,
    ) -> Self {
        let n = per_state.len();
        let d = dims.total();
        let links: Vec<BoundLink> = columns
            .into_iter()
            .map(|(quantity, values)| {
                let all: Option<Vec<f64>> = values.into_iter().collect();
                let average = all.map(|v| v.iter().sum::<f64>() / v.len() as f64);
                let bound = average.map(|a| d as f64 / a);
                BoundLink {
                    quantity: quantity.to_string(),
                    average,
                    bound,
                    verdict: bound.map(|b| Verdict::for_bound(n, b)),
                }
            })
            .collect();
        let bound_values: Vec<f64> = links.iter().filter_map(|l| l.bound).collect();
        let min = bound_values.iter().copied().fold(f64::INFINITY, f64::min);
        BoundReport {
            inequality,
            n,
            dimension: d,
            per_state,
            links,
            bound_values,
            verdict: Verdict::for_bound(n, min),
            directions,
        }
    }

    pub fn link(&self, quantity: &str) -> Option<&BoundLink> {
        self.links.iter().find(|l| l.quantity == quantity)
    }

    /// Smallest evaluated bound.
    pub fn min_bound(&self) -> f64 {
        self.bound_values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
