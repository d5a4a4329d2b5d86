use serde::Serialize;

use super::chains::{
    candidate_chain_from, optimized_chain_from, projector_chain_from, pure_chain_from, support_maximum_from, Workspace,
};
use super::povm::{ppt_povm_feasibility, FeasibilityReport, PovmOptions, PovmStop};
use super::{BoundReport, Ensemble, Verdict};
use crate::measures::BisectionOptions;
use crate::qla::DEFAULT_RANK_TOL;
use crate::subspaces::{is_product_spanned, AscentOptions, ProductMethod};
use crate::Result;

/// Budget of the heuristic `𝓡` maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HeuristicOptions {
    pub starts: usize,
    pub refine_steps: usize,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        Self {
            starts: 8,
            refine_steps: 12,
        }
    }
}

/// Every tolerance and budget used by `analyze`; echoed in its report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalyzeConfig {
    pub rank_tol: f64,
    pub bisection: BisectionOptions,
    pub ascent: AscentOptions,
    pub heuristic: HeuristicOptions,
    pub povm: PovmOptions,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            rank_tol: DEFAULT_RANK_TOL,
            bisection: BisectionOptions::default(),
            ascent: AscentOptions::default(),
            heuristic: HeuristicOptions::default(),
            povm: PovmOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Overall {
    #[serde(rename = "RULED OUT")]
    RuledOut,
    #[serde(rename = "NOT RULED OUT")]
    NotRuledOut,
}

impl Overall {
    pub fn as_str(self) -> &'static str {
        match self {
            Overall::RuledOut => "RULED OUT",
            Overall::NotRuledOut => "NOT RULED OUT",
        }
    }
}

/// Whether a support admits a basis of product vectors. Auxiliary: it never
/// changes the overall verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProductAdvisory {
    pub name: String,
    pub support_dim: usize,
    pub is_product_spanned: bool,
    pub method: ProductMethod,
    pub product_vectors: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "D")]
    pub dimension: usize,
    pub config: AnalyzeConfig,
    pub bounds: Vec<BoundReport>,
    pub feasibility: FeasibilityReport,
    pub product_spanned: Vec<ProductAdvisory>,
    pub overall: Overall,
    /// Checks that ruled perfect LOCC discrimination out.
    pub reasons: Vec<String>,
}

impl AnalysisReport {
    pub fn bound(&self, id: super::Inequality) -> Option<&BoundReport> {
        self.bounds.iter().find(|b| b.inequality == id)
    }
}

/// Runs every applicable check. Perfect LOCC discrimination is ruled out iff
/// some bound is violated or no PPT POVM was found; otherwise nothing can be
/// concluded.
pub fn analyze(e: &Ensemble, cfg: &AnalyzeConfig) -> Result<AnalysisReport> {
    let mut ws = Workspace::new(e, cfg);
    let mut bounds = Vec::new();
    if let Some(r) = pure_chain_from(&ws) {
        bounds.push(r);
    }
    bounds.push(support_maximum_from(&mut ws)?);
    bounds.push(projector_chain_from(&mut ws)?);
    bounds.push(candidate_chain_from(&mut ws, e.states())?);
    bounds.push(optimized_chain_from(&mut ws)?);
    let feasibility = ppt_povm_feasibility(e, cfg.rank_tol, &cfg.povm);

    let mut product_spanned = Vec::with_capacity(e.len());
    for i in 0..e.len() {
        let pc = is_product_spanned(ws.support(i), &cfg.ascent)?;
        product_spanned.push(ProductAdvisory {
            name: e.names()[i].clone(),
            support_dim: ws.support(i).dim(),
            is_product_spanned: pc.is_product_spanned,
            method: pc.method,
            product_vectors: pc.product_vectors.len(),
            converged: pc.converged,
        });
    }

    let mut reasons: Vec<String> = bounds
        .iter()
        .filter(|b| b.verdict == Verdict::Violated)
        .map(|b| format!("{} violated: N = {} > {:.6}", b.inequality.as_str(), b.n, b.min_bound()))
        .collect();
    // A sweep limit hit while the residual still falls says nothing either way.
    if feasibility.stop == PovmStop::Plateau {
        reasons.push(format!(
            "no PPT POVM found (residual {:.3e} after {} sweeps; heuristic, not certified)",
            feasibility.residual, feasibility.iterations
        ));
    }
    let overall = if reasons.is_empty() {
        Overall::NotRuledOut
    } else {
        Overall::RuledOut
    };
    Ok(AnalysisReport {
        n: e.len(),
        dimension: e.dims().total(),
        config: *cfg,
        bounds,
        feasibility,
        product_spanned,
        overall,
        reasons,
    })
}
