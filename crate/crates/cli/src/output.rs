use std::fmt::Write as _;

use serde::Serialize;

use locc_bounds::bounds::{
    AnalysisReport, AnalyzeConfig, BoundReport, FeasibilityReport, PovmStop, ENSEMBLE_ORTH_TOL, VERDICT_SLACK,
};
use locc_bounds::measures::{MixedMeasures, PureMeasures};
use locc_bounds::qla::{CVector, TOL_HERM, TOL_NORM, TOL_PSD, TOL_TRACE};
use locc_bounds::subspaces::{ProductContent, ProductMethod, SubspaceExtremum, PRODUCT_TOL};

use crate::input::InputEcho;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Every tolerance in effect, module defaults included.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Tolerances {
    pub config: AnalyzeConfig,
    pub tol_herm: f64,
    pub tol_psd: f64,
    pub tol_trace: f64,
    pub tol_norm: f64,
    pub ensemble_orth_tol: f64,
    pub product_tol: f64,
    pub verdict_slack: f64,
}

impl Tolerances {
    pub fn new(config: AnalyzeConfig) -> Self {
        Self {
            config,
            tol_herm: TOL_HERM,
            tol_psd: TOL_PSD,
            tol_trace: TOL_TRACE,
            tol_norm: TOL_NORM,
            ensemble_orth_tol: ENSEMBLE_ORTH_TOL,
            product_tol: PRODUCT_TOL,
            verdict_slack: VERDICT_SLACK,
        }
    }

    fn header(&self) -> String {
        let c = &self.config;
        format!(
            "# tolerances: rank_tol={:e} tol_feas={:e} bisect_tol={:e} inner_threshold={:e} inner_max_iter={} \
             povm_max_sweeps={} plateau={}x{:e} starts={} seed={} heuristic_starts={} refine_steps={} \
             tol_herm={:e} tol_psd={:e} tol_trace={:e} tol_norm={:e} orth_tol={:e} product_tol={:e} verdict_slack={:e}",
            c.rank_tol,
            c.povm.threshold,
            c.bisection.bisect_tol,
            c.bisection.inner.threshold,
            c.bisection.inner.max_iter,
            c.povm.max_sweeps,
            c.povm.plateau_window,
            c.povm.plateau_rel,
            c.ascent.starts,
            c.ascent.seed,
            c.heuristic.starts,
            c.heuristic.refine_steps,
            self.tol_herm,
            self.tol_psd,
            self.tol_trace,
            self.tol_norm,
            self.ensemble_orth_tol,
            self.product_tol,
            self.verdict_slack,
        )
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub input: &'a InputEcho,
    pub tolerances: &'a Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<&'static str>,
    pub result: T,
}

pub fn header(command: &str, input: &InputEcho, tol: &Tolerances) -> String {
    let source = match input {
        InputEcho::File { path } => format!("file {path}"),
        InputEcho::Catalog { name, params } => {
            let p: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("catalog {name} {{{}}}", p.join(", "))
        }
    };
    format!(
        "# locc-bounds {} {command}\n# input: {source}\n{}\n",
        env!("CARGO_PKG_VERSION"),
        tol.header()
    )
}

pub fn vector_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn fmt_vector(v: &CVector) -> String {
    let parts: Vec<String> = v.iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect();
    format!("[{}]", parts.join(", "))
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SchmidtEntry {
    pub name: String,
    pub schmidt_rank: usize,
    /// Squared Schmidt coefficients, descending.
    pub coefficients: Vec<f64>,
    pub left: Vec<Vec<[f64; 2]>>,
    pub right: Vec<Vec<[f64; 2]>>,
}

pub fn schmidt_text(entries: &[SchmidtEntry]) -> String {
    let mut s = String::new();
    for e in entries {
        let _ = writeln!(s, "{}: Schmidt rank {}", e.name, e.schmidt_rank);
        for (k, c) in e.coefficients.iter().enumerate() {
            let _ = writeln!(s, "  lambda_{} = {:.12}", k + 1, c);
        }
    }
    s
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MeasuresEntry {
    pub name: String,
    pub rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pure: Option<PureMeasures>,
    pub mixed: MixedMeasures,
}

pub fn measures_text(entries: &[MeasuresEntry]) -> String {
    let mut s = String::new();
    for e in entries {
        let _ = writeln!(s, "{} (rank {}):", e.name, e.rank);
        if let Some(p) = &e.pure {
            let _ = writeln!(s, "  R   = {:.10}   (global robustness, closed form)", p.robustness);
            let _ = writeln!(s, "  E_R = {:.10} bits", p.rel_entropy);
            let _ = writeln!(s, "  G   = {:.10} bits", p.geometric);
        }
        let m = &e.mixed;
        let _ = writeln!(s, "  S   = {:.10} bits", m.vn_entropy);
        let source = match m.robustness_source {
            locc_bounds::measures::RobustnessSource::PureClosedForm => "closed form",
            locc_bounds::measures::RobustnessSource::PptLowerBound => "PPT lower bound",
        };
        let _ = writeln!(s, "  R_g = {:.10}   ({source})", m.global_robustness);
        let _ = writeln!(s, "  alpha = {:.10}   calR = alpha^-1 (1 + R_g) = {:.10}", m.alpha, m.cal_r);
    }
    s
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtremumDto {
    pub value: f64,
    pub argmax: Vec<[f64; 2]>,
    pub starts: usize,
    pub converged: bool,
    pub per_start_values: Vec<f64>,
}

impl From<&SubspaceExtremum> for ExtremumDto {
    fn from(x: &SubspaceExtremum) -> Self {
        Self {
            value: x.value,
            argmax: vector_pairs(x.argmax.vector()),
            starts: x.starts,
            converged: x.converged,
            per_start_values: x.per_start_values.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProductDto {
    pub is_product_spanned: bool,
    pub method: ProductMethod,
    pub infinite_family: bool,
    pub converged: bool,
    pub product_vectors: Vec<Vec<[f64; 2]>>,
}

impl From<&ProductContent> for ProductDto {
    fn from(p: &ProductContent) -> Self {
        Self {
            is_product_spanned: p.is_product_spanned,
            method: p.method,
            infinite_family: p.infinite_family,
            converged: p.converged,
            product_vectors: p.product_vectors.iter().map(|v| vector_pairs(v.vector())).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SubspaceEntry {
    pub name: String,
    pub support_dim: usize,
    pub max_robustness: ExtremumDto,
    pub min_geometric: ExtremumDto,
    pub product: ProductDto,
}

pub fn subspace_text(entries: &[SubspaceEntry], raw: &[(SubspaceExtremum, SubspaceExtremum)]) -> String {
    let mut s = String::new();
    for (e, (maxr, ming)) in entries.iter().zip(raw) {
        let _ = writeln!(s, "{} (support dimension {}):", e.name, e.support_dim);
        let _ = writeln!(
            s,
            "  max R over support >= {:.10}  ({} starts, lower bound{})",
            e.max_robustness.value,
            e.max_robustness.starts,
            if e.max_robustness.converged { "" } else { ", not converged" }
        );
        let _ = writeln!(s, "    at {}", fmt_vector(maxr.argmax.vector()));
        let _ = writeln!(s, "  min G over support <= {:.10}", e.min_geometric.value);
        let _ = writeln!(s, "    at {}", fmt_vector(ming.argmax.vector()));
        let method = match e.product.method {
            ProductMethod::Exact => "exact",
            ProductMethod::Numeric => "numeric",
        };
        let _ = writeln!(
            s,
            "  product-spanned: {} ({method}, {} product vector{}{})",
            e.product.is_product_spanned,
            e.product.product_vectors.len(),
            if e.product.product_vectors.len() == 1 { "" } else { "s" },
            if e.product.infinite_family { ", infinitely many" } else { "" }
        );
    }
    s
}

pub fn feasibility_text(r: &FeasibilityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "PPT POVM feasibility: {} (residual {:.3e} after {} sweeps, stop: {})",
        if r.feasible { "FEASIBLE" } else { "NOT FOUND" },
        r.residual,
        r.iterations,
        match r.stop {
            PovmStop::Converged => "converged",
            PovmStop::Plateau => "plateau",
            PovmStop::MaxSweeps => "max sweeps",
        }
    );
    match r.stop {
        PovmStop::Converged => {}
        PovmStop::Plateau => {
            let _ = writeln!(s, "  heuristic infeasibility signal; not a certificate");
        }
        PovmStop::MaxSweeps => {
            let _ = writeln!(s, "  sweep limit reached while the residual was still falling; inconclusive");
        }
    }
    s
}

pub fn bound_text(b: &BoundReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}: N = {}, D = {}", b.inequality.as_str(), b.n, b.dimension);
    let mut chain = format!("  N = {}", b.n);
    for l in &b.links {
        match (l.bound, l.verdict) {
            (Some(v), Some(verdict)) => {
                let _ = write!(chain, " <= D/avg({}) = {}/{:.9} = {:.9} [{}]", l.quantity, b.dimension, l.average.unwrap_or(f64::NAN), v, verdict.as_str());
            }
            _ => {
                let _ = write!(chain, " <= D/avg({}) = n/a [not evaluated]", l.quantity);
            }
        }
    }
    let _ = writeln!(s, "{chain}");
    let _ = writeln!(s, "  verdict: {}", b.verdict.as_str());
    for q in &b.per_state {
        let parts: Vec<String> = q.quantities.iter().map(|(k, v)| format!("{k}={}", fmt_quantity(*v))).collect();
        let _ = writeln!(s, "  {}: {}", q.name, parts.join(" "));
    }
    for d in &b.directions {
        let estimate = serde_json::to_value(d.estimate)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        if estimate == "exact" {
            let _ = writeln!(s, "  [{}] exact: {}", d.quantity, d.note);
        } else if d.bound_effect != "upper-estimate" {
            let _ = writeln!(s, "  [{}] not evaluated: {}", d.quantity, d.note);
        } else {
            let _ = writeln!(s, "  [{}] {estimate}, so the bound is an {}: {}", d.quantity, d.bound_effect, d.note);
        }
    }
    s
}

fn fmt_quantity(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.9}")
    }
}

pub fn analysis_text(r: &AnalysisReport) -> String {
    let mut s = String::new();
    for b in &r.bounds {
        s.push_str(&bound_text(b));
        s.push('\n');
    }
    s.push_str(&feasibility_text(&r.feasibility));
    s.push('\n');
    let _ = writeln!(s, "product-spanned supports (auxiliary, does not affect the verdict):");
    for p in &r.product_spanned {
        let _ = writeln!(s, "  {}: dim {}, product-spanned = {}", p.name, p.support_dim, p.is_product_spanned);
    }
    s.push('\n');
    let _ = writeln!(s, "overall: LOCC perfect discrimination {}", r.overall.as_str());
    for reason in &r.reasons {
        let _ = writeln!(s, "  - {reason}");
    }
    s
}
