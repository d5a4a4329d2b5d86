use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use locc_bounds::bounds::{
    analyze, bound_candidate_chain, bound_optimized_chain, bound_projector_chain, bound_pure_chain,
    bound_support_maximum, ppt_povm_feasibility, BoundReport, FeasibilityReport, Inequality, Overall, PovmStop, Verdict,
};
use locc_bounds::ensembles::{catalog, parse_states, serialize, CATALOG};
use locc_bounds::json::to_canonical_string;
use locc_bounds::measures::{mixed_measures, pure_measures};
use locc_bounds::qla::support_projector;
use locc_bounds::subspaces::{is_product_spanned, max_robustness_in_subspace, min_geometric_in_subspace};
use locc_bounds::PureState;

use crate::args::{BoundArgs, Command, Common, Format};
use crate::input::{catalog_params, load, read_file, Loaded};
use crate::output::{self, Envelope, MeasuresEntry, SchmidtEntry, SubspaceEntry, Tolerances, REPORT_SCHEMA_VERSION};
use crate::{Failure, Report};

pub fn run(cmd: &Command) -> (Result<Report, Failure>, Option<&PathBuf>) {
    let (common, report) = match cmd {
        Command::Schmidt(c) => (c, schmidt(c)),
        Command::Measures(c) => (c, measures(c)),
        Command::SubspaceMax(c) => (c, subspace_max(c)),
        Command::Feasibility(c) => (c, feasibility(c)),
        Command::Bound(b) => (&b.common, bound(b)),
        Command::Analyze(c) => (c, run_analyze(c)),
        Command::Catalog(c) => (c, list_catalog(c)),
    };
    (report, common.out.as_ref())
}

struct Ctx {
    loaded: Loaded,
    tol: Tolerances,
    format: Format,
}

impl Ctx {
    fn new(c: &Common) -> Result<Self, Failure> {
        Ok(Self {
            loaded: load(c)?,
            tol: Tolerances::new(c.config()),
            format: c.format,
        })
    }

    fn rank_tol(&self) -> f64 {
        self.tol.config.rank_tol
    }

    fn render<T: Serialize>(
        &self,
        command: &'static str,
        status: Option<&'static str>,
        result: T,
        text: impl FnOnce(&T) -> String,
    ) -> Result<String, Failure> {
        match self.format {
            Format::Json => {
                let env = Envelope {
                    schema_version: REPORT_SCHEMA_VERSION,
                    tool: "locc-bounds",
                    version: env!("CARGO_PKG_VERSION"),
                    command,
                    input: &self.loaded.echo,
                    tolerances: &self.tol,
                    status,
                    result,
                };
                to_canonical_string(&env).map_err(|e| Failure::Input(format!("cannot serialize report: {e}")))
            }
            Format::Text => {
                let mut s = output::header(command, &self.loaded.echo, &self.tol);
                s.push('\n');
                s.push_str(&text(&result));
                Ok(s)
            }
        }
    }

    fn pure_states(&self, command: &str) -> Result<Vec<PureState>, Failure> {
        (0..self.loaded.states.len())
            .map(|i| {
                self.loaded.pure(i, self.rank_tol()).ok_or_else(|| {
                    Failure::Input(format!(
                        "{command} needs pure states, but state {} ({}) has rank {}",
                        i,
                        self.loaded.names[i],
                        self.loaded.states[i].rank(self.rank_tol())
                    ))
                })
            })
            .collect()
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Satisfied => 0,
        Verdict::Violated => 1,
    }
}

fn schmidt(c: &Common) -> Result<Report, Failure> {
    let ctx = Ctx::new(c)?;
    let entries: Vec<SchmidtEntry> = ctx
        .pure_states("schmidt")?
        .iter()
        .zip(&ctx.loaded.names)
        .map(|(psi, name)| {
            let s = psi.schmidt();
            SchmidtEntry {
                name: name.clone(),
                schmidt_rank: s.rank(),
                coefficients: s.coefficients.clone(),
                left: s.left.iter().map(output::vector_pairs).collect(),
                right: s.right.iter().map(output::vector_pairs).collect(),
            }
        })
        .collect();
    let text = ctx.render("schmidt", None, entries, |e| output::schmidt_text(e))?;
    Ok(Report::plain(text))
}

fn measures(c: &Common) -> Result<Report, Failure> {
    let ctx = Ctx::new(c)?;
    let cfg = ctx.tol.config;
    let mut entries = Vec::with_capacity(ctx.loaded.states.len());
    for (i, s) in ctx.loaded.states.iter().enumerate() {
        entries.push(MeasuresEntry {
            name: ctx.loaded.names[i].clone(),
            rank: s.rank(cfg.rank_tol),
            pure: ctx.loaded.pure(i, cfg.rank_tol).map(|p| pure_measures(&p)),
            mixed: mixed_measures(s, cfg.rank_tol, &cfg.bisection)?,
        });
    }
    let text = ctx.render("measures", None, entries, |e| output::measures_text(e))?;
    Ok(Report::plain(text))
}

fn subspace_max(c: &Common) -> Result<Report, Failure> {
    let ctx = Ctx::new(c)?;
    let cfg = ctx.tol.config;
    let mut entries = Vec::new();
    let mut raw = Vec::new();
    for (i, s) in ctx.loaded.states.iter().enumerate() {
        let space = support_projector(s, cfg.rank_tol);
        let maxr = max_robustness_in_subspace(&space, &cfg.ascent)?;
        let ming = min_geometric_in_subspace(&space, &cfg.ascent)?;
        let product = is_product_spanned(&space, &cfg.ascent)?;
        entries.push(SubspaceEntry {
            name: ctx.loaded.names[i].clone(),
            support_dim: space.dim(),
            max_robustness: (&maxr).into(),
            min_geometric: (&ming).into(),
            product: (&product).into(),
        });
        raw.push((maxr, ming));
    }
    let text = ctx.render("subspace-max", None, entries, |e| output::subspace_text(e, &raw))?;
    Ok(Report::plain(text))
}

fn feasibility(c: &Common) -> Result<Report, Failure> {
    let ctx = Ctx::new(c)?;
    let cfg = ctx.tol.config;
    let r = ppt_povm_feasibility(&ctx.loaded.ensemble()?, cfg.rank_tol, &cfg.povm);
    let (code, status) = match r.stop {
        PovmStop::Converged => (0, "FEASIBLE"),
        PovmStop::Plateau => (1, "INFEASIBLE"),
        PovmStop::MaxSweeps => (3, "INCONCLUSIVE"),
    };
    let warning = sweep_warning(&r);
    let text = ctx.render("feasibility", Some(status), r, output::feasibility_text)?;
    Ok(Report { text, code, warning })
}

fn bound(b: &BoundArgs) -> Result<Report, Failure> {
    let ctx = Ctx::new(&b.common)?;
    let cfg = ctx.tol.config;
    let inequality: Inequality = b.inequality.into();
    if b.candidates.is_some() && inequality != Inequality::CandidateChain {
        return Err(Failure::Input("--candidates only applies to --inequality candidate-chain".into()));
    }
    let e = ctx.loaded.ensemble()?;
    let report: BoundReport = match inequality {
        Inequality::PureChain => bound_pure_chain(&ctx.pure_states("the pure chain")?)?,
        Inequality::SupportMaximum => bound_support_maximum(&e, &cfg)?,
        Inequality::ProjectorChain => bound_projector_chain(&e, &cfg)?,
        Inequality::CandidateChain => {
            let candidates = match &b.candidates {
                Some(path) => parse_states(&read_file(path)?)?.states,
                None => e.states().to_vec(),
            };
            bound_candidate_chain(&e, &candidates, &cfg)?
        }
        Inequality::OptimizedChainHeuristic => bound_optimized_chain(&e, &cfg)?,
    };
    let code = verdict_code(report.verdict);
    let status = report.verdict.as_str();
    let text = ctx.render("bound", Some(status), report, output::bound_text)?;
    Ok(Report { text, code, warning: None })
}

fn run_analyze(c: &Common) -> Result<Report, Failure> {
    let ctx = Ctx::new(c)?;
    let r = analyze(&ctx.loaded.ensemble()?, &ctx.tol.config)?;
    let warning = sweep_warning(&r.feasibility);
    let code = match (r.overall, &warning) {
        (Overall::RuledOut, _) => 1,
        (Overall::NotRuledOut, Some(_)) => 3,
        (Overall::NotRuledOut, None) => 0,
    };
    let status = r.overall.as_str();
    let text = ctx.render("analyze", Some(status), r, output::analysis_text)?;
    Ok(Report { text, code, warning })
}

/// A POVM search cut off by the sweep limit is a solver non-convergence.
fn sweep_warning(r: &FeasibilityReport) -> Option<String> {
    (r.stop == PovmStop::MaxSweeps).then(|| {
        format!(
            "POVM search stopped at the sweep limit ({} sweeps, residual {:.3e}); raise --max-sweeps",
            r.iterations, r.residual
        )
    })
}

#[derive(Serialize)]
struct CatalogListing {
    name: &'static str,
    params: BTreeMap<&'static str, f64>,
    description: &'static str,
}

/// Without `--catalog`, lists the entries. With it, writes the ensemble as a
/// file that `--file` accepts.
fn list_catalog(c: &Common) -> Result<Report, Failure> {
    let Some(name) = &c.catalog else {
        if c.file.is_some() {
            return Err(Failure::Input("catalog takes --catalog, not --file".into()));
        }
        let text = match c.format {
            Format::Json => {
                let list: Vec<CatalogListing> = CATALOG
                    .iter()
                    .map(|e| CatalogListing {
                        name: e.name,
                        params: e.params.iter().copied().collect(),
                        description: e.description,
                    })
                    .collect();
                to_canonical_string(&list).map_err(|e| Failure::Input(e.to_string()))?
            }
            Format::Text => {
                let mut s = String::new();
                for e in CATALOG {
                    let p: Vec<String> = e.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    s.push_str(&format!("{:24} {:40} {}\n", e.name, p.join(" "), e.description));
                }
                s
            }
        };
        return Ok(Report::plain(text));
    };
    let params = catalog_params(c);
    let e = catalog(name, &params)?;
    let mut metadata = BTreeMap::new();
    metadata.insert("catalog".to_string(), name.clone());
    for (k, v) in &params {
        metadata.insert(format!("param.{k}"), format!("{v}"));
    }
    Ok(Report::plain(serialize(&e, &metadata)))
}
