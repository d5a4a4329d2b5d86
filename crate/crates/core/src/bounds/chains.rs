//! The bound chains. Expensive per-state quantities live in a [`Workspace`]
//! so that `analyze` computes each of them once.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::analyze::AnalyzeConfig;
use super::dppt::{d_ppt_estimate, DEstimate};
use super::{BoundReport, DirectionNote, Ensemble, Estimate, Inequality, StateQuantities};
use crate::measures::{mixed_measures, pure_measures, BisectionOptions, MixedMeasures, PureMeasures};
use crate::solver::InnerOptions;
use crate::qla::{c64, max_abs, min_eigenvalue_on, support_projector, CMatrix, DensityMatrix, PureState, Subspace};
use crate::subspaces::{max_robustness_in_subspace, SubspaceExtremum};
use crate::{Error, Result};

/// Tolerated max-norm distance between a candidate's support projector and
/// the state's.
pub const CANDIDATE_SUPPORT_TOL: f64 = 1e-7;
/// Smallest eigenvalue a candidate must have on the support.
pub const CANDIDATE_MIN_EIGENVALUE: f64 = 1e-9;

const R_NOTE: &str = "pure-state robustness is the global-robustness closed form (Σ√λ)² − 1";
const D_NOTE: &str = "separable measurements relaxed to PPT; d_ppt is the lower end of the bisection bracket";

/// Best `𝓡 = α⁻¹(1 + R_g)` found over full-rank states on one support.
#[derive(Debug, Clone)]
pub(crate) struct Optimized {
    pub measures: MixedMeasures,
    pub evaluations: usize,
}

pub(crate) struct Workspace<'a> {
    e: &'a Ensemble,
    cfg: &'a AnalyzeConfig,
    supports: Vec<Subspace>,
    pure: Vec<Option<PureState>>,
    d: Vec<Option<DEstimate>>,
    projector: Vec<Option<MixedMeasures>>,
    extrema: Vec<Option<SubspaceExtremum>>,
    optimized: Vec<Option<Optimized>>,
}

impl<'a> Workspace<'a> {
    pub fn new(e: &'a Ensemble, cfg: &'a AnalyzeConfig) -> Self {
        let n = e.len();
        Self {
            e,
            cfg,
            supports: e.states().iter().map(|s| support_projector(s, cfg.rank_tol)).collect(),
            pure: e.states().iter().map(|s| s.as_pure(cfg.rank_tol)).collect(),
            d: vec![None; n],
            projector: vec![None; n],
            extrema: vec![None; n],
            optimized: vec![None; n],
        }
    }

    pub fn support(&self, i: usize) -> &Subspace {
        &self.supports[i]
    }

    pub fn pure(&self, i: usize) -> Option<&PureState> {
        self.pure[i].as_ref()
    }

    fn all_pure(&self) -> bool {
        self.pure.iter().all(Option::is_some)
    }

    pub fn d_ppt(&mut self, i: usize) -> Result<DEstimate> {
        if self.d[i].is_none() {
            self.d[i] = Some(d_ppt_estimate(&self.e.states()[i], self.cfg.rank_tol, &self.cfg.bisection)?);
        }
        Ok(self.d[i].clone().expect("just filled"))
    }

    /// Measures of the normalized support projector.
    fn projector_measures(&mut self, i: usize) -> Result<MixedMeasures> {
        if self.projector[i].is_none() {
            let rho = self.supports[i].normalized_projector()?;
            self.projector[i] = Some(mixed_measures(&rho, self.cfg.rank_tol, &self.cfg.bisection)?);
        }
        Ok(self.projector[i].clone().expect("just filled"))
    }

    fn extremum(&mut self, i: usize) -> Result<SubspaceExtremum> {
        if self.extrema[i].is_none() {
            self.extrema[i] = Some(max_robustness_in_subspace(&self.supports[i], &self.cfg.ascent)?);
        }
        Ok(self.extrema[i].clone().expect("just filled"))
    }

    fn optimized(&mut self, i: usize) -> Result<Optimized> {
        if self.optimized[i].is_none() {
            let start = self.projector_measures(i)?;
            self.optimized[i] = Some(optimize_cal_r(&self.supports[i], i, start, self.cfg)?);
        }
        Ok(self.optimized[i].clone().expect("just filled"))
    }
}

fn table(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn pure_columns(m: &[PureMeasures]) -> Vec<(&'static str, Vec<Option<f64>>)> {
    vec![
        ("1+R", m.iter().map(|x| Some(1.0 + x.robustness)).collect()),
        ("2^E_R", m.iter().map(|x| Some(x.rel_entropy.exp2())).collect()),
        ("2^G", m.iter().map(|x| Some(x.geometric.exp2())).collect()),
    ]
}

fn pure_quantities(name: &str, m: &PureMeasures) -> StateQuantities {
    StateQuantities {
        name: name.to_string(),
        quantities: table(&[("R", m.robustness), ("E_R", m.rel_entropy), ("G", m.geometric)]),
    }
}

/// `N ≤ D/avg(1+R) ≤ D/avg 2^{E_R} ≤ D/avg 2^{G}` for mutually orthogonal pure
/// states, from the Schmidt closed forms.
pub fn bound_pure_chain(states: &[PureState]) -> Result<BoundReport> {
    let e = Ensemble::from_pure(states, vec![])?;
    Ok(pure_chain_report(&e, states))
}

fn pure_chain_report(e: &Ensemble, states: &[PureState]) -> BoundReport {
    let m: Vec<PureMeasures> = states.iter().map(pure_measures).collect();
    let per_state = e.names().iter().zip(&m).map(|(name, x)| pure_quantities(name, x)).collect();
    BoundReport::assemble(
        Inequality::PureChain,
        e.dims(),
        per_state,
        pure_columns(&m),
        vec![
            DirectionNote::new("1+R", Estimate::Exact, R_NOTE),
            DirectionNote::new("2^E_R", Estimate::Exact, "relative entropy of a pure state equals its entanglement entropy"),
            DirectionNote::new("2^G", Estimate::Exact, "geometric measure −log₂ λ_max"),
        ],
    )
}

pub(crate) fn pure_chain_from(ws: &Workspace<'_>) -> Option<BoundReport> {
    let states: Vec<PureState> = (0..ws.e.len()).map(|i| ws.pure(i).cloned()).collect::<Option<_>>()?;
    Some(pure_chain_report(ws.e, &states))
}

/// The pure chain evaluated at the most entangled vector `Ψ_i` of each
/// support, found by multi-start ascent.
pub fn bound_support_maximum(e: &Ensemble, cfg: &AnalyzeConfig) -> Result<BoundReport> {
    support_maximum_from(&mut Workspace::new(e, cfg))
}

pub(crate) fn support_maximum_from(ws: &mut Workspace<'_>) -> Result<BoundReport> {
    let mut m = Vec::with_capacity(ws.e.len());
    let mut per_state = Vec::with_capacity(ws.e.len());
    let mut converged = true;
    for i in 0..ws.e.len() {
        let ext = ws.extremum(i)?;
        converged &= ext.converged;
        let pm = pure_measures(&ext.argmax);
        let mut q = pure_quantities(&ws.e.names()[i], &pm);
        q.quantities.insert("supportDim".into(), ws.support(i).dim() as f64);
        q.quantities.insert("starts".into(), ext.starts as f64);
        per_state.push(q);
        m.push(pm);
    }
    let starts = ws.cfg.ascent.starts;
    let seed = ws.cfg.ascent.seed;
    let mut r_note = format!("max over the support from {starts} seeded starts (seed {seed}); {R_NOTE}");
    if !converged {
        r_note.push_str("; best start hit the iteration cap");
    }
    Ok(BoundReport::assemble(
        Inequality::SupportMaximum,
        ws.e.dims(),
        per_state,
        pure_columns(&m),
        vec![
            DirectionNote::new("1+R", Estimate::MultiStartLowerBound, r_note),
            DirectionNote::new("2^E_R", Estimate::Exact, "evaluated at the best-found robustness maximizer"),
            DirectionNote::new("2^G", Estimate::Exact, "evaluated at the best-found robustness maximizer"),
        ],
    ))
}

fn d_quantities(q: &mut BTreeMap<String, f64>, d: &DEstimate) {
    q.insert("d_ppt".into(), d.value);
    q.insert("d_ppt_upper".into(), d.bracket.1);
    q.insert("rank".into(), d.support_rank as f64);
}

fn mixed_quantities(q: &mut BTreeMap<String, f64>, m: &MixedMeasures) {
    q.insert("R_g".into(), m.global_robustness);
    q.insert("alpha".into(), m.alpha);
    q.insert("calR".into(), m.cal_r);
    q.insert("S".into(), m.vn_entropy);
}

/// `2^E` and `2^G` columns: evaluated only when every state is pure.
fn entropy_columns(ws: &Workspace<'_>, q: &mut [StateQuantities]) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    let mut e_col = Vec::new();
    let mut g_col = Vec::new();
    for (i, sq) in q.iter_mut().enumerate() {
        match ws.pure(i) {
            Some(psi) => {
                let m = pure_measures(psi);
                sq.quantities.insert("E".into(), m.rel_entropy);
                sq.quantities.insert("G".into(), m.geometric);
                e_col.push(Some(m.rel_entropy.exp2()));
                g_col.push(Some(m.geometric.exp2()));
            }
            None => {
                e_col.push(None);
                g_col.push(None);
            }
        }
    }
    (e_col, g_col)
}

fn entropy_notes(ws: &Workspace<'_>) -> [DirectionNote; 2] {
    if ws.all_pure() {
        [
            DirectionNote::new("2^E", Estimate::Exact, "E = E_R + S with S = 0 for pure states"),
            DirectionNote::new("2^G", Estimate::Exact, "geometric measure −log₂ λ_max"),
        ]
    } else {
        [
            DirectionNote::new("2^E", Estimate::NotEvaluated, "mixed-state relative entropy of entanglement is not computed"),
            DirectionNote::new("2^G", Estimate::NotEvaluated, "mixed-state geometric measure is not computed"),
        ]
    }
}

/// `N ≤ D/avg d ≤ D/avg r ≤ D/avg 2^E ≤ D/avg 2^G`, with
/// `r = rank(ρ)(1 + R_g(ρ))` for the normalized support projector `ρ`.
pub fn bound_projector_chain(e: &Ensemble, cfg: &AnalyzeConfig) -> Result<BoundReport> {
    projector_chain_from(&mut Workspace::new(e, cfg))
}

pub(crate) fn projector_chain_from(ws: &mut Workspace<'_>) -> Result<BoundReport> {
    let n = ws.e.len();
    let mut per_state = Vec::with_capacity(n);
    let mut d_col = Vec::with_capacity(n);
    let mut r_col = Vec::with_capacity(n);
    for i in 0..n {
        let d = ws.d_ppt(i)?;
        let m = ws.projector_measures(i)?;
        let r = ws.support(i).dim() as f64 * (1.0 + m.global_robustness);
        let mut q = BTreeMap::new();
        d_quantities(&mut q, &d);
        q.insert("R_g(rho)".into(), m.global_robustness);
        q.insert("r".into(), r);
        per_state.push(StateQuantities { name: ws.e.names()[i].clone(), quantities: q });
        d_col.push(Some(d.value));
        r_col.push(Some(r));
    }
    let (e_col, g_col) = entropy_columns(ws, &mut per_state);
    let [en, gn] = entropy_notes(ws);
    let r_estimate = if ws.all_pure() { Estimate::Exact } else { Estimate::PptLowerBound };
    Ok(BoundReport::assemble(
        Inequality::ProjectorChain,
        ws.e.dims(),
        per_state,
        vec![("d", d_col), ("r", r_col), ("2^E", e_col), ("2^G", g_col)],
        vec![
            DirectionNote::new("d", Estimate::PptLowerBound, D_NOTE),
            DirectionNote::new("r", r_estimate, "R_g of the normalized support projector; PPT relaxation unless rank one"),
            en,
            gn,
        ],
    ))
}

/// Checks that `candidate` is full rank on the support of `sigma`.
fn check_candidate(i: usize, sigma: &DensityMatrix, candidate: &DensityMatrix, rank_tol: f64) -> Result<()> {
    if candidate.dims() != sigma.dims() {
        return Err(Error::CandidateSupport {
            index: i,
            reason: format!("dimensions {} vs {}", candidate.dims(), sigma.dims()),
        });
    }
    let want = support_projector(sigma, rank_tol);
    let have = support_projector(candidate, rank_tol);
    let dist = max_abs(&(want.projector() - have.projector()));
    if dist > CANDIDATE_SUPPORT_TOL {
        return Err(Error::CandidateSupport {
            index: i,
            reason: format!("support projector distance {dist:e} exceeds {CANDIDATE_SUPPORT_TOL:e}"),
        });
    }
    let low = min_eigenvalue_on(candidate, &want);
    if low < CANDIDATE_MIN_EIGENVALUE {
        return Err(Error::CandidateSupport {
            index: i,
            reason: format!("smallest eigenvalue on the support {low:e} is below {CANDIDATE_MIN_EIGENVALUE:e}"),
        });
    }
    Ok(())
}

/// `N ≤ D/avg d ≤ D/avg 𝓡(σ″) ≤ D/avg 2^E ≤ D/avg 2^G` for candidate states
/// `σ″_i` of full rank on the support of `σ_i`, `𝓡 = α⁻¹(1 + R_g)`.
pub fn bound_candidate_chain(e: &Ensemble, candidates: &[DensityMatrix], cfg: &AnalyzeConfig) -> Result<BoundReport> {
    candidate_chain_from(&mut Workspace::new(e, cfg), candidates)
}

pub(crate) fn candidate_chain_from(ws: &mut Workspace<'_>, candidates: &[DensityMatrix]) -> Result<BoundReport> {
    let n = ws.e.len();
    if candidates.len() != n {
        return Err(Error::DimensionMismatch(format!("{} candidates for {n} states", candidates.len())));
    }
    for (i, c) in candidates.iter().enumerate() {
        check_candidate(i, &ws.e.states()[i], c, ws.cfg.rank_tol)?;
    }
    let mut per_state = Vec::with_capacity(n);
    let mut d_col = Vec::with_capacity(n);
    let mut r_col = Vec::with_capacity(n);
    for (i, c) in candidates.iter().enumerate() {
        let d = ws.d_ppt(i)?;
        let m = mixed_measures(c, ws.cfg.rank_tol, &ws.cfg.bisection)?;
        let mut q = BTreeMap::new();
        d_quantities(&mut q, &d);
        mixed_quantities(&mut q, &m);
        per_state.push(StateQuantities { name: ws.e.names()[i].clone(), quantities: q });
        d_col.push(Some(d.value));
        r_col.push(Some(m.cal_r));
    }
    let (e_col, g_col) = entropy_columns(ws, &mut per_state);
    let [en, gn] = entropy_notes(ws);
    let r_estimate = if ws.all_pure() { Estimate::Exact } else { Estimate::PptLowerBound };
    Ok(BoundReport::assemble(
        Inequality::CandidateChain,
        ws.e.dims(),
        per_state,
        vec![("d", d_col), ("calR", r_col), ("2^E", e_col), ("2^G", g_col)],
        vec![
            DirectionNote::new("d", Estimate::PptLowerBound, D_NOTE),
            DirectionNote::new("calR", r_estimate, "α⁻¹(1 + R_g) at the supplied candidates; R_g PPT-relaxed unless rank one"),
            en,
            gn,
        ],
    ))
}

/// The candidate chain with `𝓡` maximized heuristically over full-rank
/// states on each support.
pub fn bound_optimized_chain(e: &Ensemble, cfg: &AnalyzeConfig) -> Result<BoundReport> {
    optimized_chain_from(&mut Workspace::new(e, cfg))
}

pub(crate) fn optimized_chain_from(ws: &mut Workspace<'_>) -> Result<BoundReport> {
    let n = ws.e.len();
    let mut per_state = Vec::with_capacity(n);
    let mut d_col = Vec::with_capacity(n);
    let mut r_col = Vec::with_capacity(n);
    for i in 0..n {
        let d = ws.d_ppt(i)?;
        let best = ws.optimized(i)?;
        let mut q = BTreeMap::new();
        d_quantities(&mut q, &d);
        mixed_quantities(&mut q, &best.measures);
        q.insert("evaluations".into(), best.evaluations as f64);
        per_state.push(StateQuantities { name: ws.e.names()[i].clone(), quantities: q });
        d_col.push(Some(d.value));
        r_col.push(Some(best.measures.cal_r));
    }
    let (e_col, g_col) = entropy_columns(ws, &mut per_state);
    let [en, gn] = entropy_notes(ws);
    let h = ws.cfg.heuristic;
    let r_note = if ws.all_pure() {
        Estimate::Exact
    } else {
        Estimate::HeuristicPptLowerBound
    };
    Ok(BoundReport::assemble(
        Inequality::OptimizedChainHeuristic,
        ws.e.dims(),
        per_state,
        vec![("d", d_col), ("calR", r_col), ("2^E", e_col), ("2^G", g_col)],
        vec![
            DirectionNote::new("d", Estimate::PptLowerBound, D_NOTE),
            DirectionNote::new(
                "calR",
                r_note,
                format!(
                    "best α⁻¹(1 + R_g) over the normalized projector and {} seeded full-rank states with {} refinement steps each (seed {})",
                    h.starts, h.refine_steps, ws.cfg.ascent.seed
                ),
            ),
            en,
            gn,
        ],
    ))
}

fn gaussian_matrix(k: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(k, k, |_, _| c64(StandardNormal.sample(rng), StandardNormal.sample(rng)))
}

/// `B A A† B† / Tr(A A†)` for the support basis `B`.
fn state_on_support(space: &Subspace, a: &CMatrix) -> Result<DensityMatrix> {
    let b = space.basis_matrix();
    let aa = a * a.adjoint();
    let tr = aa.trace().re;
    let m = &b * aa * b.adjoint() * c64(1.0 / tr, 0.0);
    DensityMatrix::new(space.dims(), crate::qla::hermitian_part(&m))
}

const SCREEN_BISECT_TOL: f64 = 1e-3;
const SCREEN_MAX_ITER: usize = 400;

fn optimize_cal_r(space: &Subspace, index: usize, projector: MixedMeasures, cfg: &AnalyzeConfig) -> Result<Optimized> {
    let k = space.dim();
    let mut best = Optimized {
        measures: projector,
        evaluations: 1,
    };
    if k == 1 {
        return Ok(best);
    }
    let h = cfg.heuristic;
    // Candidates are only ranked on a coarse, short solve; the winner is redone
    // at full precision before it enters a bound.
    let screen = BisectionOptions {
        bisect_tol: cfg.bisection.bisect_tol.max(SCREEN_BISECT_TOL),
        inner: InnerOptions {
            max_iter: cfg.bisection.inner.max_iter.min(SCREEN_MAX_ITER),
            plateau_window: cfg.bisection.inner.plateau_window.min(SCREEN_MAX_ITER / 4),
            ..cfg.bisection.inner
        },
    };
    let mut winner: Option<(f64, DensityMatrix)> = None;
    let mut evaluations = 1;
    let mut evaluate = |a: &CMatrix| -> Result<Option<f64>> {
        let cand = state_on_support(space, a)?;
        if min_eigenvalue_on(&cand, space) < CANDIDATE_MIN_EIGENVALUE {
            return Ok(None);
        }
        let v = mixed_measures(&cand, cfg.rank_tol, &screen)?.cal_r;
        evaluations += 1;
        if winner.as_ref().is_none_or(|(w, _)| v > *w) {
            winner = Some((v, cand));
        }
        Ok(Some(v))
    };
    for start in 0..h.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.ascent.seed);
        rng.set_stream(((index as u64) << 32) | start as u64);
        let mut a = gaussian_matrix(k, &mut rng);
        let Some(mut value) = evaluate(&a)? else { continue };
        let mut step = 0.3;
        for _ in 0..h.refine_steps {
            let scale = a.norm() / (k as f64);
            let trial = &a + gaussian_matrix(k, &mut rng) * c64(step * scale, 0.0);
            match evaluate(&trial)? {
                Some(v) if v > value => {
                    a = trial;
                    value = v;
                    step *= 1.5;
                }
                _ => step *= 0.5,
            }
        }
    }
    best.evaluations = evaluations;
    if let Some((_, cand)) = winner {
        let m = mixed_measures(&cand, cfg.rank_tol, &cfg.bisection)?;
        if m.cal_r > best.measures.cal_r {
            best.measures = m;
        }
    }
    Ok(best)
}
