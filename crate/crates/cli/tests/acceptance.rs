//! Acceptance criteria. Each test prints one `criterion N PASS|FAIL` line;
//! run with `cargo test --release -p locc-bounds-cli --test acceptance -- --nocapture --test-threads 1`
//! to see them all.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use locc_bounds::bounds::{
    analyze, bound_support_maximum, d_ppt_estimate, ppt_povm_feasibility, AnalyzeConfig, Ensemble, Inequality, Overall,
    Verdict,
};
use locc_bounds::ensembles::{catalog, CATALOG};
use locc_bounds::measures::{global_robustness_ppt, pure_measures, BisectionOptions};
use locc_bounds::qla::{c64, partial_transpose, support_projector, trace_product, DEFAULT_RANK_TOL};
use locc_bounds::subspaces::{
    is_product_spanned, is_product_spanned_numeric, max_robustness_in_subspace, product_vectors_2x2, AscentOptions,
};
use locc_bounds::{BipartiteDims, CMatrix, CVector, DensityMatrix, PureState, Subspace};

const CHAIN_SLACK: f64 = 1e-9;
const LU_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-9;
const ROBUSTNESS_TOL: f64 = 2e-4;
const BELL_RUNTIME: Duration = Duration::from_secs(5);
const SUPPORT_MAX_TOL: f64 = 1e-3;
const CROSS_TOL: f64 = 1e-6;
const D_ANCHOR_TOL: f64 = 1e-3;
const D_SUM_SLACK: f64 = 1e-3;
const GRID_TOL: f64 = 1e-4;
const SCHMIDT_RECON_TOL: f64 = 1e-10;
const PT_PHI_TOL: f64 = 1e-12;

fn report(n: u32, title: &str, outcome: Result<String, String>) {
    match &outcome {
        Ok(detail) => println!("criterion {n:>2} PASS  {title}: {detail}"),
        Err(detail) => println!("criterion {n:>2} FAIL  {title}: {detail}"),
    }
    if let Err(detail) = outcome {
        panic!("criterion {n} ({title}) failed: {detail}");
    }
}

fn dims(a: usize, b: usize) -> BipartiteDims {
    BipartiteDims::new(a, b).unwrap()
}

fn gaussian(len: usize, rng: &mut ChaCha8Rng) -> CVector {
    CVector::from_fn(len, |_, _| c64(StandardNormal.sample(rng), StandardNormal.sample(rng)))
}

fn haar_state(d: BipartiteDims, rng: &mut ChaCha8Rng) -> PureState {
    let v = gaussian(d.total(), rng);
    let n = v.norm();
    PureState::new(d, v / c64(n, 0.0)).unwrap()
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| c64(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .qr()
        .q()
}

/// Squared Schmidt coefficients from the spectrum of the reduced state,
/// computed without the library's decomposition.
fn oracle_spectrum(psi: &CVector, d: BipartiteDims) -> Vec<f64> {
    let m = CMatrix::from_fn(d.da(), d.db(), |i, j| psi[i * d.db() + j]);
    let rho_a = &m * m.adjoint();
    let mut ev: Vec<f64> = rho_a.symmetric_eigenvalues().iter().map(|x| x.max(0.0)).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

struct OracleMeasures {
    one_plus_r: f64,
    two_e: f64,
    two_g: f64,
}

fn oracle_measures(psi: &CVector, d: BipartiteDims) -> OracleMeasures {
    let ev = oracle_spectrum(psi, d);
    let s: f64 = ev.iter().map(|l| l.sqrt()).sum();
    let e: f64 = ev.iter().filter(|&&l| l > 0.0).map(|l| -l * l.log2()).sum();
    OracleMeasures {
        one_plus_r: s * s,
        two_e: e.exp2(),
        two_g: 1.0 / ev[0],
    }
}

#[test]
fn criterion_01_pure_state_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_chain = f64::INFINITY;
    let mut worst_lu: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let per_dims = 10_000;
    for d in [dims(2, 2), dims(2, 3), dims(3, 3)] {
        for _ in 0..per_dims {
            let psi = haar_state(d, &mut rng);
            let m = pure_measures(&psi);
            let (r, e, g) = (1.0 + m.robustness, m.rel_entropy.exp2(), m.geometric.exp2());
            worst_chain = worst_chain.min(r - e).min(e - g);

            let u = random_unitary(d.da(), &mut rng).kronecker(&random_unitary(d.db(), &mut rng));
            let moved = PureState::new(d, &u * psi.vector()).unwrap();
            let m2 = pure_measures(&moved);
            worst_lu = worst_lu
                .max((m.robustness - m2.robustness).abs())
                .max((m.rel_entropy - m2.rel_entropy).abs())
                .max((m.geometric - m2.geometric).abs());

            let o = oracle_measures(psi.vector(), d);
            worst_oracle = worst_oracle.max((o.one_plus_r - r).abs()).max((o.two_e - e).abs()).max((o.two_g - g).abs());
        }
    }
    let detail = format!(
        "{} states; min chain slack {worst_chain:.3e}, max LU change {worst_lu:.3e}, max oracle gap {worst_oracle:.3e}",
        3 * per_dims
    );
    let ok = worst_chain >= -CHAIN_SLACK && worst_lu <= LU_TOL && worst_oracle <= ORACLE_TOL;
    report(1, "pure-state closed forms", if ok { Ok(detail) } else { Err(detail) });
}

#[test]
fn criterion_02_robustness_oracle_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d = dims(2, 2);
    let opts = BisectionOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let psi = haar_state(d, &mut rng);
        let closed = oracle_measures(psi.vector(), d).one_plus_r - 1.0;
        let est = global_robustness_ppt(&psi.density(), &opts).unwrap();
        worst = worst.max((est.value - closed).abs());
    }
    let detail = format!("100 two-qubit states; max |bisection − (Σ√λ)²+1| = {worst:.3e} (tol {ROBUSTNESS_TOL:e})");
    report(2, "robustness oracle agreement", if worst <= ROBUSTNESS_TOL { Ok(detail) } else { Err(detail) });
}

#[test]
fn criterion_03_bell_basis_verdict() {
    let e = catalog("bell4", &BTreeMap::new()).unwrap();
    let t = Instant::now();
    let r = analyze(&e, &AnalyzeConfig::default()).unwrap();
    let elapsed = t.elapsed();
    let chain = r.bound(Inequality::PureChain).expect("bell states are pure");
    let values: Vec<f64> = chain.links.iter().filter_map(|l| l.bound).collect();
    let detail = format!(
        "chain {values:?}, verdict {}, overall {}, {elapsed:.2?}",
        chain.verdict.as_str(),
        r.overall.as_str()
    );
    let ok = values.len() == 3
        && values.iter().all(|&v| v == 2.0)
        && chain.verdict == Verdict::Violated
        && chain.n == 4
        && r.overall == Overall::RuledOut
        && elapsed < BELL_RUNTIME;
    report(3, "Bell-basis verdict", if ok { Ok(detail) } else { Err(detail) });
}

#[test]
fn criterion_04_two_states_never_ruled_out() {
    let cfg = AnalyzeConfig::default();
    let mut ruled_out = Vec::new();
    let mut count = 0;
    let t = Instant::now();
    for (da, db) in [(2.0, 2.0), (3.0, 3.0)] {
        for seed in 0..100 {
            let params = BTreeMap::from([("dA".to_string(), da), ("dB".to_string(), db), ("seed".to_string(), seed as f64)]);
            let e = catalog("two-random-orthogonal", &params).unwrap();
            let r = analyze(&e, &cfg).unwrap();
            count += 1;
            if r.overall != Overall::NotRuledOut {
                ruled_out.push(format!("{da}x{db} seed {seed}: {:?}", r.reasons));
            }
        }
    }
    let detail = format!("{count} pairs, {} ruled out, {:.1?}", ruled_out.len(), t.elapsed());
    report(
        4,
        "two states never ruled out",
        if ruled_out.is_empty() { Ok(detail) } else { Err(format!("{detail}; {}", ruled_out.join("; "))) },
    );
}

#[test]
fn criterion_05_mixed_pair_support_maximum() {
    // The maximally entangled vectors Φ± lie in the supports, so the best
    // 1 + R is 2 and the bound is D/2 = 2.
    let cfg = AnalyzeConfig::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for alpha in [0.25, 0.5, 0.75] {
        for beta in [0.25, 0.5, 0.75] {
            let params = BTreeMap::from([("alpha".to_string(), alpha), ("beta".to_string(), beta)]);
            let e = catalog("bell-mixture-pair", &params).unwrap();
            let b = bound_support_maximum(&e, &cfg).unwrap();
            let value = b.min_bound();
            let spanned: Vec<bool> = e
                .states()
                .iter()
                .map(|s| is_product_spanned(&support_projector(s, cfg.rank_tol), &cfg.ascent).unwrap().is_product_spanned)
                .collect();
            let good = (value - 2.0).abs() <= SUPPORT_MAX_TOL && b.verdict == Verdict::Satisfied && spanned == [false, false];
            ok &= good;
            lines.push(format!("({alpha},{beta}) {value:.6} {} {spanned:?}", b.verdict.as_str()));
        }
    }
    let detail = lines.join(", ");
    report(5, "mixed pair with non-product supports", if ok { Ok(detail) } else { Err(detail) });
}

fn projector_counterpart(e: &Ensemble) -> Ensemble {
    let states = e
        .states()
        .iter()
        .map(|s| support_projector(s, DEFAULT_RANK_TOL).normalized_projector().unwrap())
        .collect();
    Ensemble::new(states, e.names().to_vec()).unwrap()
}

/// Largest `|Tr(Π_i σ_j) − δ_ij|`.
fn cross_error(povm: &[CMatrix], e: &Ensemble) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, p) in povm.iter().enumerate() {
        for (j, s) in e.states().iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((trace_product(p, s.matrix()) - target).abs());
        }
    }
    worst
}

#[test]
fn criterion_06_support_degeneracy() {
    let cfg = AnalyzeConfig::default();
    let shapes: [(f64, f64, f64, f64); 5] =
        [(2.0, 2.0, 2.0, 1.0), (2.0, 2.0, 2.0, 2.0), (2.0, 3.0, 2.0, 2.0), (3.0, 3.0, 3.0, 2.0), (2.0, 2.0, 3.0, 1.0)];
    let mut mismatches = Vec::new();
    let mut feasible = 0;
    let mut worst_cross: f64 = 0.0;
    for k in 0..50 {
        let (da, db, n, rank) = shapes[k % shapes.len()];
        let params = BTreeMap::from([
            ("dA".to_string(), da),
            ("dB".to_string(), db),
            ("n".to_string(), n),
            ("rank".to_string(), rank),
            ("seed".to_string(), k as f64),
        ]);
        let mixed = catalog("random-orthogonal-mixed", &params).unwrap();
        let proj = projector_counterpart(&mixed);
        let a = ppt_povm_feasibility(&mixed, cfg.rank_tol, &cfg.povm);
        let b = ppt_povm_feasibility(&proj, cfg.rank_tol, &cfg.povm);
        if a.feasible != b.feasible {
            mismatches.push(format!("ensemble {k}: {} vs {}", a.feasible, b.feasible));
        }
        if a.feasible {
            feasible += 1;
        }
        if let Some(povm) = &a.povm {
            worst_cross = worst_cross.max(cross_error(povm, &proj));
        }
        if let Some(povm) = &b.povm {
            worst_cross = worst_cross.max(cross_error(povm, &mixed));
        }
    }
    let detail = format!(
        "50 ensembles, {feasible} feasible, {} flag mismatches, max cross-constraint error {worst_cross:.3e}",
        mismatches.len()
    );
    let ok = mismatches.is_empty() && worst_cross <= CROSS_TOL && feasible > 0;
    report(6, "support degeneracy", if ok { Ok(detail) } else { Err(format!("{detail}; {}", mismatches.join("; "))) });
}

#[test]
fn criterion_07_d_ppt_anchors_and_sum_rule() {
    let cfg = AnalyzeConfig::default();
    let d22 = dims(2, 2);
    let d_of = |s: &DensityMatrix| d_ppt_estimate(s, cfg.rank_tol, &cfg.bisection).unwrap().value;
    let product = PureState::new(d22, d22.basis_ket(0, 0)).unwrap().density();
    let phi = (d22.basis_ket(0, 0) + d22.basis_ket(1, 1)) * c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let phi = PureState::new(d22, phi).unwrap().density();
    let mixed = DensityMatrix::maximally_mixed(d22);
    let anchors = [(d_of(&product), 1.0), (d_of(&phi), 2.0), (d_of(&mixed), 4.0)];
    let mut ok = anchors.iter().all(|(got, want)| (got - want).abs() <= D_ANCHOR_TOL);
    let mut lines = vec![format!("anchors {:?}", anchors.map(|a| a.0))];

    let mut cases: Vec<(&str, BTreeMap<String, f64>)> = CATALOG.iter().map(|e| (e.name, BTreeMap::new())).collect();
    cases.push(("two-random-orthogonal", BTreeMap::from([("dA".into(), 3.0), ("dB".into(), 3.0), ("seed".into(), 4.0)])));
    cases.push((
        "random-orthogonal-mixed",
        BTreeMap::from([("n".into(), 2.0), ("rank".into(), 1.0), ("seed".into(), 5.0)]),
    ));
    cases.push((
        "random-orthogonal-mixed",
        BTreeMap::from([("dA".into(), 2.0), ("dB".into(), 3.0), ("n".into(), 2.0), ("rank".into(), 2.0), ("seed".into(), 2.0)]),
    ));
    let mut feasible = 0;
    for (name, params) in &cases {
        let e = catalog(name, params).unwrap();
        if !ppt_povm_feasibility(&e, cfg.rank_tol, &cfg.povm).feasible {
            continue;
        }
        feasible += 1;
        let sum: f64 = e.states().iter().map(&d_of).sum();
        let dim = e.dims().total() as f64;
        ok &= sum <= dim + D_SUM_SLACK;
        lines.push(format!("{name}: Σd = {sum:.6} ≤ {dim}"));
    }
    ok &= feasible > 0;
    let detail = format!("{}; {feasible} feasible ensembles", lines.join(", "));
    report(7, "d_ppt anchors and sum rule", if ok { Ok(detail) } else { Err(detail) });
}

#[test]
fn criterion_08_subspace_optimizer_ground_truth() {
    let d22 = dims(2, 2);
    let space = Subspace::new(d22, vec![d22.basis_ket(0, 0), d22.basis_ket(1, 1)]).unwrap();
    let found = max_robustness_in_subspace(&space, &AscentOptions::default()).unwrap().value;
    // cos θ|00⟩ + e^{iφ} sin θ|11⟩ has Schmidt coefficients cos²θ, sin²θ for
    // every φ, so a grid over θ alone covers the subspace.
    let steps = 200_000;
    let grid = (0..=steps)
        .map(|k| {
            let theta = std::f64::consts::FRAC_PI_2 * k as f64 / steps as f64;
            let (c, s) = (theta.cos().abs(), theta.sin().abs());
            (c + s).powi(2) - 1.0
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let mut ok = (found - grid).abs() <= GRID_TOL && (found - 1.0).abs() <= GRID_TOL;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = AscentOptions::default();
    let mut disagreements = 0;
    let mut spanned = 0;
    for _ in 0..1000 {
        let s = Subspace::span(d22, &[gaussian(4, &mut rng), gaussian(4, &mut rng)]).unwrap();
        let exact = product_vectors_2x2(&s).unwrap().is_product_spanned;
        let numeric = is_product_spanned_numeric(&s, &opts).unwrap().is_product_spanned;
        if exact != numeric {
            disagreements += 1;
        }
        spanned += exact as usize;
    }
    ok &= disagreements == 0;
    let detail = format!(
        "max R on span{{00,11}} = {found:.8} (grid {grid:.8}); exact vs numeric: {disagreements} disagreements in 1000 ({spanned} spanned)"
    );
    report(8, "subspace optimizer ground truth", if ok { Ok(detail) } else { Err(detail) });
}

fn cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_locc-bounds")).args(args).output().expect("binary runs");
    assert!(out.status.code().is_some_and(|c| c <= 1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn criterion_09_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let ensemble = dir.path().join("mixed.json");
    std::fs::write(
        &ensemble,
        cli(&["catalog", "--catalog", "random-orthogonal-mixed", "--param", "n=2", "--param", "rank=1", "--param", "seed=3"]),
    )
    .unwrap();
    let file = ensemble.to_str().unwrap();
    let seeded = ["--seed", "11", "--format", "json"];
    let mut runs: Vec<Vec<&str>> = vec![
        vec!["schmidt", "--catalog", "two-random-orthogonal", "--param", "seed=5"],
        vec!["measures", "--file", file],
        vec!["subspace-max", "--file", file],
        vec!["subspace-max", "--catalog", "bell-mixture-pair"],
        vec!["feasibility", "--catalog", "bell-mixture-pair"],
        vec!["analyze", "--file", file],
        vec!["analyze", "--catalog", "bell4"],
    ];
    for inequality in ["support-maximum", "projector-chain", "candidate-chain", "optimized-chain-heuristic"] {
        runs.push(vec!["bound", "--file", file, "--inequality", inequality]);
    }
    runs.push(vec!["bound", "--catalog", "two-random-orthogonal", "--inequality", "pure-chain"]);
    let mut differing = Vec::new();
    for base in &runs {
        let args: Vec<&str> = base.iter().chain(seeded.iter()).copied().collect();
        if cli(&args) != cli(&args) {
            differing.push(base.join(" "));
        }
    }
    let catalog_runs: [&[&str]; 2] = [
        &["catalog", "--format", "json"],
        &["catalog", "--catalog", "two-random-orthogonal", "--param", "seed=5"],
    ];
    for args in catalog_runs {
        if cli(args) != cli(args) {
            differing.push(args.join(" "));
        }
    }
    let detail = format!("{} invocations run twice, {} differ", runs.len() + 2, differing.len());
    report(
        9,
        "determinism",
        if differing.is_empty() { Ok(detail) } else { Err(format!("{detail}: {}", differing.join("; "))) },
    );
}

#[test]
fn criterion_10_linear_algebra_core() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let shapes = [dims(2, 2), dims(2, 3), dims(3, 2), dims(3, 3)];
    let mut worst_recon: f64 = 0.0;
    for k in 0..10_000 {
        let d = shapes[k % shapes.len()];
        let psi = haar_state(d, &mut rng);
        let s = psi.schmidt();
        let mut back = CVector::zeros(d.total());
        for ((l, a), b) in s.coefficients.iter().zip(&s.left).zip(&s.right) {
            back += a.kronecker(b) * c64(l.sqrt(), 0.0);
        }
        worst_recon = worst_recon.max((back - psi.vector()).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }

    let mut pt_exact = true;
    for d in shapes {
        for _ in 0..100 {
            let n = d.total();
            let m = CMatrix::from_fn(n, n, |_, _| c64(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)));
            let once = partial_transpose(&m, &d).unwrap();
            // (A ⊗ B) index convention: row i·dB + j; Γ transposes the B indices.
            for (i, j, k, l) in index_quads(d) {
                pt_exact &= once[(i * d.db() + j, k * d.db() + l)] == m[(i * d.db() + l, k * d.db() + j)];
            }
            pt_exact &= partial_transpose(&once, &d).unwrap() == m;
        }
    }

    let d22 = dims(2, 2);
    let phi = (d22.basis_ket(0, 0) + d22.basis_ket(1, 1)) * c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let pt = partial_transpose(&(&phi * phi.adjoint()), &d22).unwrap();
    let min_eig = pt.symmetric_eigenvalues().min();

    let ok = worst_recon <= SCHMIDT_RECON_TOL && pt_exact && (min_eig + 0.5).abs() <= PT_PHI_TOL;
    let detail = format!(
        "10000 Schmidt reconstructions, max error {worst_recon:.3e}; PT involution exact: {pt_exact}; min eig PT(Φ⁺) = {min_eig:.15}"
    );
    report(10, "linear-algebra core", if ok { Ok(detail) } else { Err(detail) });
}

fn index_quads(d: BipartiteDims) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    let (a, b) = (d.da(), d.db());
    (0..a).flat_map(move |i| (0..b).flat_map(move |j| (0..a).flat_map(move |k| (0..b).map(move |l| (i, j, k, l)))))
}
