//! Two-set alternating projections and the bisection driver shared by the
//! PPT-relaxed robustness and `d(σ)` estimators.

use crate::qla::{c64, hermitian_eigen, max_abs, partial_transpose, BipartiteDims, CMatrix};

/// Stopping rules for one inner feasibility solve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InnerOptions {
    pub max_iter: usize,
    /// Feasibility is declared once the max-norm gap between the two sets
    /// drops below this.
    pub threshold: f64,
    /// Iterations between separating-witness checks.
    pub witness_every: usize,
    /// Window and relative-improvement floor of the stall detector.
    pub plateau_window: usize,
    pub plateau_rel: f64,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            threshold: 1e-8,
            witness_every: 5,
            plateau_window: 500,
            plateau_rel: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Feasible,
    /// A separating witness proves the intersection empty.
    Certified,
    /// The gap stopped shrinking.
    Plateau,
    /// Iteration cap reached without a decision.
    Exhausted,
}

impl Decision {
    pub fn is_feasible(self) -> bool {
        self == Decision::Feasible
    }
}

#[derive(Debug, Clone)]
pub struct InnerOutcome {
    pub decision: Decision,
    pub iterations: usize,
    /// Last iterate of the spectral set.
    pub point: CMatrix,
}

/// Intersection of a spectral set `K1` with `{X : (offset + X)^Γ ⪰ 0}`.
pub trait PptIntersection {
    fn dims(&self) -> BipartiteDims;
    /// The fixed operator added before the partial transpose.
    fn offset(&self) -> &CMatrix;
    /// `offset^Γ`, precomputed.
    fn offset_pt(&self) -> &CMatrix;
    fn project_spectral(&self, x: &CMatrix) -> CMatrix;
    /// `max_{X ∈ K1} Re Tr(W X)` for Hermitian `W`.
    fn support_function(&self, w: &CMatrix) -> f64;
}

/// Projection onto `{X : (offset + X)^Γ ⪰ 0}` together with the normalized
/// negative part of `(offset + X)^Γ`, used as a separating witness.
fn project_ppt<P: PptIntersection>(p: &P, x: &CMatrix) -> (CMatrix, Option<CMatrix>) {
    let dims = p.dims();
    let y = partial_transpose(&(p.offset() + x), &dims).expect("square operator");
    let eig = hermitian_eigen(&y);
    let pos = eig.reconstruct_with(|l| l.max(0.0));
    let back = partial_transpose(&pos, &dims).expect("square operator") - p.offset();
    let neg_mass: f64 = eig.values.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    let witness = (neg_mass > 0.0).then(|| eig.reconstruct_with(|l| if l < 0.0 { -l / neg_mass } else { 0.0 }));
    (back, witness)
}

/// Witness `Z ⪰ 0` with `Tr(Z offset^Γ) + max_{X∈K1} Tr(Z^Γ X) < 0`
/// certifies that no `X ∈ K1` makes `(offset + X)^Γ` positive semidefinite.
fn certifies_empty<P: PptIntersection>(p: &P, z: &CMatrix) -> bool {
    let zpt = partial_transpose(z, &p.dims()).expect("square operator");
    let value = crate::qla::trace_product(z, p.offset_pt()) + p.support_function(&zpt);
    value < -1e-10
}

/// Alternating projections between `K1` and the PPT-shifted set.
pub fn solve_intersection<P: PptIntersection>(p: &P, start: &CMatrix, opts: &InnerOptions) -> InnerOutcome {
    let mut x = start.clone();
    let mut history: Vec<f64> = Vec::with_capacity(opts.max_iter.min(8192));
    let mut a = p.project_spectral(&x);
    for it in 0..opts.max_iter {
        a = p.project_spectral(&x);
        let (b, witness) = project_ppt(p, &a);
        let residual = max_abs(&(&a - &b));
        if residual < opts.threshold {
            return InnerOutcome {
                decision: Decision::Feasible,
                iterations: it + 1,
                point: a,
            };
        }
        if it % opts.witness_every == 0 {
            if let Some(z) = &witness {
                if certifies_empty(p, z) {
                    return InnerOutcome {
                        decision: Decision::Certified,
                        iterations: it + 1,
                        point: a,
                    };
                }
            }
        }
        history.push(residual);
        if it >= opts.plateau_window {
            let old = history[it - opts.plateau_window];
            if old - residual < opts.plateau_rel * old {
                return InnerOutcome {
                    decision: Decision::Plateau,
                    iterations: it + 1,
                    point: a,
                };
            }
        }
        x = b;
    }
    InnerOutcome {
        decision: Decision::Exhausted,
        iterations: opts.max_iter,
        point: a,
    }
}

/// Euclidean projection of `values` onto `{x : 0 ≤ x_i ≤ cap, Σ x_i = total}`
/// (`cap = ∞` gives the scaled simplex). Requires `0 ≤ total ≤ n·cap`.
pub fn project_capped_simplex(values: &[f64], total: f64, cap: f64) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    if total <= 0.0 {
        return vec![0.0; n];
    }
    if cap.is_finite() && total >= cap * n as f64 {
        return vec![cap; n];
    }
    let g = |theta: f64| -> f64 { values.iter().map(|v| (v - theta).clamp(0.0, cap)).sum() };
    let vmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let vmax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let low = if cap.is_finite() { vmin - cap } else { vmin - total };
    let mut points = vec![low, vmax];
    points.extend(values.iter().copied());
    if cap.is_finite() {
        points.extend(values.iter().map(|v| v - cap));
    }
    points.retain(|t| *t >= low && *t <= vmax);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut theta = vmax;
    for w in points.windows(2) {
        let (ga, gb) = (g(w[0]), g(w[1]));
        if ga >= total && total >= gb {
            theta = if ga == gb { w[0] } else { w[0] + (ga - total) * (w[1] - w[0]) / (ga - gb) };
            break;
        }
    }
    values.iter().map(|v| (v - theta).clamp(0.0, cap)).collect()
}

/// `Σ_i x_i μ_i` maximized over `{0 ≤ x ≤ cap, Σx = total}`, `μ` descending.
pub fn capped_top_sum(sorted_desc: &[f64], total: f64, cap: f64) -> f64 {
    let mut left = total;
    let mut acc = 0.0;
    for &m in sorted_desc {
        if left <= 0.0 {
            break;
        }
        let take = left.min(cap);
        acc += take * m;
        left -= take;
    }
    acc
}

/// Spectral projection `V diag(proj(λ)) V†`.
pub fn project_spectrum(x: &CMatrix, total: f64, cap: f64) -> CMatrix {
    let eig = hermitian_eigen(x);
    let proj = project_capped_simplex(&eig.values, total, cap);
    let n = x.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, w) in proj.iter().enumerate() {
        if *w != 0.0 {
            let v = eig.vectors.column(k);
            out += (v * v.adjoint()) * c64(*w, 0.0);
        }
    }
    out
}

/// Result of bisecting for the smallest feasible parameter.
#[derive(Debug, Clone)]
pub struct Bisection {
    /// Largest parameter certified infeasible, or the initial lower end.
    pub lo: f64,
    /// Smallest parameter verified feasible.
    pub hi: f64,
    pub steps: usize,
    pub inner_iterations: usize,
    /// Inner solves that ended without a decision.
    pub uncertified: usize,
    /// Point found at `hi`, when one was computed.
    pub hi_point: Option<CMatrix>,
}

/// Bisects `[lo, hi]` assuming feasibility is monotone (feasible at `t`
/// implies feasible above `t`). `solve(t, warm)` runs one inner solve.
///
/// Only a witness moves `lo`, so `lo` never exceeds the true threshold. An
/// undecided solve moves the search window down without touching `hi`; the
/// search stops when the window is narrower than `tol`.
pub fn bisect_feasibility<F>(mut lo: f64, hi: f64, tol: f64, mut solve: F) -> Result<Bisection, (f64, f64)>
where
    F: FnMut(f64, Option<&CMatrix>) -> InnerOutcome,
{
    let top = solve(hi, None);
    let mut out = Bisection {
        lo,
        hi,
        steps: 1,
        inner_iterations: top.iterations,
        uncertified: 0,
        hi_point: None,
    };
    if !top.decision.is_feasible() {
        return Err((lo, hi));
    }
    out.hi_point = Some(top.point);
    let mut cut = hi;
    while cut - lo > tol {
        let mid = 0.5 * (lo + cut);
        let res = solve(mid, out.hi_point.as_ref());
        out.steps += 1;
        out.inner_iterations += res.iterations;
        match res.decision {
            Decision::Feasible => {
                out.hi = mid;
                cut = mid;
                out.hi_point = Some(res.point);
            }
            Decision::Certified => lo = mid,
            Decision::Plateau | Decision::Exhausted => {
                out.uncertified += 1;
                cut = mid;
            }
        }
    }
    out.lo = lo;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_projection(values: &[f64], total: f64, cap: f64) -> Vec<f64> {
        // dense 1-D search on the shift, independent of the breakpoint logic
        let g = |t: f64| -> f64 { values.iter().map(|v| (v - t).clamp(0.0, cap)).sum() };
        let (mut a, mut b) = (-1e3, 1e3);
        for _ in 0..300 {
            let m = 0.5 * (a + b);
            if g(m) > total {
                a = m;
            } else {
                b = m;
            }
        }
        values.iter().map(|v| (v - 0.5 * (a + b)).clamp(0.0, cap)).collect()
    }

    #[test]
    fn simplex_projection_matches_bisection() {
        let cases: &[(&[f64], f64, f64)] = &[
            (&[0.3, -0.2, 1.4, 0.0], 1.0, f64::INFINITY),
            (&[0.3, -0.2, 1.4, 0.0], 2.5, 1.0),
            (&[5.0, 5.0, 5.0], 1.5, 1.0),
            (&[-1.0, -2.0], 0.7, f64::INFINITY),
            (&[0.2, 0.9, 0.4, 0.1, 0.7], 3.2, 1.0),
        ];
        for (v, t, cap) in cases {
            let fast = project_capped_simplex(v, *t, *cap);
            let slow = brute_projection(v, *t, *cap);
            let sum: f64 = fast.iter().sum();
            assert!((sum - t).abs() < 1e-12, "{v:?} {t} {cap} -> {fast:?}");
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn simplex_projection_edges() {
        assert_eq!(project_capped_simplex(&[0.4, 0.1], 0.0, 1.0), vec![0.0, 0.0]);
        assert_eq!(project_capped_simplex(&[0.4, 0.1], 2.0, 1.0), vec![1.0, 1.0]);
    }

    #[test]
    fn top_sum_fills_largest_first() {
        assert!((capped_top_sum(&[3.0, 2.0, -1.0], 1.5, 1.0) - 4.0).abs() < 1e-15);
        assert!((capped_top_sum(&[3.0, 2.0], 2.0, f64::INFINITY) - 6.0).abs() < 1e-15);
    }
}
