use std::cmp::Ordering;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use super::BipartiteDims;
use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex<f64>>;
pub type CVector = DVector<Complex<f64>>;

/// Eigenvalues closer than this (relative to the spectrum scale) are treated
/// as degenerate when ordering eigenvectors.
const TIE_EPS: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

/// Kronecker product, first factor major.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// `|v⟩⟨v|`
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// `⟨a|b⟩`
pub fn inner(a: &CVector, b: &CVector) -> Complex<f64> {
    a.dotc(b)
}

pub fn norm(v: &CVector) -> f64 {
    v.norm()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `Re Tr(AB)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

fn check_square(m: &CMatrix, dims: &BipartiteDims) -> Result<()> {
    let d = dims.total();
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "expected {d}x{d} operator for {dims}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Transpose on the second tensor factor.
pub fn partial_transpose(m: &CMatrix, dims: &BipartiteDims) -> Result<CMatrix> {
    check_square(m, dims)?;
    let (da, db) = (dims.da(), dims.db());
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for ia in 0..da {
        for ib in 0..db {
            for ja in 0..da {
                for jb in 0..db {
                    out[(ia * db + jb, ja * db + ib)] = m[(ia * db + ib, ja * db + jb)];
                }
            }
        }
    }
    Ok(out)
}

/// Tensor factor of a bipartite operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

impl FromStr for Subsystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Subsystem::A),
            "B" | "b" => Ok(Subsystem::B),
            other => Err(Error::InvalidSubsystem(other.to_string())),
        }
    }
}

/// Traces out `which`, returning the reduced operator on the other factor.
pub fn partial_trace(m: &CMatrix, dims: &BipartiteDims, which: Subsystem) -> Result<CMatrix> {
    check_square(m, dims)?;
    let (da, db) = (dims.da(), dims.db());
    Ok(match which {
        Subsystem::B => CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::A => CMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    })
}

/// Row-major reshape of a length-`dA·dB` vector into a `dA×dB` coefficient
/// matrix, `M[i][j] = ⟨ij|ψ⟩`.
pub fn reshape(v: &CVector, dims: &BipartiteDims) -> CMatrix {
    let (da, db) = (dims.da(), dims.db());
    CMatrix::from_fn(da, db, |i, j| v[i * db + j])
}

pub fn unreshape(m: &CMatrix) -> CVector {
    let (da, db) = (m.nrows(), m.ncols());
    CVector::from_fn(da * db, |k, _| m[(k / db, k % db)])
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `Σ f(λ_k) |v_k⟩⟨v_k|`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.nrows();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.column(k);
            out += (v * v.adjoint()) * c64(w, 0.0);
        }
        out
    }
}

/// Rotates `v` so that its first entry of non-negligible modulus is real and
/// positive.
pub fn fix_phase(v: &mut CVector) {
    let scale = v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if scale == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-10 * scale).copied() {
        let phase = z.conj() / z.norm();
        *v *= phase;
    }
}

pub(crate) fn lex_cmp(a: &CVector, b: &CVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Eigendecomposition of the Hermitian part of `m`.
///
/// Ordering is descending by eigenvalue; within numerically degenerate groups
/// eigenvectors are sorted lexicographically (real, then imaginary parts)
/// after phase normalization.
pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let h = hermitian_part(m);
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut pairs: Vec<(f64, CVector)> = (0..n)
        .map(|k| {
            let mut v = eig.eigenvectors.column(k).into_owned();
            fix_phase(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let scale = pairs.iter().fold(1.0f64, |a, p| a.max(p.0.abs()));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (pairs[end - 1].0 - pairs[end].0).abs() <= TIE_EPS * scale {
            end += 1;
        }
        pairs[start..end].sort_by(|a, b| lex_cmp(&a.1, &b.1).reverse());
        start = end;
    }
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = CMatrix::from_columns(&pairs.iter().map(|p| p.1.clone()).collect::<Vec<_>>());
    HermitianEigen { values, vectors }
}

/// Frobenius-nearest positive semidefinite matrix to the Hermitian part of `m`.
pub fn psd_part(m: &CMatrix) -> CMatrix {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let n = eig.eigenvalues.len();
    let mut out = CMatrix::zeros(n, n);
    for k in 0..n {
        let lam = eig.eigenvalues[k];
        if lam > 0.0 {
            let v = eig.eigenvectors.column(k);
            out += (v * v.adjoint()) * c64(lam, 0.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims22() -> BipartiteDims {
        BipartiteDims::new(2, 2).unwrap()
    }

    fn phi_plus() -> CVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CVector::from_vec(vec![c64(s, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(s, 0.0)])
    }

    #[test]
    fn tensor_identity_and_shape() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(tensor(&i2, &i2), CMatrix::identity(4, 4));
        let a = CMatrix::from_element(2, 2, c64(1.0, 1.0));
        let b = CMatrix::from_element(3, 3, c64(0.5, 0.0));
        let t = tensor(&a, &b);
        assert_eq!((t.nrows(), t.ncols()), (6, 6));
    }

    #[test]
    fn bit_flip_on_first_factor() {
        let x = CMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
        );
        let op = tensor(&x, &CMatrix::identity(2, 2));
        let mut ket00 = CVector::zeros(4);
        ket00[0] = c64(1.0, 0.0);
        let out = op * ket00;
        let mut ket10 = CVector::zeros(4);
        ket10[2] = c64(1.0, 0.0);
        assert_eq!(out, ket10);
    }

    #[test]
    fn partial_transpose_of_bell_projector() {
        let p = outer(&phi_plus());
        let pt = partial_transpose(&p, &dims22()).unwrap();
        let eig = hermitian_eigen(&pt);
        assert!((eig.min() + 0.5).abs() < 1e-12);
        assert!((eig.max() - 0.5).abs() < 1e-12);
        assert_eq!(partial_transpose(&CMatrix::identity(4, 4), &dims22()).unwrap(), CMatrix::identity(4, 4));
    }

    #[test]
    fn partial_transpose_rejects_wrong_shape() {
        let m = CMatrix::identity(6, 6);
        assert!(matches!(partial_transpose(&m, &dims22()), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn partial_trace_examples() {
        let d = dims22();
        let mut ket00 = CVector::zeros(4);
        ket00[0] = c64(1.0, 0.0);
        let red = partial_trace(&outer(&ket00), &d, Subsystem::B).unwrap();
        let mut expect = CMatrix::zeros(2, 2);
        expect[(0, 0)] = c64(1.0, 0.0);
        assert_eq!(red, expect);

        let red = partial_trace(&outer(&phi_plus()), &d, Subsystem::B).unwrap();
        assert!(max_abs(&(red - CMatrix::identity(2, 2) * c64(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn partial_trace_on_a_keeps_second_factor() {
        let d = BipartiteDims::new(2, 3).unwrap();
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(0.25, 0.0), c64(0.75, 0.0)]));
        let b = CMatrix::from_fn(3, 3, |i, j| if i == j { c64((i + 1) as f64 / 6.0, 0.0) } else { c64(0.0, 0.0) });
        let red = partial_trace(&tensor(&a, &b), &d, Subsystem::A).unwrap();
        assert!(max_abs(&(red - b)) < 1e-15);
    }

    #[test]
    fn subsystem_tag_parsing() {
        assert_eq!("B".parse::<Subsystem>().unwrap(), Subsystem::B);
        assert!(matches!("C".parse::<Subsystem>(), Err(Error::InvalidSubsystem(_))));
    }

    #[test]
    fn eigen_order_is_descending_and_deterministic() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c64(0.1, 0.0),
            c64(0.7, 0.0),
            c64(0.1, 0.0),
            c64(0.1, 0.0),
        ]));
        let e1 = hermitian_eigen(&m);
        let e2 = hermitian_eigen(&m);
        assert_eq!(e1.values, e2.values);
        assert_eq!(e1.vectors, e2.vectors);
        assert!((e1.values[0] - 0.7).abs() < 1e-15);
        assert!(e1.values.windows(2).all(|w| w[0] >= w[1]));
        for k in 1..3 {
            assert_ne!(lex_cmp(&e1.vector(k), &e1.vector(k + 1)), Ordering::Less);
        }
    }

    #[test]
    fn psd_part_clips_negative_spectrum() {
        let pt = partial_transpose(&outer(&phi_plus()), &dims22()).unwrap();
        let p = psd_part(&pt);
        assert!(hermitian_eigen(&p).min() > -1e-14);
        assert!((p.trace().re - 1.5).abs() < 1e-12);
    }

    #[test]
    fn reshape_round_trip() {
        let d = BipartiteDims::new(2, 3).unwrap();
        let v = CVector::from_fn(6, |k, _| c64(k as f64, -(k as f64)));
        let m = reshape(&v, &d);
        assert_eq!(m[(1, 2)], v[5]);
        assert_eq!(unreshape(&m), v);
    }
}
