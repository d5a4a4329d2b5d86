//! Named ensemble constructions and the JSON ensemble file format.

mod file;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use file::{parse, parse_states, serialize, EnsembleFile, ParsedStates, StateEntry, SCHEMA_VERSION};

use crate::bounds::Ensemble;
use crate::qla::{c64, BipartiteDims, CVector, DensityMatrix, PureState, Subspace};
use crate::{Error, Result};

/// Catalog entry: name, parameters with defaults, description.
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static [(&'static str, f64)],
    pub description: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "bell4",
        params: &[],
        description: "the four Bell projectors in 2x2",
    },
    CatalogEntry {
        name: "bell-mixture-pair",
        params: &[("alpha", 0.5), ("beta", 0.5)],
        description: "alpha|Phi+><Phi+| + (1-alpha)|01><01| and beta|Phi-><Phi-| + (1-beta)|10><10|, alpha, beta in (0, 1]",
    },
    CatalogEntry {
        name: "two-random-orthogonal",
        params: &[("dA", 2.0), ("dB", 2.0), ("seed", 0.0)],
        description: "two Haar-random orthogonal pure states",
    },
    CatalogEntry {
        name: "product-basis",
        params: &[("dA", 2.0), ("dB", 2.0)],
        description: "the computational product basis |ij>",
    },
    CatalogEntry {
        name: "domino",
        params: &[],
        description: "the nine 3x3 domino product states",
    },
    CatalogEntry {
        name: "tiles",
        params: &[],
        description: "the five-state 3x3 tiles unextendible product basis",
    },
    CatalogEntry {
        name: "random-orthogonal-mixed",
        params: &[("dA", 2.0), ("dB", 2.0), ("n", 2.0), ("rank", 0.0), ("seed", 0.0)],
        description: "n random mixed states with orthogonal supports of the given rank (0: floor(D/n))",
    },
];

pub fn catalog_entry(name: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name)
}

struct Params<'a> {
    entry: &'static CatalogEntry,
    given: &'a BTreeMap<String, f64>,
}

impl Params<'_> {
    fn real(&self, key: &str) -> f64 {
        self.given.get(key).copied().unwrap_or_else(|| {
            self.entry
                .params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .expect("parameter declared in the catalog")
        })
    }

    fn integer(&self, key: &str, min: u64) -> Result<u64> {
        let v = self.real(key);
        if !(v.fract() == 0.0 && v >= min as f64 && v <= 9_007_199_254_740_992.0) {
            return Err(Error::InvalidParam {
                name: key.to_string(),
                reason: format!("expected an integer ≥ {min}, got {v}"),
            });
        }
        Ok(v as u64)
    }

    fn dims(&self) -> Result<BipartiteDims> {
        let da = self.integer("dA", 2)? as usize;
        let db = self.integer("dB", 2)? as usize;
        if da * db > 64 {
            return Err(Error::InvalidParam {
                name: "dA".into(),
                reason: format!("total dimension {} exceeds 64", da * db),
            });
        }
        BipartiteDims::new(da, db)
    }

    fn weight(&self, key: &str) -> Result<f64> {
        let v = self.real(key);
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::InvalidParam {
                name: key.to_string(),
                reason: format!("must lie in (0, 1], got {v}"),
            });
        }
        Ok(v)
    }
}

fn ket(dims: BipartiteDims, a: &[f64], b: &[f64]) -> CVector {
    let va = CVector::from_iterator(a.len(), a.iter().map(|&x| c64(x, 0.0)));
    let vb = CVector::from_iterator(b.len(), b.iter().map(|&x| c64(x, 0.0)));
    PureState::product(dims, &va, &vb).expect("catalog vectors are well formed").vector().clone()
}

fn pure_ensemble(dims: BipartiteDims, vectors: Vec<(String, CVector)>) -> Result<Ensemble> {
    let (names, states): (Vec<_>, Vec<_>) = vectors
        .into_iter()
        .map(|(name, v)| Ok((name, PureState::normalized(dims, v)?.density())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ensemble::new(states, names)
}

fn gaussian_vector(len: usize, rng: &mut ChaCha8Rng) -> CVector {
    CVector::from_fn(len, |_, _| c64(StandardNormal.sample(rng), StandardNormal.sample(rng)))
}

/// `count` orthonormal Haar-random vectors.
fn haar_frame(dims: BipartiteDims, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<CVector>> {
    let raw: Vec<CVector> = (0..count).map(|_| gaussian_vector(dims.total(), rng)).collect();
    let frame = Subspace::span(dims, &raw)?;
    if frame.dim() != count {
        return Err(Error::InvalidParam {
            name: "seed".into(),
            reason: "random frame came out degenerate".into(),
        });
    }
    Ok(frame.basis().to_vec())
}

/// Builds a catalog ensemble. Unlisted parameters take their defaults;
/// unknown parameter names are rejected.
pub fn catalog(name: &str, params: &BTreeMap<String, f64>) -> Result<Ensemble> {
    let entry = catalog_entry(name).ok_or_else(|| Error::UnknownCatalog(name.to_string()))?;
    if let Some(bad) = params.keys().find(|k| !entry.params.iter().any(|(p, _)| p == k)) {
        return Err(Error::InvalidParam {
            name: bad.clone(),
            reason: format!("not a parameter of {name}"),
        });
    }
    let p = Params { entry, given: params };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match name {
        "bell4" => {
            let d = BipartiteDims::new(2, 2)?;
            pure_ensemble(
                d,
                vec![
                    ("Phi+".into(), (d.basis_ket(0, 0) + d.basis_ket(1, 1)) * c64(s, 0.0)),
                    ("Phi-".into(), (d.basis_ket(0, 0) - d.basis_ket(1, 1)) * c64(s, 0.0)),
                    ("Psi+".into(), (d.basis_ket(0, 1) + d.basis_ket(1, 0)) * c64(s, 0.0)),
                    ("Psi-".into(), (d.basis_ket(0, 1) - d.basis_ket(1, 0)) * c64(s, 0.0)),
                ],
            )
        }
        "bell-mixture-pair" => {
            let alpha = p.weight("alpha")?;
            let beta = p.weight("beta")?;
            let d = BipartiteDims::new(2, 2)?;
            let phi_p = (d.basis_ket(0, 0) + d.basis_ket(1, 1)) * c64(s, 0.0);
            let phi_m = (d.basis_ket(0, 0) - d.basis_ket(1, 1)) * c64(s, 0.0);
            let s1 = DensityMatrix::mixture(d, &[(alpha, phi_p), (1.0 - alpha, d.basis_ket(0, 1))])?;
            let s2 = DensityMatrix::mixture(d, &[(beta, phi_m), (1.0 - beta, d.basis_ket(1, 0))])?;
            Ensemble::new(vec![s1, s2], vec!["sigma1".into(), "sigma2".into()])
        }
        "two-random-orthogonal" => {
            let d = p.dims()?;
            let mut rng = ChaCha8Rng::seed_from_u64(p.integer("seed", 0)?);
            let frame = haar_frame(d, 2, &mut rng)?;
            pure_ensemble(d, frame.into_iter().enumerate().map(|(i, v)| (format!("psi{}", i + 1), v)).collect())
        }
        "product-basis" => {
            let d = p.dims()?;
            let states = (0..d.da())
                .flat_map(|i| (0..d.db()).map(move |j| (format!("{i}{j}"), d.basis_ket(i, j))))
                .collect();
            pure_ensemble(d, states)
        }
        "domino" => {
            let d = BipartiteDims::new(3, 3)?;
            let e = |k: usize| {
                let mut v = [0.0; 3];
                v[k] = 1.0;
                v
            };
            let sum = |a: usize, b: usize, sign: f64| {
                let mut v = [0.0; 3];
                v[a] = s;
                v[b] = sign * s;
                v
            };
            let mut states = vec![("11".to_string(), ket(d, &e(1), &e(1)))];
            for (sign, tag) in [(1.0, "+"), (-1.0, "-")] {
                states.push((format!("0,01{tag}"), ket(d, &e(0), &sum(0, 1, sign))));
                states.push((format!("2,12{tag}"), ket(d, &e(2), &sum(1, 2, sign))));
                states.push((format!("12{tag},0"), ket(d, &sum(1, 2, sign), &e(0))));
                states.push((format!("01{tag},2"), ket(d, &sum(0, 1, sign), &e(2))));
            }
            pure_ensemble(d, states)
        }
        "tiles" => {
            let d = BipartiteDims::new(3, 3)?;
            let third = 1.0 / 3.0f64.sqrt();
            let states = vec![
                ("t1".into(), ket(d, &[1.0, 0.0, 0.0], &[s, -s, 0.0])),
                ("t2".into(), ket(d, &[s, -s, 0.0], &[0.0, 0.0, 1.0])),
                ("t3".into(), ket(d, &[0.0, 0.0, 1.0], &[0.0, s, -s])),
                ("t4".into(), ket(d, &[0.0, s, -s], &[1.0, 0.0, 0.0])),
                ("stopper".into(), ket(d, &[third; 3], &[third; 3])),
            ];
            pure_ensemble(d, states)
        }
        "random-orthogonal-mixed" => {
            let d = p.dims()?;
            let n = p.integer("n", 2)? as usize;
            let total = d.total();
            let rank = match p.integer("rank", 0)? as usize {
                0 => (total / n).max(1),
                r => r,
            };
            if n * rank > total {
                return Err(Error::InvalidParam {
                    name: "rank".into(),
                    reason: format!("{n} supports of rank {rank} do not fit in dimension {total}"),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(p.integer("seed", 0)?);
            let frame = haar_frame(d, n * rank, &mut rng)?;
            let mut states = Vec::with_capacity(n);
            for block in frame.chunks(rank) {
                let raw: Vec<f64> = (0..rank).map(|_| 0.05 + rng.random::<f64>()).collect();
                let sum: f64 = raw.iter().sum();
                let terms: Vec<(f64, CVector)> = raw.iter().zip(block).map(|(w, v)| (w / sum, v.clone())).collect();
                states.push(DensityMatrix::mixture(d, &terms)?);
            }
            Ensemble::new(states, (1..=n).map(|i| format!("rho{i}")).collect())
        }
        _ => unreachable!("catalog entries are matched above"),
    }
}
