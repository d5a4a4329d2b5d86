use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bounds::Ensemble;
use crate::json::{matrix_rows, to_canonical_string};
use crate::qla::{c64, BipartiteDims, CMatrix, CVector, DensityMatrix, PureState};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk form of an ensemble. Complex numbers are `[re, im]` pairs; each
/// state carries either a `matrix` or a unit `vector`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EnsembleFile {
    pub schema_version: u32,
    pub dims: [usize; 2],
    pub states: Vec<StateEntry>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<[f64; 2]>>,
}

/// Validated states of a file, before any ensemble-level checks.
#[derive(Debug, Clone)]
pub struct ParsedStates {
    pub dims: BipartiteDims,
    pub names: Vec<String>,
    pub states: Vec<DensityMatrix>,
    /// The unit vector for entries given as `vector`.
    pub vectors: Vec<Option<PureState>>,
    pub metadata: BTreeMap<String, String>,
}

fn schema(location: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Schema {
        location: location.into(),
        reason: reason.into(),
    }
}

fn with_index(err: Error, i: usize) -> Error {
    match err {
        Error::Physics {
            index: None,
            violation,
            tolerance,
            limit,
        } => Error::Physics {
            index: Some(i),
            violation,
            tolerance,
            limit,
        },
        Error::NonFinite { row, col } => schema(format!("states[{i}].matrix[{row}][{col}]"), "non-finite number"),
        other => other,
    }
}

fn finite(location: &str, z: [f64; 2]) -> Result<nalgebra::Complex<f64>> {
    if z.iter().all(|x| x.is_finite()) {
        Ok(c64(z[0], z[1]))
    } else {
        Err(schema(location, "non-finite number"))
    }
}

/// Parses and validates every state; no orthogonality or count checks.
pub fn parse_states(bytes: &[u8]) -> Result<ParsedStates> {
    let text = std::str::from_utf8(bytes).map_err(|e| schema(format!("byte {}", e.valid_up_to()), "input is not UTF-8"))?;
    let file: EnsembleFile = serde_json::from_str(text)
        .map_err(|e| schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(schema(
            "schemaVersion",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", file.schema_version),
        ));
    }
    let dims = BipartiteDims::new(file.dims[0], file.dims[1]).map_err(|e| schema("dims", e.to_string()))?;
    let d = dims.total();
    if file.states.is_empty() {
        return Err(schema("states", "no states given"));
    }
    let mut out = ParsedStates {
        dims,
        names: Vec::new(),
        states: Vec::new(),
        vectors: Vec::new(),
        metadata: file.metadata,
    };
    for (i, entry) in file.states.into_iter().enumerate() {
        let (state, vector) = match (entry.matrix, entry.vector) {
            (Some(rows), None) => {
                if rows.len() != d {
                    return Err(schema(format!("states[{i}].matrix"), format!("expected {d} rows, got {}", rows.len())));
                }
                let mut m = CMatrix::zeros(d, d);
                for (r, row) in rows.iter().enumerate() {
                    if row.len() != d {
                        return Err(schema(
                            format!("states[{i}].matrix[{r}]"),
                            format!("expected {d} entries, got {}", row.len()),
                        ));
                    }
                    for (c, z) in row.iter().enumerate() {
                        m[(r, c)] = finite(&format!("states[{i}].matrix[{r}][{c}]"), *z)?;
                    }
                }
                (DensityMatrix::new(dims, m).map_err(|e| with_index(e, i))?, None)
            }
            (None, Some(entries)) => {
                if entries.len() != d {
                    return Err(schema(format!("states[{i}].vector"), format!("expected {d} entries, got {}", entries.len())));
                }
                let v = entries
                    .iter()
                    .enumerate()
                    .map(|(k, z)| finite(&format!("states[{i}].vector[{k}]"), *z))
                    .collect::<Result<Vec<_>>>()?;
                let psi = PureState::new(dims, CVector::from_vec(v)).map_err(|e| with_index(e, i))?;
                (psi.density(), Some(psi))
            }
            (Some(_), Some(_)) => return Err(schema(format!("states[{i}]"), "give either matrix or vector, not both")),
            (None, None) => return Err(schema(format!("states[{i}]"), "missing field `matrix` or `vector`")),
        };
        out.names.push(entry.name);
        out.states.push(state);
        out.vectors.push(vector);
    }
    Ok(out)
}

/// Parses an ensemble file and checks the ensemble invariants.
pub fn parse(bytes: &[u8]) -> Result<Ensemble> {
    let p = parse_states(bytes)?;
    Ensemble::new(p.states, p.names)
}

/// Canonical text of an ensemble: every state as a matrix, 17 significant
/// digits per float.
pub fn serialize(e: &Ensemble, metadata: &BTreeMap<String, String>) -> String {
    let file = EnsembleFile {
        schema_version: SCHEMA_VERSION,
        dims: [e.dims().da(), e.dims().db()],
        states: e
            .names()
            .iter()
            .zip(e.states())
            .map(|(name, s)| StateEntry {
                name: name.clone(),
                matrix: Some(matrix_rows(s.matrix())),
                vector: None,
            })
            .collect(),
        metadata: metadata.clone(),
    };
    to_canonical_string(&file).expect("ensemble files always serialize")
}
