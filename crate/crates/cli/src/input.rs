use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use locc_bounds::bounds::Ensemble;
use locc_bounds::ensembles::{catalog, catalog_entry, parse_states};
use locc_bounds::{DensityMatrix, Error, PureState};

use crate::args::Common;
use crate::Failure;

/// Where the states came from, echoed in every report.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "source", rename_all = "camelCase")]
pub enum InputEcho {
    File { path: String },
    Catalog { name: String, params: BTreeMap<String, f64> },
}

pub struct Loaded {
    pub names: Vec<String>,
    pub states: Vec<DensityMatrix>,
    pub echo: InputEcho,
}

impl Loaded {
    pub fn ensemble(&self) -> Result<Ensemble, Failure> {
        Ensemble::new(self.states.clone(), self.names.clone()).map_err(Failure::from)
    }

    pub fn pure(&self, i: usize, rank_tol: f64) -> Option<PureState> {
        self.states[i].as_pure(rank_tol)
    }
}

/// Catalog parameters given on the command line.
pub fn catalog_params(c: &Common) -> BTreeMap<String, f64> {
    let mut params: BTreeMap<String, f64> = c.params.iter().cloned().collect();
    if let Some(a) = c.alpha {
        params.insert("alpha".into(), a);
    }
    if let Some(b) = c.beta {
        params.insert("beta".into(), b);
    }
    params
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn load(c: &Common) -> Result<Loaded, Failure> {
    match (&c.file, &c.catalog) {
        (Some(path), None) => {
            let p = parse_states(&read_file(path)?)?;
            Ok(Loaded {
                names: p.names,
                states: p.states,
                echo: InputEcho::File {
                    path: path.display().to_string(),
                },
            })
        }
        (None, Some(name)) => {
            let given = catalog_params(c);
            let e = catalog(name, &given)?;
            let mut params: BTreeMap<String, f64> = catalog_entry(name)
                .map(|entry| entry.params.iter().map(|(k, v)| (k.to_string(), *v)).collect())
                .unwrap_or_default();
            params.extend(given);
            Ok(Loaded {
                names: e.names().to_vec(),
                states: e.states().to_vec(),
                echo: InputEcho::Catalog {
                    name: name.clone(),
                    params,
                },
            })
        }
        (None, None) => Err(Failure::Input("give an input with --file or --catalog".into())),
        (Some(_), Some(_)) => Err(Error::InvalidParam {
            name: "--file".into(),
            reason: "conflicts with --catalog".into(),
        }
        .into()),
    }
}
