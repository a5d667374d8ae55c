//! File formats consumed by the CLI and the JSON/CSV output rendering.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use incompat::fidelity::PovmJson;
use incompat::linalg::{CMatrix, DensityMatrix, Observable, ObservableJson, C64};
use incompat::qkd::EveStrategy;
use incompat::Ensemble;

use crate::CliError;

/// A density matrix as [re, im] pairs stored column-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityJson {
    pub dim: usize,
    pub matrix: Vec<[f64; 2]>,
}

impl DensityJson {
    pub fn to_density(&self) -> Result<DensityMatrix, CliError> {
        let d = self.dim;
        if self.matrix.len() != d * d {
            return Err(CliError::Parse(format!(
                "density matrix needs {} entries, found {}",
                d * d,
                self.matrix.len()
            )));
        }
        let m = CMatrix::from_fn(d, d, |i, j| {
            let [re, im] = self.matrix[j * d + i];
            C64::new(re, im)
        });
        DensityMatrix::new(m).map_err(CliError::Core)
    }
}

/// A list of observables defining an eigenstate ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleJson {
    pub observables: Vec<ObservableJson>,
}

/// An intercept-resend strategy: POVM plus optional reconstruction states;
/// when the reconstructions are omitted the optimal ones for the ensemble
/// are used.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyJson {
    pub povm: PovmJson,
    #[serde(default)]
    pub reconstructions: Option<Vec<DensityJson>>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn load_observable(path: &Path) -> Result<Observable, CliError> {
    let json: ObservableJson = read_json(path)?;
    Observable::try_from(&json).map_err(CliError::Core)
}

pub fn load_observables(paths: &[std::path::PathBuf]) -> Result<Vec<Observable>, CliError> {
    paths.iter().map(|p| load_observable(p)).collect()
}

pub fn load_strategy(
    path: &Path,
    ensemble: &Ensemble,
) -> Result<EveStrategy, CliError> {
    let json: StrategyJson = read_json(path)?;
    let povm = incompat::fidelity::RankOnePovm::try_from(&json.povm).map_err(CliError::Core)?;
    match &json.reconstructions {
        Some(list) => {
            let states = list
                .iter()
                .map(|d| d.to_density())
                .collect::<Result<Vec<_>, _>>()?;
            EveStrategy::new(povm, states).map_err(CliError::Core)
        }
        None => EveStrategy::optimal_for(povm, ensemble).map_err(CliError::Core),
    }
}

/// Command output: a single keyed record or a column-ordered table.
pub enum Output {
    Record(Vec<(String, Value)>),
    Table {
        columns: Vec<String>,
        rows: Vec<Vec<Value>>,
    },
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .expect("finite value")
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Flattens scalar leaves of a record for CSV (nested objects get dotted
/// keys; arrays are skipped).
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, inner, out);
            }
        }
        Value::Array(_) => {}
        scalar => out.push((prefix.to_string(), scalar.clone())),
    }
}

impl Output {
    pub fn to_json(&self) -> String {
        let value = match self {
            Output::Record(fields) => {
                let mut map = serde_json::Map::new();
                for (k, v) in fields {
                    map.insert(k.clone(), v.clone());
                }
                Value::Object(map)
            }
            Output::Table { columns, rows } => {
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        let mut map = serde_json::Map::new();
                        for (c, v) in columns.iter().zip(r) {
                            map.insert(c.clone(), v.clone());
                        }
                        Value::Object(map)
                    })
                    .collect();
                Value::Array(rows)
            }
        };
        let mut text = serde_json::to_string_pretty(&value).expect("serializable");
        text.push('\n');
        text
    }

    pub fn to_csv(&self) -> String {
        match self {
            Output::Record(fields) => {
                let mut leaves = Vec::new();
                for (k, v) in fields {
                    flatten(k, v, &mut leaves);
                }
                let header: Vec<String> = leaves.iter().map(|(k, _)| k.clone()).collect();
                let row: Vec<String> = leaves.iter().map(|(_, v)| csv_cell(v)).collect();
                format!("{}\n{}\n", header.join(","), row.join(","))
            }
            Output::Table { columns, rows } => {
                let mut text = columns.join(",");
                text.push('\n');
                for row in rows {
                    let cells: Vec<String> = row.iter().map(csv_cell).collect();
                    text.push_str(&cells.join(","));
                    text.push('\n');
                }
                text
            }
        }
    }
}

/// Serializes a density matrix in the same column-major [re, im] layout the
/// strategy files use.
pub fn density_json(rho: &DensityMatrix) -> Value {
    let d = rho.dim();
    let m = rho.matrix();
    let mut entries = Vec::with_capacity(d * d);
    for j in 0..d {
        for i in 0..d {
            entries.push(vec![m[(i, j)].re, m[(i, j)].im]);
        }
    }
    serde_json::json!({ "dim": d, "matrix": entries })
}
