//! JSON file formats for ensembles, bipartite states, witness channels and POVMs.
//!
//! Complex numbers are `[re, im]` pairs; matrices are arrays of rows.
//!
//! ```json
//! {"label": "two_state", "dim": 2, "probs": [0.5, 0.5],
//!  "states": [{"ket": [[1, 0], [0, 0]]},
//!             {"dm": [[[0.5, 0], [0.5, 0]], [[0.5, 0], [0.5, 0]]]}]}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensembles::{AuxChannel, BipartiteState, CQEnsemble, ProbVector};
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, DensityMatrix, C64};
use crate::measurement::Povm;

const KET_NORM_TOL: f64 = 1e-6;
const PROB_SUM_TOL: f64 = 1e-6;

type Pair = [f64; 2];
type MatrixRows = Vec<Vec<Pair>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ket: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dm: Option<MatrixRows>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    dim: usize,
    probs: Vec<f64>,
    states: Vec<StateEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BipartiteFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    dim_a: usize,
    dim_b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ket: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dm: Option<MatrixRows>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeparableFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    dim_a: usize,
    dim_b: usize,
    weights: Vec<f64>,
    /// `[τ̂_j, τ_j]` pairs.
    parts: Vec<[MatrixRows; 2]>,
}

#[derive(Serialize, Deserialize)]
struct PovmFile {
    dim: usize,
    povm: Vec<MatrixRows>,
}

#[derive(Serialize)]
struct WitnessEntry {
    #[serde(rename = "R")]
    comm_rate: f64,
    #[serde(rename = "D")]
    distilled: f64,
    channel: MatrixRows,
}

#[derive(Serialize)]
struct WitnessFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    points: Vec<WitnessEntry>,
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("field `{field}`: {msg}"))
}

fn to_matrix(rows: &MatrixRows, dim: usize, field: &str) -> Result<ComplexMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(field_err(field, format!("expected a {dim}x{dim} matrix")));
    }
    let data = rows.iter().flatten().map(|p| c(p[0], p[1])).collect();
    ComplexMatrix::new(dim, dim, data)
}

fn from_matrix(m: &ComplexMatrix) -> MatrixRows {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn to_ket(entries: &[Pair], dim: usize, field: &str) -> Result<Vec<C64>> {
    if entries.len() != dim {
        return Err(field_err(
            field,
            format!("ket has {} entries, expected {dim}", entries.len()),
        ));
    }
    let ket: Vec<C64> = entries.iter().map(|p| c(p[0], p[1])).collect();
    let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > KET_NORM_TOL {
        return Err(field_err(
            field,
            format!("ket norm {norm} differs from 1 by more than {KET_NORM_TOL}"),
        ));
    }
    Ok(ket.into_iter().map(|z| z / norm).collect())
}

fn to_density(rows: &MatrixRows, dim: usize, field: &str) -> Result<DensityMatrix> {
    DensityMatrix::new(to_matrix(rows, dim, field)?).map_err(|e| field_err(field, e))
}

fn probs_from(probs: Vec<f64>) -> Result<ProbVector> {
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > PROB_SUM_TOL {
        return Err(field_err(
            "probs",
            format!("not a probability vector (sum {total})"),
        ));
    }
    ProbVector::normalized(probs).map_err(|e| field_err("probs", e))
}

/// Parses an ensemble document.
pub fn parse_ensemble(text: &str) -> Result<CQEnsemble> {
    let f: EnsembleFile = serde_json::from_str(text)?;
    if f.dim == 0 {
        return Err(field_err("dim", "must be positive"));
    }
    if f.probs.len() != f.states.len() {
        return Err(field_err(
            "states",
            format!(
                "{} states for {} probabilities",
                f.states.len(),
                f.probs.len()
            ),
        ));
    }
    if f.states.is_empty() {
        return Err(field_err("states", "empty"));
    }
    let mut states = Vec::with_capacity(f.states.len());
    for (i, s) in f.states.iter().enumerate() {
        let field = format!("states[{i}]");
        let rho = match (&s.ket, &s.dm) {
            (Some(k), None) => DensityMatrix::from_ket(&to_ket(k, f.dim, &field)?)?,
            (None, Some(m)) => to_density(m, f.dim, &field)?,
            _ => {
                return Err(field_err(
                    &field,
                    "exactly one of `ket` or `dm` is required",
                ))
            }
        };
        states.push(rho);
    }
    let mut e = CQEnsemble::new(probs_from(f.probs)?, states)?;
    e.label = f.label;
    Ok(e)
}

/// Serializes an ensemble, pure states as kets and mixed states as matrices.
pub fn ensemble_to_json(e: &CQEnsemble) -> String {
    let states = e
        .states()
        .iter()
        .map(|s| {
            if s.is_pure(1e-12) {
                let sp = s.spectrum();
                let v = sp.eigenvectors.column(0);
                // fix the global phase so the largest entry is real and positive
                let k = (0..v.len())
                    .max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))
                    .unwrap();
                let phase = v[k].conj() / v[k].norm();
                StateEntry {
                    ket: Some(v.iter().map(|z| z * phase).map(|z| [z.re, z.im]).collect()),
                    dm: None,
                }
            } else {
                StateEntry {
                    ket: None,
                    dm: Some(from_matrix(s.matrix())),
                }
            }
        })
        .collect();
    let f = EnsembleFile {
        label: e.label.clone(),
        dim: e.dim(),
        probs: e.probs().as_slice().to_vec(),
        states,
    };
    serde_json::to_string_pretty(&f).expect("serializable")
}

pub fn read_ensemble(path: impl AsRef<Path>) -> Result<CQEnsemble> {
    parse_ensemble(&std::fs::read_to_string(path)?)
}

pub fn write_ensemble(path: impl AsRef<Path>, e: &CQEnsemble) -> Result<()> {
    Ok(std::fs::write(path, ensemble_to_json(e))?)
}

/// Parses a bipartite-state document with fields `dim_a`, `dim_b`, `dm`.
pub fn parse_bipartite(text: &str) -> Result<BipartiteState> {
    let f: BipartiteFile = serde_json::from_str(text)?;
    if f.dim_a == 0 || f.dim_b == 0 {
        return Err(field_err("dim_a", "dimensions must be positive"));
    }
    let n = f.dim_a * f.dim_b;
    let rho = match (&f.ket, &f.dm) {
        (Some(k), None) => DensityMatrix::from_ket(&to_ket(k, n, "ket")?)?,
        (None, Some(m)) => to_density(m, n, "dm")?,
        _ => return Err(field_err("dm", "give exactly one of `ket` and `dm`")),
    };
    BipartiteState::new(f.dim_a, f.dim_b, rho)
}

/// Parses an explicit product decomposition `Σ_j q_j τ̂_j ⊗ τ_j`.
pub fn parse_separable(text: &str) -> Result<(ProbVector, Vec<(DensityMatrix, DensityMatrix)>)> {
    let f: SeparableFile = serde_json::from_str(text)?;
    if f.weights.len() != f.parts.len() || f.parts.is_empty() {
        return Err(field_err("parts", "need one nonempty part per weight"));
    }
    let weights = ProbVector::new(f.weights).map_err(|e| field_err("weights", e))?;
    let parts = f
        .parts
        .iter()
        .enumerate()
        .map(|(j, [a, b])| {
            Ok((
                to_density(a, f.dim_a, &format!("parts[{j}][0]"))?,
                to_density(b, f.dim_b, &format!("parts[{j}][1]"))?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((weights, parts))
}

pub fn separable_to_json(weights: &ProbVector, parts: &[(DensityMatrix, DensityMatrix)]) -> String {
    let f = SeparableFile {
        label: None,
        dim_a: parts.first().map_or(0, |p| p.0.dim()),
        dim_b: parts.first().map_or(0, |p| p.1.dim()),
        weights: weights.as_slice().to_vec(),
        parts: parts
            .iter()
            .map(|(a, b)| [from_matrix(a.matrix()), from_matrix(b.matrix())])
            .collect(),
    };
    serde_json::to_string_pretty(&f).expect("serializable")
}

pub fn bipartite_to_json(s: &BipartiteState) -> String {
    let f = BipartiteFile {
        label: None,
        dim_a: s.dim_a(),
        dim_b: s.dim_b(),
        ket: None,
        dm: Some(from_matrix(s.state().matrix())),
    };
    serde_json::to_string_pretty(&f).expect("serializable")
}

pub fn read_bipartite(path: impl AsRef<Path>) -> Result<BipartiteState> {
    parse_bipartite(&std::fs::read_to_string(path)?)
}

pub fn povm_to_json(p: &Povm) -> String {
    let f = PovmFile {
        dim: p.dim(),
        povm: p.elements().iter().map(from_matrix).collect(),
    };
    serde_json::to_string_pretty(&f).expect("serializable")
}

pub fn parse_povm(text: &str) -> Result<Povm> {
    let f: PovmFile = serde_json::from_str(text)?;
    let elements = f
        .povm
        .iter()
        .enumerate()
        .map(|(i, m)| to_matrix(m, f.dim, &format!("povm[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(elements)
}

/// Witness channels of a curve, one entry per point, as real matrices in the complex convention.
pub fn witnesses_to_json(label: Option<&str>, points: &[(f64, f64, &AuxChannel)]) -> String {
    let points = points
        .iter()
        .map(|(r, d, w)| WitnessEntry {
            comm_rate: *r,
            distilled: *d,
            channel: w
                .rows()
                .iter()
                .map(|row| row.iter().map(|&v| [v, 0.0]).collect())
                .collect(),
        })
        .collect();
    serde_json::to_string_pretty(&WitnessFile {
        label: label.map(str::to_owned),
        points,
    })
    .expect("serializable")
}
