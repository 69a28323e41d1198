//! The JSON input dialect: complex numbers as `[re, im]`, matrices as
//! `{"rows": ...}`, systems, point sets, structures and amplified elements.

use std::collections::BTreeMap;
use std::path::Path;

use osyclass::degree1::PointSet;
use osyclass::metricgh::{FiniteStructure, Relation};
use osyclass::opsys::{build_system, AmplifiedElement, OperatorSystemSpan, PolyhedralDualBall};
use osyclass::{ComplexMatrix, C64};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

/// Reads a file into a JSON value.
pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input("io", format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input("parse", format!("{}: {e}", path.display())))
}

fn decode<T: DeserializeOwned>(value: &Value, what: &str) -> Result<T, CliError> {
    T::deserialize(value).map_err(|e| CliError::input("parse", format!("{what}: {e}")))
}

pub fn matrix(value: &Value) -> Result<ComplexMatrix, CliError> {
    decode(value, "matrix")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    ambient_dim: usize,
    generators: Vec<ComplexMatrix>,
    #[serde(default = "yes")]
    include_identity: bool,
}

fn yes() -> bool {
    true
}

pub fn system(value: &Value) -> Result<OperatorSystemSpan, CliError> {
    let f: SystemFile = decode(value, "system")?;
    Ok(build_system(
        f.ambient_dim,
        &f.generators,
        f.include_identity,
    )?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BallFile {
    dim: usize,
    functionals: Vec<Vec<C64>>,
}

/// A normed space given by the extreme points of its dual ball.
pub fn ball(value: &Value) -> Result<PolyhedralDualBall, CliError> {
    let f: BallFile = decode(value, "dual ball")?;
    Ok(PolyhedralDualBall::new(f.dim, f.functionals)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointSetFile {
    dim: usize,
    points: Vec<Vec<C64>>,
}

pub fn point_set(value: &Value, tol: f64) -> Result<PointSet, CliError> {
    let f: PointSetFile = decode(value, "point set")?;
    Ok(PointSet::new(f.dim, f.points, tol)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementFile<T> {
    entries: Vec<Vec<T>>,
}

fn square<T: Clone>(entries: Vec<Vec<T>>, level: usize) -> Result<Vec<T>, CliError> {
    if entries.len() != level || entries.iter().any(|r| r.len() != level) {
        return Err(CliError::input(
            "dimension",
            format!("element must be a {level} x {level} array of entries"),
        ));
    }
    Ok(entries.into_iter().flatten().collect())
}

/// An element of `M_n(X)` given by its matrix entries, each of which must lie
/// in `X`.
pub fn system_element(
    value: &Value,
    x: &OperatorSystemSpan,
    level: usize,
    tol: f64,
) -> Result<AmplifiedElement, CliError> {
    let f: ElementFile<ComplexMatrix> = decode(value, "element")?;
    let mut coeffs = Vec::with_capacity(level * level);
    for (idx, m) in square(f.entries, level)?.iter().enumerate() {
        match x.coordinates(m, tol)? {
            Some(c) => coeffs.push(c),
            None => {
                return Err(CliError::input(
                    "not_in_system",
                    format!(
                        "entry ({}, {}) does not lie in the system",
                        idx / level,
                        idx % level
                    ),
                ))
            }
        }
    }
    Ok(AmplifiedElement::new(level, coeffs)?)
}

/// An `n x n` array of vectors, row-major.
pub fn vector_element(value: &Value, level: usize) -> Result<Vec<Vec<C64>>, CliError> {
    let f: ElementFile<Vec<C64>> = decode(value, "element")?;
    square(f.entries, level)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationFile {
    arity: usize,
    table: BTreeMap<String, f64>,
    #[serde(default)]
    bound: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureFile {
    metric: Vec<Vec<f64>>,
    #[serde(default)]
    relations: BTreeMap<String, RelationFile>,
    #[serde(default)]
    domains: Vec<Vec<usize>>,
    #[serde(default)]
    languages: Option<Vec<Vec<String>>>,
}

fn tuple_key(key: &str, arity: usize, m: usize) -> Option<usize> {
    let parts: Vec<&str> = if key.trim().is_empty() {
        Vec::new()
    } else {
        key.split(',').collect()
    };
    if parts.len() != arity {
        return None;
    }
    parts.iter().try_fold(0usize, |acc, p| {
        let i: usize = p.trim().parse().ok()?;
        (i < m).then_some(acc * m + i)
    })
}

/// Relation tables are keyed by comma-separated point indices, e.g.
/// `"0,2"`; every tuple must be present.
pub fn structure(value: &Value) -> Result<FiniteStructure, CliError> {
    let f: StructureFile = decode(value, "structure")?;
    let m = f.metric.len();
    let mut relations = BTreeMap::new();
    for (name, r) in f.relations {
        let count = m
            .checked_pow(r.arity as u32)
            .filter(|&c| c <= 1 << 20)
            .ok_or_else(|| {
                CliError::input(
                    "dimension",
                    format!("relation `{name}` has too many tuples"),
                )
            })?;
        let mut values = vec![None; count];
        for (key, v) in &r.table {
            let idx = tuple_key(key, r.arity, m).ok_or_else(|| {
                CliError::input("parse", format!("relation `{name}`: bad tuple key `{key}`"))
            })?;
            values[idx] = Some(*v);
        }
        let values = values
            .into_iter()
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| {
                CliError::input("parse", format!("relation `{name}`: table is incomplete"))
            })?;
        relations.insert(
            name,
            Relation {
                arity: r.arity,
                bound: r.bound,
                values,
            },
        );
    }
    Ok(FiniteStructure::new(
        f.metric,
        relations,
        f.domains,
        f.languages,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn tuple_keys() {
        assert_eq!(tuple_key("1,2", 2, 3), Some(5));
        assert_eq!(tuple_key(" 2 ", 1, 3), Some(2));
        assert_eq!(tuple_key("", 0, 3), Some(0));
        assert_eq!(tuple_key("3", 1, 3), None);
        assert_eq!(tuple_key("0,1", 1, 3), None);
    }

    #[test]
    fn structure_tables() {
        let v = json!({
            "metric": [[0.0, 1.0], [1.0, 0.0]],
            "relations": {"P": {"arity": 1, "table": {"0": 0.25, "1": 0.5}}}
        });
        let s = structure(&v).unwrap();
        assert_eq!(s.value("P", &[1]).unwrap(), 0.5);
        let missing = json!({
            "metric": [[0.0, 1.0], [1.0, 0.0]],
            "relations": {"P": {"arity": 1, "table": {"0": 0.25}}}
        });
        assert!(structure(&missing).is_err());
    }

    #[test]
    fn systems_and_elements() {
        let v = json!({
            "ambient_dim": 2,
            "generators": [{"rows": [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}],
            "include_identity": true
        });
        let x = system(&v).unwrap();
        assert_eq!(x.dim(), 3);
        let e =
            json!({"entries": [[{"rows": [[[1.0, 0.0], [2.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]}]]});
        assert!(system_element(&e, &x, 1, 1e-9).is_ok());
        let outside =
            json!({"entries": [[{"rows": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}]]});
        assert!(system_element(&outside, &x, 1, 1e-9).is_err());
    }
}
