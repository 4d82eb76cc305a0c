//! JSON instance files.
//!
//! ```json
//! {"type": "linear", "field": 3, "m": 2, "V1": [[1, 0]], "V1p": [[0, 1]], "V2": [[0, 1]], "V2p": [[1, 0]]}
//! {"type": "general", "alphabets": {"w1": ["0", "1"], ...}, "pmf": [{"w1": "0", ..., "p": "1/4"}, ...]}
//! {"type": "matching", "m": 4, "m1": 2, "m2": 2, "pi": [[[1, 2, 3, 4], ...], ...]}
//! ```
//!
//! Matrices are lists of columns; permutations are 1-indexed.

use std::path::Path;
use std::str::FromStr;

use num_rational::BigRational;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::distributions::{Atom, GeneralCbInstance, VAR_NAMES};
use crate::lcb::LinearCbInstance;
use crate::matching::{MatchingInstance, Permutation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("parse error at {pointer}: {message}")]
    Parse { pointer: String, message: String },
    #[error("invalid instance: {0}")]
    Invariant(String),
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
}

impl IoError {
    pub fn is_parse(&self) -> bool {
        !matches!(self, IoError::Invariant(_))
    }
}

fn perr(pointer: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Parse {
        pointer: pointer.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Linear(LinearCbInstance),
    General(GeneralCbInstance),
    Matching(MatchingInstance),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Linear(_) => "linear",
            Instance::General(_) => "general",
            Instance::Matching(_) => "matching",
        }
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_instance(&text)
}

pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| perr("", format!("line {} column {}: {e}", e.line(), e.column())))?;
    parse_instance_value(&v)
}

pub fn parse_instance_value(v: &Value) -> Result<Instance, IoError> {
    let obj = v
        .as_object()
        .ok_or_else(|| perr("", "expected a JSON object"))?;
    match get(obj, "", "type")?.as_str() {
        Some("linear") => parse_linear(obj).map(Instance::Linear),
        Some("general") => parse_general(obj).map(Instance::General),
        Some("matching") => parse_matching(obj).map(Instance::Matching),
        _ => Err(perr(
            "/type",
            "expected \"linear\", \"general\" or \"matching\"",
        )),
    }
}

fn get<'a>(obj: &'a Map<String, Value>, base: &str, key: &str) -> Result<&'a Value, IoError> {
    obj.get(key)
        .ok_or_else(|| perr(format!("{base}/{key}"), "missing field"))
}

fn as_u64(v: &Value, ptr: &str) -> Result<u64, IoError> {
    v.as_u64()
        .ok_or_else(|| perr(ptr, "expected a non-negative integer"))
}

fn as_array<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or_else(|| perr(ptr, "expected an array"))
}

fn label(v: &Value, ptr: &str) -> Result<String, IoError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(perr(ptr, "expected a string or number label")),
    }
}

fn parse_linear(obj: &Map<String, Value>) -> Result<LinearCbInstance, IoError> {
    let p = as_u64(get(obj, "", "field")?, "/field")?;
    let m = as_u64(get(obj, "", "m")?, "/m")? as usize;
    let mut mats: Vec<Vec<Vec<i64>>> = Vec::new();
    for key in ["V1", "V1p", "V2", "V2p"] {
        let ptr = format!("/{key}");
        let cols = as_array(get(obj, "", key)?, &ptr)?;
        let mut out = Vec::new();
        for (j, col) in cols.iter().enumerate() {
            let cptr = format!("{ptr}/{j}");
            let entries = as_array(col, &cptr)?;
            if entries.len() != m {
                return Err(perr(
                    &cptr,
                    format!("column has {} entries, expected m = {m}", entries.len()),
                ));
            }
            let col: Result<Vec<i64>, IoError> = entries
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    x.as_i64()
                        .ok_or_else(|| perr(format!("{cptr}/{i}"), "expected an integer"))
                })
                .collect();
            out.push(col?);
        }
        mats.push(out);
    }
    LinearCbInstance::from_columns(p, m, &mats[0], &mats[1], &mats[2], &mats[3])
        .map_err(|e| IoError::Invariant(e.to_string()))
}

fn parse_general(obj: &Map<String, Value>) -> Result<GeneralCbInstance, IoError> {
    let alph = get(obj, "", "alphabets")?
        .as_object()
        .ok_or_else(|| perr("/alphabets", "expected an object"))?;
    let mut alphabets: [Vec<String>; 4] = Default::default();
    for (v, name) in VAR_NAMES.iter().enumerate() {
        let ptr = format!("/alphabets/{name}");
        let items = as_array(get(alph, "/alphabets", name)?, &ptr)?;
        alphabets[v] = items
            .iter()
            .enumerate()
            .map(|(i, x)| label(x, &format!("{ptr}/{i}")))
            .collect::<Result<_, _>>()?;
    }
    let pmf = as_array(get(obj, "", "pmf")?, "/pmf")?;
    let mut atoms = Vec::with_capacity(pmf.len());
    for (k, entry) in pmf.iter().enumerate() {
        let base = format!("/pmf/{k}");
        let e = entry
            .as_object()
            .ok_or_else(|| perr(&base, "expected an object"))?;
        let mut values = [0usize; 4];
        for (v, name) in VAR_NAMES.iter().enumerate() {
            let ptr = format!("{base}/{name}");
            let l = label(get(e, &base, name)?, &ptr)?;
            values[v] = alphabets[v]
                .iter()
                .position(|a| *a == l)
                .ok_or_else(|| perr(&ptr, format!("label {l:?} is not in the {name} alphabet")))?;
        }
        let ptr = format!("{base}/p");
        let prob = match get(e, &base, "p")? {
            Value::String(s) => BigRational::from_str(s.trim())
                .map_err(|_| perr(&ptr, format!("cannot parse {s:?} as a rational num/den")))?,
            Value::Number(n) if n.is_u64() => BigRational::from_integer(n.as_u64().unwrap().into()),
            _ => return Err(perr(&ptr, "expected a rational string \"num/den\"")),
        };
        atoms.push(Atom { values, prob });
    }
    GeneralCbInstance::new(alphabets, atoms).map_err(|e| IoError::Invariant(e.to_string()))
}

fn parse_matching(obj: &Map<String, Value>) -> Result<MatchingInstance, IoError> {
    let m = as_u64(get(obj, "", "m")?, "/m")? as usize;
    let m1 = as_u64(get(obj, "", "m1")?, "/m1")? as usize;
    let m2 = as_u64(get(obj, "", "m2")?, "/m2")? as usize;
    let rows = as_array(get(obj, "", "pi")?, "/pi")?;
    if rows.len() != m1 {
        return Err(perr(
            "/pi",
            format!("expected {m1} rows, found {}", rows.len()),
        ));
    }
    let mut table = Vec::with_capacity(m1);
    for (a, row) in rows.iter().enumerate() {
        let rptr = format!("/pi/{a}");
        let cells = as_array(row, &rptr)?;
        if cells.len() != m2 {
            return Err(perr(
                &rptr,
                format!("expected {m2} permutations, found {}", cells.len()),
            ));
        }
        let mut out = Vec::with_capacity(m2);
        for (b, cell) in cells.iter().enumerate() {
            let ptr = format!("{rptr}/{b}");
            let xs = as_array(cell, &ptr)?
                .iter()
                .enumerate()
                .map(|(i, x)| as_u64(x, &format!("{ptr}/{i}")).map(|x| x as usize))
                .collect::<Result<Vec<_>, _>>()?;
            if xs.len() != m {
                return Err(perr(
                    &ptr,
                    format!("permutation has {} entries, expected m = {m}", xs.len()),
                ));
            }
            out.push(
                Permutation::from_one_indexed(&xs)
                    .map_err(|e| IoError::Invariant(format!("{ptr}: {e}")))?,
            );
        }
        table.push(out);
    }
    MatchingInstance::new(m, m1, m2, table).map_err(|e| IoError::Invariant(e.to_string()))
}

fn columns(mat: &crate::gf_linalg::FieldMatrix) -> Vec<Vec<u32>> {
    (0..mat.cols()).map(|j| mat.column(j)).collect()
}

/// The file representation, which [`parse_instance_value`] accepts back.
pub fn instance_to_json(inst: &Instance) -> Value {
    match inst {
        Instance::Linear(l) => json!({
            "type": "linear",
            "field": l.field().modulus(),
            "m": l.m(),
            "V1": columns(l.v1()),
            "V1p": columns(l.v1p()),
            "V2": columns(l.v2()),
            "V2p": columns(l.v2p()),
        }),
        Instance::General(g) => {
            let alph = g.alphabets();
            let mut alphabets = Map::new();
            for (v, name) in VAR_NAMES.iter().enumerate() {
                alphabets.insert(name.to_string(), json!(alph[v]));
            }
            let pmf: Vec<Value> = g
                .atoms()
                .iter()
                .map(|a| {
                    let mut e = Map::new();
                    for (v, name) in VAR_NAMES.iter().enumerate() {
                        e.insert(name.to_string(), json!(alph[v][a.values[v]]));
                    }
                    e.insert(
                        "p".into(),
                        json!(format!("{}/{}", a.prob.numer(), a.prob.denom())),
                    );
                    Value::Object(e)
                })
                .collect();
            json!({"type": "general", "alphabets": alphabets, "pmf": pmf})
        }
        Instance::Matching(mi) => {
            let pi: Vec<Vec<Vec<usize>>> = (0..mi.m1())
                .map(|a| (0..mi.m2()).map(|b| mi.pi(a, b).to_one_indexed()).collect())
                .collect();
            json!({"type": "matching", "m": mi.m(), "m1": mi.m1(), "m2": mi.m2(), "pi": pi})
        }
    }
}
