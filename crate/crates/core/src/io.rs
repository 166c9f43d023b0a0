//! JSON formats for representations and transducers, plus serde helpers.
//!
//! Representations:
//! `{"q": 2, "matrices": [[["1","0"],["0","1"]], …], "v0": ["0","1"], "e": ["1","0"], "mode": "sequence"}`
//! with entries as strings such as `"3"`, `"-1/2"` or `"1+2i"` (integers are
//! accepted too); `e` defaults to the first unit vector and `mode` to
//! `"sequence"`.
//!
//! Transducers:
//! `{"q": 2, "states": 1, "transitions": [[[0, "0"], [0, "1"]]], "final": ["0"]}`
//! where `transitions[j][r] = [target, output]` and states are numbered
//! from 0.

use num_complex::Complex64;
use serde::Serializer;
use serde_json::{json, Value};

use crate::linrep::{InvalidRepresentation, LinearRepresentation, Mode};
use crate::matrix::ExactMatrix;
use crate::scalar::Scalar;
use crate::transducer::{Transducer, TransducerError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IoError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Representation(#[from] InvalidRepresentation),
    #[error(transparent)]
    Transducer(#[from] TransducerError),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

impl IoError {
    /// Machine-readable form.
    pub fn to_json(&self) -> Value {
        match self {
            IoError::Json { line, column, message } => {
                json!({"error": "json", "line": line, "column": column, "message": message})
            }
            IoError::Schema { path, message } => json!({"error": "schema", "path": path, "message": message}),
            IoError::Representation(InvalidRepresentation(v)) => json!({"error": "invalid_representation", "violations": v}),
            IoError::Transducer(e) => json!({"error": "invalid_transducer", "message": e.to_string()}),
        }
    }
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Value, name: &str) -> Result<&'a Value, IoError> {
    obj.get(name).ok_or_else(|| schema(name, "missing field"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn uint(v: &Value, path: &str) -> Result<u64, IoError> {
    v.as_u64().ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn scalar(v: &Value, path: &str) -> Result<Scalar, IoError> {
    match v {
        Value::String(s) => s.parse().map_err(|e: crate::scalar::ParseScalarError| schema(path, e.to_string())),
        Value::Number(n) => n
            .as_i64()
            .map(Scalar::int)
            .ok_or_else(|| schema(path, "numbers must be integers; write rationals as strings")),
        _ => Err(schema(path, "expected a string or an integer")),
    }
}

fn scalar_vec(v: &Value, path: &str) -> Result<Vec<Scalar>, IoError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| scalar(x, &format!("{path}[{i}]")))
        .collect()
}

pub fn parse_representation(text: &str) -> Result<LinearRepresentation, IoError> {
    let root: Value = serde_json::from_str(text)?;
    if !root.is_object() {
        return Err(schema("", "expected an object"));
    }
    let q = uint(field(&root, "q")?, "q")?;
    let mut matrices = Vec::new();
    let mut dim: Option<usize> = None;
    for (r, m) in array(field(&root, "matrices")?, "matrices")?.iter().enumerate() {
        let path = format!("matrices[{r}]");
        let rows = array(m, &path)?
            .iter()
            .enumerate()
            .map(|(i, row)| scalar_vec(row, &format!("{path}[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let d = *dim.get_or_insert(rows.len());
        if rows.len() != d {
            return Err(schema(&path, format!("expected {d} rows, found {}", rows.len())));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(schema(
                    format!("{path}[{i}]"),
                    format!("expected {d} entries, found {}", row.len()),
                ));
            }
        }
        matrices.push(ExactMatrix::from_rows(rows).ok_or_else(|| schema(&path, "ragged matrix"))?);
    }
    let v0 = scalar_vec(field(&root, "v0")?, "v0")?;
    let e = match root.get("e") {
        Some(v) => Some(scalar_vec(v, "e")?),
        None => None,
    };
    let mode = match root.get("mode") {
        None => Mode::Sequence,
        Some(Value::String(s)) if s == "sequence" => Mode::Sequence,
        Some(Value::String(s)) if s == "matrix" => Mode::Matrix,
        Some(_) => return Err(schema("mode", "expected \"sequence\" or \"matrix\"")),
    };
    Ok(LinearRepresentation::try_new(q, matrices, v0, e, mode)?)
}

pub fn representation_to_json(rep: &LinearRepresentation) -> Value {
    let strings = |v: &[Scalar]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let matrices: Vec<Vec<Vec<String>>> = rep
        .matrices()
        .iter()
        .map(|m| m.to_rows().iter().map(|r| strings(r)).collect())
        .collect();
    json!({
        "q": rep.q(),
        "matrices": matrices,
        "v0": strings(rep.v0()),
        "e": strings(rep.output()),
        "mode": rep.mode(),
    })
}

pub fn emit_representation(rep: &LinearRepresentation) -> String {
    serde_json::to_string_pretty(&representation_to_json(rep)).expect("JSON values serialize")
}

pub fn parse_transducer(text: &str) -> Result<Transducer, IoError> {
    let root: Value = serde_json::from_str(text)?;
    if !root.is_object() {
        return Err(schema("", "expected an object"));
    }
    let q = uint(field(&root, "q")?, "q")?;
    let states = uint(field(&root, "states")?, "states")? as usize;
    let rows = array(field(&root, "transitions")?, "transitions")?;
    if rows.len() != states {
        return Err(schema(
            "transitions",
            format!("expected {states} states, found {}", rows.len()),
        ));
    }
    let mut transitions = Vec::with_capacity(states);
    for (j, row) in rows.iter().enumerate() {
        let path = format!("transitions[{j}]");
        let arcs = array(row, &path)?;
        let mut out = Vec::with_capacity(arcs.len());
        for (r, arc) in arcs.iter().enumerate() {
            let path = format!("{path}[{r}]");
            match array(arc, &path)?.as_slice() {
                [t, o] => out.push((
                    uint(t, &format!("{path}[0]"))? as usize,
                    scalar(o, &format!("{path}[1]"))?,
                )),
                _ => return Err(schema(path, "expected [target, output]")),
            }
        }
        transitions.push(out);
    }
    let finals = scalar_vec(field(&root, "final")?, "final")?;
    Ok(Transducer::new(q, transitions, finals)?)
}

pub fn transducer_to_json(t: &Transducer) -> Value {
    let transitions: Vec<Vec<Value>> = t
        .transitions()
        .iter()
        .map(|row| row.iter().map(|(s, o)| json!([s, o.to_string()])).collect())
        .collect();
    json!({
        "q": t.q(),
        "states": t.states(),
        "transitions": transitions,
        "final": t.finals().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
    })
}

pub fn emit_transducer(t: &Transducer) -> String {
    serde_json::to_string_pretty(&transducer_to_json(t)).expect("JSON values serialize")
}

/// Serializes a complex number as `[re, im]`.
pub fn ser_complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq([z.re, z.im])
}

/// Serializes a complex vector as a list of `[re, im]` pairs.
pub fn ser_cvector<S: Serializer>(v: &crate::matrix::CVector, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|z| [z.re, z.im]))
}

/// Serializes a list of complex numbers as `[re, im]` pairs.
pub fn ser_complex_list<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|z| [z.re, z.im]))
}
