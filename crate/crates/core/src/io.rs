//! JSON formats. Complex numbers are `[re, im]` pairs and matrices are arrays of rows.
//!
//! Every document carries a `kind` field; when it is absent the kind is
//! inferred from the other keys.

use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::catalog::{ExampleData, NamedExample};
use crate::error::Error;
use crate::linalg::{ComplexMatrix, Tolerance, C64};
use crate::measurement::{Measurement, Povm, QuantumState, StateData};
use crate::perfect::ProjectiveRetrodictor;
use crate::unambiguous::UnambiguousRetrodictor;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Invalid { path: String, source: Error },
    #[error("{path}: expected {expected}, found {found}")]
    WrongKind {
        path: String,
        expected: &'static str,
        found: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Measurement(Measurement),
    Povm(Povm),
    Operators(Vec<ComplexMatrix>),
    State(QuantumState),
    Projective(ProjectiveRetrodictor),
    Unambiguous(UnambiguousRetrodictor),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Measurement(_) => "measurement",
            Self::Povm(_) => "povm",
            Self::Operators(_) => "operators",
            Self::State(_) => "state",
            Self::Projective(_) => "projective_retrodictor",
            Self::Unambiguous(_) => "unambiguous_retrodictor",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Self::Measurement(m) => measurement_json(m),
            Self::Povm(p) => povm_json(p),
            Self::Operators(ops) => operators_json(ops),
            Self::State(s) => state_json(s),
            Self::Projective(r) => projective_json(r),
            Self::Unambiguous(r) => unambiguous_json(r),
        }
    }
}

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
#[serde(untagged)]
enum RawStateData {
    Vector(Vec<[f64; 2]>),
    Matrix(RawMatrix),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    kind: Option<String>,
    d_in: Option<usize>,
    d_out: Option<usize>,
    d: Option<usize>,
    outcomes: Option<Vec<Vec<RawMatrix>>>,
    elements: Option<Vec<RawMatrix>>,
    operators: Option<Vec<RawMatrix>>,
    projectors: Option<Vec<RawMatrix>>,
    inconclusive_index: Option<usize>,
    data: Option<RawStateData>,
    factor_dims: Option<[usize; 2]>,
}

fn complex(p: &[f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn vector(raw: &[[f64; 2]]) -> Vec<C64> {
    raw.iter().map(complex).collect()
}

fn matrix(raw: &RawMatrix) -> Result<ComplexMatrix, Error> {
    if raw.is_empty() || raw[0].is_empty() {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    let rows: Vec<Vec<C64>> = raw.iter().map(|r| vector(r)).collect();
    ComplexMatrix::from_rows(&rows)
}

fn matrices(raw: &[RawMatrix]) -> Result<Vec<ComplexMatrix>, Error> {
    raw.iter().map(matrix).collect()
}

fn expect_dim(name: &str, declared: Option<usize>, actual: usize) -> Result<(), Error> {
    match declared {
        Some(d) if d != actual => Err(Error::DimensionMismatch(format!(
            "declared {name} = {d} but the matrices imply {actual}"
        ))),
        _ => Ok(()),
    }
}

fn infer_kind(raw: &RawDocument) -> Result<&str, Error> {
    if let Some(k) = raw.kind.as_deref() {
        return Ok(k);
    }
    Ok(if raw.outcomes.is_some() {
        "measurement"
    } else if raw.operators.is_some() {
        "operators"
    } else if raw.projectors.is_some() {
        "projective_retrodictor"
    } else if raw.elements.is_some() && raw.inconclusive_index.is_some() {
        "unambiguous_retrodictor"
    } else if raw.elements.is_some() {
        "povm"
    } else if raw.data.is_some() {
        "state"
    } else {
        return Err(Error::InvalidMeasurement("cannot determine the document kind".into()));
    })
}

fn missing(field: &str) -> Error {
    Error::InvalidMeasurement(format!("missing field `{field}`"))
}

fn build(raw: RawDocument, tol: &Tolerance) -> Result<Document, Error> {
    match infer_kind(&raw)? {
        "measurement" => {
            let groups = raw
                .outcomes
                .as_ref()
                .ok_or_else(|| missing("outcomes"))?
                .iter()
                .map(|g| matrices(g))
                .collect::<Result<Vec<_>, _>>()?;
            let m = Measurement::new(groups, tol)?;
            expect_dim("d_in", raw.d_in, m.d_in())?;
            expect_dim("d_out", raw.d_out, m.d_out())?;
            Ok(Document::Measurement(m))
        }
        "operators" => {
            let ops = matrices(raw.operators.as_ref().ok_or_else(|| missing("operators"))?)?;
            if ops.is_empty() {
                return Err(Error::ShapeMismatch("no operators supplied".into()));
            }
            if let Some(a) = ops.iter().find(|a| a.shape() != ops[0].shape()) {
                return Err(Error::ShapeMismatch(format!(
                    "operator of shape {}x{} differs from {}x{}",
                    a.rows(),
                    a.cols(),
                    ops[0].rows(),
                    ops[0].cols()
                )));
            }
            expect_dim("d_in", raw.d_in, ops[0].cols())?;
            expect_dim("d_out", raw.d_out, ops[0].rows())?;
            Ok(Document::Operators(ops))
        }
        "povm" => {
            let p = Povm::new(matrices(raw.elements.as_ref().ok_or_else(|| missing("elements"))?)?, tol)?;
            expect_dim("d", raw.d, p.d())?;
            Ok(Document::Povm(p))
        }
        "projective_retrodictor" => {
            let r = ProjectiveRetrodictor::new(
                matrices(raw.projectors.as_ref().ok_or_else(|| missing("projectors"))?)?,
                tol,
            )?;
            expect_dim("d_out", raw.d_out, r.d_out())?;
            Ok(Document::Projective(r))
        }
        "unambiguous_retrodictor" => {
            if raw.inconclusive_index.unwrap_or(0) != UnambiguousRetrodictor::INCONCLUSIVE_INDEX {
                return Err(Error::InvalidPovm("inconclusive_index must be 0".into()));
            }
            let r = UnambiguousRetrodictor::from_elements(
                matrices(raw.elements.as_ref().ok_or_else(|| missing("elements"))?)?,
                tol,
            )?;
            expect_dim("d", raw.d, r.d())?;
            Ok(Document::Unambiguous(r))
        }
        "state" | "pure" | "mixed" => {
            let s = match raw.data.as_ref().ok_or_else(|| missing("data"))? {
                RawStateData::Vector(v) => QuantumState::pure(vector(v), tol)?,
                RawStateData::Matrix(m) => QuantumState::mixed(matrix(m)?, tol)?,
            };
            match raw.factor_dims {
                Some([dq, da]) => Ok(Document::State(s.with_factors(dq, da)?)),
                None => Ok(Document::State(s)),
            }
        }
        other => Err(Error::InvalidMeasurement(format!("unknown document kind `{other}`"))),
    }
}

/// Parses a document; `path` is only used in diagnostics.
pub fn parse_document(text: &str, path: &str, tol: &Tolerance) -> Result<Document, LoadError> {
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| LoadError::Parse {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build(raw, tol).map_err(|source| LoadError::Invalid {
        path: path.to_string(),
        source,
    })
}

pub fn load_document(path: &Path, tol: &Tolerance) -> Result<Document, LoadError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: name.clone(),
        source,
    })?;
    parse_document(&text, &name, tol)
}

pub fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn vector_json(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&z| complex_json(z)).collect())
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| vector_json(m.row(i))).collect())
}

fn matrices_json(ms: &[ComplexMatrix]) -> Value {
    Value::Array(ms.iter().map(matrix_json).collect())
}

pub fn measurement_json(m: &Measurement) -> Value {
    json!({
        "kind": "measurement",
        "d_in": m.d_in(),
        "d_out": m.d_out(),
        "outcomes": Value::Array(m.outcomes().iter().map(|g| matrices_json(g)).collect()),
    })
}

pub fn povm_json(p: &Povm) -> Value {
    json!({ "kind": "povm", "d": p.d(), "elements": matrices_json(p.elements()) })
}

pub fn operators_json(ops: &[ComplexMatrix]) -> Value {
    json!({
        "kind": "operators",
        "d_in": ops[0].cols(),
        "d_out": ops[0].rows(),
        "operators": matrices_json(ops),
    })
}

pub fn state_json(s: &QuantumState) -> Value {
    let (kind, data) = match s.data() {
        StateData::Pure(v) => ("pure", vector_json(v)),
        StateData::Mixed(m) => ("mixed", matrix_json(m)),
    };
    let mut out = json!({ "kind": kind, "data": data });
    if let Some((dq, da)) = s.factor_dims() {
        out["factor_dims"] = json!([dq, da]);
    }
    out
}

pub fn projective_json(r: &ProjectiveRetrodictor) -> Value {
    json!({
        "kind": "projective_retrodictor",
        "d_out": r.d_out(),
        "projectors": matrices_json(r.projectors()),
    })
}

pub fn unambiguous_json(r: &UnambiguousRetrodictor) -> Value {
    json!({
        "kind": "unambiguous_retrodictor",
        "d": r.d(),
        "inconclusive_index": UnambiguousRetrodictor::INCONCLUSIVE_INDEX,
        "elements": matrices_json(r.elements()),
    })
}

pub fn example_document(e: &NamedExample) -> Document {
    match &e.data {
        ExampleData::Measurement(m) => Document::Measurement(m.clone()),
        ExampleData::Operators(ops) => Document::Operators(ops.clone()),
        ExampleData::Povm(p) => Document::Povm(p.clone()),
    }
}

/// Stable pretty-printed JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialise");
    s.push('\n');
    s
}

/// `serialize_with` helpers for complex data.
pub mod ser {
    use serde::ser::{SerializeSeq, Serializer};

    use crate::linalg::{ComplexMatrix, C64};

    struct Pair<'a>(&'a C64);

    impl serde::Serialize for Pair<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            [self.0.re, self.0.im].serialize(s)
        }
    }

    struct Row<'a>(&'a [C64]);

    impl serde::Serialize for Row<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(self.0.len()))?;
            for z in self.0 {
                seq.serialize_element(&Pair(z))?;
            }
            seq.end()
        }
    }

    struct Mat<'a>(&'a ComplexMatrix);

    impl serde::Serialize for Mat<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(self.0.rows()))?;
            for i in 0..self.0.rows() {
                seq.serialize_element(&Row(self.0.row(i)))?;
            }
            seq.end()
        }
    }

    struct Mats<'a>(&'a [ComplexMatrix]);

    impl serde::Serialize for Mats<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(self.0.len()))?;
            for m in self.0 {
                seq.serialize_element(&Mat(m))?;
            }
            seq.end()
        }
    }

    pub fn complex<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&Pair(z), s)
    }

    pub fn opt_complex<S: Serializer>(z: &Option<C64>, s: S) -> Result<S::Ok, S::Error> {
        match z {
            Some(z) => s.serialize_some(&Pair(z)),
            None => s.serialize_none(),
        }
    }

    pub fn vector<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&Row(v), s)
    }

    pub fn opt_vector<S: Serializer>(v: &Option<Vec<C64>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_some(&Row(v)),
            None => s.serialize_none(),
        }
    }

    pub fn vectors<S: Serializer>(vs: &[Vec<C64>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(vs.len()))?;
        for v in vs {
            seq.serialize_element(&Row(v))?;
        }
        seq.end()
    }

    pub fn matrix<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&Mat(m), s)
    }

    pub fn matrices<S: Serializer>(ms: &[ComplexMatrix], s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&Mats(ms), s)
    }

    pub fn groups<S: Serializer>(gs: &[Vec<ComplexMatrix>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(gs.len()))?;
        for g in gs {
            seq.serialize_element(&Mats(g))?;
        }
        seq.end()
    }
}
