//! JSON schema for the CLI: complex scalars as `[re, im]`, matrices as
//! row-major nested arrays, tuples as `{"d","n","mats"}`, realizations as
//! `{"state_dim","A","b","c"}` (FM adds `"B"` and `"d0"`), spaces as tagged
//! `{"kind", ...}`. Loading is strict: shape violations surface the JSON
//! path of the offending field, and finite doubles round-trip bit-exactly.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use opball::matcore::{CMat, CVec, MatTuple};
use opball::ncrat::{DescriptorRealization, FmRealization};
use opball::opspace::OpSpaceSpec;
use opball::{Error, Result};

pub type ComplexJson = [f64; 2];
pub type MatrixJson = Vec<Vec<ComplexJson>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TupleJson {
    pub d: usize,
    pub n: usize,
    pub mats: Vec<MatrixJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealizationJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub state_dim: usize,
    #[serde(rename = "A")]
    pub a: TupleJson,
    /// FM input vectors, one per variable (FM realizations only).
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b_inputs: Option<Vec<Vec<ComplexJson>>>,
    pub b: Option<Vec<ComplexJson>>,
    pub c: Vec<ComplexJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d0: Option<ComplexJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<TupleJson>,
}

fn to_complex(c: ComplexJson) -> Complex64 {
    Complex64::new(c[0], c[1])
}

fn from_complex(z: Complex64) -> ComplexJson {
    [z.re, z.im]
}

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| from_complex(m[(i, j)])).collect())
        .collect()
}

pub fn vector_to_json(v: &CVec) -> Vec<ComplexJson> {
    v.iter().map(|z| from_complex(*z)).collect()
}

pub fn tuple_to_json(t: &MatTuple) -> TupleJson {
    TupleJson { d: t.d(), n: t.n(), mats: t.mats().iter().map(matrix_to_json).collect() }
}

pub fn json_to_matrix(rows: usize, cols: usize, m: &MatrixJson, what: &str) -> Result<CMat> {
    if m.len() != rows {
        return Err(Error::InvalidInput(format!(
            "{what}: expected {rows} rows, found {}",
            m.len()
        )));
    }
    let mut out = CMat::zeros(rows, cols);
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::InvalidInput(format!(
                "{what}: row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (j, &c) in row.iter().enumerate() {
            if !c[0].is_finite() || !c[1].is_finite() {
                return Err(Error::InvalidInput(format!("{what}: entry ({i},{j}) is not finite")));
            }
            out[(i, j)] = to_complex(c);
        }
    }
    Ok(out)
}

pub fn json_to_tuple(t: &TupleJson) -> Result<MatTuple> {
    if t.mats.len() != t.d {
        return Err(Error::InvalidInput(format!(
            "tuple declares d = {} but carries {} matrices",
            t.d,
            t.mats.len()
        )));
    }
    let mats = t
        .mats
        .iter()
        .enumerate()
        .map(|(j, m)| json_to_matrix(t.n, t.n, m, &format!("mats[{j}]")))
        .collect::<Result<Vec<_>>>()?;
    MatTuple::new(mats)
}

fn json_to_vector(v: &[ComplexJson], len: usize, what: &str) -> Result<CVec> {
    if v.len() != len {
        return Err(Error::InvalidInput(format!(
            "{what}: expected length {len}, found {}",
            v.len()
        )));
    }
    Ok(CVec::from_iterator(len, v.iter().map(|&c| to_complex(c))))
}

/// A realization file: either descriptor or FM data.
pub enum AnyRealization {
    Descriptor(DescriptorRealization),
    Fm(FmRealization),
}

pub fn json_to_realization(r: &RealizationJson) -> Result<AnyRealization> {
    let a = json_to_tuple(&r.a)?;
    if a.n() != r.state_dim {
        return Err(Error::InvalidInput(format!(
            "state_dim {} does not match the coefficient tuple dimension {}",
            r.state_dim,
            a.n()
        )));
    }
    let kind = r.kind.as_deref().unwrap_or("descriptor");
    match kind {
        "descriptor" => {
            let b = r
                .b
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("descriptor realization needs `b`".into()))?;
            let b = json_to_vector(b, r.state_dim, "b")?;
            let c = json_to_vector(&r.c, r.state_dim, "c")?;
            Ok(AnyRealization::Descriptor(DescriptorRealization::new(a, b, c)?))
        }
        "fm" => {
            let inputs = r
                .b_inputs
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("fm realization needs `B`".into()))?;
            let bs = inputs
                .iter()
                .enumerate()
                .map(|(j, v)| json_to_vector(v, r.state_dim, &format!("B[{j}]")))
                .collect::<Result<Vec<_>>>()?;
            let c = json_to_vector(&r.c, r.state_dim, "c")?;
            let d0 = r.d0.map(to_complex).unwrap_or(Complex64::new(0.0, 0.0));
            Ok(AnyRealization::Fm(FmRealization::new(a, bs, c, d0)?))
        }
        other => Err(Error::InvalidInput(format!("unknown realization kind `{other}`"))),
    }
}

pub fn descriptor_to_json(r: &DescriptorRealization) -> RealizationJson {
    RealizationJson {
        kind: Some("descriptor".into()),
        state_dim: r.state_dim(),
        a: tuple_to_json(&r.a),
        b_inputs: None,
        b: Some(vector_to_json(&r.b)),
        c: vector_to_json(&r.c),
        d0: None,
    }
}

pub fn fm_to_json(f: &FmRealization) -> RealizationJson {
    RealizationJson {
        kind: Some("fm".into()),
        state_dim: f.state_dim(),
        a: tuple_to_json(&f.a),
        b_inputs: Some(f.bs.iter().map(vector_to_json).collect()),
        b: None,
        c: vector_to_json(&f.c),
        d0: Some(from_complex(f.d0)),
    }
}

pub fn space_to_json(spec: &OpSpaceSpec) -> SpaceJson {
    match spec {
        OpSpaceSpec::ConcretePencil { q } => {
            SpaceJson { kind: "pencil".into(), d: Some(q.d()), q: Some(tuple_to_json(q)) }
        }
        other => SpaceJson { kind: other.label().into(), d: Some(other.d()), q: None },
    }
}

/// Deserialize with the JSON path of any schema violation in the message.
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        Error::InvalidInput(format!("{what}: {} (at {})", e.inner(), e.path()))
    })
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

/// Load a matrix tuple from a JSON file.
pub fn load_tuple(path: &Path) -> Result<MatTuple> {
    let text = read_file(path)?;
    let parsed: TupleJson = parse_json(&text, &path.display().to_string())?;
    json_to_tuple(&parsed)
}

/// Load a realization (descriptor or FM) from a JSON file.
pub fn load_realization(path: &Path) -> Result<AnyRealization> {
    let text = read_file(path)?;
    let parsed: RealizationJson = parse_json(&text, &path.display().to_string())?;
    json_to_realization(&parsed)
}

/// Resolve a `--space` argument: row | column | minlinf | maxl1 | pencil:FILE.
pub fn parse_space(arg: &str, d: usize) -> Result<OpSpaceSpec> {
    match arg {
        "row" => Ok(OpSpaceSpec::row(d)),
        "column" => Ok(OpSpaceSpec::column(d)),
        "minlinf" => Ok(OpSpaceSpec::min_linf(d)),
        "maxl1" => Ok(OpSpaceSpec::max_l1(d)),
        other => {
            if let Some(path) = other.strip_prefix("pencil:") {
                let q = load_tuple(Path::new(path))?;
                OpSpaceSpec::concrete_pencil(q)
            } else {
                Err(Error::Config(format!(
                    "unknown space `{other}` (expected row|column|minlinf|maxl1|pencil:FILE)"
                )))
            }
        }
    }
}
