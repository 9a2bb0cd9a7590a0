//! File formats and JSON rendering.
//!
//! Matrices travel as `{"rows": r, "cols": c, "data": [[re, im], ...]}`
//! in row-major order; measurement setups wrap matrices as
//! `{"state": ..., "dims": [...], "X": {"e0": ..., "e1": ...}, "Y": ...}`
//! with optional `"R"`/`"S"` blocks for bipartite setups. All numeric
//! output is rendered with 17 significant digits, which round-trips
//! doubles exactly.

use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::ComplexMatrix;
use crate::nonlocality::{BipartiteSetup, GramMatrix};
use crate::quantum::{BinaryPovm, DensityOperator};
use crate::sdp::{RealMatrix, SdpProblem, SdpSolution, Sense};
use crate::{Error, Result};

/// 17 significant digits; exact round trip for f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

/// Serializes any value to JSON with full-precision floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(format!("serialize: {e}")))?;
    String::from_utf8(buf).map_err(|e| Error::Parse(format!("utf8: {e}")))
}

/// Shared dense-matrix wire format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn from_real(m: &RealMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().iter().map(|&x| [x, 0.0]).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let data: Vec<Complex64> = self
            .data
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        ComplexMatrix::new(self.rows, self.cols, data)
    }

    pub fn to_real(&self) -> Result<RealMatrix> {
        if self.data.iter().any(|[_, im]| im.abs() > 1e-12) {
            return Err(Error::Parse(
                "expected a real matrix, found imaginary parts".into(),
            ));
        }
        RealMatrix::new(
            self.rows,
            self.cols,
            self.data.iter().map(|[re, _]| *re).collect(),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmJson {
    pub e0: MatrixJson,
    pub e1: MatrixJson,
}

impl PovmJson {
    pub fn from_povm(p: &BinaryPovm) -> Self {
        Self {
            e0: MatrixJson::from_matrix(p.element(0)),
            e1: MatrixJson::from_matrix(p.element(1)),
        }
    }

    pub fn to_povm(&self) -> Result<BinaryPovm> {
        BinaryPovm::new(self.e0.to_matrix()?, self.e1.to_matrix()?)
    }
}

/// On-disk measurement setup; `x`/`y` measure the first subsystem,
/// `r`/`s` (when present) the second.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetupJson {
    pub state: MatrixJson,
    pub dims: Vec<usize>,
    #[serde(rename = "X", skip_serializing_if = "Option::is_none")]
    pub x: Option<PovmJson>,
    #[serde(rename = "Y", skip_serializing_if = "Option::is_none")]
    pub y: Option<PovmJson>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<PovmJson>,
    #[serde(rename = "S", skip_serializing_if = "Option::is_none")]
    pub s: Option<PovmJson>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn load_setup_file(path: &Path) -> Result<SetupJson> {
    read_json(path)
}

/// State plus the two A-side measurements.
pub fn load_measurement_setup(path: &Path) -> Result<(DensityOperator, BinaryPovm, BinaryPovm)> {
    let setup: SetupJson = read_json(path)?;
    let state = DensityOperator::new(setup.state.to_matrix()?, setup.dims.clone())?;
    let x = setup
        .x
        .as_ref()
        .ok_or_else(|| Error::Parse("setup file lacks an \"X\" measurement".into()))?
        .to_povm()?;
    let y = setup
        .y
        .as_ref()
        .ok_or_else(|| Error::Parse("setup file lacks a \"Y\" measurement".into()))?
        .to_povm()?;
    Ok((state, x, y))
}

/// Full bipartite setup with D-side measurements.
pub fn load_bipartite_setup(path: &Path) -> Result<BipartiteSetup> {
    let setup: SetupJson = read_json(path)?;
    if setup.dims.len() != 2 {
        return Err(Error::Parse(format!(
            "bipartite setup needs dims of length 2, got {:?}",
            setup.dims
        )));
    }
    let state = DensityOperator::new(setup.state.to_matrix()?, setup.dims.clone())?;
    let need = |p: &Option<PovmJson>, name: &str| -> Result<BinaryPovm> {
        p.as_ref()
            .ok_or_else(|| Error::Parse(format!("setup file lacks an \"{name}\" measurement")))?
            .to_povm()
    };
    BipartiteSetup::new(
        state,
        need(&setup.x, "X")?,
        need(&setup.y, "Y")?,
        need(&setup.r, "R")?,
        need(&setup.s, "S")?,
    )
}

/// State-only file (dims + matrix); measurement blocks are ignored.
pub fn load_state(path: &Path) -> Result<DensityOperator> {
    let setup: SetupJson = read_json(path)?;
    DensityOperator::new(setup.state.to_matrix()?, setup.dims.clone())
}

pub fn write_bipartite_setup(path: &Path, setup: &BipartiteSetup) -> Result<()> {
    let json = SetupJson {
        state: MatrixJson::from_matrix(setup.state.mat()),
        dims: setup.state.dims().to_vec(),
        x: Some(PovmJson::from_povm(&setup.x)),
        y: Some(PovmJson::from_povm(&setup.y)),
        r: Some(PovmJson::from_povm(&setup.r)),
        s: Some(PovmJson::from_povm(&setup.s)),
    };
    write_text(path, &to_json(&json)?)
}

/// Gram-matrix file: the shared matrix format plus an optional
/// `"partition": [n, m]` (defaults to an even split).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramJson {
    #[serde(flatten)]
    pub matrix: MatrixJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<[usize; 2]>,
}

pub fn load_gram(path: &Path) -> Result<GramMatrix> {
    let g: GramJson = read_json(path)?;
    let entries = g.matrix.to_real()?;
    let (n, m) = match g.partition {
        Some([n, m]) => (n, m),
        None => {
            let d = entries.rows();
            if d % 2 != 0 {
                return Err(Error::Parse(
                    "odd Gram dimension needs an explicit \"partition\"".into(),
                ));
            }
            (d / 2, d / 2)
        }
    };
    GramMatrix::new(entries, n, m)
}

pub fn write_gram(path: &Path, gram: &GramMatrix) -> Result<()> {
    let (n, m) = gram.partition();
    let json = GramJson {
        matrix: MatrixJson::from_real(gram.entries()),
        partition: Some([n, m]),
    };
    write_text(path, &to_json(&json)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConstraintJson {
    #[serde(rename = "E")]
    e_matrix: MatrixJson,
    e: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SdpProblemJson {
    sense: String,
    objective: MatrixJson,
    constraints: Vec<ConstraintJson>,
}

pub fn sdp_problem_to_json(p: &SdpProblem) -> Result<String> {
    let json = SdpProblemJson {
        sense: match p.sense() {
            Sense::Maximize => "maximize".into(),
            Sense::Minimize => "minimize".into(),
        },
        objective: MatrixJson::from_real(p.objective()),
        constraints: p
            .constraints()
            .iter()
            .map(|(e, v)| ConstraintJson {
                e_matrix: MatrixJson::from_real(e),
                e: *v,
            })
            .collect(),
    };
    to_json(&json)
}

pub fn sdp_problem_from_json(text: &str) -> Result<SdpProblem> {
    let json: SdpProblemJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("sdp problem: {e}")))?;
    let sense = match json.sense.as_str() {
        "maximize" => Sense::Maximize,
        "minimize" => Sense::Minimize,
        other => return Err(Error::Parse(format!("unknown sense {other:?}"))),
    };
    let mut p = SdpProblem::new(sense, json.objective.to_real()?)?;
    for c in &json.constraints {
        p.add_constraint(c.e_matrix.to_real()?, c.e)?;
    }
    Ok(p)
}

#[derive(Debug, Clone, Serialize)]
struct SdpSolutionJson<'a> {
    primal: MatrixJson,
    dual: &'a [f64],
    primal_value: f64,
    dual_value: f64,
    gap: f64,
    status: crate::sdp::SdpStatus,
    iterations: usize,
}

pub fn sdp_solution_to_json(s: &SdpSolution) -> Result<String> {
    to_json(&SdpSolutionJson {
        primal: MatrixJson::from_real(&s.primal),
        dual: &s.dual,
        primal_value: s.primal_value,
        dual_value: s.dual_value,
        gap: s.gap,
        status: s.status,
        iterations: s.iterations,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        f.write_all(b"\n")?;
    }
    Ok(())
}
