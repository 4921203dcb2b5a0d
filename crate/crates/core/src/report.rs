//! Classification reports and the serialized document emitted by the CLI.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Result;
use crate::faces::{classify_face, face_properties, snap_to_face, FaceKind, FaceLabel, PropertyRow, DEFAULT_FACE_TOL};
use crate::family::{choi_matrix, require_supported_theta, MapParams};
use crate::linalg::{hermitian_eigenvalues, numeric_rank, partial_transpose, Tolerances};
use crate::optimality::{classify_optimality, OptimalityEvidence};
use crate::positivity::{
    block_positivity_oracle, is_completely_copositive, is_completely_positive, is_positive, OracleStatus,
    DEFAULT_GRID_N, DEFAULT_REFINE_STEPS,
};
use crate::spanning::{has_cospanning_property, has_spanning_property, SpanningEvidence};
use crate::witness::WitnessSpec;

pub const SCHEMA_VERSION: &str = "1";
pub const SIGNIFICANT_DIGITS: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEvidence {
    pub choi_eigenvalues: Vec<f64>,
    pub pt_eigenvalues: Vec<f64>,
    pub choi_rank: usize,
    pub pt_rank: usize,
    pub oracle_min: f64,
    pub oracle_status: OracleStatus,
}

/// Everything known about one map: closed-form flags, face, property row and
/// the evidence behind each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// Parameters as given.
    pub input: MapParams,
    /// Parameters moved onto the face found within `tolerance`; all flags refer
    /// to this point.
    pub params: MapParams,
    pub tolerance: f64,
    pub p_theta: f64,
    pub cp: bool,
    pub ccp: bool,
    pub positive: bool,
    pub face: FaceLabel,
    pub row: Option<PropertyRow>,
    /// Row of the property table for `face`, when it is a face.
    pub expected_row: Option<PropertyRow>,
    pub spectral: SpectralEvidence,
    pub optimality: Option<OptimalityEvidence>,
}

pub fn classify(p: &MapParams) -> Result<ClassificationReport> {
    classify_with_tolerance(p, DEFAULT_FACE_TOL)
}

/// Classifies after snapping `input` onto the face it lies on within `tol`.
pub fn classify_with_tolerance(input: &MapParams, tol: f64) -> Result<ClassificationReport> {
    require_supported_theta(input.theta)?;
    let face = classify_face(input, tol)?;
    let snapped = snap_to_face(input, &face)?;
    let p = &snapped;
    let w = choi_matrix(p);
    let wg = partial_transpose(&w)?;
    let ranks = Tolerances::default();
    let oracle = block_positivity_oracle(&w, DEFAULT_GRID_N, DEFAULT_REFINE_STEPS)?;
    let spectral = SpectralEvidence {
        choi_eigenvalues: hermitian_eigenvalues(&w)?,
        pt_eigenvalues: hermitian_eigenvalues(&wg)?,
        choi_rank: numeric_rank(&w, &ranks),
        pt_rank: numeric_rank(&wg, &ranks),
        oracle_min: oracle.min_value,
        oracle_status: oracle.status,
    };
    let positive = is_positive(p);
    let (row, optimality) = if positive {
        let c = classify_optimality(p)?;
        (Some(c.row), Some(c.evidence))
    } else {
        (None, None)
    };
    let expected_row = match face.kind {
        FaceKind::Interior | FaceKind::Exterior => None,
        _ => Some(face_properties(&face)?),
    };
    Ok(ClassificationReport {
        input: *input,
        params: *p,
        tolerance: tol,
        p_theta: p.p_theta(),
        cp: is_completely_positive(p),
        ccp: is_completely_copositive(p),
        positive,
        face,
        row,
        expected_row,
        spectral,
        optimality,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanningReport {
    pub params: MapParams,
    pub spanning: SpanningEvidence,
    pub co_spanning: SpanningEvidence,
}

pub fn spanning_report(p: &MapParams) -> Result<SpanningReport> {
    Ok(SpanningReport {
        params: *p,
        spanning: has_spanning_property(p)?,
        co_spanning: has_cospanning_property(p)?,
    })
}

/// Rounds a real to `SIGNIFICANT_DIGITS` significant digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Applies `round_significant` to every non-integer number in a JSON tree.
pub fn round_reals(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_significant(x))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_reals),
        Value::Object(map) => map.values_mut().for_each(round_reals),
        _ => {}
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Classify,
    Witness,
    Spanning,
}

/// Versioned output document; reals carry 15 significant digits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub kind: ReportKind,
    pub params: Option<MapParams>,
    pub flags: Value,
    pub evidence: Value,
}

impl ReportDocument {
    fn build(kind: ReportKind, params: Option<MapParams>, flags: Value, evidence: Value) -> Result<Self> {
        let mut doc = serde_json::to_value(ReportDocument {
            schema_version: SCHEMA_VERSION.into(),
            kind,
            params,
            flags,
            evidence,
        })
        .map_err(serialization_error)?;
        round_reals(&mut doc);
        serde_json::from_value(doc).map_err(serialization_error)
    }

    pub fn from_classification(r: &ClassificationReport) -> Result<Self> {
        let flags = json!({
            "cp": r.cp,
            "ccp": r.ccp,
            "positive": r.positive,
            "face": r.face.kind.name(),
            "face_t": r.face.t_value,
            "spanning": r.row.map(|x| x.spanning),
            "co_spanning": r.row.map(|x| x.co_spanning),
            "bi_spanning": r.row.map(|x| x.bi_spanning),
            "optimal": r.row.map(|x| x.optimal),
            "co_optimal": r.row.map(|x| x.co_optimal),
            "bi_optimal": r.row.map(|x| x.bi_optimal),
            "matches_table": r.expected_row.zip(r.row).map(|(e, x)| e == x),
        });
        let evidence = json!({
            "input": r.input,
            "tolerance": r.tolerance,
            "p_theta": r.p_theta,
            "spectral": r.spectral,
            "expected_row": r.expected_row,
            "optimality": r.optimality,
        });
        Self::build(ReportKind::Classify, Some(r.params), flags, evidence)
    }

    pub fn from_witness(w: &WitnessSpec) -> Result<Self> {
        let flags = json!({
            "detects": w.validation.detects,
            "valid_witness": w.validation.is_valid_witness(),
            "block_positive": w.validation.block_positive,
            "spanning": w.validation.spanning,
            "co_spanning": w.validation.co_spanning,
        });
        let evidence = serde_json::to_value(w).map_err(serialization_error)?;
        Self::build(ReportKind::Witness, Some(w.normalized_params), flags, evidence)
    }

    pub fn from_spanning(r: &SpanningReport) -> Result<Self> {
        let flags = json!({
            "spanning": r.spanning.verdict,
            "co_spanning": r.co_spanning.verdict,
            "bi_spanning": r.spanning.verdict && r.co_spanning.verdict,
        });
        let evidence = json!({ "spanning": r.spanning, "co_spanning": r.co_spanning });
        Self::build(ReportKind::Spanning, Some(r.params), flags, evidence)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(serialization_error)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(serialization_error)
    }
}

fn serialization_error(e: serde_json::Error) -> crate::error::Error {
    crate::error::Error::InvalidParams(format!("serialization: {e}"))
}
