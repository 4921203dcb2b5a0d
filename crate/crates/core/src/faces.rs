//! Faces of the convex body Γ^θ = {(a,b,c) : Φ[a,b,c;θ] positive} for 1 < p_θ < 2,
//! the boundary curve of the face f_abc, and the table of spanning and
//! optimality properties attached to each face.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{p_theta, require_supported_theta, MapParams};

pub const DEFAULT_FACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceKind {
    FAbc,
    FAb,
    FAc,
    FBc,
    EA,
    EB,
    EC,
    EAb,
    EAc,
    ET,
    VP00,
    V10c,
    V1b0,
    VParamT,
    V0t,
    Interior,
    Exterior,
}

impl FaceKind {
    /// The fifteen faces of Γ^θ, in table order.
    pub const FACES: [FaceKind; 15] = [
        FaceKind::FAbc,
        FaceKind::FAb,
        FaceKind::FAc,
        FaceKind::FBc,
        FaceKind::EA,
        FaceKind::EB,
        FaceKind::EC,
        FaceKind::EAb,
        FaceKind::EAc,
        FaceKind::ET,
        FaceKind::VP00,
        FaceKind::V10c,
        FaceKind::V1b0,
        FaceKind::VParamT,
        FaceKind::V0t,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FaceKind::FAbc => "f_abc",
            FaceKind::FAb => "f_ab",
            FaceKind::FAc => "f_ac",
            FaceKind::FBc => "f_bc",
            FaceKind::EA => "e_a",
            FaceKind::EB => "e_b",
            FaceKind::EC => "e_c",
            FaceKind::EAb => "e_ab",
            FaceKind::EAc => "e_ac",
            FaceKind::ET => "e_t",
            FaceKind::VP00 => "v_p00",
            FaceKind::V10c => "v_10c",
            FaceKind::V1b0 => "v_1b0",
            FaceKind::VParamT => "v_param_t",
            FaceKind::V0t => "v_0t",
            FaceKind::Interior => "interior",
            FaceKind::Exterior => "exterior",
        }
    }

    pub fn dimension(self) -> Option<usize> {
        match self {
            FaceKind::FAbc | FaceKind::FAb | FaceKind::FAc | FaceKind::FBc => Some(2),
            FaceKind::EA
            | FaceKind::EB
            | FaceKind::EC
            | FaceKind::EAb
            | FaceKind::EAc
            | FaceKind::ET => Some(1),
            FaceKind::VP00 | FaceKind::V10c | FaceKind::V1b0 | FaceKind::VParamT | FaceKind::V0t => {
                Some(0)
            }
            FaceKind::Interior => Some(3),
            FaceKind::Exterior => None,
        }
    }

    pub fn has_t(self) -> bool {
        matches!(self, FaceKind::ET | FaceKind::VParamT | FaceKind::V0t)
    }
}

impl fmt::Display for FaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceLabel {
    pub kind: FaceKind,
    pub t_value: Option<f64>,
    /// The point lies in the relative interior of `kind`; always true for the
    /// finest face, false only for exterior points.
    pub interior_of_face: bool,
}

impl FaceLabel {
    pub fn new(kind: FaceKind, t_value: Option<f64>) -> Self {
        Self {
            kind,
            t_value,
            interior_of_face: kind != FaceKind::Exterior,
        }
    }
}

impl fmt::Display for FaceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.t_value {
            Some(t) => write!(f, "{}(t={t})", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

/// (a_θ(t), b_θ(t), c_θ(t)): the curved edge of f_abc.
pub fn boundary_parametrization(theta: f64, t: f64) -> Result<(f64, f64, f64)> {
    require_supported_theta(theta)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParams(format!("t = {t} must be positive")));
    }
    let p = p_theta(theta);
    let d = 1.0 - t + t * t;
    Ok((
        1.0 - (p - 1.0) * t / d,
        (p - 1.0) * t * t / d,
        (p - 1.0) / d,
    ))
}

fn positive_within(p: &MapParams, pt: f64, tol: f64) -> bool {
    p.sum() >= pt - tol && (p.a > 1.0 + tol || p.b * p.c >= (1.0 - p.a).powi(2) - tol)
}

/// Finest face of Γ^θ containing (a,b,c) within `tol`; lower-dimensional faces
/// win ties.
pub fn classify_face(p: &MapParams, tol: f64) -> Result<FaceLabel> {
    require_supported_theta(p.theta)?;
    let pt = p_theta(p.theta);
    let (a, b, c) = p.abc();
    let near = |x: f64, y: f64| (x - y).abs() <= tol;
    let zero = |x: f64| x <= tol;
    let label = |k| Ok(FaceLabel::new(k, None));
    let with_t = |k| Ok(FaceLabel::new(k, Some((b / c).sqrt())));

    if !positive_within(p, pt, tol) {
        return label(FaceKind::Exterior);
    }
    let on_plane = near(p.sum(), pt);
    let on_curve = near(b * c, (1.0 - a).powi(2)) && a < 1.0 - tol && !zero(b) && !zero(c);

    if near(a, pt) && zero(b) && zero(c) {
        return label(FaceKind::VP00);
    }
    if near(a, 1.0) && zero(b) && near(c, pt - 1.0) {
        return label(FaceKind::V10c);
    }
    if near(a, 1.0) && near(b, pt - 1.0) && zero(c) {
        return label(FaceKind::V1b0);
    }
    if on_plane && on_curve {
        return with_t(FaceKind::VParamT);
    }
    if zero(a) && near(b * c, 1.0) {
        return with_t(FaceKind::V0t);
    }

    if zero(b) && zero(c) {
        return label(FaceKind::EA);
    }
    if near(a, 1.0) && zero(c) && b > pt - 1.0 {
        return label(FaceKind::EB);
    }
    if near(a, 1.0) && zero(b) && c > pt - 1.0 {
        return label(FaceKind::EC);
    }
    if zero(c) && on_plane {
        return label(FaceKind::EAb);
    }
    if zero(b) && on_plane {
        return label(FaceKind::EAc);
    }
    if on_curve {
        return with_t(FaceKind::ET);
    }

    if zero(c) {
        return label(FaceKind::FAb);
    }
    if zero(b) {
        return label(FaceKind::FAc);
    }
    if zero(a) && b * c >= 1.0 - tol {
        return label(FaceKind::FBc);
    }
    if on_plane {
        return label(FaceKind::FAbc);
    }
    label(FaceKind::Interior)
}

/// Moves a point found within tolerance of a face onto that face, so that exact
/// closed-form tests see it where the tolerant classification put it. Interior
/// and exterior points are returned unchanged.
pub fn snap_to_face(p: &MapParams, label: &FaceLabel) -> Result<MapParams> {
    let pt = p_theta(p.theta);
    let (a, b, c) = p.abc();
    let t = label.t_value.unwrap_or(1.0);
    let (a, b, c) = match label.kind {
        FaceKind::VP00 => (pt, 0.0, 0.0),
        FaceKind::V10c => (1.0, 0.0, pt - 1.0),
        FaceKind::V1b0 => (1.0, pt - 1.0, 0.0),
        FaceKind::VParamT => boundary_parametrization(p.theta, t)?,
        FaceKind::V0t => (0.0, t, 1.0 / t),
        FaceKind::EA => (a, 0.0, 0.0),
        FaceKind::EB => (1.0, b, 0.0),
        FaceKind::EC => (1.0, 0.0, c),
        FaceKind::EAb => (a, pt - a, 0.0),
        FaceKind::EAc => (a, 0.0, pt - a),
        FaceKind::ET => (a, (1.0 - a) * t, (1.0 - a) / t),
        FaceKind::FAb => (a, b, 0.0),
        FaceKind::FAc => (a, 0.0, c),
        FaceKind::FBc => (0.0, b, c),
        FaceKind::FAbc => (a, b, pt - a - b),
        FaceKind::Interior | FaceKind::Exterior => (a, b, c),
    };
    MapParams::new(a.max(0.0), b.max(0.0), c.max(0.0), p.theta)
}

/// A point in the relative interior of `kind`, selected by u, v ∈ (0, 1).
/// For faces carrying a parameter t, `v` selects t = 4^{2v−1}.
pub fn face_representative(kind: FaceKind, theta: f64, u: f64, v: f64) -> Result<MapParams> {
    require_supported_theta(theta)?;
    if !(0.0 < u && u < 1.0 && 0.0 < v && v < 1.0) {
        return Err(Error::InvalidParams("u and v must lie in (0, 1)".into()));
    }
    let p = p_theta(theta);
    let t = 4f64.powf(2.0 * v - 1.0);
    let (a, b, c) = match kind {
        FaceKind::FAbc => {
            let lo = 2.0 - p;
            let a = lo + v * (p - lo);
            let rest = p - a;
            let (b_lo, b_hi) = if a < 1.0 {
                let disc = (rest * rest - 4.0 * (1.0 - a).powi(2)).max(0.0).sqrt();
                (0.5 * (rest - disc), 0.5 * (rest + disc))
            } else {
                (0.0, rest)
            };
            let b = b_lo + u * (b_hi - b_lo);
            (a, b, rest - b)
        }
        FaceKind::FAb => {
            let a = 1.0 + 2.0 * v;
            (a, (p - a).max(0.0) + 0.1 + 2.0 * u, 0.0)
        }
        FaceKind::FAc => {
            let a = 1.0 + 2.0 * v;
            (a, 0.0, (p - a).max(0.0) + 0.1 + 2.0 * u)
        }
        FaceKind::FBc => {
            let b = 0.25 + 2.0 * u;
            (0.0, b, (1.1 + v) / b)
        }
        FaceKind::EA => (p + 0.1 + 2.0 * u, 0.0, 0.0),
        FaceKind::EB => (1.0, p - 1.0 + 0.1 + 2.0 * u, 0.0),
        FaceKind::EC => (1.0, 0.0, p - 1.0 + 0.1 + 2.0 * u),
        FaceKind::EAb => {
            let a = 1.0 + u * (p - 1.0);
            (a, p - a, 0.0)
        }
        FaceKind::EAc => {
            let a = 1.0 + u * (p - 1.0);
            (a, 0.0, p - a)
        }
        FaceKind::ET => {
            let s_min = (p - 1.0) * t / (1.0 - t + t * t);
            let s = s_min + u * (1.0 - s_min);
            (1.0 - s, s * t, s / t)
        }
        FaceKind::VP00 => (p, 0.0, 0.0),
        FaceKind::V10c => (1.0, 0.0, p - 1.0),
        FaceKind::V1b0 => (1.0, p - 1.0, 0.0),
        FaceKind::VParamT => boundary_parametrization(theta, t)?,
        FaceKind::V0t => (0.0, t, 1.0 / t),
        FaceKind::Interior => (1.0 + u, 1.0 + v, 1.0),
        FaceKind::Exterior => (0.1 * u, 0.1 * v, 0.0),
    };
    MapParams::new(a, b, c, theta)
}

/// One row of the property table: spanning and optimality flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyRow {
    pub spanning: bool,
    pub co_spanning: bool,
    pub bi_spanning: bool,
    pub optimal: bool,
    pub co_optimal: bool,
    pub bi_optimal: bool,
}

impl PropertyRow {
    pub fn from_flags(spanning: bool, co_spanning: bool, optimal: bool, co_optimal: bool) -> Self {
        Self {
            spanning,
            co_spanning,
            bi_spanning: spanning && co_spanning,
            optimal,
            co_optimal,
            bi_optimal: optimal && co_optimal,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.bi_spanning == (self.spanning && self.co_spanning)
            && self.bi_optimal == (self.optimal && self.co_optimal)
            && (!self.spanning || self.optimal)
            && (!self.co_spanning || self.co_optimal)
    }
}

/// Property table of the faces of Γ^θ.
pub fn face_properties(label: &FaceLabel) -> Result<PropertyRow> {
    use FaceKind::*;
    let row = PropertyRow::from_flags;
    Ok(match label.kind {
        FAbc | FAb | FAc | FBc | EA | EB | EC => row(false, false, false, false),
        EAb | EAc | VP00 => row(false, true, false, true),
        ET | V0t => row(true, false, true, false),
        V10c | V1b0 => row(false, true, true, true),
        VParamT => row(true, true, true, true),
        Interior | Exterior => return Err(Error::NotAFace(label.kind.name().into())),
    })
}
