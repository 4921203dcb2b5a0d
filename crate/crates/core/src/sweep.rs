//! Parameter sweeps and figure data as CSV.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faces::{classify_face, DEFAULT_FACE_TOL};
use crate::family::{p_theta, theta_is_supported, MapParams};
use crate::positivity::{is_completely_copositive, is_completely_positive, is_positive};

pub const MAX_GRID_N: usize = 2000;
pub const DEFAULT_EXTENT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plane {
    /// a + b + c = p_θ with a, b, c ≥ 0.
    AbcSimplex,
    /// c = 0.
    Ab,
    /// b = 0.
    Ac,
    /// a = 0.
    Bc,
}

impl Plane {
    pub const ALL: [Plane; 4] = [Plane::AbcSimplex, Plane::Ab, Plane::Ac, Plane::Bc];

    pub fn name(self) -> &'static str {
        match self {
            Plane::AbcSimplex => "abc_simplex",
            Plane::Ab => "ab",
            Plane::Ac => "ac",
            Plane::Bc => "bc",
        }
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Plane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Plane::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown plane '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub theta: f64,
    pub face: String,
    pub cp: bool,
    pub ccp: bool,
    pub positive: bool,
}

fn check_grid(grid_n: usize) -> Result<()> {
    if (1..=MAX_GRID_N).contains(&grid_n) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("grid_n = {grid_n} must lie in 1..={MAX_GRID_N}")))
    }
}

fn grid_value(k: usize, n: usize, extent: f64) -> f64 {
    if n == 1 {
        0.0
    } else {
        extent * k as f64 / (n - 1) as f64
    }
}

fn face_name(p: &MapParams) -> String {
    if !theta_is_supported(p.theta) {
        return "n/a".into();
    }
    classify_face(p, DEFAULT_FACE_TOL)
        .map(|l| l.kind.name().to_string())
        .unwrap_or_else(|_| "n/a".into())
}

fn row(a: f64, b: f64, c: f64, theta: f64) -> Result<SweepRow> {
    let p = MapParams::new(a, b, c, theta)?;
    Ok(SweepRow {
        a: p.a,
        b: p.b,
        c: p.c,
        theta: p.theta,
        face: face_name(&p),
        cp: is_completely_positive(&p),
        ccp: is_completely_copositive(&p),
        positive: is_positive(&p),
    })
}

/// Grid over one plane in lexicographic (i, j) order. The coordinate planes use
/// `grid_n` points per axis on [0, extent]; the simplex uses the lattice
/// i + j ≤ grid_n − 1 scaled to a + b + c = p_θ.
pub fn sweep(theta: f64, grid_n: usize, plane: Plane, extent: f64) -> Result<Vec<SweepRow>> {
    check_grid(grid_n)?;
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::InvalidParams(format!("extent = {extent} must be positive")));
    }
    let pt = p_theta(theta);
    let cells: Vec<(usize, usize)> = (0..grid_n)
        .flat_map(|i| (0..grid_n).map(move |j| (i, j)))
        .filter(|&(i, j)| plane != Plane::AbcSimplex || i + j < grid_n)
        .collect();
    cells
        .par_iter()
        .map(|&(i, j)| {
            let (u, v) = (grid_value(i, grid_n, extent), grid_value(j, grid_n, extent));
            match plane {
                Plane::AbcSimplex => {
                    let (a, b) = (grid_value(i, grid_n, pt), grid_value(j, grid_n, pt));
                    row(a, b, (pt - a - b).max(0.0), theta)
                }
                Plane::Ab => row(u, v, 0.0, theta),
                Plane::Ac => row(u, 0.0, v, theta),
                Plane::Bc => row(0.0, u, v, theta),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PThetaRow {
    pub theta: f64,
    pub p_theta: f64,
}

/// p_θ on `n` equally spaced angles of [−π, π].
pub fn figure_p_theta(n: usize) -> Result<Vec<PThetaRow>> {
    check_grid(n)?;
    Ok((0..n)
        .map(|k| {
            let theta = -PI + grid_value(k, n, 2.0 * PI);
            PThetaRow {
                theta,
                p_theta: p_theta(theta),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyRow {
    pub b: f64,
    pub c: f64,
    pub theta: f64,
    /// Smallest a with Φ[a,b,c;θ] positive.
    pub a_min: f64,
    pub face: String,
}

/// The lower boundary a = max(0, p_θ − b − c, 1 − √(bc)) of the convex body
/// over a (b, c) grid on [0, extent]².
pub fn figure_body(theta: f64, grid_n: usize, extent: f64) -> Result<Vec<BodyRow>> {
    check_grid(grid_n)?;
    let pt = p_theta(theta);
    let cells: Vec<(usize, usize)> = (0..grid_n).flat_map(|i| (0..grid_n).map(move |j| (i, j))).collect();
    cells
        .par_iter()
        .map(|&(i, j)| {
            let (b, c) = (grid_value(i, grid_n, extent), grid_value(j, grid_n, extent));
            let a_min = 0f64.max(pt - b - c).max(1.0 - (b * c).sqrt());
            let p = MapParams::new(a_min, b, c, theta)?;
            Ok(BodyRow {
                b,
                c,
                theta: p.theta,
                a_min,
                face: face_name(&p),
            })
        })
        .collect()
}

/// Writes serializable rows as CSV with a header line.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

pub fn to_csv_string<T: Serialize>(rows: &[T]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is UTF-8")
}
