//! Closed-form CP, CCP and positivity criteria for the family, the polynomial F
//! that governs singularity of Φ(ξξ*), and a numerical block-positivity oracle
//! for arbitrary 9x9 Hermitian matrices.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{choi_matrix, p_theta, pairing, MapParams};
use crate::linalg::{
    determinant, herm3_eigen, hermitian_eigenvalues, partial_transpose, ComplexMatrix, Mat3, C64,
    ZERO,
};
use crate::nelder_mead;

/// Slack applied toward inclusion in every closed-form inequality.
pub const BOUNDARY_SLACK: f64 = 1e-12;
/// Oracle minima below this are certified negative.
pub const CERTIFIED_NEGATIVE: f64 = -1e-6;
/// Oracle minima at or above this are certified nonnegative.
pub const CERTIFIED_NONNEGATIVE: f64 = -1e-9;

pub const DEFAULT_GRID_N: usize = 16;
pub const DEFAULT_REFINE_STEPS: usize = 200;
const REFINE_STARTS: usize = 10;

pub fn is_completely_positive(p: &MapParams) -> bool {
    p.a >= p_theta(p.theta) - BOUNDARY_SLACK
}

pub fn is_completely_copositive(p: &MapParams) -> bool {
    p.b * p.c >= 1.0 - BOUNDARY_SLACK
}

pub fn is_positive(p: &MapParams) -> bool {
    let sum_ok = p.sum() >= p_theta(p.theta) - BOUNDARY_SLACK;
    let minor_ok = p.a > 1.0 + BOUNDARY_SLACK || p.b * p.c >= (1.0 - p.a).powi(2) - BOUNDARY_SLACK;
    sum_ok && minor_ok
}

/// Coefficients of the quadratic forms ∂F/∂x, ∂F/∂y, ∂F/∂z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PqrsCoefficients {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl PqrsCoefficients {
    pub fn new(m: &MapParams) -> Self {
        let (a, b, c) = m.abc();
        Self {
            p: 3.0 * a * b * c,
            q: a * a * c + b * b * a + c * c * b - c,
            r: a * a * b + b * b * c + c * c * a - b,
            s: 0.5
                * (a.powi(3) + b.powi(3) + c.powi(3) + 3.0 * a * b * c
                    - 3.0 * a
                    - 2.0 * (3.0 * m.theta).cos()),
        }
    }

    /// Symmetric matrices of the three partial derivatives, in x, y, z order.
    pub fn gradient_matrices(&self) -> [[[f64; 3]; 3]; 3] {
        let Self { p, q, r, s } = *self;
        [
            [[p, r, q], [r, q, s], [q, s, r]],
            [[r, q, s], [q, p, r], [s, r, q]],
            [[q, s, r], [s, r, q], [r, q, p]],
        ]
    }

    /// Matrix of the quadratic form ∂F/∂x + ∂F/∂y + ∂F/∂z.
    pub fn quadratic_form_matrix(&self) -> [[f64; 3]; 3] {
        let d = self.p + self.q + self.r;
        let o = self.q + self.r + self.s;
        [[d, o, o], [o, d, o], [o, o, d]]
    }
}

/// F(x,y,z) = det Φ(ξξ*) for ξ with |ξ_i|² = (x, y, z).
pub fn f_polynomial(m: &MapParams, x: f64, y: f64, z: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 || z < 0.0 {
        return Err(Error::NegativeInput { x, y, z });
    }
    Ok(f_unchecked(m, x, y, z))
}

fn f_unchecked(m: &MapParams, x: f64, y: f64, z: f64) -> f64 {
    let (a, b, c) = m.abc();
    let u = a * x + b * y + c * z;
    let v = c * x + a * y + b * z;
    let w = b * x + c * y + a * z;
    u * v * w - 2.0 * (3.0 * m.theta).cos() * x * y * z - u * y * z - v * z * x - w * x * y
}

fn quad(m: &[[f64; 3]; 3], v: [f64; 3]) -> f64 {
    (0..3)
        .map(|i| (0..3).map(|j| v[i] * m[i][j] * v[j]).sum::<f64>())
        .sum()
}

/// Gradient of F evaluated through the three quadratic forms.
pub fn f_gradient(m: &MapParams, x: f64, y: f64, z: f64) -> (f64, f64, f64) {
    let mats = PqrsCoefficients::new(m).gradient_matrices();
    let v = [x, y, z];
    (quad(&mats[0], v), quad(&mats[1], v), quad(&mats[2], v))
}

/// Central finite-difference gradient of F, used as an independent check.
pub fn f_gradient_numeric(m: &MapParams, x: f64, y: f64, z: f64, h: f64) -> (f64, f64, f64) {
    let d = |dx: f64, dy: f64, dz: f64| {
        (f_unchecked(m, x + dx, y + dy, z + dz) - f_unchecked(m, x - dx, y - dy, z - dz)) / (2.0 * h)
    };
    (d(h, 0.0, 0.0), d(0.0, h, 0.0), d(0.0, 0.0, h))
}

/// (P−S)² · [(a+b+c)³ − 3(a+b+c) − 2cos 3θ], cross-checked against the direct
/// 3x3 determinant of the quadratic form matrix.
pub fn quadratic_form_determinant(m: &MapParams) -> Result<f64> {
    let k = PqrsCoefficients::new(m);
    let sum = m.sum();
    let closed = (k.p - k.s).powi(2) * (sum.powi(3) - 3.0 * sum - 2.0 * (3.0 * m.theta).cos());
    let qm = k.quadratic_form_matrix();
    let direct = determinant(&ComplexMatrix::from_fn(3, 3, |i, j| C64::new(qm[i][j], 0.0)))?.re;
    let scale = qm
        .iter()
        .flatten()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .powi(3)
        .max(1.0);
    if (closed - direct).abs() > 1e-9 * scale {
        return Err(Error::ConstraintViolated(format!(
            "quadratic form determinant {direct} disagrees with factorization {closed}"
        )));
    }
    Ok(closed)
}

/// Tri-state verdict of the numerical oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleStatus {
    BlockPositive,
    Inconclusive,
    CertifiedNegative,
}

impl OracleStatus {
    pub fn from_min(min_value: f64) -> Self {
        if min_value < CERTIFIED_NEGATIVE {
            Self::CertifiedNegative
        } else if min_value >= CERTIFIED_NONNEGATIVE {
            Self::BlockPositive
        } else {
            Self::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPositivityReport {
    pub min_value: f64,
    pub argmin_xi: Vec<C64>,
    pub argmin_eta: Vec<C64>,
    pub grid_points: usize,
    pub refined: bool,
    pub status: OracleStatus,
}

/// The map Φ_W determined by a 9x9 Choi matrix, stored for fast evaluation of
/// Φ_W(ξξ*).
#[derive(Clone)]
pub struct ChoiMap {
    w: [[C64; 9]; 9],
}

impl ChoiMap {
    pub fn new(w: &ComplexMatrix) -> Result<Self> {
        if w.rows() != 9 || w.cols() != 9 {
            return Err(Error::DimensionMismatch {
                expected: "9x9".into(),
                got: format!("{}x{}", w.rows(), w.cols()),
            });
        }
        let residual = w.hermitian_residual();
        if residual > 1e-10 * w.max_abs().max(1.0) {
            return Err(Error::NonHermitian { residual });
        }
        Ok(Self {
            w: std::array::from_fn(|r| std::array::from_fn(|s| w[(r, s)])),
        })
    }

    /// Φ_W(ξξ*), entry (j,l) = Σ ξ_i conj(ξ_k) W[(i,j),(k,l)].
    pub fn image(&self, xi: &[C64; 3]) -> Mat3 {
        let mut out = [[ZERO; 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                let coef = xi[i] * xi[k].conj();
                let row = &self.w;
                for j in 0..3 {
                    for l in 0..3 {
                        out[j][l] += coef * row[3 * i + j][3 * k + l];
                    }
                }
            }
        }
        for (j, row) in out.iter_mut().enumerate() {
            row[j] = C64::new(row[j].re, 0.0);
        }
        out
    }

    pub fn min_eigenvalue_at(&self, xi: &[C64; 3]) -> f64 {
        herm3_eigen(&self.image(xi)).0[0]
    }
}

/// Unit vector (cos φ1, sin φ1 cos φ2 e^{iψ1}, sin φ1 sin φ2 e^{iψ2}).
pub fn xi_from_angles(x: &[f64]) -> [C64; 3] {
    let (phi1, phi2, psi1, psi2) = (x[0], x[1], x[2], x[3]);
    [
        C64::new(phi1.cos(), 0.0),
        C64::from_polar(phi1.sin() * phi2.cos(), psi1),
        C64::from_polar(phi1.sin() * phi2.sin(), psi2),
    ]
}

/// Lattice of angle quadruples: φ on [0, π/2] including both ends, ψ on [0, 2π).
pub fn angle_grid_point(grid_n: usize, index: usize) -> [f64; 4] {
    let n = grid_n;
    let phi_step = if n > 1 { FRAC_PI_2 / (n - 1) as f64 } else { 0.0 };
    let phi0 = if n > 1 { 0.0 } else { FRAC_PI_2 / 2.0 };
    let psi_step = 2.0 * PI / n as f64;
    let i4 = index % n;
    let i3 = (index / n) % n;
    let i2 = (index / (n * n)) % n;
    let i1 = index / (n * n * n);
    [
        phi0 + i1 as f64 * phi_step,
        phi0 + i2 as f64 * phi_step,
        i3 as f64 * psi_step,
        i4 as f64 * psi_step,
    ]
}

/// Indices of the `k` smallest values, ties broken by index.
pub fn best_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    order.truncate(k);
    order
}

/// Minimizes λ_min(Φ_W(ξξ*)) over unit ξ by a 4-parameter grid with
/// Nelder–Mead refinement of the best cells. Deterministic regardless of thread
/// scheduling.
pub fn block_positivity_oracle(
    w: &ComplexMatrix,
    grid_n: usize,
    refine_steps: usize,
) -> Result<BlockPositivityReport> {
    if grid_n == 0 {
        return Err(Error::InvalidParams("grid_n must be positive".into()));
    }
    let map = ChoiMap::new(w)?;
    let total = grid_n.pow(4);
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| map.min_eigenvalue_at(&xi_from_angles(&angle_grid_point(grid_n, idx))))
        .collect();
    let starts = best_indices(&values, REFINE_STARTS);
    let mut best_x = angle_grid_point(grid_n, starts[0]).to_vec();
    let mut best_v = values[starts[0]];

    let refined = refine_steps > 0;
    if refined {
        let step = 0.5 * FRAC_PI_2 / (grid_n.max(2) - 1) as f64;
        let results: Vec<nelder_mead::Minimum> = starts
            .par_iter()
            .map(|&idx| {
                nelder_mead::minimize(
                    |x| map.min_eigenvalue_at(&xi_from_angles(x)),
                    &angle_grid_point(grid_n, idx),
                    step,
                    refine_steps,
                    1e-15,
                )
            })
            .collect();
        for m in results {
            if m.value < best_v {
                best_v = m.value;
                best_x = m.x;
            }
        }
    }

    let xi = xi_from_angles(&best_x);
    let (vals, vecs) = herm3_eigen(&map.image(&xi));
    let eta: Vec<C64> = vecs[0].iter().map(|z| z.conj()).collect();
    let min_value = vals[0];
    Ok(BlockPositivityReport {
        min_value,
        argmin_xi: xi.to_vec(),
        argmin_eta: eta,
        grid_points: total,
        refined,
        status: OracleStatus::from_min(min_value),
    })
}

/// Result of the indecomposability test against a PPT state of the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndecomposabilityCertificate {
    pub state: MapParams,
    pub value: f64,
    pub closed_form: f64,
    pub state_min_eigenvalue: f64,
    pub state_pt_min_eigenvalue: f64,
    /// True when the pairing is negative, so the map is indecomposable.
    pub certifies: bool,
}

/// Pairs the map with the PPT state W[p_{π−θ}, √(c/b), √(b/c); π−θ].
pub fn indecomposability_certificate(m: &MapParams) -> Result<IndecomposabilityCertificate> {
    let (a, b, c) = m.abc();
    if !(b > 0.0 && c > 0.0) {
        return Err(Error::NotApplicable("requires b > 0 and c > 0".into()));
    }
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::NotApplicable(format!("requires 0 <= a <= 1, got a = {a}")));
    }
    if (b * c - (1.0 - a).powi(2)).abs() > 1e-9 {
        return Err(Error::NotApplicable("requires bc = (1-a)^2".into()));
    }
    let t = (c / b).sqrt();
    let phi = PI - m.theta;
    let state = MapParams::new(p_theta(phi), t, 1.0 / t, phi)?;
    let w = choi_matrix(&state);
    let state_min_eigenvalue = hermitian_eigenvalues(&w)?[0];
    let state_pt_min_eigenvalue = hermitian_eigenvalues(&partial_transpose(&w)?)?[0];
    if state_min_eigenvalue < CERTIFIED_NONNEGATIVE || state_pt_min_eigenvalue < CERTIFIED_NONNEGATIVE {
        return Err(Error::ConstraintViolated(
            "certificate state is not PPT".into(),
        ));
    }
    let value = pairing(&w, m)?.value;
    let closed_form = 3.0 * a * (p_theta(phi) - 2.0);
    Ok(IndecomposabilityCertificate {
        state,
        value,
        closed_form,
        state_min_eigenvalue,
        state_pt_min_eigenvalue,
        certifies: value < -1e-12,
    })
}
