//! Optimality and co-optimality of the maps in the family.
//!
//! A positive map with Choi matrix W is optimal when no nonzero rank-one
//! completely positive part vv* can be subtracted keeping W block-positive.
//! Only directions v orthogonal (bilinearly) to every zero product vector can
//! be subtracted, so the tests work inside that orthocomplement:
//!
//! * an exact polynomial argument along explicit product-vector curves at the
//!   two vertices v_1b0 and v_10c;
//! * a numerical probe computing the largest subtractable multiple of vv*,
//!   inf over ξ of det A / (u* adj(A) u) with A = Φ_W(ξξ*) and u = Vᵗξ;
//! * an explicit CCP subtraction on the face f_abc.
//!
//! Co-optimality is optimality of W^Γ against partially conjugated zeros.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faces::{classify_face, FaceKind, FaceLabel, PropertyRow, DEFAULT_FACE_TOL};
use crate::family::{choi_matrix, p_theta, require_supported_theta, MapParams};
use crate::linalg::{
    adj3, det3, determinant, herm3_eigen, Mat3, hermitian_eigen, kron_vec, numeric_rank, partial_transpose,
    psd_null_space, vec_norm, ComplexMatrix, Tolerances, C64, ONE, ZERO,
};
use crate::nelder_mead;
use crate::positivity::{
    angle_grid_point, best_indices, block_positivity_oracle, is_positive, xi_from_angles, ChoiMap,
    CERTIFIED_NONNEGATIVE,
};
use crate::spanning::{
    has_cospanning_property, has_spanning_property, zero_product_vectors, ProductVector,
    SpanningEvidence,
};

pub const DEFAULT_DIRECTIONS: usize = 64;
pub const DEFAULT_P_MAX: f64 = 10.0;
/// Above this the probe reports a subtractable direction.
pub const SUBTRACTABLE: f64 = 1e-6;
/// At or below this every probed direction counts as non-subtractable.
pub const NOT_SUBTRACTABLE: f64 = 1e-9;

const NULL_REL: f64 = 1e-10;
const PROBE_GRID_N: usize = 8;
const PROBE_STARTS: usize = 6;
const PROBE_STEPS: usize = 200;
const PROBE_LEVELS: usize = 10;
const TIGHTNESS_GRID_N: usize = 12;
const RANK_REL: f64 = 1e-12;
const EIGEN_FLOOR: f64 = 1e-14;

/// Basis of {v : vᵗz = 0 for every z} for the given vectors z.
pub fn bilinear_orthocomplement(vectors: &[Vec<C64>]) -> Result<Vec<Vec<C64>>> {
    if vectors.is_empty() {
        return Ok((0..9)
            .map(|k| {
                let mut v = vec![ZERO; 9];
                v[k] = ONE;
                v
            })
            .collect());
    }
    let mut g = ComplexMatrix::zeros(9, 9);
    for z in vectors {
        let zb: Vec<C64> = z.iter().map(|x| x.conj()).collect();
        g = &g + &ComplexMatrix::outer(&zb, &zb);
    }
    psd_null_space(&g, NULL_REL)
}

/// Orthocomplement of the known zero product vectors of the map.
pub fn orthocomplement_basis(p: &MapParams) -> Result<Vec<Vec<C64>>> {
    let zeros: Vec<Vec<C64>> = zero_product_vectors(p)?.iter().map(ProductVector::tensor).collect();
    bilinear_orthocomplement(&zeros)
}

/// Orthocomplement of the partially conjugated zero product vectors.
pub fn co_orthocomplement_basis(p: &MapParams) -> Result<Vec<Vec<C64>>> {
    let zeros: Vec<Vec<C64>> = zero_product_vectors(p)?
        .iter()
        .map(|v| v.partial_conjugate().tensor())
        .collect();
    bilinear_orthocomplement(&zeros)
}

/// True when every basis vector is supported on the slots (1,1),(2,2),(3,3)
/// with coordinates summing to zero.
pub fn is_diagonal_sum_zero(basis: &[Vec<C64>], tol: f64) -> bool {
    basis.iter().all(|v| {
        let off: f64 = v
            .iter()
            .enumerate()
            .filter(|(k, _)| ![0, 4, 8].contains(k))
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        off <= tol && (v[0] + v[4] + v[8]).norm() <= tol
    })
}

/// n with n₁ = 1 and n₁v₁ + n₂v₂ + n₃v₃ = 0 on the diagonal slots of a
/// two-dimensional diagonal orthocomplement; (1,1,1) when |θ| < π/3.
fn diagonal_normal(basis: &[Vec<C64>]) -> [C64; 3] {
    let (x, y) = (&basis[0], &basis[1]);
    let (x, y) = ([x[0], x[4], x[8]], [y[0], y[4], y[8]]);
    let n = [
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[0] * y[1] - x[1] * y[0],
    ];
    let k = n.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).copied().unwrap_or(ONE);
    let n0 = if n[0].norm() > 1e-9 * k.norm() { n[0] } else { k };
    n.map(|z| z / n0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexSide {
    /// Φ[1, p_θ−1, 0; θ].
    BSide,
    /// Φ[1, 0, p_θ−1; θ].
    CSide,
}

impl VertexSide {
    pub fn params(self, theta: f64) -> Result<MapParams> {
        let q = p_theta(theta) - 1.0;
        match self {
            VertexSide::BSide => MapParams::new(1.0, q, 0.0, theta),
            VertexSide::CSide => MapParams::new(1.0, 0.0, q, theta),
        }
    }
}

/// A curve s ↦ ξ(s)⊗η(s) with polynomial factors, ξ(s) = Σ s^k ξ_k.
#[derive(Debug, Clone)]
pub struct ProductCurve {
    pub xi: Vec<[C64; 3]>,
    pub eta: Vec<[C64; 3]>,
}

impl ProductCurve {
    /// Coefficients of s^k in ξ(s)⊗η(s).
    pub fn tensor_coefficients(&self) -> Vec<Vec<C64>> {
        let n = self.xi.len() + self.eta.len() - 1;
        let mut out = vec![vec![ZERO; 9]; n];
        for (j, x) in self.xi.iter().enumerate() {
            for (k, y) in self.eta.iter().enumerate() {
                for (acc, z) in out[j + k].iter_mut().zip(kron_vec(x, y)) {
                    *acc += z;
                }
            }
        }
        out
    }
}

/// Test curves at the vertex: z(s) and w(s) with s = √t.
pub fn vertex_test_curves(theta: f64, side: VertexSide) -> [ProductCurve; 2] {
    let e = C64::from_polar(1.0, -theta);
    let ec = e.conj();
    let o = ZERO;
    match side {
        VertexSide::BSide => [
            ProductCurve {
                xi: vec![[o, o, o], [e, o, o], [o, ONE, o]],
                eta: vec![[o, ONE, o], [ONE, o, o]],
            },
            ProductCurve {
                xi: vec![[o, o, o], [o, e, o], [o, o, ONE]],
                eta: vec![[o, o, ONE], [o, ONE, o]],
            },
        ],
        VertexSide::CSide => [
            ProductCurve {
                xi: vec![[o, o, o], [o, ec, o], [ONE, o, o]],
                eta: vec![[ONE, o, o], [o, ONE, o]],
            },
            ProductCurve {
                xi: vec![[o, o, o], [o, o, ec], [o, ONE, o]],
                eta: vec![[o, ONE, o], [o, o, ONE]],
            },
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexOptimality {
    pub theta: f64,
    pub side: VertexSide,
    pub optimal: bool,
    pub orthocomplement_dim: usize,
    /// Lowest power of s in ⟨z(s)z(s)*, W⟩ for each test curve.
    pub leading_orders: Vec<usize>,
    pub leading_coefficients: Vec<f64>,
    pub constraint_count: usize,
    /// Rank of the forced linear constraints restricted to the orthocomplement.
    pub constraint_rank: usize,
    /// |det| of the forced constraints in the coordinates (ξ, η, ζ) of the
    /// diagonal direction, together with the linear relation cutting out the
/// orthocomplement (ξ+η+ζ = 0 when |θ| < π/3).
    pub constraint_determinant: f64,
}

/// Decides optimality of the vertex maps through the test curves: on every
/// curve the pairing with W vanishes to order m, so any subtractable direction
/// must annihilate the coefficients of s^k with 2k < m.
pub fn vertex_optimality_analytic(theta: f64, side: VertexSide) -> Result<VertexOptimality> {
    require_supported_theta(theta)?;
    if theta.abs() >= PI / 3.0 {
        return Err(Error::UnsupportedTheta {
            p_theta: p_theta(theta),
        });
    }
    let params = side.params(theta)?;
    let w = choi_matrix(&params);
    let basis = orthocomplement_basis(&params)?;

    let mut constraints: Vec<Vec<C64>> = Vec::new();
    let mut leading_orders = Vec::new();
    let mut leading_coefficients = Vec::new();
    for curve in vertex_test_curves(theta, side) {
        let coeffs = curve.tensor_coefficients();
        let n = coeffs.len();
        let mut g = vec![0.0; 2 * n - 1];
        for (j, zj) in coeffs.iter().enumerate() {
            for (k, zk) in coeffs.iter().enumerate() {
                let wz = w.mul_vec(&zk.iter().map(|x| x.conj()).collect::<Vec<_>>());
                g[j + k] += zj.iter().zip(&wz).map(|(a, b)| a * b).sum::<C64>().re;
            }
        }
        let m0 = g
            .iter()
            .position(|v| v.abs() > 1e-12)
            .ok_or_else(|| Error::ConstraintViolated("pairing vanishes along the test curve".into()))?;
        if g[m0] < 0.0 {
            return Err(Error::NotPositiveMap);
        }
        leading_orders.push(m0);
        leading_coefficients.push(g[m0]);
        for (k, zk) in coeffs.iter().enumerate() {
            if 2 * k < m0 && vec_norm(zk) > 0.0 {
                constraints.push(zk.clone());
            }
        }
    }

    let d = basis.len();
    let constraint_rank = if d == 0 || constraints.is_empty() {
        0
    } else {
        let m = ComplexMatrix::from_fn(constraints.len(), d, |r, c| {
            constraints[r].iter().zip(&basis[c]).map(|(x, y)| x * y).sum()
        });
        numeric_rank(&m, &Tolerances::default())
    };
    let diagonal: Vec<[C64; 3]> = constraints
        .iter()
        .map(|r| [r[0], r[4], r[8]])
        .filter(|r| r.iter().any(|z| z.norm() > 0.0))
        .collect();
    let constraint_determinant = if diagonal.len() == 2 && d == 2 {
        let rows = [diagonal[0], diagonal[1], diagonal_normal(&basis)];
        determinant(&ComplexMatrix::from_fn(3, 3, |i, j| rows[i][j]))?.norm()
    } else {
        0.0
    };
    Ok(VertexOptimality {
        theta,
        side,
        optimal: d == 0 || constraint_rank == d,
        orthocomplement_dim: d,
        leading_orders,
        leading_coefficients,
        constraint_count: constraints.len(),
        constraint_rank,
        constraint_determinant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    Optimal,
    NotOptimal,
    Inconclusive,
}

/// Oracle minima of W − q·vv* at q = p*/2 and q = 2p* for the best direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightnessCheck {
    pub half_min: f64,
    pub double_min: f64,
}

impl TightnessCheck {
    pub fn holds(&self) -> bool {
        self.half_min >= CERTIFIED_NONNEGATIVE && self.double_min < CERTIFIED_NONNEGATIVE
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityProbeReport {
    pub direction_count: usize,
    pub orthocomplement_dim: usize,
    /// Largest q found with W − q·vv* block-positive, over probed unit v.
    pub max_subtractable: f64,
    pub verdict: ProbeVerdict,
    pub witness_direction: Option<Vec<C64>>,
    pub tightness: Option<TightnessCheck>,
}

fn permanent_abs3(a: &Mat3) -> f64 {
    let m = |i: usize, j: usize| a[i][j].norm();
    m(0, 0) * (m(1, 1) * m(2, 2) + m(1, 2) * m(2, 1))
        + m(0, 1) * (m(1, 0) * m(2, 2) + m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) + m(1, 1) * m(2, 0))
}

/// Largest q with ⟨zz*, W − q vv*⟩ ≥ 0 on product vectors z = ξ⊗η at fixed ξ:
/// 1 / (u* A⁺ u) with A = Φ_W(ξξ*), u_j = Σ_i v_{(i,j)} ξ_i, and ~0 when u leaves
/// the range of A. Well-conditioned A uses det A / (u* adj(A) u).
fn subtractable_at(map: &ChoiMap, v: &[C64], xi: &[C64; 3]) -> f64 {
    let a = map.image(xi);
    let u: [C64; 3] = std::array::from_fn(|j| (0..3).map(|i| v[3 * i + j] * xi[i]).sum());
    let unorm2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    if unorm2 <= 1e-300 {
        return f64::INFINITY;
    }
    let tr = (0..3).map(|k| a[k][k].re).sum::<f64>().max(1e-300);
    let det = det3(&a).re;
    // rounding in det A scales with the Leibniz terms, not with tr³
    if det > RANK_REL * permanent_abs3(&a) {
        let adj = adj3(&a);
        let mut q = ZERO;
        for j in 0..3 {
            for l in 0..3 {
                q += u[j].conj() * adj[j][l] * u[l];
            }
        }
        return if q.re > 0.0 { det / q.re } else { f64::INFINITY };
    }
    // eigenvalues floored at the noise level: a genuine kernel direction with
    // u-component c contributes |c|²/floor, forcing the ratio to ~0
    let (values, vectors) = herm3_eigen(&a);
    let floor = EIGEN_FLOOR * tr;
    let inv: f64 = values
        .iter()
        .zip(&vectors)
        .map(|(lam, e)| {
            let c: C64 = e.iter().zip(&u).map(|(x, y)| x.conj() * y).sum();
            c.norm_sqr() / lam.max(floor)
        })
        .sum();
    if inv > 0.0 {
        1.0 / inv
    } else {
        f64::INFINITY
    }
}

fn min_subtractable(map: &ChoiMap, v: &[C64], p_max: f64) -> (f64, [C64; 3]) {
    let f = |x: &[f64]| subtractable_at(map, v, &xi_from_angles(x));
    let total = PROBE_GRID_N.pow(4);
    let values: Vec<f64> = (0..total).map(|idx| f(&angle_grid_point(PROBE_GRID_N, idx))).collect();
    let starts = best_indices(&values, PROBE_STARTS);
    let mut best = (values[starts[0]], angle_grid_point(PROBE_GRID_N, starts[0]).to_vec());
    let step = 0.5 * FRAC_PI_2 / (PROBE_GRID_N - 1) as f64;
    'starts: for idx in starts {
        let mut x = angle_grid_point(PROBE_GRID_N, idx).to_vec();
        let mut fx = values[idx];
        let mut s = step;
        // shrinking restarts follow minimizing curves into the corners of the
        // angle box, where the infimum is often only approached in the limit
        for _ in 0..PROBE_LEVELS {
            let m = nelder_mead::minimize(f, &x, s, PROBE_STEPS, 1e-15 * fx.abs());
            if m.value < fx {
                fx = m.value;
                x = m.x;
            }
            if fx < best.0 {
                best = (fx, x.clone());
            }
            if best.0 <= 0.1 * NOT_SUBTRACTABLE {
                break 'starts;
            }
            s *= 0.25;
        }
    }
    (best.0.min(p_max).max(0.0), xi_from_angles(&best.1))
}

/// Deterministic quasi-random numbers in [0, 1).
fn radical_inverse(mut n: usize, base: usize) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while n > 0 {
        out += (n % base) as f64 * inv;
        n /= base;
        inv /= base as f64;
    }
    out
}

const PRIMES: [usize; 18] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61];

fn normalized(v: Vec<C64>) -> Option<Vec<C64>> {
    let n = vec_norm(&v);
    (n > 1e-8).then(|| v.into_iter().map(|z| z / n).collect())
}

/// Candidate directions: the basis itself, projections of the eigenvectors of
/// W onto the orthocomplement, then a low-discrepancy sweep of its unit sphere.
fn candidate_directions(w: &ComplexMatrix, basis: &[Vec<C64>], n: usize) -> Result<Vec<Vec<C64>>> {
    let mut out: Vec<Vec<C64>> = basis.to_vec();
    let project = |x: &[C64]| -> Vec<C64> {
        let mut acc = vec![ZERO; 9];
        for b in basis {
            let c: C64 = b.iter().zip(x).map(|(p, q)| p.conj() * q).sum();
            for (a, bk) in acc.iter_mut().zip(b) {
                *a += c * bk;
            }
        }
        acc
    };
    let eig = hermitian_eigen(w)?;
    for k in (0..9).rev() {
        if let Some(v) = normalized(project(&eig.vector(k))) {
            out.push(v);
        }
    }
    let d = basis.len();
    let mut idx = 1;
    while out.len() < n && d > 0 {
        let coeffs: Vec<C64> = (0..d)
            .map(|j| {
                C64::new(
                    2.0 * radical_inverse(idx, PRIMES[(2 * j) % 18]) - 1.0,
                    2.0 * radical_inverse(idx, PRIMES[(2 * j + 1) % 18]) - 1.0,
                )
            })
            .collect();
        let mut v = vec![ZERO; 9];
        for (c, b) in coeffs.iter().zip(basis) {
            for (a, bk) in v.iter_mut().zip(b) {
                *a += c * bk;
            }
        }
        if let Some(v) = normalized(v) {
            out.push(v);
        }
        idx += 1;
    }
    out.truncate(n.max(1));
    Ok(out)
}

/// Probes how much of vv* can be subtracted from W for directions v in the
/// bilinear orthocomplement of `zeros`.
pub fn probe_matrix(
    w: &ComplexMatrix,
    zeros: &[Vec<C64>],
    n_directions: usize,
    p_max: f64,
) -> Result<OptimalityProbeReport> {
    let map = ChoiMap::new(w)?;
    let basis = bilinear_orthocomplement(zeros)?;
    if basis.is_empty() {
        return Ok(OptimalityProbeReport {
            direction_count: 0,
            orthocomplement_dim: 0,
            max_subtractable: 0.0,
            verdict: ProbeVerdict::Optimal,
            witness_direction: None,
            tightness: None,
        });
    }
    let directions = candidate_directions(w, &basis, n_directions)?;
    let results: Vec<(f64, [C64; 3])> = directions
        .par_iter()
        .map(|v| min_subtractable(&map, v, p_max))
        .collect();
    let (best_k, best) = results
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, r)| if r.0 > acc.1 { (k, r.0) } else { acc });

    let mut verdict = if best > SUBTRACTABLE {
        ProbeVerdict::NotOptimal
    } else if best <= NOT_SUBTRACTABLE {
        ProbeVerdict::Optimal
    } else {
        ProbeVerdict::Inconclusive
    };
    let mut tightness = None;
    if verdict == ProbeVerdict::NotOptimal {
        let v = &directions[best_k];
        let vv = ComplexMatrix::outer(v, v);
        let oracle = |q: f64| -> Result<f64> {
            Ok(block_positivity_oracle(&(w - &vv.scale_real(q)), TIGHTNESS_GRID_N, 200)?.min_value)
        };
        let check = TightnessCheck {
            half_min: oracle(0.5 * best)?,
            double_min: if best < p_max { oracle(2.0 * best)? } else { f64::NEG_INFINITY },
        };
        if check.half_min < CERTIFIED_NONNEGATIVE {
            verdict = ProbeVerdict::Inconclusive;
        }
        tightness = Some(check);
    }
    Ok(OptimalityProbeReport {
        direction_count: directions.len(),
        orthocomplement_dim: basis.len(),
        max_subtractable: best,
        verdict,
        witness_direction: (verdict == ProbeVerdict::NotOptimal).then(|| directions[best_k].clone()),
        tightness,
    })
}

fn require_positive(p: &MapParams) -> Result<()> {
    if is_positive(p) {
        Ok(())
    } else {
        Err(Error::NotPositiveMap)
    }
}

/// Numerical optimality probe: can a completely positive rank-one part be
/// subtracted?
pub fn optimality_probe(p: &MapParams, n_directions: usize, p_max: f64) -> Result<OptimalityProbeReport> {
    require_positive(p)?;
    let zeros: Vec<Vec<C64>> = zero_product_vectors(p)?.iter().map(ProductVector::tensor).collect();
    probe_matrix(&choi_matrix(p), &zeros, n_directions, p_max)
}

/// Numerical co-optimality probe: can a completely copositive rank-one part be
/// subtracted? Runs the optimality probe on W^Γ with partially conjugated zeros.
pub fn cooptimality_probe(p: &MapParams, n_directions: usize, p_max: f64) -> Result<OptimalityProbeReport> {
    require_positive(p)?;
    let zeros: Vec<Vec<C64>> = zero_product_vectors(p)?
        .iter()
        .map(|v| v.partial_conjugate().tensor())
        .collect();
    probe_matrix(&partial_transpose(&choi_matrix(p))?, &zeros, n_directions, p_max)
}

/// W[1,b,c;θ] − q·W[0,1,1;0] rewritten inside the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooptimalitySubtraction {
    pub t0: f64,
    pub p_value: f64,
    pub new_params: MapParams,
    pub theta_prime: f64,
    pub identity_residual: f64,
    pub sum_identity_residual: f64,
    pub new_params_positive: bool,
}

/// The positive t0 with arg(e^{iθ} − t0) = ±π/3.
pub fn subtraction_budget(theta: f64) -> f64 {
    theta.cos() - theta.sin().abs() / 3f64.sqrt()
}

/// Subtracts a multiple of the CCP matrix W[0,1,1;0] from an interior point
/// Φ[1,b,c;θ] of f_abc and shows the result is still positive.
pub fn cooptimality_subtraction(m: &MapParams) -> Result<CooptimalitySubtraction> {
    let pt = p_theta(m.theta);
    let (a, b, c) = m.abc();
    if (a - 1.0).abs() > 1e-9 || (b + c - (pt - 1.0)).abs() > 1e-9 || b <= 0.0 || c <= 0.0 {
        return Err(Error::UnsupportedCase(
            "requires a = 1, b + c = p_theta - 1 and b, c > 0".into(),
        ));
    }
    if m.theta == 0.0 || m.theta.abs() >= PI / 3.0 {
        return Err(Error::UnsupportedCase("requires 0 < |theta| < pi/3".into()));
    }
    let t0 = subtraction_budget(m.theta);
    let q = 0.5 * t0.min(b).min(c);
    let z = C64::from_polar(1.0, m.theta) - q;
    let r = z.norm();
    let theta_prime = z.arg();
    let new_params = MapParams::new(1.0 / r, (b - q) / r, (c - q) / r, theta_prime)?;

    let lhs = &choi_matrix(m) - &choi_matrix(&MapParams::new(0.0, 1.0, 1.0, 0.0)?).scale_real(q);
    let rhs = choi_matrix(&new_params).scale_real(r);
    let identity_residual = lhs.max_abs_diff(&rhs);
    let sum_identity_residual = ((1.0 + b + c - 2.0 * q) / r - p_theta(theta_prime)).abs();
    if identity_residual > 1e-10 || sum_identity_residual > 1e-10 {
        return Err(Error::ConstraintViolated(format!(
            "subtraction identity residuals {identity_residual:.3e}, {sum_identity_residual:.3e}"
        )));
    }
    Ok(CooptimalitySubtraction {
        t0,
        p_value: q,
        new_params,
        theta_prime,
        identity_residual,
        sum_identity_residual,
        new_params_positive: is_positive(&new_params),
    })
}

/// Which argument established a flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagSource {
    Spanning,
    CoSpanning,
    VertexAnalytic,
    Subtraction,
    Probe,
    CoProbe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityEvidence {
    pub spanning: SpanningEvidence,
    pub co_spanning: SpanningEvidence,
    pub optimal_source: FlagSource,
    pub co_optimal_source: FlagSource,
    pub vertex: Option<VertexOptimality>,
    pub probe: Option<OptimalityProbeReport>,
    pub co_probe: Option<OptimalityProbeReport>,
    pub subtraction: Option<CooptimalitySubtraction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityClassification {
    pub face: FaceLabel,
    pub row: PropertyRow,
    pub evidence: OptimalityEvidence,
}

fn probe_flag(report: &OptimalityProbeReport) -> bool {
    report.verdict == ProbeVerdict::Optimal
}

/// Spanning, co-spanning, optimality and co-optimality flags of a positive map,
/// each backed by its own argument.
pub fn classify_optimality(p: &MapParams) -> Result<OptimalityClassification> {
    require_supported_theta(p.theta)?;
    require_positive(p)?;
    let face = classify_face(p, DEFAULT_FACE_TOL)?;
    let spanning = has_spanning_property(p)?;
    let co_spanning = has_cospanning_property(p)?;

    let mut vertex = None;
    let mut probe = None;
    let (optimal, optimal_source) = if spanning.verdict {
        (true, FlagSource::Spanning)
    } else {
        let side = match face.kind {
            FaceKind::V1b0 => Some(VertexSide::BSide),
            FaceKind::V10c => Some(VertexSide::CSide),
            _ => None,
        };
        match side {
            Some(side) if p.theta.abs() < PI / 3.0 => {
                let v = vertex_optimality_analytic(p.theta, side)?;
                let flag = v.optimal;
                vertex = Some(v);
                (flag, FlagSource::VertexAnalytic)
            }
            _ => {
                let r = optimality_probe(p, DEFAULT_DIRECTIONS, DEFAULT_P_MAX)?;
                let flag = probe_flag(&r);
                probe = Some(r);
                (flag, FlagSource::Probe)
            }
        }
    };

    let mut subtraction = None;
    let mut co_probe = None;
    let (co_optimal, co_optimal_source) = if co_spanning.verdict {
        (true, FlagSource::CoSpanning)
    } else {
        match cooptimality_subtraction(p) {
            Ok(s) if s.new_params_positive => {
                subtraction = Some(s);
                (false, FlagSource::Subtraction)
            }
            _ => {
                let r = cooptimality_probe(p, DEFAULT_DIRECTIONS, DEFAULT_P_MAX)?;
                let flag = probe_flag(&r);
                co_probe = Some(r);
                (flag, FlagSource::CoProbe)
            }
        }
    };

    Ok(OptimalityClassification {
        face,
        row: PropertyRow::from_flags(spanning.verdict, co_spanning.verdict, optimal, co_optimal),
        evidence: OptimalityEvidence {
            spanning,
            co_spanning,
            optimal_source,
            co_optimal_source,
            vertex,
            probe,
            co_probe,
            subtraction,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faces::{boundary_parametrization, face_properties, face_representative};
    use crate::family::pairing_rank_one;
    use std::f64::consts::FRAC_PI_6;

    fn mp(a: f64, b: f64, c: f64, t: f64) -> MapParams {
        MapParams::new(a, b, c, t).unwrap()
    }

    #[test]
    fn vertex_orthocomplement_is_diagonal() {
        for side in [VertexSide::BSide, VertexSide::CSide] {
            let p = side.params(FRAC_PI_6).unwrap();
            let basis = orthocomplement_basis(&p).unwrap();
            assert_eq!(basis.len(), 2);
            assert!(is_diagonal_sum_zero(&basis, 1e-9));
        }
    }

    #[test]
    fn spanning_points_have_empty_orthocomplement() {
        for t in [0.3, 1.0, 4.0] {
            let (a, b, c) = boundary_parametrization(FRAC_PI_6, t).unwrap();
            assert!(orthocomplement_basis(&mp(a, b, c, FRAC_PI_6)).unwrap().is_empty());
        }
    }

    #[test]
    fn f_abc_orthocomplement_dimension() {
        let p = face_representative(FaceKind::FAbc, FRAC_PI_6, 0.5, 0.5).unwrap();
        let basis = orthocomplement_basis(&p).unwrap();
        let zeros = zero_product_vectors(&p).unwrap();
        let rank = crate::spanning::span_rank(&zeros).unwrap();
        assert_eq!(basis.len(), 9 - rank);
        assert!(!basis.is_empty());
    }

    #[test]
    fn test_curves_match_the_closed_pairing() {
        // ⟨z_t z_t*, W[1, p−1, 0; θ]⟩ = (p−1) t³
        let theta = FRAC_PI_6;
        let w = choi_matrix(&VertexSide::BSide.params(theta).unwrap());
        for t in [0.1f64, 0.7, 2.0] {
            let s = t.sqrt();
            for curve in vertex_test_curves(theta, VertexSide::BSide) {
                let z: Vec<C64> = curve
                    .tensor_coefficients()
                    .iter()
                    .enumerate()
                    .fold(vec![ZERO; 9], |acc, (k, zk)| {
                        acc.iter().zip(zk).map(|(a, b)| a + b * s.powi(k as i32)).collect()
                    });
                let v = pairing_rank_one(&z, &w);
                assert!((v - (p_theta(theta) - 1.0) * t.powi(3)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vertex_analytic_examples() {
        let v = vertex_optimality_analytic(FRAC_PI_6, VertexSide::BSide).unwrap();
        assert!(v.optimal);
        assert_eq!(v.leading_orders, vec![6, 6]);
        let expected = (2.0 * FRAC_PI_6.cos() - 1.0).abs();
        assert!((v.constraint_determinant - expected).abs() < 1e-12);

        assert!(vertex_optimality_analytic(PI / 4.0, VertexSide::CSide).unwrap().optimal);
        assert!(vertex_optimality_analytic(1e-3, VertexSide::BSide).unwrap().optimal);
        assert!(vertex_optimality_analytic(0.0, VertexSide::BSide).is_err());
        assert!(vertex_optimality_analytic(2.0, VertexSide::BSide).is_err());
    }

    #[test]
    fn probe_on_vertex_is_optimal() {
        let p = VertexSide::BSide.params(FRAC_PI_6).unwrap();
        let r = optimality_probe(&p, 16, 10.0).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Optimal, "{r:?}");
    }

    #[test]
    fn vertex_analytic_agrees_with_probe() {
        for theta in [PI / 12.0, -PI / 12.0, FRAC_PI_6, -FRAC_PI_6, PI / 4.0, -PI / 4.0] {
            for side in [VertexSide::BSide, VertexSide::CSide] {
                let analytic = vertex_optimality_analytic(theta, side).unwrap();
                let probe = optimality_probe(&side.params(theta).unwrap(), 8, DEFAULT_P_MAX).unwrap();
                assert!(analytic.optimal);
                assert_eq!(probe.verdict, ProbeVerdict::Optimal, "{theta} {side:?} {probe:?}");
            }
        }
    }

    #[test]
    fn vertex_probe_beyond_the_analytic_range() {
        for theta in [2.0, -2.5] {
            let probe = optimality_probe(&VertexSide::CSide.params(theta).unwrap(), 8, DEFAULT_P_MAX).unwrap();
            assert_eq!(probe.verdict, ProbeVerdict::Optimal);
        }
    }

    #[test]
    fn probe_on_f_ab_is_not_optimal() {
        let r = optimality_probe(&mp(1.5, 0.5, 0.0, FRAC_PI_6), 16, 10.0).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::NotOptimal, "{r:?}");
        assert!(r.tightness.unwrap().holds());
    }

    #[test]
    fn probe_on_cp_map_is_not_optimal() {
        let r = optimality_probe(&mp(2.0, 0.0, 0.0, FRAC_PI_6), 16, 10.0).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::NotOptimal);
        assert!(r.witness_direction.is_some());
    }

    #[test]
    fn subtraction_examples() {
        let h = (3f64.sqrt() - 1.0) / 2.0;
        let s = cooptimality_subtraction(&mp(1.0, h, h, FRAC_PI_6)).unwrap();
        assert!(s.p_value > 0.0);
        assert!(s.new_params_positive);
        assert!(s.theta_prime.abs() < PI / 3.0);
        assert!(s.identity_residual <= 1e-10);

        assert!(cooptimality_subtraction(&mp(0.5, 1.0, 0.25, FRAC_PI_6)).is_err());
    }

    #[test]
    fn small_subtraction_is_continuous() {
        let theta = -0.4;
        let pt = p_theta(theta);
        let m = mp(1.0, 0.3 * (pt - 1.0), 0.7 * (pt - 1.0), theta);
        let q = 1e-7;
        let z = C64::from_polar(1.0, theta) - q;
        let new = mp(1.0 / z.norm(), (m.b - q) / z.norm(), (m.c - q) / z.norm(), z.arg());
        assert!((new.a - m.a).abs() < 1e-6 && (new.b - m.b).abs() < 1e-6 && (new.theta - m.theta).abs() < 1e-6);
    }

    #[test]
    fn classification_examples() {
        let pt = p_theta(FRAC_PI_6);
        let c = classify_optimality(&mp(1.0, 0.0, pt - 1.0, FRAC_PI_6)).unwrap();
        assert!(c.row.optimal && !c.row.spanning);
        assert_eq!(c.evidence.optimal_source, FlagSource::VertexAnalytic);

        let e_t = face_representative(FaceKind::ET, FRAC_PI_6, 0.5, 0.5).unwrap();
        let c = classify_optimality(&e_t).unwrap();
        assert!(c.row.optimal && !c.row.co_optimal);
        assert_eq!(c.evidence.optimal_source, FlagSource::Spanning);

        let f_bc = face_representative(FaceKind::FBc, FRAC_PI_6, 0.5, 0.5).unwrap();
        let c = classify_optimality(&f_bc).unwrap();
        assert_eq!(c.row, face_properties(&c.face).unwrap());
    }
}
