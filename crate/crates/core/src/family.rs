//! The map family Φ[a,b,c;θ], its Choi matrices W[a,b,c;θ] and the bilinear
//! pairing between 9x9 matrices and maps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, Mat3, C64, ONE, ZERO};

const PAIRING_IMAG_TOL: f64 = 1e-10;

/// Parameters (a, b, c, θ) of one map; θ is kept in (−π, π].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub theta: f64,
}

impl MapParams {
    pub fn new(a: f64, b: f64, c: f64, theta: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("theta", theta)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} = {v} is not finite")));
            }
        }
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} = {v} is negative")));
            }
        }
        Ok(Self {
            a,
            b,
            c,
            theta: normalize_angle(theta),
        })
    }

    pub fn abc(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }

    pub fn sum(&self) -> f64 {
        self.a + self.b + self.c
    }

    pub fn p_theta(&self) -> f64 {
        p_theta(self.theta)
    }

    /// Diagonal of W in slot order 3(i−1)+j.
    pub fn choi_diagonal(&self) -> [f64; 9] {
        let (a, b, c) = self.abc();
        [a, c, b, b, a, c, c, b, a]
    }
}

/// Reduces an angle to (−π, π].
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// p_θ = max of 2cos φ over φ ∈ {θ − 2π/3, θ, θ + 2π/3}; always in [1, 2].
pub fn p_theta(theta: f64) -> f64 {
    let third = 2.0 * PI / 3.0;
    [theta - third, theta, theta + third]
        .iter()
        .map(|phi| 2.0 * phi.cos())
        .fold(f64::NEG_INFINITY, f64::max)
        .clamp(1.0, 2.0)
}

/// True when 1 < p_θ < 2, i.e. θ is not a multiple of π/3.
pub fn theta_is_supported(theta: f64) -> bool {
    let p = p_theta(theta);
    p > 1.0 + 1e-12 && p < 2.0 - 1e-12
}

pub fn require_supported_theta(theta: f64) -> Result<()> {
    if theta_is_supported(theta) {
        Ok(())
    } else {
        Err(Error::UnsupportedTheta {
            p_theta: p_theta(theta),
        })
    }
}

fn phase(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// Φ[a,b,c;θ](X).
pub fn apply_map(p: &MapParams, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if x.rows() != 3 || x.cols() != 3 {
        return Err(Error::DimensionMismatch {
            expected: "3x3".into(),
            got: format!("{}x{}", x.rows(), x.cols()),
        });
    }
    let m: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| x[(i, j)]));
    Ok(ComplexMatrix::from(&apply_map3(p, &m)))
}

pub fn apply_map3(p: &MapParams, x: &Mat3) -> Mat3 {
    let (a, b, c) = p.abc();
    let e = phase(p.theta);
    let ec = e.conj();
    let d = |i: usize| x[i][i];
    [
        [a * d(0) + b * d(1) + c * d(2), -e * x[0][1], -ec * x[0][2]],
        [-ec * x[1][0], c * d(0) + a * d(1) + b * d(2), -e * x[1][2]],
        [-e * x[2][0], -ec * x[2][1], b * d(0) + c * d(1) + a * d(2)],
    ]
}

/// Matrix unit e_ij in M_3.
pub fn unit3(i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(3, 3);
    m[(i, j)] = ONE;
    m
}

/// W[a,b,c;θ].
pub fn choi_matrix(p: &MapParams) -> ComplexMatrix {
    let d = p.choi_diagonal();
    let mut w = ComplexMatrix::from_real_diagonal(&d);
    let e = phase(p.theta);
    for (r, s) in [(0, 4), (4, 8), (8, 0)] {
        w[(r, s)] = -e;
        w[(s, r)] = -e.conj();
    }
    w
}

/// Σ e_ij ⊗ φ(e_ij) for an arbitrary linear map φ on M_3.
pub fn choi_of(map: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
    let mut w = ComplexMatrix::zeros(9, 9);
    for i in 0..3 {
        for j in 0..3 {
            let e = unit3(i, j);
            w = &w + &kron(&e, &map(&e));
        }
    }
    w
}

/// The map whose Choi matrix is `w`, applied to X:
/// Φ_W(X)_{jl} = Σ_{ik} X_ik W[(i,j),(k,l)].
pub fn apply_choi3(w: &ComplexMatrix, x: &Mat3) -> Mat3 {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            let xik = x[i][k];
            if xik == ZERO {
                continue;
            }
            for j in 0..3 {
                for l in 0..3 {
                    out[j][l] += xik * w[(3 * i + j, 3 * k + l)];
                }
            }
        }
    }
    out
}

/// P[a,θ]: diagonal a, −e^{iθ} at (1,2),(2,3),(3,1) and conjugates opposite.
pub fn p_matrix(a: f64, theta: f64) -> ComplexMatrix {
    let e = phase(theta);
    let mut m = ComplexMatrix::from_real_diagonal(&[a, a, a]);
    for (r, s) in [(0, 1), (1, 2), (2, 0)] {
        m[(r, s)] = -e;
        m[(s, r)] = -e.conj();
    }
    m
}

/// Real value of the bilinear pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingValue {
    pub value: f64,
}

/// ⟨A, C⟩ = Tr(A Cᵗ) = Σ A_ij C_ij for Hermitian A, C.
pub fn pairing_matrices(a: &ComplexMatrix, c: &ComplexMatrix) -> Result<PairingValue> {
    if a.rows() != c.rows() || a.cols() != c.cols() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", c.rows(), c.cols()),
            got: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    let scale = a.max_abs().max(c.max_abs()).max(1.0);
    for m in [a, c] {
        let residual = m.hermitian_residual();
        if residual > 1e-10 * scale {
            return Err(Error::NonHermitian { residual });
        }
    }
    let total: C64 = a.as_slice().iter().zip(c.as_slice()).map(|(x, y)| x * y).sum();
    let norm = a.frobenius_norm() * c.frobenius_norm();
    if total.im.abs() > PAIRING_IMAG_TOL * norm.max(1.0) {
        return Err(Error::NonHermitian {
            residual: total.im.abs(),
        });
    }
    Ok(PairingValue { value: total.re })
}

/// ⟨A, Φ[a,b,c;θ]⟩.
pub fn pairing(a: &ComplexMatrix, p: &MapParams) -> Result<PairingValue> {
    pairing_matrices(a, &choi_matrix(p))
}

/// ⟨zz*, W⟩ = Σ z_r conj(z_s) W_rs for a 9-vector z.
pub fn pairing_rank_one(z: &[C64], w: &ComplexMatrix) -> f64 {
    let mut total = ZERO;
    for r in 0..9 {
        for s in 0..9 {
            total += z[r] * z[s].conj() * w[(r, s)];
        }
    }
    total.re
}

/// W[a,b,c;θ] with a = 2cos θ, c = 1/b: the PPT edge state family.
pub fn edge_state_params(b: f64, theta: f64) -> Result<MapParams> {
    let t = normalize_angle(theta);
    if !(t != 0.0 && t.abs() < PI / 3.0) {
        return Err(Error::ThetaOutOfRange { theta });
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidParams(format!("b = {b} must be positive")));
    }
    MapParams::new(2.0 * t.cos(), b, 1.0 / b, t)
}

/// Unnormalized edge state W[2cos θ, b, 1/b; θ].
pub fn edge_state(b: f64, theta: f64) -> Result<ComplexMatrix> {
    Ok(choi_matrix(&edge_state_params(b, theta)?))
}

/// Trace-one density matrix of the edge state.
pub fn edge_state_density(b: f64, theta: f64) -> Result<ComplexMatrix> {
    let w = edge_state(b, theta)?;
    let tr = w.trace().re;
    Ok(w.scale_real(1.0 / tr))
}

/// V[ξ,η,ζ] = vv* with v = (ξ,0,0; 0,η,0; 0,0,ζ) and ξ+η+ζ = 0.
pub fn subtraction_generator(xi: C64, eta: C64, zeta: C64) -> Result<ComplexMatrix> {
    let s = xi + eta + zeta;
    if s.norm() > 1e-12 {
        return Err(Error::ConstraintViolated(format!(
            "xi + eta + zeta = {s} must vanish"
        )));
    }
    Ok(ComplexMatrix::outer(&diagonal_direction(xi, eta, zeta), &diagonal_direction(xi, eta, zeta)))
}

/// The 9-vector (ξ,0,0; 0,η,0; 0,0,ζ).
pub fn diagonal_direction(xi: C64, eta: C64, zeta: C64) -> Vec<C64> {
    let mut v = vec![ZERO; 9];
    v[0] = xi;
    v[4] = eta;
    v[8] = zeta;
    v
}

/// Closed form of ⟨W[a1,b1,c1;θ1], Φ[a2,b2,c2;θ2]⟩.
pub fn pairing_closed_form(p1: &MapParams, p2: &MapParams) -> f64 {
    3.0 * (p1.a * p2.a + p1.b * p2.b + p1.c * p2.c) + 6.0 * (p1.theta + p2.theta).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        determinant, hermitian_eigenvalues, kron_vec, numeric_rank, partial_transpose, Tolerances,
    };
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_6;

    fn mp(a: f64, b: f64, c: f64, t: f64) -> MapParams {
        MapParams::new(a, b, c, t).unwrap()
    }

    #[test]
    fn p_theta_corner_values() {
        assert!((p_theta(0.0) - 2.0).abs() < 1e-15);
        assert!((p_theta(PI / 3.0) - 1.0).abs() < 1e-12);
        assert!((p_theta(FRAC_PI_6) - 3f64.sqrt()).abs() < 1e-12);
        assert!((p_theta(2.0 * PI / 3.0) - 2.0).abs() < 1e-12);
        assert!((p_theta(PI) - 1.0).abs() < 1e-12);
        assert!(!theta_is_supported(PI / 3.0));
        assert!(!theta_is_supported(0.0));
        assert!(theta_is_supported(FRAC_PI_6));
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((normalize_angle(FRAC_PI_6) - FRAC_PI_6).abs() < 1e-16);
    }

    #[test]
    fn params_reject_bad_input() {
        assert!(MapParams::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(MapParams::new(f64::NAN, 0.0, 0.0, 0.0).is_err());
        assert!(MapParams::new(1.0, 1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn apply_map_examples() {
        let p = mp(0.3, 1.1, 2.0, 0.7);
        let out = apply_map(&p, &ComplexMatrix::identity(3)).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::identity(3).scale_real(p.sum())) < 1e-15);

        let out = apply_map(&mp(1.0, 1.0, 0.0, 0.0), &unit3(0, 1)).unwrap();
        assert!(out.max_abs_diff(&unit3(0, 1).scale_real(-1.0)) < 1e-15);

        let out = apply_map(&mp(1.0, 0.0, 1.0, FRAC_PI_6), &unit3(0, 0)).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn choi_examples() {
        let w = choi_matrix(&mp(1.0, 1.0, 0.0, 0.0));
        let diag: Vec<f64> = w.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
        for (r, s) in [(0, 4), (4, 8), (8, 0), (4, 0), (8, 4), (0, 8)] {
            assert!((w[(r, s)] + ONE).norm() < 1e-15);
        }
        let nonzero = w.as_slice().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 6 + 6);

        let w = choi_matrix(&mp(0.0, 0.0, 0.0, 1.0));
        assert_eq!(w.trace(), ZERO);
        assert!(w.max_abs() > 0.0);

        let w = choi_matrix(&mp(3f64.sqrt(), 1.0, 1.0, FRAC_PI_6));
        assert!((w.trace().re - 3.0 * (3f64.sqrt() + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn choi_layout_matches_direct_entries() {
        let t = 0.4;
        let w = choi_matrix(&mp(1.0, 2.0, 3.0, t));
        assert!((w[(0, 4)] + phase(t)).norm() < 1e-15);
        assert!((w[(4, 8)] + phase(t)).norm() < 1e-15);
        assert!((w[(8, 0)] + phase(t)).norm() < 1e-15);
        assert!((w[(0, 8)] + phase(-t)).norm() < 1e-15);
        assert!(w.is_hermitian(0.0));
    }

    #[test]
    fn p_matrix_determinants() {
        let det = |a: f64, t: f64| determinant(&p_matrix(a, t)).unwrap();
        assert!(det(2.0, 0.0).norm() < 1e-12);
        for t in [0.0, 0.3, 1.2, -2.0] {
            assert!((det(0.0, t).re + 2.0 * (3.0 * t).cos()).abs() < 1e-12);
        }
        assert!(det(3f64.sqrt(), FRAC_PI_6).norm() < 1e-12);
        assert!(p_matrix(1.3, 0.2).is_hermitian(0.0));
    }

    #[test]
    fn pairing_examples() {
        let p = mp(0.7, 1.3, 0.2, -0.5);
        let v = pairing(&ComplexMatrix::identity(9), &p).unwrap().value;
        assert!((v - 3.0 * p.sum()).abs() < 1e-12);

        // certificate-style state against the map
        let t = 1.0;
        let state = mp(p_theta(PI), t, 1.0 / t, PI);
        let v = pairing(&choi_matrix(&state), &mp(1.0, 1.0, 0.0, 0.0)).unwrap().value;
        assert!(v.abs() < 1e-12);

        let theta = 0.4;
        let (a, b, c, t) = (0.5, 1.0, 0.25, 1.7);
        let state = mp(p_theta(PI - theta), t, 1.0 / t, PI - theta);
        let v = pairing(&choi_matrix(&state), &mp(a, b, c, theta)).unwrap().value;
        let expected = 3.0 * (a * p_theta(PI - theta) + b * t + c / t - 2.0);
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn pairing_rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(9);
        m[(0, 1)] = ONE;
        assert!(matches!(
            pairing(&m, &mp(1.0, 1.0, 1.0, 0.0)),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn edge_state_examples() {
        let w = edge_state(2.0, FRAC_PI_6).unwrap();
        let diag: Vec<f64> = w.diagonal().iter().map(|z| z.re).collect();
        let r3 = 3f64.sqrt();
        let expected = [r3, 0.5, 2.0, 2.0, r3, 0.5, 0.5, 2.0, r3];
        for (x, y) in diag.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(matches!(edge_state(1.0, 0.0), Err(Error::ThetaOutOfRange { .. })));
        assert!(matches!(edge_state(1.0, PI / 2.0), Err(Error::ThetaOutOfRange { .. })));
        assert!(edge_state(0.0, 0.3).is_err());

        let rho = edge_state_density(1.0, FRAC_PI_6).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn edge_state_is_ppt_of_type_six_eight() {
        let tol = Tolerances::default();
        let w = edge_state(1.0, FRAC_PI_6).unwrap();
        let wg = partial_transpose(&w).unwrap();
        assert!(hermitian_eigenvalues(&w).unwrap()[0] >= -1e-9);
        assert!(hermitian_eigenvalues(&wg).unwrap()[0] >= -1e-9);
        assert_eq!(numeric_rank(&w, &tol), 8);
        assert_eq!(numeric_rank(&wg, &tol), 6);
    }

    #[test]
    fn partial_transpose_of_boundary_map_has_rank_six() {
        let w = choi_matrix(&mp(3f64.sqrt(), 1.0, 1.0, FRAC_PI_6));
        let wg = partial_transpose(&w).unwrap();
        assert_eq!(numeric_rank(&wg, &Tolerances::default()), 6);
    }

    #[test]
    fn subtraction_generator_examples() {
        assert_eq!(
            subtraction_generator(ZERO, ZERO, ZERO).unwrap(),
            ComplexMatrix::zeros(9, 9)
        );
        let v = subtraction_generator(ONE, -ONE, ZERO).unwrap();
        assert_eq!(v[(0, 0)], ONE);
        assert_eq!(v[(4, 4)], ONE);
        assert_eq!(v[(0, 4)], -ONE);
        assert_eq!(numeric_rank(&v, &Tolerances::default()), 1);
        assert!(matches!(
            subtraction_generator(ONE, ONE, ONE),
            Err(Error::ConstraintViolated(_))
        ));
    }

    fn params() -> impl Strategy<Value = MapParams> {
        (0.0f64..3.0, 0.0f64..3.0, 0.0f64..3.0, -PI..PI).prop_map(|(a, b, c, t)| mp(a, b, c, t))
    }

    fn cvec3() -> impl Strategy<Value = Vec<C64>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3)
            .prop_map(|v| v.into_iter().map(|(r, i)| C64::new(r, i)).collect())
    }

    proptest! {
        #[test]
        fn choi_equals_sum_of_unit_images(p in params()) {
            let direct = choi_matrix(&p);
            let rebuilt = choi_of(|x| apply_map(&p, x).unwrap());
            prop_assert!(direct.max_abs_diff(&rebuilt) <= 1e-12);
        }

        #[test]
        fn p_theta_symmetries(t in -PI..PI) {
            let p = p_theta(t);
            prop_assert!((1.0..=2.0).contains(&p));
            prop_assert!((p - p_theta(-t)).abs() <= 1e-12);
            prop_assert!((p - p_theta(t + 2.0 * PI / 3.0)).abs() <= 1e-12);
        }

        #[test]
        fn pairing_closed_form_matches_trace(p1 in params(), p2 in params()) {
            let direct = pairing(&choi_matrix(&p1), &p2).unwrap().value;
            prop_assert!((direct - pairing_closed_form(&p1, &p2)).abs() <= 1e-10);
        }

        #[test]
        fn product_vector_pairing(p in params(), xi in cvec3(), eta in cvec3()) {
            let z = kron_vec(&xi, &eta);
            let zz = ComplexMatrix::outer(&z, &z);
            let lhs = pairing(&zz, &p).unwrap().value;
            let img = apply_map(&p, &ComplexMatrix::outer(&xi, &xi)).unwrap();
            let eta_bar: Vec<C64> = eta.iter().map(|z| z.conj()).collect();
            let rhs = img.quadratic_form(&eta_bar).re;
            prop_assert!((lhs - rhs).abs() <= 1e-10);
            prop_assert!((lhs - pairing_rank_one(&z, &choi_matrix(&p))).abs() <= 1e-10);
        }

        #[test]
        fn map_preserves_hermiticity(p in params(), xi in cvec3(), eta in cvec3()) {
            let h = &ComplexMatrix::outer(&xi, &xi) + &ComplexMatrix::outer(&eta, &eta).scale_real(-0.5);
            prop_assert!(apply_map(&p, &h).unwrap().is_hermitian(1e-14));
        }

        #[test]
        fn apply_choi_recovers_the_map(p in params(), xi in cvec3()) {
            let x = ComplexMatrix::outer(&xi, &xi);
            let m: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| x[(i, j)]));
            let via_choi = ComplexMatrix::from(&apply_choi3(&choi_matrix(&p), &m));
            prop_assert!(via_choi.max_abs_diff(&apply_map(&p, &x).unwrap()) <= 1e-12);
        }
    }
}
