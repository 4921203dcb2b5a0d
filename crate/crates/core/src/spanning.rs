//! Product vectors with zero pairing against a map, and the rank tests that
//! decide the spanning and co-spanning properties.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{apply_map3, p_theta, require_supported_theta, MapParams};
use crate::linalg::{determinant, kron_vec, numeric_rank, vec_norm, ComplexMatrix, Tolerances, C64, I, ONE, ZERO};
use crate::positivity::is_positive;

/// Tolerance on the defining equalities of the cases below.
pub const CASE_TOL: f64 = 1e-9;
const MEMBERSHIP_TOL: f64 = 1e-9;
const ZERO_FACTOR: f64 = 1e-14;

/// A product vector ξ⊗η.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductVector {
    pub xi: [C64; 3],
    pub eta: [C64; 3],
}

impl ProductVector {
    pub fn new(xi: [C64; 3], eta: [C64; 3]) -> Result<Self> {
        if vec_norm(&xi) <= ZERO_FACTOR || vec_norm(&eta) <= ZERO_FACTOR {
            return Err(Error::InvalidParams("product vector has a zero factor".into()));
        }
        Ok(Self { xi, eta })
    }

    fn try_new(xi: [C64; 3], eta: [C64; 3]) -> Option<Self> {
        Self::new(xi, eta).ok()
    }

    /// The 9-vector ξ⊗η with slot 3(i−1)+j.
    pub fn tensor(&self) -> Vec<C64> {
        kron_vec(&self.xi, &self.eta)
    }

    /// ξ⊗η̄.
    pub fn partial_conjugate(&self) -> Self {
        Self {
            xi: self.xi,
            eta: self.eta.map(|z| z.conj()),
        }
    }
}

/// ξ⊗η has zero pairing with the map iff Φ(ξξ*)η̄ = 0.
pub fn kernel_membership(p: &MapParams, pv: &ProductVector) -> Result<bool> {
    if !is_positive(p) {
        return Err(Error::NotPositiveMap);
    }
    Ok(kernel_residual(p, pv) <= MEMBERSHIP_TOL * vec_norm(&pv.xi).powi(2) * vec_norm(&pv.eta))
}

fn kernel_residual(p: &MapParams, pv: &ProductVector) -> f64 {
    let x = std::array::from_fn(|i| std::array::from_fn(|j| pv.xi[i] * pv.xi[j].conj()));
    let img = apply_map3(p, &x);
    let eta_bar = pv.eta.map(|z| z.conj());
    let out: Vec<C64> = (0..3)
        .map(|j| (0..3).map(|l| img[j][l] * eta_bar[l]).sum())
        .collect();
    vec_norm(&out)
}

/// The parameter regions in which the zero product vectors are known explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanningCase {
    /// 0 < a ≤ 1, bc = (1−a)², a+b+c > p_θ.
    I,
    /// 2−p_θ ≤ a ≤ 1, bc = (1−a)², a+b+c = p_θ.
    II,
    /// a = 0, bc = 1.
    III,
    /// 1 < a ≤ p_θ, a+b+c = p_θ.
    IV,
}

pub fn spanning_case(p: &MapParams) -> Option<SpanningCase> {
    let pt = p_theta(p.theta);
    let (a, b, c) = p.abc();
    let on_curve = (b * c - (1.0 - a).powi(2)).abs() <= CASE_TOL;
    let on_plane = (p.sum() - pt).abs() <= CASE_TOL;
    if a <= CASE_TOL && (b * c - 1.0).abs() <= CASE_TOL {
        Some(SpanningCase::III)
    } else if on_curve && on_plane && a >= 2.0 - pt - CASE_TOL && a <= 1.0 + CASE_TOL {
        Some(SpanningCase::II)
    } else if on_curve && a > 0.0 && a <= 1.0 + CASE_TOL && p.sum() > pt {
        Some(SpanningCase::I)
    } else if on_plane && a > 1.0 && a <= pt + CASE_TOL {
        Some(SpanningCase::IV)
    } else {
        None
    }
}

/// Phase choices used to instantiate the families.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSamples {
    pub pairs: Vec<(C64, C64)>,
    pub triples: Vec<(C64, C64, C64)>,
}

impl Default for PhaseSamples {
    fn default() -> Self {
        Self {
            pairs: vec![(ONE, ONE), (ONE, -ONE), (ONE, I)],
            triples: vec![(ONE, ONE, ONE), (ONE, -ONE, ONE), (ONE, I, -I)],
        }
    }
}

impl PhaseSamples {
    /// Denser deterministic samples, enough to span every family.
    pub fn dense() -> Self {
        let ph = |k: usize, n: usize| C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
        let mut pairs = Self::default().pairs;
        pairs.extend((0..5).map(|k| (ph(k, 7), ph(2 * k + 1, 5))));
        let mut triples = Self::default().triples;
        triples.extend((0..9).map(|k| (ONE, ph(k, 5), ph(3 * k + 1, 7))));
        Self { pairs, triples }
    }
}

/// z_1, z_2, z_3 of the a ≤ 1, bc = (1−a)² family.
pub fn z_family(p: &MapParams, alpha: C64, beta: C64) -> [Option<ProductVector>; 3] {
    let (a, b, c) = p.abc();
    let b4 = b.sqrt().sqrt();
    let c4 = c.sqrt().sqrt();
    let s = (1.0 - a).max(0.0).sqrt();
    let u = alpha.conj() * C64::from_polar(s, -p.theta);
    let v = beta.conj() * b.sqrt();
    [
        ProductVector::try_new([alpha * b4, beta * c4, ZERO], [u, v, ZERO]),
        ProductVector::try_new([beta * c4, ZERO, alpha * b4], [v, ZERO, u]),
        ProductVector::try_new([ZERO, alpha * b4, beta * c4], [ZERO, u, v]),
    ]
}

/// w_1, w_2, w_3 of the a = 0, bc = 1 family.
pub fn w_family(p: &MapParams, alpha: C64, beta: C64) -> [Option<ProductVector>; 3] {
    let y = C64::from_polar(p.b, p.theta) * beta.conj();
    let x = alpha.conj();
    [
        ProductVector::try_new([alpha, beta, ZERO], [x, y, ZERO]),
        ProductVector::try_new([beta, ZERO, alpha], [y, ZERO, x]),
        ProductVector::try_new([ZERO, alpha, beta], [ZERO, x, y]),
    ]
}

/// Phase factors on the second factor of the equal-modulus family, by θ-branch.
pub fn equal_modulus_phases(theta: f64) -> Result<[C64; 3]> {
    require_supported_theta(theta)?;
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    Ok(if theta < -PI / 3.0 {
        [ONE, w.conj(), w]
    } else if theta <= PI / 3.0 {
        [ONE, ONE, ONE]
    } else {
        [ONE, w, w.conj()]
    })
}

/// w[α,β,γ] for |α| = |β| = |γ|, zero against maps with a+b+c = p_θ.
pub fn equal_modulus_vector(theta: f64, alpha: C64, beta: C64, gamma: C64) -> Result<ProductVector> {
    let ph = equal_modulus_phases(theta)?;
    let xi = [alpha, beta, gamma];
    let eta = [alpha.conj() * ph[0], beta.conj() * ph[1], gamma.conj() * ph[2]];
    ProductVector::new(xi, eta)
}

/// e_i⊗e_j for every slot where the diagonal of W vanishes.
pub fn coordinate_zero_vectors(p: &MapParams) -> Vec<ProductVector> {
    let diag = p.choi_diagonal();
    let mut out = Vec::new();
    for (slot, &d) in diag.iter().enumerate() {
        if d.abs() <= CASE_TOL {
            let mut xi = [ZERO; 3];
            let mut eta = [ZERO; 3];
            xi[slot / 3] = ONE;
            eta[slot % 3] = ONE;
            out.push(ProductVector { xi, eta });
        }
    }
    out
}

fn flatten(groups: impl IntoIterator<Item = [Option<ProductVector>; 3]>) -> Vec<ProductVector> {
    groups.into_iter().flat_map(|g| g.into_iter().flatten()).collect()
}

fn check_members(p: &MapParams, vectors: Vec<ProductVector>) -> Result<Vec<ProductVector>> {
    for v in &vectors {
        if !kernel_membership(p, v)? {
            return Err(Error::ConstraintViolated(format!(
                "generated vector is not a zero of the map (residual {:.3e})",
                kernel_residual(p, v)
            )));
        }
    }
    Ok(vectors)
}

/// Zero product vectors of the family attached to the case of `p`.
pub fn kernel_family(p: &MapParams, samples: &PhaseSamples) -> Result<Vec<ProductVector>> {
    require_supported_theta(p.theta)?;
    if !is_positive(p) {
        return Err(Error::NotPositiveMap);
    }
    let case = spanning_case(p).ok_or_else(|| {
        Error::UnsupportedCase("point lies in none of the four spanning cases".into())
    })?;
    let out = match case {
        SpanningCase::I => {
            // order z_k[α, β_ℓ] with k outer
            let groups: Vec<_> = samples.pairs.iter().map(|&(al, be)| z_family(p, al, be)).collect();
            (0..3)
                .flat_map(|k| groups.iter().filter_map(move |g| g[k]))
                .collect()
        }
        SpanningCase::II => {
            let mut v = flatten(samples.pairs.iter().map(|&(al, be)| z_family(p, al, be)));
            for &(al, be, ga) in &samples.triples {
                v.push(equal_modulus_vector(p.theta, al, be, ga)?);
            }
            v
        }
        SpanningCase::III => {
            let groups: Vec<_> = samples.pairs.iter().map(|&(al, be)| w_family(p, al, be)).collect();
            (0..3)
                .flat_map(|k| groups.iter().filter_map(move |g| g[k]))
                .collect()
        }
        SpanningCase::IV => samples
            .triples
            .iter()
            .map(|&(al, be, ga)| equal_modulus_vector(p.theta, al, be, ga))
            .collect::<Result<Vec<_>>>()?,
    };
    let mut out = out;
    out.retain(|v| vec_norm(&v.tensor()) > ZERO_FACTOR);
    check_members(p, out)
}

/// Every known zero product vector of `p`, from all families that apply.
pub fn zero_product_vectors(p: &MapParams) -> Result<Vec<ProductVector>> {
    require_supported_theta(p.theta)?;
    if !is_positive(p) {
        return Err(Error::NotPositiveMap);
    }
    let samples = PhaseSamples::dense();
    let pt = p_theta(p.theta);
    let (a, b, c) = p.abc();
    let mut out = coordinate_zero_vectors(p);
    if a <= 1.0 + CASE_TOL && (b * c - (1.0 - a).powi(2)).abs() <= CASE_TOL {
        out.extend(flatten(samples.pairs.iter().map(|&(al, be)| z_family(p, al, be))));
    }
    if a <= CASE_TOL && (b * c - 1.0).abs() <= CASE_TOL {
        out.extend(flatten(samples.pairs.iter().map(|&(al, be)| w_family(p, al, be))));
    }
    if (p.sum() - pt).abs() <= CASE_TOL {
        for &(al, be, ga) in &samples.triples {
            out.push(equal_modulus_vector(p.theta, al, be, ga)?);
        }
    }
    // keep only genuine zeros: degenerate parameter values can void a family
    Ok(out
        .into_iter()
        .filter(|v| kernel_membership(p, v).unwrap_or(false))
        .collect())
}

fn columns_matrix(vectors: &[ProductVector]) -> Result<ComplexMatrix> {
    let cols: Vec<Vec<C64>> = vectors.iter().map(ProductVector::tensor).collect();
    if cols.is_empty() {
        return Ok(ComplexMatrix::zeros(9, 1));
    }
    ComplexMatrix::from_columns(&cols)
}

pub fn span_rank(vectors: &[ProductVector]) -> Result<usize> {
    if vectors.is_empty() {
        return Ok(0);
    }
    Ok(numeric_rank(&columns_matrix(vectors)?, &Tolerances::default()))
}

/// |det| of the 9x9 matrix whose columns are the given vectors.
pub fn determinant_of_columns(vectors: &[ProductVector]) -> Result<f64> {
    if vectors.len() != 9 {
        return Err(Error::DimensionMismatch {
            expected: "9 vectors".into(),
            got: format!("{} vectors", vectors.len()),
        });
    }
    Ok(determinant(&columns_matrix(vectors)?)?.norm())
}

/// The nine vectors z_k[1, β_ℓ], β ∈ {1, −1, i}.
pub fn case_i_vectors(p: &MapParams) -> Option<Vec<ProductVector>> {
    let groups: Vec<_> = PhaseSamples::default()
        .pairs
        .iter()
        .map(|&(al, be)| z_family(p, al, be))
        .collect();
    (0..3)
        .flat_map(|k| groups.iter().map(move |g| g[k]))
        .collect::<Option<Vec<_>>>()
}

/// The nine vectors w_k[1, β_ℓ], β ∈ {1, −1, i}.
pub fn case_iii_vectors(p: &MapParams) -> Option<Vec<ProductVector>> {
    let groups: Vec<_> = PhaseSamples::default()
        .pairs
        .iter()
        .map(|&(al, be)| w_family(p, al, be))
        .collect();
    (0..3)
        .flat_map(|k| groups.iter().map(move |g| g[k]))
        .collect::<Option<Vec<_>>>()
}

/// z_k[1, ±1] for k = 1, 2, 3 followed by w[1,1,1], w[1,−1,1], w[1,i,−i].
pub fn case_ii_vectors(p: &MapParams) -> Result<Option<Vec<ProductVector>>> {
    let plus = z_family(p, ONE, ONE);
    let minus = z_family(p, ONE, -ONE);
    let mut v = Vec::with_capacity(9);
    for k in 0..3 {
        match (plus[k], minus[k]) {
            (Some(x), Some(y)) => {
                v.push(x);
                v.push(y);
            }
            _ => return Ok(None),
        }
    }
    for (al, be, ga) in [(ONE, ONE, ONE), (ONE, -ONE, ONE), (ONE, I, -I)] {
        v.push(equal_modulus_vector(p.theta, al, be, ga)?);
    }
    Ok(Some(v))
}

/// |64 b^{9/2} c^{9/4} (1 + e^{−3iθ})|.
pub fn case_i_determinant_closed_form(p: &MapParams) -> f64 {
    64.0 * p.b.powf(4.5) * p.c.powf(2.25) * (ONE + C64::from_polar(1.0, -3.0 * p.theta)).norm()
}

/// 64 b³ |1 + b³ e^{3iθ}|.
pub fn case_iii_determinant_closed_form(p: &MapParams) -> f64 {
    64.0 * p.b.powi(3) * (ONE + C64::from_polar(p.b.powi(3), 3.0 * p.theta)).norm()
}

/// Branch angle used by the partial-conjugate determinant.
pub fn case_ii_branch_angle(theta: f64) -> f64 {
    if theta < -PI / 3.0 {
        theta + 2.0 * PI / 3.0
    } else if theta <= PI / 3.0 {
        theta
    } else {
        theta - 2.0 * PI / 3.0
    }
}

/// 16√2 b^{9/4} c^{3/4} |(√b − √c e^{iφ})³ (1 + e^{3iθ})|.
pub fn case_ii_determinant_closed_form(p: &MapParams) -> f64 {
    let phi = case_ii_branch_angle(p.theta);
    let diff = C64::new(p.b.sqrt(), 0.0) - C64::from_polar(p.c.sqrt(), phi);
    16.0 * 2f64.sqrt()
        * p.b.powf(2.25)
        * p.c.powf(0.75)
        * (diff * diff * diff * (ONE + C64::from_polar(1.0, 3.0 * p.theta))).norm()
}

/// Closed-form verdict together with rank and determinant evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanningEvidence {
    pub verdict: bool,
    pub case: Option<SpanningCase>,
    /// Rank of the span of all known zero vectors (partially conjugated for
    /// the co-spanning test).
    pub rank: usize,
    pub vector_count: usize,
    pub det_abs: Option<f64>,
    pub det_closed_form: Option<f64>,
}

fn check_preconditions(p: &MapParams) -> Result<()> {
    require_supported_theta(p.theta)?;
    if !is_positive(p) {
        return Err(Error::NotPositiveMap);
    }
    Ok(())
}

pub fn spanning_closed_form(p: &MapParams) -> bool {
    let (a, b, c) = p.abc();
    a < 1.0 - CASE_TOL && (b * c - (1.0 - a).powi(2)).abs() <= CASE_TOL
}

pub fn cospanning_closed_form(p: &MapParams) -> bool {
    let pt = p_theta(p.theta);
    let (a, b, c) = p.abc();
    let on_plane = (p.sum() - pt).abs() <= CASE_TOL;
    let curve_branch = a >= 2.0 - pt - CASE_TOL
        && a <= 1.0 + CASE_TOL
        && (b * c - (1.0 - a).powi(2)).abs() <= CASE_TOL;
    let axis_branch = a >= 1.0 - CASE_TOL && a <= pt + CASE_TOL && b * c <= CASE_TOL;
    on_plane && (curve_branch || axis_branch)
}

pub fn has_spanning_property(p: &MapParams) -> Result<SpanningEvidence> {
    check_preconditions(p)?;
    let zeros = zero_product_vectors(p)?;
    let rank = span_rank(&zeros)?;
    let case = spanning_case(p);
    let (mut det_abs, mut det_closed_form) = (None, None);
    match case {
        Some(SpanningCase::III) => {
            if let Some(v) = case_iii_vectors(p) {
                det_abs = Some(determinant_of_columns(&v)?);
                det_closed_form = Some(case_iii_determinant_closed_form(p));
            }
        }
        Some(SpanningCase::I | SpanningCase::II) if p.b > CASE_TOL && p.c > CASE_TOL => {
            if let Some(v) = case_i_vectors(p) {
                det_abs = Some(determinant_of_columns(&v)?);
                det_closed_form = Some(case_i_determinant_closed_form(p));
            }
        }
        _ => {}
    }
    Ok(SpanningEvidence {
        verdict: spanning_closed_form(p),
        case,
        rank,
        vector_count: zeros.len(),
        det_abs,
        det_closed_form,
    })
}

pub fn has_cospanning_property(p: &MapParams) -> Result<SpanningEvidence> {
    check_preconditions(p)?;
    let zeros: Vec<ProductVector> = zero_product_vectors(p)?
        .iter()
        .map(ProductVector::partial_conjugate)
        .collect();
    let rank = span_rank(&zeros)?;
    let case = spanning_case(p);
    let (mut det_abs, mut det_closed_form) = (None, None);
    if case == Some(SpanningCase::II) && p.b > CASE_TOL && p.c > CASE_TOL {
        if let Some(v) = case_ii_vectors(p)? {
            let pc: Vec<ProductVector> = v.iter().map(ProductVector::partial_conjugate).collect();
            det_abs = Some(determinant_of_columns(&pc)?);
            det_closed_form = Some(case_ii_determinant_closed_form(p));
        }
    }
    Ok(SpanningEvidence {
        verdict: cospanning_closed_form(p),
        case,
        rank,
        vector_count: zeros.len(),
        det_abs,
        det_closed_form,
    })
}
