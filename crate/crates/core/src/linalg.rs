//! Dense complex linear algebra at the fixed sizes used by this crate (3x3 and 9x9).
//!
//! Everything here is deterministic: the eigensolver is a cyclic Jacobi iteration
//! with a fixed sweep order, the rank test is a one-sided Jacobi SVD and the
//! determinant uses LU with partial pivoting.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_OFFDIAG: f64 = 1e-13;

/// Numerical thresholds shared by the rank, eigenvalue and equality tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigenvalues above `-eig_zero` count as nonnegative.
    pub eig_zero: f64,
    /// Singular values at or below `rank_rel * sigma_max` count as zero.
    pub rank_rel: f64,
    /// Entrywise equality, including the Hermitian symmetry check.
    pub entry_eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig_zero: 1e-9,
            rank_rel: 1e-8,
            entry_eq: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn new(eig_zero: f64, rank_rel: f64, entry_eq: f64) -> Result<Self> {
        if !(eig_zero > 0.0 && rank_rel > 0.0 && entry_eq > 0.0) {
            return Err(Error::InvalidParams(
                "tolerances must be strictly positive".into(),
            ));
        }
        Ok(Self {
            eig_zero,
            rank_rel,
            entry_eq,
        })
    }
}

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>10.5}{:+.5}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch {
                expected: format!("columns of length {rows}"),
                got: "ragged columns".into(),
            });
        }
        Ok(Self::from_fn(rows, cols, |i, j| columns[j][i]))
    }

    /// Rank-one matrix `u v*`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |M - M*| entrywise; infinite for non-square input.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Hermitian form `v* M v`.
    pub fn quadratic_form(&self, v: &[C64]) -> C64 {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    fn check_hermitian(&self, tol: &Tolerances) -> Result<()> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                got: format!("{}x{}", self.rows, self.cols),
            });
        }
        let residual = self.hermitian_residual();
        if residual > tol.entry_eq * self.max_abs().max(1.0) {
            return Err(Error::NonHermitian { residual });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows);
        ComplexMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * rhs[(k, j)]).sum()
        })
    }
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending, eigenvectors
/// stored as the matching columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

/// Unitary 2x2 rotation that zeroes the (p,q) entry of the Hermitian block
/// `[[app, apq], [conj(apq), aqq]]`. Returned as (U_pp, U_pq, U_qp, U_qq).
fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> (C64, C64, C64, C64) {
    let r = apq.norm();
    let phase = apq / r;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let pc = phase.conj();
    (
        C64::new(c, 0.0),
        C64::new(s, 0.0),
        -pc * s,
        pc * c,
    )
}

/// Right-multiplies columns p and q of `m` by the 2x2 unitary `u`.
fn rotate_columns(m: &mut ComplexMatrix, p: usize, q: usize, u: (C64, C64, C64, C64)) {
    let (upp, upq, uqp, uqq) = u;
    for k in 0..m.rows {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * upp + mkq * uqp;
        m[(k, q)] = mkp * upq + mkq * uqq;
    }
}

/// Left-multiplies rows p and q of `m` by the adjoint of the 2x2 unitary `u`.
fn rotate_rows_adjoint(m: &mut ComplexMatrix, p: usize, q: usize, u: (C64, C64, C64, C64)) {
    let (upp, upq, uqp, uqq) = u;
    for k in 0..m.cols {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = upp.conj() * mpk + uqp.conj() * mqk;
        m[(q, k)] = upq.conj() * mpk + uqq.conj() * mqk;
    }
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..m.rows {
        for j in 0..m.cols {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi eigen-decomposition.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    hermitian_eigen_with(m, &Tolerances::default())
}

pub fn hermitian_eigen_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    m.check_hermitian(tol)?;
    let n = m.rows;
    // Work on the exactly Hermitian part so rounding in the input cannot leak in.
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    let mut converged = scale == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged || off_diagonal_norm(&a) < JACOBI_REL_OFFDIAG * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.norm() == 0.0 {
                    continue;
                }
                let u = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq);
                rotate_columns(&mut a, p, q, u);
                rotate_rows_adjoint(&mut a, p, q, u);
                rotate_columns(&mut v, p, q, u);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) >= JACOBI_REL_OFFDIAG * scale {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.values)
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigen(m)?.min())
}

/// Singular values (descending) by one-sided Jacobi on the columns.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut a = if m.cols > m.rows { m.adjoint() } else { m.clone() };
    let n = a.cols;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for k in 0..a.rows {
                    let x = a[(k, p)];
                    let y = a[(k, q)];
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                if alpha == 0.0 || beta == 0.0 || gamma.norm() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let u = jacobi_rotation(alpha, beta, gamma);
                rotate_columns(&mut a, p, q, u);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|j| (0..a.rows).map(|i| a[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Number of singular values above `rank_rel * sigma_max`.
pub fn numeric_rank(m: &ComplexMatrix, tol: &Tolerances) -> usize {
    let sv = singular_values(m);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol.rank_rel * top).count()
}

/// Determinant by LU with partial pivoting.
pub fn determinant(m: &ComplexMatrix) -> Result<C64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", m.rows, m.cols),
        });
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut det = ONE;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
            .unwrap_or(k);
        if a[(pivot, k)].norm() == 0.0 {
            return Ok(ZERO);
        }
        if pivot != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(pivot, j)];
                a[(pivot, j)] = tmp;
            }
            det = -det;
        }
        let d = a[(k, k)];
        det *= d;
        for i in k + 1..n {
            let f = a[(i, k)] / d;
            if f == ZERO {
                continue;
            }
            for j in k..n {
                let akj = a[(k, j)];
                a[(i, j)] -= f * akj;
            }
        }
    }
    Ok(det)
}

/// Kronecker product with the row-major block convention.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.rows * b.rows, a.cols * b.cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

pub fn kron_vec(u: &[C64], v: &[C64]) -> Vec<C64> {
    u.iter().flat_map(|&x| v.iter().map(move |&y| x * y)).collect()
}

/// Transpose of the second tensor factor of a 9x9 operator on C^3 (x) C^3:
/// entry ((i,j),(k,l)) moves to ((i,l),(k,j)).
pub fn partial_transpose(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.rows != 9 || m.cols != 9 {
        return Err(Error::DimensionMismatch {
            expected: "9x9".into(),
            got: format!("{}x{}", m.rows, m.cols),
        });
    }
    Ok(ComplexMatrix::from_fn(9, 9, |r, c| {
        let (i, l) = (r / 3, r % 3);
        let (k, j) = (c / 3, c % 3);
        m[(3 * i + j, 3 * k + l)]
    }))
}

/// Orthonormal basis of the eigenspace of a PSD Hermitian matrix belonging to
/// eigenvalues at or below `rel * lambda_max`.
pub fn psd_null_space(g: &ComplexMatrix, rel: f64) -> Result<Vec<Vec<C64>>> {
    let eig = hermitian_eigen(g)?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    Ok((0..eig.values.len())
        .filter(|&k| eig.values[k] <= rel * top || top == 0.0)
        .map(|k| eig.vector(k))
        .collect())
}

/// Stack-allocated 3x3 complex matrix for hot loops.
pub type Mat3 = [[C64; 3]; 3];

/// Jacobi eigen-decomposition of a Hermitian 3x3 matrix without heap allocation.
/// Eigenvalues ascending; `vectors[k]` is the unit eigenvector for `values[k]`.
pub fn herm3_eigen(m: &Mat3) -> ([f64; 3], [[C64; 3]; 3]) {
    let mut a = *m;
    let mut v = [[ZERO; 3]; 3];
    for (k, row) in v.iter_mut().enumerate() {
        row[k] = ONE;
    }
    let scale = a
        .iter()
        .flatten()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = (a[0][1].norm_sqr() + a[0][2].norm_sqr() + a[1][2].norm_sqr()).sqrt();
        if off <= 1e-15 * scale || scale == 0.0 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq.norm() == 0.0 {
                continue;
            }
            let (upp, upq, uqp, uqq) = jacobi_rotation(a[p][p].re, a[q][q].re, apq);
            for row in a.iter_mut() {
                let (x, y) = (row[p], row[q]);
                row[p] = x * upp + y * uqp;
                row[q] = x * upq + y * uqq;
            }
            for k in 0..3 {
                let (x, y) = (a[p][k], a[q][k]);
                a[p][k] = upp.conj() * x + uqp.conj() * y;
                a[q][k] = upq.conj() * x + uqq.conj() * y;
            }
            for row in v.iter_mut() {
                let (x, y) = (row[p], row[q]);
                row[p] = x * upp + y * uqp;
                row[q] = x * upq + y * uqq;
            }
            a[p][q] = ZERO;
            a[q][p] = ZERO;
        }
    }
    let d = [a[0][0].re, a[1][1].re, a[2][2].re];
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = [d[order[0]], d[order[1]], d[order[2]]];
    let mut vectors = [[ZERO; 3]; 3];
    for (k, &o) in order.iter().enumerate() {
        for i in 0..3 {
            vectors[k][i] = v[i][o];
        }
    }
    (values, vectors)
}

pub fn herm3_min_eigenvalue(m: &Mat3) -> f64 {
    herm3_eigen(m).0[0]
}

pub fn det3(m: &Mat3) -> C64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Classical adjugate, so that `m * adj(m) = det(m) I`.
pub fn adj3(m: &Mat3) -> Mat3 {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ]
}

impl From<&Mat3> for ComplexMatrix {
    fn from(m: &Mat3) -> Self {
        ComplexMatrix::from_fn(3, 3, |i, j| m[i][j])
    }
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `<u, v> = sum conj(u_i) v_i`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Bilinear product `u^T v` without conjugation.
pub fn bilinear(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let a = random_matrix(rng, n);
        (&a + &a.adjoint()).scale_real(0.5)
    }

    fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let h = random_hermitian(rng, n);
        hermitian_eigen(&h).unwrap().vectors
    }

    fn circulant_p(a: f64, theta: f64) -> ComplexMatrix {
        let e = C64::from_polar(1.0, theta);
        let mut m = ComplexMatrix::from_real_diagonal(&[a, a, a]);
        m[(0, 1)] = -e;
        m[(1, 2)] = -e;
        m[(2, 0)] = -e;
        m[(1, 0)] = -e.conj();
        m[(2, 1)] = -e.conj();
        m[(0, 2)] = -e.conj();
        m
    }

    #[test]
    fn eigenvalues_of_identity() {
        let ev = hermitian_eigenvalues(&ComplexMatrix::identity(3)).unwrap();
        for v in ev {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eigenvalues_of_real_circulant() {
        // a = 2, all off-diagonals -1: characteristic roots 0, 3, 3.
        let ev = hermitian_eigenvalues(&circulant_p(2.0, 0.0)).unwrap();
        assert!(ev[0].abs() < 1e-12);
        assert!((ev[1] - 3.0).abs() < 1e-12);
        assert!((ev[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn circulant_at_its_root_is_singular() {
        let theta = std::f64::consts::FRAC_PI_6;
        let ev = hermitian_eigenvalues(&circulant_p(3f64.sqrt(), theta)).unwrap();
        assert!(ev[0].abs() < 1e-9, "{ev:?}");
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut m = ComplexMatrix::identity(3);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            hermitian_eigenvalues(&m),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn eigenvectors_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [3, 9] {
            let h = random_hermitian(&mut rng, n);
            let eig = hermitian_eigen(&h).unwrap();
            let d = ComplexMatrix::from_real_diagonal(&eig.values);
            let back = &(&eig.vectors * &d) * &eig.vectors.adjoint();
            assert!(back.max_abs_diff(&h) < 1e-12);
            let sum: f64 = eig.values.iter().sum();
            assert!((sum - h.trace().re).abs() < 1e-9 * (1.0 + h.trace().re.abs()));
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigenvalues_invariant_under_unitary_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let h = random_hermitian(&mut rng, 3);
            let u = random_unitary(&mut rng, 3);
            let g = &(&u * &h) * &u.adjoint();
            let e1 = hermitian_eigenvalues(&h).unwrap();
            let e2 = hermitian_eigenvalues(&g).unwrap();
            for (x, y) in e1.iter().zip(&e2) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn determinant_matches_eigenvalue_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [3, 9] {
            for _ in 0..20 {
                let h = random_hermitian(&mut rng, n);
                let det = determinant(&h).unwrap();
                let prod: f64 = hermitian_eigenvalues(&h).unwrap().iter().product();
                assert!((det.re - prod).abs() <= 1e-8 * prod.abs().max(1e-12));
                assert!(det.im.abs() <= 1e-8 * prod.abs().max(1e-12));
            }
        }
    }

    #[test]
    fn determinant_examples() {
        assert!((determinant(&ComplexMatrix::identity(9)).unwrap() - ONE).norm() < 1e-15);
        let d: Vec<f64> = (1..=9).map(f64::from).collect();
        let det = determinant(&ComplexMatrix::from_real_diagonal(&d)).unwrap();
        assert!((det.re - 362880.0).abs() < 1e-6);
        assert!(det.im.abs() < 1e-9);
    }

    #[test]
    fn rank_examples() {
        let tol = Tolerances::default();
        assert_eq!(numeric_rank(&ComplexMatrix::zeros(9, 9), &tol), 0);
        assert_eq!(numeric_rank(&ComplexMatrix::identity(9), &tol), 9);
        let u = vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)];
        let v = vec![c(0.5, 0.5), c(1.0, 0.0), c(0.0, -1.0)];
        assert_eq!(numeric_rank(&ComplexMatrix::outer(&u, &v), &tol), 1);
    }

    #[test]
    fn singular_values_of_wide_and_tall_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = ComplexMatrix::from_fn(3, 9, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let s1 = singular_values(&m);
        let s2 = singular_values(&m.adjoint());
        assert_eq!(s1.len(), 3);
        for (x, y) in s1.iter().zip(&s2) {
            assert!((x - y).abs() < 1e-12);
        }
        // squared singular values are the eigenvalues of M M*
        let mut ev = hermitian_eigenvalues(&(&m * &m.adjoint())).unwrap();
        ev.reverse();
        for (s, e) in s1.iter().zip(&ev) {
            assert!((s * s - e).abs() < 1e-10);
        }
    }

    #[test]
    fn rank_of_kron_is_product_of_ranks() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let tol = Tolerances::default();
        for ra in 1..=3 {
            for rb in 1..=3 {
                let mk = |rng: &mut ChaCha8Rng, r: usize| {
                    let mut m = ComplexMatrix::zeros(3, 3);
                    for _ in 0..r {
                        let u: Vec<C64> = (0..3).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                        let v: Vec<C64> = (0..3).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                        m = &m + &ComplexMatrix::outer(&u, &v);
                    }
                    m
                };
                let a = mk(&mut rng, ra);
                let b = mk(&mut rng, rb);
                assert_eq!(numeric_rank(&a, &tol), ra);
                assert_eq!(numeric_rank(&kron(&a, &b), &tol), ra * rb);
            }
        }
    }

    #[test]
    fn kron_examples() {
        let i3 = ComplexMatrix::identity(3);
        assert_eq!(kron(&i3, &i3), ComplexMatrix::identity(9));
        let unit = |i: usize, j: usize| {
            let mut m = ComplexMatrix::zeros(3, 3);
            m[(i, j)] = ONE;
            m
        };
        let k = kron(&unit(0, 0), &unit(1, 1));
        for r in 0..9 {
            for s in 0..9 {
                let expect = if (r, s) == (1, 1) { ONE } else { ZERO };
                assert_eq!(k[(r, s)], expect);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_matrix(&mut rng, 3);
        let k = kron(&unit(0, 1), &m);
        for r in 0..9 {
            for s in 0..9 {
                let expect = if r < 3 && (3..6).contains(&s) { m[(r, s - 3)] } else { ZERO };
                assert_eq!(k[(r, s)], expect);
            }
        }
    }

    #[test]
    fn partial_transpose_on_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(&mut rng, 3);
        let b = random_matrix(&mut rng, 3);
        let pt = partial_transpose(&kron(&a, &b)).unwrap();
        assert!(pt.max_abs_diff(&kron(&a, &b.transpose())) < 1e-15);
        let id = ComplexMatrix::identity(9);
        assert_eq!(partial_transpose(&id).unwrap(), id);
        assert!(partial_transpose(&ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn small_eigen_matches_general_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let h = random_hermitian(&mut rng, 3);
            let m: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| h[(i, j)]));
            let (vals, vecs) = herm3_eigen(&m);
            let reference = hermitian_eigenvalues(&h).unwrap();
            for k in 0..3 {
                assert!((vals[k] - reference[k]).abs() < 1e-12);
                let hv = h.mul_vec(&vecs[k]);
                for i in 0..3 {
                    assert!((hv[i] - vecs[k][i] * vals[k]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn adjugate_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = random_matrix(&mut rng, 3);
        let m: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| g[(i, j)]));
        let prod = &g * &ComplexMatrix::from(&adj3(&m));
        let det = det3(&m);
        assert!((det - determinant(&g).unwrap()).norm() < 1e-12);
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(3).scale(det)) < 1e-12);
    }

    #[test]
    fn tolerances_must_be_positive() {
        assert!(Tolerances::new(0.0, 1e-8, 1e-10).is_err());
        assert!(Tolerances::new(1e-9, 1e-8, 1e-10).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix9() -> impl Strategy<Value = ComplexMatrix> {
            proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 81).prop_map(|v| {
                ComplexMatrix::from_row_major(9, 9, v.into_iter().map(|(r, i)| C64::new(r, i)).collect())
                    .unwrap()
            })
        }

        proptest! {
            #[test]
            fn partial_transpose_is_an_involution(m in matrix9()) {
                let twice = partial_transpose(&partial_transpose(&m).unwrap()).unwrap();
                prop_assert!(twice.max_abs_diff(&m) <= 1e-10);
            }

            #[test]
            fn partial_transpose_preserves_hermiticity(m in matrix9()) {
                let h = (&m + &m.adjoint()).scale_real(0.5);
                prop_assert!(partial_transpose(&h).unwrap().is_hermitian(1e-12));
            }
        }
    }
}
