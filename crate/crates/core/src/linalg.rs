//! Dense complex linear algebra used throughout the crate.
//!
//! [`ComplexMatrix`] is a plain row-major container. Decompositions are
//! delegated to `nalgebra` and post-processed here so that the rest of the
//! crate sees deterministic orderings and phases.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Numerical thresholds used to turn exact algebraic conditions into decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative Frobenius-norm threshold for matrix equations.
    pub eq_residual: f64,
    /// Relative singular-value (or eigenvalue) threshold for rank decisions.
    pub rank_rel: f64,
    /// Most negative admissible eigenvalue, relative to the spectral scale.
    pub psd_floor: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eq_residual: 1e-9,
            rank_rel: 1e-10,
            psd_floor: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(eq_residual: f64, rank_rel: f64, psd_floor: f64) -> Result<Self> {
        for (name, v) in [
            ("eq_residual", eq_residual),
            ("rank_rel", rank_rel),
            ("psd_floor", psd_floor),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(Self {
            eq_residual,
            rank_rel,
            psd_floor,
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
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

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

    /// Builds a matrix from a list of rows, which must all have the same length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("columns of unequal length".into()));
        }
        let cols = columns.len();
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("empty column set".into()));
        }
        Ok(Self::from_fn(rows, cols, |i, j| columns[j][i]))
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO })
    }

    /// `|a⟩⟨b|`
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    /// `|v⟩⟨v|`
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `M - M†`.
    pub fn anti_hermitian_norm(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `(M + M†)/2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "vector length must equal column count");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `⟨v|M|v⟩`
    pub fn expectation(&self, v: &[C64]) -> C64 {
        inner(v, &self.mul_vec(v))
    }

    /// Row-major flattening.
    pub fn vectorize(&self) -> Vec<C64> {
        self.data.clone()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖self - other‖_F`
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).frobenius_norm()
    }

    pub(crate) fn to_na(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_na(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Inverse of a square matrix, `None` when it is numerically singular.
    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        self.to_na().try_inverse().map(|m| Self::from_na(&m))
    }

    pub fn sum<'a>(items: impl IntoIterator<Item = &'a ComplexMatrix>, rows: usize, cols: usize) -> Self {
        let mut acc = Self::zeros(rows, cols);
        for m in items {
            acc = &acc + m;
        }
        acc
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
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in addition");
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
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in subtraction");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ in product");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = rhs.row(k);
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// vector helpers

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(v: &[C64]) -> Option<Vec<C64>> {
    let n = norm(v);
    (n > 0.0).then(|| v.iter().map(|z| z / n).collect())
}

pub fn basis_vector(d: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; d];
    v[i] = ONE;
    v
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Multiplies by a unit phase so that the first component whose modulus
/// exceeds `floor` times the largest modulus is real and positive.
pub fn fix_phase(v: &mut [C64], floor: f64) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > floor * max) {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

// ---------------------------------------------------------------------------
// decompositions

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl HermEig {
    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.vectors.column(i)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.vectors;
        &(v * &ComplexMatrix::diag_real(&self.values)) * &v.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrised before decomposition. Eigenvalues come out in
/// descending order; each eigenvector is phase-fixed so its first significant
/// component is real and positive, and degenerate eigenvalues are ordered by
/// comparing eigenvector component arguments.
pub fn herm_eig(m: &ComplexMatrix, tol: &Tolerance) -> Result<HermEig> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let scale = m.frobenius_norm();
    let anti = m.anti_hermitian_norm();
    if anti > tol.eq_residual * scale {
        return Err(Error::NotHermitian {
            residual: if scale > 0.0 { anti / scale } else { anti },
        });
    }
    let n = m.rows();
    let h = m.hermitian_part();
    let eig = h.to_na().symmetric_eigen();

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|i| {
            let mut v: Vec<C64> = (0..n).map(|r| eig.eigenvectors[(r, i)]).collect();
            fix_phase(&mut v, 1e-8);
            (eig.eigenvalues[i], v)
        })
        .collect();

    let tie = tol.rank_rel * scale.max(f64::MIN_POSITIVE);
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() > tie {
            return b.0.partial_cmp(&a.0).unwrap();
        }
        for (x, y) in a.1.iter().zip(&b.1) {
            let (ax, ay) = (x.arg(), y.arg());
            if (ax - ay).abs() > 1e-9 || (x.norm() - y.norm()).abs() > 1e-9 {
                return ax
                    .partial_cmp(&ay)
                    .unwrap()
                    .then(y.norm().partial_cmp(&x.norm()).unwrap());
            }
        }
        std::cmp::Ordering::Equal
    });

    let values = pairs.iter().map(|p| p.0).collect();
    let columns: Vec<Vec<C64>> = pairs.into_iter().map(|p| p.1).collect();
    Ok(HermEig {
        values,
        vectors: ComplexMatrix::from_columns(&columns)?,
    })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix, tol: &Tolerance) -> Result<f64> {
    Ok(*herm_eig(m, tol)?.values.last().unwrap())
}

/// Checks positive semidefiniteness with the relative `psd_floor` allowance.
pub fn check_psd(m: &ComplexMatrix, tol: &Tolerance) -> Result<HermEig> {
    let eig = herm_eig(m, tol)?;
    let scale = eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    let min = *eig.values.last().unwrap();
    if min < -tol.psd_floor * scale {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(eig)
}

/// Orthogonal projector onto the support of a positive semidefinite matrix.
pub fn support_projector(g: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let eig = check_psd(g, tol)?;
    let n = g.rows();
    let lmax = eig.values[0];
    let mut p = ComplexMatrix::zeros(n, n);
    if lmax <= 0.0 {
        return Ok(p);
    }
    for (i, &l) in eig.values.iter().enumerate() {
        if l > tol.rank_rel * lmax {
            p = &p + &ComplexMatrix::projector(&eig.vector(i));
        }
    }
    Ok(p)
}

/// Applies `f` to the eigenvalues of a PSD matrix, dropping eigenvalues at or
/// below `rank_rel` times the largest one.
pub fn psd_function(m: &ComplexMatrix, tol: &Tolerance, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let eig = check_psd(m, tol)?;
    let n = m.rows();
    let lmax = eig.values[0].max(0.0);
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, &l) in eig.values.iter().enumerate() {
        if l > tol.rank_rel * lmax {
            out = &out + &ComplexMatrix::projector(&eig.vector(i)).scale_real(f(l));
        }
    }
    Ok(out)
}

/// `M^{-1/2}` for a positive definite `M` (pseudo-inverse square root on the support).
pub fn psd_inv_sqrt(m: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    psd_function(m, tol, |l| 1.0 / l.sqrt())
}

/// Singular value decomposition `M = U diag(σ) V†` with `σ` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    /// `V†`; row `i` is the conjugate of the `i`-th right singular vector.
    pub v_adjoint: ComplexMatrix,
}

impl Svd {
    pub fn right_vector(&self, i: usize) -> Vec<C64> {
        self.v_adjoint.row(i).iter().map(|z| z.conj()).collect()
    }
}

/// Thin SVD with singular values sorted descending.
pub fn svd(m: &ComplexMatrix) -> Svd {
    let s = m.to_na().svd(true, true);
    let u = s.u.expect("u requested");
    let vt = s.v_t.expect("v requested");
    let k = s.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        s.singular_values[b]
            .partial_cmp(&s.singular_values[a])
            .unwrap()
    });
    let sigma = order.iter().map(|&i| s.singular_values[i]).collect();
    let u_cols: Vec<Vec<C64>> = order
        .iter()
        .map(|&i| (0..u.nrows()).map(|r| u[(r, i)]).collect())
        .collect();
    let vt_rows: Vec<Vec<C64>> = order
        .iter()
        .map(|&i| (0..vt.ncols()).map(|c| vt[(i, c)]).collect())
        .collect();
    Svd {
        u: ComplexMatrix::from_columns(&u_cols).expect("nonempty"),
        sigma,
        v_adjoint: ComplexMatrix::from_rows(&vt_rows).expect("nonempty"),
    }
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.to_na().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Number of singular values above `rank_rel` times the largest.
pub fn numeric_rank(m: &ComplexMatrix, tol: &Tolerance) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol.rank_rel * smax).count()
}

/// Unit vector `x` minimising `‖Mx‖`, together with that minimum.
///
/// Uses a zero-padded SVD so the full right singular basis is available even
/// when `M` has fewer rows than columns.
pub fn least_singular_pair(m: &ComplexMatrix) -> (f64, Vec<C64>) {
    let padded = if m.rows() < m.cols() {
        ComplexMatrix::from_fn(m.cols(), m.cols(), |i, j| {
            if i < m.rows() {
                m[(i, j)]
            } else {
                ZERO
            }
        })
    } else {
        m.clone()
    };
    let s = svd(&padded);
    let last = s.sigma.len() - 1;
    let mut v = s.right_vector(last);
    fix_phase(&mut v, 1e-8);
    (s.sigma[last], v)
}

/// Condition number `σ_max / σ_min` (infinite for singular matrices).
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let s = singular_values(m);
    let min = *s.last().unwrap();
    if min == 0.0 {
        f64::INFINITY
    } else {
        s[0] / min
    }
}

/// Eigenvalues of a general square complex matrix via a complex Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Option<Vec<C64>> {
    if !m.is_square() {
        return None;
    }
    let schur = Schur::try_new(m.to_na(), f64::EPSILON, 10_000)?;
    let (_, t) = schur.unpack();
    Some((0..m.rows()).map(|i| t[(i, i)]).collect())
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = b.shape();
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Schmidt decomposition `v = Σ_j c_j x_j ⊗ y_j`.
#[derive(Debug, Clone)]
pub struct Schmidt {
    /// Non-negative, descending; one per singular value of the reshaped state.
    pub coefficients: Vec<f64>,
    pub left: Vec<Vec<C64>>,
    pub right: Vec<Vec<C64>>,
    /// Number of coefficients above `rank_rel`.
    pub rank: usize,
}

impl Schmidt {
    pub fn reconstruct(&self) -> Vec<C64> {
        let dim = self.left[0].len() * self.right[0].len();
        let mut out = vec![ZERO; dim];
        for ((c, x), y) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            for (o, t) in out.iter_mut().zip(kron_vec(x, y)) {
                *o += t * *c;
            }
        }
        out
    }
}

/// Reshapes a bipartite vector into its `d_q × d_a` coefficient matrix
/// (first factor indexes rows).
pub fn reshape_bipartite(v: &[C64], d_q: usize, d_a: usize) -> Result<ComplexMatrix> {
    if d_q == 0 || d_a == 0 || v.len() != d_q * d_a {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} cannot be split as {d_q} x {d_a}",
            v.len()
        )));
    }
    ComplexMatrix::new(d_q, d_a, v.to_vec())
}

pub fn schmidt(v: &[C64], d_q: usize, d_a: usize, tol: &Tolerance) -> Result<Schmidt> {
    let m = reshape_bipartite(v, d_q, d_a)?;
    let n = norm(v);
    if (n - 1.0).abs() > tol.eq_residual {
        return Err(Error::InvalidState(format!("vector norm {n} is not 1")));
    }
    let s = svd(&m);
    let k = s.sigma.len();
    let left = (0..k).map(|i| s.u.column(i)).collect();
    // v_adjoint rows are already the conjugated right vectors y_j.
    let right = (0..k).map(|i| s.v_adjoint.row(i).to_vec()).collect();
    let rank = s.sigma.iter().filter(|&&c| c > tol.rank_rel).count();
    Ok(Schmidt {
        coefficients: s.sigma,
        left,
        right,
        rank,
    })
}

/// Which tensor factor to keep in a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// Partial trace of an operator on `C^{d_q} ⊗ C^{d_a}`.
pub fn partial_trace(rho: &ComplexMatrix, d_q: usize, d_a: usize, keep: Factor) -> Result<ComplexMatrix> {
    let d = d_q * d_a;
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {d}x{d}",
            rho.rows(),
            rho.cols()
        )));
    }
    Ok(match keep {
        Factor::First => ComplexMatrix::from_fn(d_q, d_q, |i, j| {
            (0..d_a).map(|a| rho[(i * d_a + a, j * d_a + a)]).sum()
        }),
        Factor::Second => ComplexMatrix::from_fn(d_a, d_a, |i, j| {
            (0..d_q).map(|q| rho[(q * d_a + i, q * d_a + j)]).sum()
        }),
    })
}

/// Pauli matrices `(I, σx, σy, σz)`.
pub fn pauli() -> [ComplexMatrix; 4] {
    let c = |re: f64, im: f64| C64::new(re, im);
    [
        ComplexMatrix::identity(2),
        ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]).unwrap(),
        ComplexMatrix::from_rows(&[vec![c(0., 0.), c(0., -1.)], vec![c(0., 1.), c(0., 0.)]]).unwrap(),
        ComplexMatrix::from_rows(&[vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(-1., 0.)]]).unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian_spectrum, random_matrix, random_state, random_unitary};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn tolerance_bounds() {
        assert!(Tolerance::new(1e-9, 1e-10, 1e-9).is_ok());
        assert!(Tolerance::new(0.0, 1e-10, 1e-9).is_err());
        assert!(Tolerance::new(1e-9, 1.5, 1e-9).is_err());
    }

    #[test]
    fn rejects_non_finite_and_bad_lengths() {
        assert_eq!(
            ComplexMatrix::new(1, 1, vec![C64::new(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        );
        assert!(ComplexMatrix::new(2, 2, vec![ZERO; 3]).is_err());
    }

    #[test]
    fn eig_of_diagonal() {
        let e = herm_eig(&ComplexMatrix::diag_real(&[1.0, 2.0]), &tol()).unwrap();
        assert_eq!(e.values, vec![2.0, 1.0]);
        assert!((e.vector(0)[1] - ONE).norm() < 1e-14);
        assert!((e.vector(1)[0] - ONE).norm() < 1e-14);
    }

    #[test]
    fn eig_of_pauli_x() {
        let x = &pauli()[1];
        let e = herm_eig(x, &tol()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vector(0);
        let v1 = e.vector(1);
        assert!((v0[0] - c(s)).norm() < 1e-12 && (v0[1] - c(s)).norm() < 1e-12);
        assert!((v1[0] - c(s)).norm() < 1e-12 && (v1[1] + c(s)).norm() < 1e-12);
    }

    #[test]
    fn eig_of_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spectrum = [3.0, 1.5, -0.25, -2.0];
        let (h, w) = random_hermitian_spectrum(&spectrum, &mut rng);
        let e = herm_eig(&h, &tol()).unwrap();
        let resid = h.distance(&e.reconstruct()) / h.frobenius_norm();
        assert!(resid < 1e-12, "residual {resid}");
        for (a, b) in e.values.iter().zip(spectrum) {
            assert!((a - b).abs() < 1e-12);
        }
        // eigenvectors agree with W's columns up to phase
        for i in 0..4 {
            let ov = inner(&e.vector(i), &w.column(i)).norm();
            assert!((ov - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn eig_errors() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(herm_eig(&rect, &tol()), Err(Error::NotSquare { .. })));
        let nh = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(herm_eig(&nh, &tol()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn support_examples() {
        let d = ComplexMatrix::diag_real(&[1.0, 0.0]);
        assert!(support_projector(&d, &tol()).unwrap().max_abs_diff(&d) < 1e-14);
        let plus = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(support_projector(&plus, &tol()).unwrap().max_abs_diff(&plus) < 1e-12);
        let z = ComplexMatrix::zeros(3, 3);
        assert_eq!(support_projector(&z, &tol()).unwrap(), z);
        let neg = ComplexMatrix::diag_real(&[1.0, -0.5]);
        assert!(matches!(support_projector(&neg, &tol()), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numeric_rank(&ComplexMatrix::identity(3), &tol()), 3);
        let rep = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[2.0, 2.0]]).unwrap();
        assert_eq!(numeric_rank(&rep, &tol()), 1);
        let stack = ComplexMatrix::from_columns(&pauli().map(|p| p.vectorize())).unwrap();
        assert_eq!(stack.shape(), (4, 4));
        assert_eq!(numeric_rank(&stack, &tol()), 4);
        assert_eq!(numeric_rank(&ComplexMatrix::zeros(2, 2), &tol()), 0);
    }

    #[test]
    fn kron_examples() {
        assert_eq!(
            kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)),
            ComplexMatrix::identity(4)
        );
        let k = kron(
            &ComplexMatrix::diag_real(&[1.0, 0.0]),
            &ComplexMatrix::diag_real(&[0.0, 1.0]),
        );
        assert_eq!(k, ComplexMatrix::diag_real(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn schmidt_examples() {
        let v = kron_vec(&basis_vector(2, 0), &basis_vector(2, 1));
        let s = schmidt(&v, 2, 2, &tol()).unwrap();
        assert_eq!(s.rank, 1);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-14);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = vec![c(h), ZERO, ZERO, c(h)];
        let s = schmidt(&bell, 2, 2, &tol()).unwrap();
        assert_eq!(s.rank, 2);
        for x in &s.coefficients {
            assert!((x - h).abs() < 1e-12);
        }
        assert!(schmidt(&bell, 3, 2, &tol()).is_err());
    }

    #[test]
    fn schmidt_matches_reshaped_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = random_state(6, &mut rng);
        let s = schmidt(&v, 3, 2, &tol()).unwrap();
        let m = reshape_bipartite(&v, 3, 2).unwrap();
        let oracle = m.to_na().singular_values();
        let mut oracle: Vec<f64> = oracle.iter().copied().collect();
        oracle.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in s.coefficients.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        let total: f64 = s.coefficients.iter().map(|x| x * x).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let back = s.reconstruct();
        assert!(norm(&back.iter().zip(&v).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-12);
    }

    #[test]
    fn partial_trace_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_state(2, &mut rng);
        let b = random_state(3, &mut rng);
        let ra = ComplexMatrix::projector(&a);
        let rb = ComplexMatrix::projector(&b);
        let joint = kron(&ra, &rb);
        assert!(partial_trace(&joint, 2, 3, Factor::First).unwrap().max_abs_diff(&ra) < 1e-14);
        assert!(partial_trace(&joint, 2, 3, Factor::Second).unwrap().max_abs_diff(&rb) < 1e-14);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = ComplexMatrix::projector(&[c(h), ZERO, ZERO, c(h)]);
        let red = partial_trace(&bell, 2, 2, Factor::First).unwrap();
        assert!(red.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-14);
        assert!(partial_trace(&bell, 3, 2, Factor::First).is_err());
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_matrix(6, 6, &mut rng);
        let rho = &g * &g.adjoint();
        // direct summation oracle for the full trace
        let mut direct = ZERO;
        for i in 0..6 {
            direct += rho[(i, i)];
        }
        for keep in [Factor::First, Factor::Second] {
            let red = partial_trace(&rho, 2, 3, keep).unwrap();
            assert!((red.trace() - direct).norm() < 1e-12 * direct.norm());
            assert!(red.anti_hermitian_norm() < 1e-12);
        }
    }

    #[test]
    fn least_singular_pair_wide_matrix() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 1.0]]).unwrap();
        let (s, v) = least_singular_pair(&m);
        assert!(s < 1e-14);
        assert!(norm(&m.mul_vec(&v)) < 1e-14);
        assert!((norm(&v) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn general_eigenvalues() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[-2.0, -3.0]]).unwrap();
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((ev[0] - c(-2.0)).norm() < 1e-12);
        assert!((ev[1] - c(-1.0)).norm() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn support_projector_fixes_psd(seed in any::<u64>(), n in 1usize..6, r in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_matrix(n, r.min(n), &mut rng);
            let psd = &g * &g.adjoint();
            let p = support_projector(&psd, &tol()).unwrap();
            let scale = psd.frobenius_norm();
            prop_assert!((&p * &psd).distance(&psd) <= 1e-9 * scale);
            prop_assert!((&psd * &p).distance(&psd) <= 1e-9 * scale);
            prop_assert!((&p * &p).distance(&p) <= 1e-9 * n as f64);
            prop_assert_eq!(numeric_rank(&p, &tol()), r.min(n));
        }

        #[test]
        fn herm_eig_reconstructs(seed in any::<u64>(), n in 1usize..7, scale in 1e-3f64..1e3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_matrix(n, n, &mut rng);
            let h = (&g + &g.adjoint()).scale_real(scale / g.frobenius_norm().max(1e-300));
            let e = herm_eig(&h, &tol()).unwrap();
            prop_assert!(h.distance(&e.reconstruct()) <= 1e-9 * h.frobenius_norm());
            let v = &e.vectors;
            prop_assert!((&v.adjoint() * v).distance(&ComplexMatrix::identity(n)) <= 1e-9);
            prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn rank_invariant_under_unitaries(seed in any::<u64>(), n in 2usize..6, r in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = r.min(n);
            let a = random_matrix(n, r, &mut rng);
            let b = random_matrix(r, n, &mut rng);
            let m = &a * &b;
            let u = random_unitary(n, &mut rng);
            let w = random_unitary(n, &mut rng);
            let k = numeric_rank(&m, &tol());
            prop_assert_eq!(k, r);
            prop_assert_eq!(numeric_rank(&(&u * &m), &tol()), k);
            prop_assert_eq!(numeric_rank(&(&m * &w), &tol()), k);
        }

        #[test]
        fn kron_mixed_product(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let [a, b, c, d] = [0, 1, 2, 3].map(|_| random_matrix(2, 2, &mut rng));
            let lhs = &kron(&a, &b) * &kron(&c, &d);
            let rhs = kron(&(&a * &c), &(&b * &d));
            prop_assert!(lhs.distance(&rhs) < 1e-12 * rhs.frobenius_norm().max(1.0));
        }

        #[test]
        fn schmidt_coefficients_are_singular_values(seed in any::<u64>(), dq in 1usize..5, da in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = random_state(dq * da, &mut rng);
            let s = schmidt(&v, dq, da, &tol()).unwrap();
            let oracle = singular_values(&reshape_bipartite(&v, dq, da).unwrap());
            for (a, b) in s.coefficients.iter().zip(&oracle) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
