//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] is the ambient representation of every operator in the
//! crate. Decompositions are delegated to `nalgebra`; everything here is a
//! deterministic function of the input bits.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty {rows}x{cols} matrix")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    /// Builds a matrix from real entries given row by row.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "zero-sized matrix");
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k, k);
        for i in 0..k {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
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

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    /// Row-major vectorization.
    pub fn vectorize(&self) -> Vec<C64> {
        self.data.clone()
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus; zero only for the zero matrix.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Linear combination `sum_j coeffs[j] * mats[j]`.
    pub fn combination(coeffs: &[C64], mats: &[ComplexMatrix]) -> Self {
        assert_eq!(coeffs.len(), mats.len());
        assert!(!mats.is_empty());
        let mut out = Self::zeros(mats[0].rows, mats[0].cols);
        for (c, m) in coeffs.iter().zip(mats) {
            assert_eq!((m.rows, m.cols), (out.rows, out.cols));
            for (o, x) in out.data.iter_mut().zip(&m.data) {
                *o += c * x;
            }
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols);
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
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
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
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: Vec<Vec<C64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        MatrixRepr { rows }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(d)?;
        ComplexMatrix::from_rows(&repr.rows).map_err(D::Error::custom)
    }
}

fn svd(
    a: &ComplexMatrix,
    vectors: bool,
) -> Result<nalgebra::SVD<C64, nalgebra::Dyn, nalgebra::Dyn>> {
    nalgebra::SVD::try_new(a.to_nalgebra(), vectors, vectors, f64::EPSILON, 0)
        .ok_or(Error::NoConvergence("singular value decomposition"))
}

/// Singular values in decreasing order.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = svd(a, false)?.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Operator norm (largest singular value).
pub fn op_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?[0])
}

/// Largest singular value together with unit vectors `u`, `v` with `A v = s u`.
pub fn top_singular_triplet(a: &ComplexMatrix) -> Result<(f64, Vec<C64>, Vec<C64>)> {
    let d = svd(a, true)?;
    let (idx, &s) = d
        .singular_values
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
        .expect("nonempty");
    let u =
        d.u.as_ref()
            .expect("u computed")
            .column(idx)
            .iter()
            .copied()
            .collect();
    let v = d
        .v_t
        .as_ref()
        .expect("v computed")
        .row(idx)
        .iter()
        .map(|z| z.conj())
        .collect();
    Ok((s, u, v))
}

/// Eigenvalues and an orthonormal eigenbasis (columns) of a normal matrix.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    /// `Q diag(lambda) Q*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_diag(&self.eigenvalues);
        &(&self.eigenvectors * &d) * &self.eigenvectors.adjoint()
    }
}

/// Spectral decomposition of a normal matrix.
///
/// Runs a complex Schur triangularization `A = Q T Q*` and reads the
/// eigenvalues off the diagonal of `T`. For a normal matrix `T` is diagonal,
/// so the strictly upper part is checked against `tol * max(1, |A|)`.
pub fn eig_normal(a: &ComplexMatrix, tol: f64) -> Result<SpectralDecomposition> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition of a {}x{} matrix",
            a.rows, a.cols
        )));
    }
    let norm = op_norm(a)?;
    let adj = a.adjoint();
    let commutator = &(a * &adj) - &(&adj * a);
    let defect = op_norm(&commutator)?;
    if defect > tol * norm * norm {
        return Err(Error::NotNormal { defect });
    }
    let schur = nalgebra::Schur::try_new(a.to_nalgebra(), f64::EPSILON, 0)
        .ok_or(Error::NoConvergence("complex Schur decomposition"))?;
    let (q, t) = schur.unpack();
    let k = a.rows;
    let mut off = 0.0f64;
    for i in 0..k {
        for j in i + 1..k {
            off += t[(i, j)].norm_sqr();
        }
    }
    let off = off.sqrt();
    if off > tol * norm.max(1.0) {
        return Err(Error::NotNormal { defect: off });
    }
    Ok(SpectralDecomposition {
        eigenvalues: (0..k).map(|i| t[(i, i)]).collect(),
        eigenvectors: ComplexMatrix::from_nalgebra(&q),
    })
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Precomputed minimum-norm least-squares solver for a fixed design matrix.
///
/// Singular values below `1e-12 * s_max` are treated as zero.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    design: ComplexMatrix,
    pinv: ComplexMatrix,
}

impl LeastSquares {
    pub fn new(design: &ComplexMatrix) -> Result<Self> {
        let d = svd(design, true)?;
        let u = d.u.as_ref().expect("u computed");
        let v_t = d.v_t.as_ref().expect("v computed");
        let smax = d.singular_values.iter().copied().fold(0.0, f64::max);
        let cutoff = 1e-12 * smax;
        let (m, p) = (design.rows, design.cols);
        let mut pinv = ComplexMatrix::zeros(p, m);
        for (r, &s) in d.singular_values.iter().enumerate() {
            if s <= cutoff || s == 0.0 {
                continue;
            }
            for i in 0..p {
                let vi = v_t[(r, i)].conj() / s;
                for j in 0..m {
                    pinv[(i, j)] += vi * u[(j, r)].conj();
                }
            }
        }
        Ok(Self {
            design: design.clone(),
            pinv,
        })
    }

    /// Builds the solver from column vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        Self::new(&columns_matrix(columns)?)
    }

    pub fn design(&self) -> &ComplexMatrix {
        &self.design
    }

    /// Minimum-norm least-squares coefficients and the residual norm.
    pub fn solve(&self, v: &[C64]) -> (Vec<C64>, f64) {
        assert_eq!(v.len(), self.design.rows, "right-hand side length");
        let c = self.pinv.matvec(v);
        let fit = self.design.matvec(&c);
        let res = fit
            .iter()
            .zip(v)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        (c, res)
    }
}

fn columns_matrix(columns: &[Vec<C64>]) -> Result<ComplexMatrix> {
    let len = columns
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Dimension("no vectors".into()))?;
    if columns.iter().any(|c| c.len() != len) {
        return Err(Error::Dimension("vectors of unequal length".into()));
    }
    let mut m = ComplexMatrix::zeros(len.max(1), columns.len());
    for (j, col) in columns.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    Ok(m)
}

/// Minimum-norm coefficients expressing `v` in the span of `basis`, if the
/// least-squares residual is at most `tol * max(1, |v|)`.
pub fn span_membership(v: &[C64], basis: &[Vec<C64>], tol: f64) -> Result<Option<Vec<C64>>> {
    if basis.is_empty() {
        return Err(Error::Dimension("empty basis".into()));
    }
    if basis.iter().any(|b| b.len() != v.len()) {
        return Err(Error::Dimension(format!(
            "basis vectors do not have length {}",
            v.len()
        )));
    }
    let ls = LeastSquares::from_columns(basis)?;
    let (c, res) = ls.solve(v);
    Ok((res <= tol * vec_norm(v).max(1.0)).then_some(c))
}

/// Numerical rank: singular values above `tol * s_max` of the matrix whose
/// columns are `vectors`.
pub fn gram_rank(vectors: &[Vec<C64>], tol: f64) -> Result<usize> {
    let m = columns_matrix(vectors)?;
    let s = singular_values(&m)?;
    let smax = s[0];
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > tol * smax).count())
}

/// Kronecker product with block layout `A_ij * B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for p in 0..b.rows {
                for q in 0..b.cols {
                    out[(i * b.rows + p, j * b.cols + q)] = aij * b[(p, q)];
                }
            }
        }
    }
    out
}

/// `|U*U - I|` in operator norm.
pub fn unitarity_defect(u: &ComplexMatrix) -> Result<f64> {
    if !u.is_square() {
        return Err(Error::Dimension("unitary must be square".into()));
    }
    op_norm(&(&(&u.adjoint() * u) - &ComplexMatrix::identity(u.rows)))
}

pub(crate) fn determinant(a: &ComplexMatrix) -> C64 {
    assert!(a.is_square());
    a.to_nalgebra().determinant()
}

pub(crate) fn inverse(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    a.to_nalgebra()
        .try_inverse()
        .map(|m| ComplexMatrix::from_nalgebra(&m))
}
