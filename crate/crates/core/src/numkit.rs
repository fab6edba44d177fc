//! Dense real linear algebra used throughout the crate.
//!
//! [`DenseMatrix`] is a plain row-major container. Factorizations that need a
//! robust eigen/SVD kernel go through `nalgebra`; the Cholesky factor and the
//! solves built on it are written out here so that pivot failures can be
//! reported precisely.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative gap below which two singular values are treated as tied.
pub const DEGENERACY_RTOL: f64 = 1e-9;

/// Default relative rank cutoff, scaled by the largest singular value.
pub const DEFAULT_RANK_RTOL: f64 = 1e-12;

/// Real matrix with explicit dimensions, stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting NaN/Inf.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// First `k` columns.
    pub fn leading_columns(&self, k: usize) -> Self {
        let mut m = Self::zeros(self.rows, k);
        for i in 0..self.rows {
            for j in 0..k {
                m[(i, j)] = self[(i, j)];
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::InvalidInput(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                let rrow = rhs.row(l);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, r) in orow.iter_mut().zip(rrow) {
                    *o += a * r;
                }
            }
        }
        Ok(out)
    }

    /// `self * rhs`, panicking on shape mismatch. Internal callers check shapes up front.
    pub(crate) fn mul(&self, rhs: &DenseMatrix) -> Self {
        self.matmul(rhs).expect("shape mismatch")
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::InvalidInput(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs_diff(&self, rhs: &DenseMatrix) -> f64 {
        assert_eq!(self.shape(), rhs.shape());
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Thin singular value decomposition with the rank cutoff already applied.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SvdFactors {
    /// n x r, orthonormal columns.
    pub u: DenseMatrix,
    /// m x r, orthonormal columns.
    pub v: DenseMatrix,
    /// Strictly positive, non-increasing.
    pub sigma: Vec<f64>,
    pub rank: usize,
    /// Set when two retained singular values are within [`DEGENERACY_RTOL`].
    /// Per-column comparisons are meaningless in that case; compare projectors.
    pub degenerate: bool,
}

impl SvdFactors {
    /// `U diag(sigma) V^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (j, s) in self.sigma.iter().enumerate() {
                us[(i, j)] *= s;
            }
        }
        us.mul(&self.v.transpose())
    }

    pub fn u_column(&self, j: usize) -> Vec<f64> {
        self.u.column(j)
    }

    pub fn v_column(&self, j: usize) -> Vec<f64> {
        self.v.column(j)
    }
}

pub fn default_rank_cutoff(m: &DenseMatrix) -> f64 {
    let s = nalgebra::SVD::new(m.to_nalgebra(), false, false);
    DEFAULT_RANK_RTOL * s.singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Thin SVD. Singular values `<= rank_cutoff` are dropped, and each singular
/// pair is sign-fixed so the largest-magnitude entry of `u_j` is positive.
pub fn svd(m: &DenseMatrix, rank_cutoff: f64) -> Result<SvdFactors> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    if !(rank_cutoff >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rank_cutoff must be >= 0, got {rank_cutoff}"
        )));
    }
    let (n, cols) = m.shape();
    if n == 0 || cols == 0 {
        return Ok(SvdFactors {
            u: DenseMatrix::zeros(n, 0),
            v: DenseMatrix::zeros(cols, 0),
            sigma: vec![],
            rank: 0,
            degenerate: false,
        });
    }
    let dec = nalgebra::SVD::new(m.to_nalgebra(), true, true);
    let u = dec.u.expect("u requested");
    let v_t = dec.v_t.expect("v_t requested");

    let mut order: Vec<usize> = (0..dec.singular_values.len())
        .filter(|&i| dec.singular_values[i] > rank_cutoff)
        .collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));

    let rank = order.len();
    let mut uu = DenseMatrix::zeros(n, rank);
    let mut vv = DenseMatrix::zeros(cols, rank);
    let mut sigma = Vec::with_capacity(rank);
    for (j, &src) in order.iter().enumerate() {
        sigma.push(dec.singular_values[src]);
        // Pivot on the first entry of maximal magnitude.
        let mut pivot = 0;
        for i in 1..n {
            if u[(i, src)].abs() > u[(pivot, src)].abs() {
                pivot = i;
            }
        }
        let sign = if u[(pivot, src)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            uu[(i, j)] = sign * u[(i, src)];
        }
        for i in 0..cols {
            vv[(i, j)] = sign * v_t[(src, i)];
        }
    }
    let degenerate = sigma
        .windows(2)
        .any(|w| (w[0] - w[1]).abs() <= DEGENERACY_RTOL * w[0]);
    Ok(SvdFactors {
        u: uu,
        v: vv,
        sigma,
        rank,
        degenerate,
    })
}

/// [`svd`] with the default relative cutoff.
pub fn svd_default(m: &DenseMatrix) -> Result<SvdFactors> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    svd(m, default_rank_cutoff(m))
}

/// Lower-triangular `L` with `L L^T = M`.
pub fn cholesky_lower(m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "cholesky needs a square matrix, got {:?}",
            m.shape()
        )));
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    if !m.is_symmetric(1e-12 * (1.0 + m.frobenius_norm())) {
        return Err(Error::InvalidInput("cholesky needs a symmetric matrix".into()));
    }
    let n = m.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for p in 0..j {
            d -= l[(j, p)] * l[(j, p)];
        }
        if !(d > 0.0) {
            return Err(Error::Decomposition { pivot: j });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for p in 0..j {
                s -= l[(i, p)] * l[(j, p)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `M X = B` for symmetric positive-definite `M` via its Cholesky factor.
pub fn solve_spd(m: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let l = cholesky_lower(m)?;
    cholesky_solve(&l, b)
}

pub(crate) fn cholesky_solve(l: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let n = l.rows();
    if b.rows() != n {
        return Err(Error::InvalidInput(format!(
            "right-hand side has {} rows, expected {n}",
            b.rows()
        )));
    }
    let mut x = b.clone();
    for c in 0..b.cols() {
        // forward: L y = b
        for i in 0..n {
            let mut s = x[(i, c)];
            for p in 0..i {
                s -= l[(i, p)] * x[(p, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for p in i + 1..n {
                s -= l[(p, i)] * x[(p, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    Ok(x)
}

/// Leading `k` left singular vectors of `m` as an n x k matrix.
pub fn pca_basis(m: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    let f = svd_default(m)?;
    if k > f.rank {
        return Err(Error::RankDeficient {
            requested: k,
            deficient: k - f.rank,
        });
    }
    Ok(f.u.leading_columns(k))
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues in descending order.
pub fn symmetric_eigen(m: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if !m.is_symmetric(1e-9 * (1.0 + m.frobenius_norm())) {
        return Err(Error::InvalidInput("matrix is not symmetric".into()));
    }
    let e = nalgebra::SymmetricEigen::new(m.to_nalgebra());
    let mut order: Vec<usize> = (0..m.rows()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let mut vectors = DenseMatrix::zeros(m.rows(), m.rows());
    for (j, &src) in order.iter().enumerate() {
        for i in 0..m.rows() {
            vectors[(i, j)] = e.eigenvectors[(i, src)];
        }
    }
    Ok((values, vectors))
}

/// Orthogonal projector onto the column space of `a`.
pub fn subspace_projector(a: &DenseMatrix) -> Result<DenseMatrix> {
    let f = svd_default(a)?;
    Ok(f.u.mul(&f.u.transpose()))
}

/// `A A^T / tr(A A^T)`: the density-matrix view of a projection matrix.
pub fn normalized_gram(a: &DenseMatrix) -> Result<DenseMatrix> {
    let g = a.mul(&a.transpose());
    let t = g.trace();
    if !(t > 0.0) {
        return Err(Error::DivisionByZero("normalized_gram"));
    }
    Ok(g.scale(1.0 / t))
}

/// Frobenius distance between normalized Gram matrices of two projections.
pub fn projector_distance(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    Ok(normalized_gram(a)?.sub(&normalized_gram(b)?)?.frobenius_norm())
}

/// Relative Frobenius error `|a - b| / |b|`.
pub fn relative_error(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).expect("shape mismatch").frobenius_norm() / b.frobenius_norm()
}
