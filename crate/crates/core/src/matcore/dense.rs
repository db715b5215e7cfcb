//! Row-major dense matrix, reference GEMM and norms.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row-major matrix of 64-bit reals.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix({}x{})", self.rows, self.cols)?;
        if self.data.len() <= 64 {
            f.debug_list()
                .entries(self.data.chunks(self.cols.max(1)))
                .finish()?;
        }
        Ok(())
    }
}

impl DenseMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape(format!("invalid dimensions {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("ragged rows"));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
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

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Copies the leading `cols` columns.
    pub fn leading_columns(&self, cols: usize) -> Self {
        assert!(cols >= 1 && cols <= self.cols);
        Self::from_fn(self.rows, cols, |i, j| self[(i, j)])
    }

    /// Multiplies column `j` by `s[j]` (right multiplication by a diagonal).
    pub fn scale_columns(&self, s: &[f64]) -> Self {
        assert_eq!(s.len(), self.cols);
        let mut out = self.clone();
        for row in out.data.chunks_mut(self.cols) {
            for (v, &f) in row.iter_mut().zip(s) {
                *v *= f;
            }
        }
        out
    }

    /// Multiplies row `i` by `s[i]` (left multiplication by a diagonal).
    pub fn scale_rows(&self, s: &[f64]) -> Self {
        assert_eq!(s.len(), self.rows);
        let mut out = self.clone();
        for (row, &f) in out.data.chunks_mut(self.cols).zip(s) {
            for v in row {
                *v *= f;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        gemm(self, other, 1.0, 0.0, None)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `alpha * a * b + beta * c`.
///
/// Rows of the output are computed in parallel; every output element is
/// accumulated sequentially over the inner dimension in ascending order, so
/// the result is bitwise independent of the thread count.
pub fn gemm(
    a: &DenseMatrix,
    b: &DenseMatrix,
    alpha: f64,
    beta: f64,
    c: Option<&DenseMatrix>,
) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return Err(Error::shape(format!(
            "gemm inner dimensions differ: {}x{} * {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    if let Some(c) = c {
        if c.shape() != (a.rows, b.cols) {
            return Err(Error::shape(format!(
                "gemm addend is {}x{}, expected {}x{}",
                c.rows, c.cols, a.rows, b.cols
            )));
        }
    }
    let (m, k, n) = (a.rows, a.cols, b.cols);
    let mut out = vec![0.0; m * n];
    out.par_chunks_mut(n).enumerate().for_each(|(i, acc)| {
        let arow = &a.data[i * k..(i + 1) * k];
        for (l, &ail) in arow.iter().enumerate() {
            let brow = &b.data[l * n..(l + 1) * n];
            for (o, &blj) in acc.iter_mut().zip(brow) {
                *o += ail * blj;
            }
        }
        match c {
            Some(c) => {
                let crow = c.row(i);
                for (o, &cij) in acc.iter_mut().zip(crow) {
                    *o = alpha * *o + beta * cij;
                }
            }
            None => {
                for o in acc.iter_mut() {
                    *o *= alpha;
                }
            }
        }
    });
    Ok(DenseMatrix {
        rows: m,
        cols: n,
        data: out,
    })
}

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    a.data.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest singular value.
///
/// Small matrices (min dimension <= 64) go through the Jacobi oracle; larger
/// ones use power iteration on `AᵀA`.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    if a.rows.min(a.cols) <= 64 {
        return super::oracle_svd(a)
            .map(|f| f.sigma.first().copied().unwrap_or(0.0))
            .expect("min dimension within oracle limit");
    }
    power_iteration(a, 1e-10, 20_000)
}

fn power_iteration(a: &DenseMatrix, tol: f64, max_iter: usize) -> f64 {
    let n = a.cols;
    // Deterministic, non-degenerate start vector.
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + (i as f64 * 0.618_034).fract())
        .collect();
    normalize(&mut x);
    let mut prev = 0.0;
    for _ in 0..max_iter {
        let y = mat_vec(a, &x);
        let mut z = mat_t_vec(a, &y);
        let lambda = dot(&x, &z);
        let norm = normalize(&mut z);
        if norm == 0.0 {
            return 0.0;
        }
        x = z;
        if (lambda - prev).abs() <= tol * lambda.abs() {
            return lambda.max(0.0).sqrt();
        }
        prev = lambda;
    }
    prev.max(0.0).sqrt()
}

fn mat_vec(a: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    (0..a.rows).map(|i| dot(a.row(i), x)).collect()
}

fn mat_t_vec(a: &DenseMatrix, y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.cols];
    for (i, &yi) in y.iter().enumerate() {
        for (o, &v) in out.iter_mut().zip(a.row(i)) {
            *o += v * yi;
        }
    }
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

/// `‖approx − exact‖_F / ‖exact‖_F`.
pub fn relative_error(approx: &DenseMatrix, exact: &DenseMatrix) -> Result<f64> {
    let denom = frobenius_norm(exact);
    if denom == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(frobenius_norm(&approx.sub(exact)?) / denom)
}
