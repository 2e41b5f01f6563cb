//! Dense real linear algebra used throughout the crate.
//!
//! Everything here works on small row-major matrices (dimension up to a few
//! dozen). Singularity and definiteness thresholds are scaled by
//! `n * f64::EPSILON * max|entry|` so that results do not depend on the
//! overall scale of the input.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use thiserror::Error;

/// Errors raised by the linear-algebra kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular at working precision (pivot {pivot:e} <= {threshold:e})")]
    SingularMatrix { pivot: f64, threshold: f64 },
    #[error("matrix is not symmetric: entries ({row}, {col}) and ({col}, {row}) differ")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix is not positive definite (pivot {index} is {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("removing every index leaves an empty matrix")]
    EmptyResult,
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense row-major matrix of finite `f64` entries.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Dense vector of finite `f64` entries.
#[derive(Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

fn check_finite(rows: usize, cols: usize, data: &[f64]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(LinalgError::NonFinite {
            row: k / cols.max(1),
            col: k % cols.max(1),
        }),
        None => {
            debug_assert_eq!(data.len(), rows * cols);
            Ok(())
        }
    }
}

impl Matrix {
    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::DimensionMismatch(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        check_finite(rows, cols, &data)?;
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of rows; all rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch(format!(
                    "row {i} has length {}, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

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

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Single-column matrix holding `v`.
    pub fn column(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
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

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetrize(&self) -> Self {
        assert!(self.is_square());
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    /// Symmetric within `rel_tol * max|M|`; returns the first offending pair.
    pub fn check_symmetric(&self, rel_tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let tol = rel_tol * self.max_abs();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut b = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                b[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        b
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `true` when every entry strictly below the diagonal is zero.
    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| (0..i.min(self.cols)).all(|j| self[(i, j)] == 0.0))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Vector {
    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(LinalgError::DimensionMismatch(
                "vector must be non-empty".into(),
            ));
        }
        check_finite(1, data.len(), &data)?;
        Ok(Self { data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

impl std::ops::Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.data
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vector{:?}", self.data)
    }
}

fn require_square(m: &Matrix) -> Result<usize> {
    if m.is_square() {
        Ok(m.rows)
    } else {
        Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        })
    }
}

/// Solves `M X = rhs` by LU factorisation with partial pivoting.
///
/// Fails with [`LinalgError::SingularMatrix`] when a pivot falls to or below
/// `n * eps * max|M|`.
pub fn solve_linear(m: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    let n = require_square(m)?;
    if rhs.rows != n {
        return Err(LinalgError::DimensionMismatch(format!(
            "right-hand side has {} rows, matrix is {n}x{n}",
            rhs.rows
        )));
    }
    let threshold = n as f64 * f64::EPSILON * m.max_abs();
    let k = rhs.cols;
    let mut a = m.data.clone();
    let mut x = rhs.data.clone();

    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= threshold {
            return Err(LinalgError::SingularMatrix {
                pivot: piv_abs,
                threshold,
            });
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            for j in 0..k {
                x.swap(col * k + j, piv * k + j);
            }
        }
        let p = a[col * n + col];
        for r in (col + 1)..n {
            let f = a[r * n + col] / p;
            if f == 0.0 {
                continue;
            }
            a[r * n + col] = 0.0;
            for j in (col + 1)..n {
                a[r * n + j] -= f * a[col * n + j];
            }
            for j in 0..k {
                x[r * k + j] -= f * x[col * k + j];
            }
        }
    }

    for col in (0..n).rev() {
        let p = a[col * n + col];
        for j in 0..k {
            let mut s = x[col * k + j];
            for c in (col + 1)..n {
                s -= a[col * n + c] * x[c * k + j];
            }
            x[col * k + j] = s / p;
        }
    }
    Ok(Matrix {
        rows: n,
        cols: k,
        data: x,
    })
}

/// Solves `M x = b` for a single right-hand side.
pub fn solve_vec(m: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(solve_linear(m, &Matrix::column(b))?.data)
}

// Padé(13) numerator coefficients.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring around a degree-13 Padé
/// approximant.
///
/// The matrix is scaled by `2^-s` with `s = max(0, ceil(log2 ||M||_1) + 1)`,
/// so the Padé core always sees a 1-norm of at most one half.
pub fn expm(m: &Matrix) -> Result<Matrix> {
    let n = require_square(m)?;
    let norm = m.norm_1();
    let s = if norm > 0.0 {
        (norm.log2().ceil() as i32 + 1).max(0)
    } else {
        0
    };
    let a = m.scale(0.5f64.powi(s));
    let id = Matrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let lin = |c: [f64; 4], mats: [&Matrix; 4]| -> Matrix {
        let mut out = Matrix::zeros(n, n);
        for (coef, mat) in c.iter().zip(mats) {
            for (o, v) in out.data.iter_mut().zip(&mat.data) {
                *o += coef * v;
            }
        }
        out
    };

    let u_hi = lin([b[13], b[11], b[9], 0.0], [&a6, &a4, &a2, &id]);
    let u_inner = &(&a6 * &u_hi) + &lin([b[7], b[5], b[3], b[1]], [&a6, &a4, &a2, &id]);
    let u = &a * &u_inner;
    let v_hi = lin([b[12], b[10], b[8], 0.0], [&a6, &a4, &a2, &id]);
    let v = &(&a6 * &v_hi) + &lin([b[6], b[4], b[2], b[0]], [&a6, &a4, &a2, &id]);

    let mut r = solve_linear(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = &r * &r;
    }
    check_finite(n, n, &r.data)?;
    Ok(r)
}

/// Cholesky factor `L` (lower triangular) with `L Lᵀ = M`.
///
/// `M` must be symmetric within `1e-9 * max|M|`. A pivot at or below
/// `n * eps * max|M|` rejects the matrix as not positive definite.
pub fn cholesky(m: &Matrix) -> Result<Matrix> {
    let n = require_square(m)?;
    m.check_symmetric(1e-9)?;
    let threshold = n as f64 * f64::EPSILON * m.max_abs();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= threshold || !d.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Lower-triangular factor `L` with `L Lᵀ ≈ M` for a positive semidefinite
/// `M`. Pivots at or below `n * eps * max|M|` are treated as zero and their
/// columns dropped. Used for sampling from possibly degenerate Gaussians.
pub fn cholesky_semidefinite(m: &Matrix) -> Result<Matrix> {
    let n = require_square(m)?;
    m.check_symmetric(1e-9)?;
    let scale = m.max_abs();
    let threshold = n as f64 * f64::EPSILON * scale;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= threshold {
            // Strongly negative pivots mean the input was not semidefinite.
            if d < -1e-8 * scale.max(f64::MIN_POSITIVE) {
                return Err(LinalgError::NotPositiveDefinite { index: j, pivot: d });
            }
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Default rank tolerance: `max(rows, cols) * eps * max|M|`.
pub fn default_rank_tol(m: &Matrix) -> f64 {
    m.rows.max(m.cols) as f64 * f64::EPSILON * m.max_abs()
}

/// Numerical rank by Gaussian elimination with complete pivoting; pivots at
/// or below `tol` terminate the reduction.
pub fn rank(m: &Matrix, tol: f64) -> usize {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.data.clone();
    let mut r = 0;
    while r < rows.min(cols) {
        let mut best = (r, r, -1.0);
        for i in r..rows {
            for j in r..cols {
                let v = a[i * cols + j].abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let (pi, pj, pv) = best;
        if pv <= tol || pv == 0.0 {
            break;
        }
        if pi != r {
            for j in 0..cols {
                a.swap(r * cols + j, pi * cols + j);
            }
        }
        if pj != r {
            for i in 0..rows {
                a.swap(i * cols + r, i * cols + pj);
            }
        }
        let p = a[r * cols + r];
        for i in (r + 1)..rows {
            let f = a[i * cols + r] / p;
            for j in r..cols {
                a[i * cols + j] -= f * a[r * cols + j];
            }
        }
        r += 1;
    }
    r
}

/// Kronecker product; a `p×q` and an `m×n` input give a `pm × qn` result.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let s = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Deletes the rows and columns listed in `removed` (0-based). Remaining
/// indices keep their order.
pub fn principal_submatrix(m: &Matrix, removed: &[usize]) -> Result<Matrix> {
    let n = require_square(m)?;
    if let Some(&bad) = removed.iter().find(|&&i| i >= n) {
        return Err(LinalgError::IndexOutOfRange { index: bad, dim: n });
    }
    let keep: Vec<usize> = (0..n).filter(|i| !removed.contains(i)).collect();
    if keep.is_empty() {
        return Err(LinalgError::EmptyResult);
    }
    let mut out = Matrix::zeros(keep.len(), keep.len());
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            out[(a, b)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Solves the continuous Lyapunov equation `B X + X Bᵀ + Q = 0` through the
/// vectorised `p² × p²` system `(I ⊗ B + B ⊗ I) vec(X) = -vec(Q)`. The result
/// is symmetrised when `Q` is symmetric.
pub fn solve_lyapunov(b: &Matrix, q: &Matrix) -> Result<Matrix> {
    let p = require_square(b)?;
    if q.rows != p || q.cols != p {
        return Err(LinalgError::DimensionMismatch(format!(
            "Lyapunov right-hand side is {}x{}, expected {p}x{p}",
            q.rows, q.cols
        )));
    }
    let id = Matrix::identity(p);
    let op = &kron(&id, b) + &kron(b, &id);
    // Column-major vec of Q.
    let rhs: Vec<f64> = (0..p)
        .flat_map(|j| (0..p).map(move |i| (i, j)))
        .map(|(i, j)| -q[(i, j)])
        .collect();
    let v = solve_vec(&op, &rhs)?;
    let mut x = Matrix::zeros(p, p);
    for j in 0..p {
        for i in 0..p {
            x[(i, j)] = v[j * p + i];
        }
    }
    if q.check_symmetric(1e-12).is_ok() {
        x = x.symmetrize();
    }
    Ok(x)
}
