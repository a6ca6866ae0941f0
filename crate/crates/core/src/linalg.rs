//! Minimal dense linear algebra kernels: Householder least squares and a
//! cyclic Jacobi eigensolver, sized for matrices up to a few hundred rows.
//!
//! Everything is plain `f64` in row-major storage. There is deliberately no
//! BLAS backend: the matrices studied here are tiny and the point is a
//! self-contained, auditable implementation.

use crate::error::{Error, Result};

/// Relative rank tolerance used by [`least_squares`]: the factorization is
/// declared rank deficient when the smallest factor diagonal magnitude drops
/// below this fraction of the largest.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Convergence threshold for the Jacobi eigensolver, relative to the
/// Frobenius norm of the input.
pub const JACOBI_TOL: f64 = 1e-14;

/// Sweep cap for the Jacobi eigensolver. Quadratic convergence makes this
/// generous for any order this crate handles.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// A dense real matrix in row-major order. Entries are validated to be
/// finite on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Build a matrix from row-major entries. Fails if the entry count does
    /// not equal `rows * cols` or any entry is NaN / infinite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries cannot fill a {} x {} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        if let Some(position) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { position });
        }
        Ok(Self { rows, cols, data })
    }

    /// All-zeros matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Build from a function of (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    /// Copy of column `col`.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    /// Submatrix keeping the listed columns, in the given order.
    pub fn columns(&self, cols: &[usize]) -> Result<DenseMatrix> {
        for &j in cols {
            if j >= self.cols {
                return Err(Error::InvalidSupport(format!(
                    "column index {} out of range for {} columns",
                    j, self.cols
                )));
            }
        }
        Ok(Self::from_fn(self.rows, cols.len(), |i, jj| {
            self.get(i, cols[jj])
        }))
    }

    /// `A v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matvec: vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| dot(&self.data[i * self.cols..(i + 1) * self.cols], v))
            .collect())
    }

    /// `A^T v`; one entry per column, i.e. the inner product of `v` with
    /// every column.
    pub fn transpose_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "transpose_matvec: vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, &a) in out.iter_mut().zip(row) {
                *o += vi * a;
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Sum of the diagonal.
    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Max absolute asymmetry |G[i,j] - G[j,i]| with its location.
    fn max_asymmetry(&self) -> (usize, usize, f64) {
        let mut worst = (0, 0, 0.0);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let d = (self.get(i, j) - self.get(j, i)).abs();
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        worst
    }
}

impl std::fmt::Display for DenseMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:>12.6}", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A dense real vector with finite entries, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(position) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { position });
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// Wrap values that are already known finite (outputs of our own kernels).
    pub(crate) fn from_computed(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Eigenvalues of a symmetric matrix, sorted ascending, plus the number of
/// Jacobi sweeps it took to extract them.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub iterations_used: usize,
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Least squares `min_z ||A z - b||_2` by Householder orthogonal
/// factorization, with the default rank tolerance.
///
/// Returns `(coefficients, residual)` where `residual = b - A * coefficients`
/// is orthogonal to every column of `A`.
pub fn least_squares(a: &DenseMatrix, b: &Vector) -> Result<(Vector, Vector)> {
    least_squares_with_tol(a, b, DEFAULT_RANK_TOL)
}

/// [`least_squares`] with an explicit relative rank tolerance.
///
/// Householder QR is used instead of the normal equations on purpose: the
/// Gram squaring of the normal equations loses exactly the conditioning this
/// crate studies when a restricted isometry constant approaches 1.
pub fn least_squares_with_tol(a: &DenseMatrix, b: &Vector, rank_tol: f64) -> Result<(Vector, Vector)> {
    let m = a.rows();
    let k = a.cols();
    if k == 0 || m < k {
        return Err(Error::DimensionMismatch(format!(
            "least squares needs rows >= cols >= 1, got {} x {}",
            m, k
        )));
    }
    if b.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} against {} rows",
            b.len(),
            m
        )));
    }

    // Working copies: r is reduced in place to the upper-triangular factor,
    // qtb accumulates Q^T b.
    let mut r = a.clone();
    let mut qtb = b.as_slice().to_vec();

    for j in 0..k {
        // Householder reflector annihilating column j below the diagonal.
        let sigma = {
            let mut s = 0.0;
            for i in j..m {
                let x = r.get(i, j);
                s += x * x;
            }
            s.sqrt()
        };
        if sigma == 0.0 {
            // Entire column segment is zero; leave the zero diagonal for the
            // rank check below.
            continue;
        }
        let alpha = if r.get(j, j) >= 0.0 { -sigma } else { sigma };
        // v = x - alpha e1, stored temporarily in the column.
        let mut vtv = 0.0;
        r.set(j, j, r.get(j, j) - alpha);
        for i in j..m {
            let v = r.get(i, j);
            vtv += v * v;
        }
        // Apply H = I - 2 v v^T / (v^T v) to the remaining columns and to qtb.
        for col in (j + 1)..k {
            let mut vtx = 0.0;
            for i in j..m {
                vtx += r.get(i, j) * r.get(i, col);
            }
            let f = 2.0 * vtx / vtv;
            for i in j..m {
                let x = r.get(i, col) - f * r.get(i, j);
                r.set(i, col, x);
            }
        }
        let mut vtb = 0.0;
        for i in j..m {
            vtb += r.get(i, j) * qtb[i];
        }
        let f = 2.0 * vtb / vtv;
        for i in j..m {
            qtb[i] -= f * r.get(i, j);
        }
        // Store the new diagonal and clear the reflector from the factor.
        r.set(j, j, alpha);
        for i in (j + 1)..m {
            r.set(i, j, 0.0);
        }
    }

    // Rank check on the factor diagonal.
    let diagonals: Vec<f64> = (0..k).map(|j| r.get(j, j).abs()).collect();
    let max_diag = diagonals.iter().cloned().fold(0.0_f64, f64::max);
    let min_diag = diagonals.iter().cloned().fold(f64::INFINITY, f64::min);
    if max_diag == 0.0 || min_diag <= rank_tol * max_diag {
        return Err(Error::RankDeficient {
            min_diag,
            max_diag,
            tol: rank_tol,
        });
    }

    // Back substitution R z = (Q^T b)[..k].
    let mut coeffs = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = qtb[j];
        for col in (j + 1)..k {
            s -= r.get(j, col) * coeffs[col];
        }
        coeffs[j] = s / r.get(j, j);
    }

    // Residual recomputed explicitly against the original operands.
    let ax = a.matvec(&coeffs)?;
    let residual: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
    Ok((Vector::from_computed(coeffs), Vector::from_computed(residual)))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
///
/// Rotations sweep the strict upper triangle in row order until the
/// off-diagonal Frobenius norm falls below [`JACOBI_TOL`] times the Frobenius
/// norm of the input, which is invariant under the rotations. Only the
/// eigenvalues are accumulated; this crate never needs eigenvectors.
pub fn symmetric_eigenvalues(g: &DenseMatrix) -> Result<Spectrum> {
    let n = g.rows();
    if n != g.cols() || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square nonempty matrix, got {} x {}",
            g.rows(),
            g.cols()
        )));
    }
    let scale = g.frobenius_norm();
    let (row, col, deviation) = g.max_asymmetry();
    if deviation > 1e-12 * scale.max(1.0) {
        return Err(Error::NotSymmetric {
            row,
            col,
            deviation,
        });
    }

    // Work on the symmetrized copy so a tolerated asymmetry cannot bias one
    // triangle over the other.
    let mut a = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (g.get(i, j) + g.get(j, i)));
    let threshold = JACOBI_TOL * scale;

    let off_norm = |a: &DenseMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let x = a.get(i, j);
                s += 2.0 * x * x;
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off_norm(&a),
            });
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                // Rotation angle that annihilates a[p,q].
                let theta = 0.5 * (a.get(q, q) - a.get(p, p)) / apq;
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                let app = a.get(p, p);
                let aqq = a.get(q, q);
                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    let new_ip = c * aip - s * aiq;
                    let new_iq = s * aip + c * aiq;
                    a.set(i, p, new_ip);
                    a.set(p, i, new_ip);
                    a.set(i, q, new_iq);
                    a.set(q, i, new_iq);
                }
            }
        }
        sweeps += 1;
    }

    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    eigenvalues.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    Ok(Spectrum {
        eigenvalues,
        iterations_used: sweeps,
    })
}

/// Gram matrix `A^T A`, exactly symmetric: each unordered entry pair is
/// computed once and mirrored.
pub fn gram(a: &DenseMatrix) -> DenseMatrix {
    let n = a.cols();
    let mut g = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for row in 0..a.rows() {
                s += a.get(row, i) * a.get(row, j);
            }
            g.set(i, j, s);
            g.set(j, i, s);
        }
    }
    g
}
