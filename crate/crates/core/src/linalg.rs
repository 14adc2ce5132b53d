//! Dense symmetric linear algebra sized for small problems (dimension up to ~50).
//!
//! Everything is stored row-major. The generalized eigenproblem `a ψ = λ b ψ` is
//! reduced to a standard one through the Cholesky factor of `b` and solved with
//! cyclic Jacobi rotations.

use crate::{Error, Result};

/// Maximum number of cyclic Jacobi sweeps.
pub const MAX_SWEEPS: usize = 100;
/// Convergence threshold on the off-diagonal Frobenius norm, relative to `‖a‖_F`.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-14;
/// A Cholesky pivot must exceed this fraction of the largest input diagonal entry.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// General dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        Ok((0..self.rows).map(|r| dot(self.row(r), x)).collect())
    }

    /// `selfᵀ · x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, x.len())?;
        let mut out = vec![0.0; self.cols];
        for (r, &xr) in x.iter().enumerate() {
            for (o, &v) in out.iter_mut().zip(self.row(r)) {
                *o += v * xr;
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Dense symmetric matrix. Both halves are stored and are bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Wraps row-major `data`, rejecting anything that is not exactly symmetric.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        for q in 0..dim {
            for r in q + 1..dim {
                if data[q * dim + r] != data[r * dim + q] {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({q}, {r})"
                    )));
                }
            }
        }
        Ok(SymMatrix { dim, data })
    }

    /// Builds a symmetric matrix from the upper triangle `f(q, r)`, `q <= r`.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        let mut data = vec![0.0; dim * dim];
        for q in 0..dim {
            for r in q..dim {
                let v = f(q, r);
                data[q * dim + r] = v;
                data[r * dim + q] = v;
            }
        }
        SymMatrix { dim, data }
    }

    /// Symmetric part `(m + mᵀ)/2` of a square matrix.
    pub fn symmetrize(m: &Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        Ok(SymMatrix::from_upper(m.rows(), |q, r| {
            if q == r {
                m.get(q, q)
            } else {
                0.5 * (m.get(q, r) + m.get(r, q))
            }
        }))
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix::from_upper(dim, |_, _| 0.0)
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix::from_diag(&vec![1.0; dim])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        SymMatrix::from_upper(diag.len(), |q, r| if q == r { diag[q] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, q: usize, r: usize) -> f64 {
        self.data[q * self.dim + r]
    }

    pub fn row(&self, q: usize) -> &[f64] {
        &self.data[q * self.dim..(q + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, x.len())?;
        Ok((0..self.dim).map(|q| dot(self.row(q), x)).collect())
    }

    /// `xaᵀ · self · xb`
    pub fn bilinear(&self, xa: &[f64], xb: &[f64]) -> Result<f64> {
        check_len(self.dim, xa.len())?;
        Ok(dot(xa, &self.mul_vec(xb)?))
    }

    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        self.bilinear(x, x)
    }

    /// `self + shift · I`
    pub fn add_identity(&self, shift: f64) -> SymMatrix {
        SymMatrix::from_upper(self.dim, |q, r| {
            if q == r {
                self.get(q, q) + shift
            } else {
                self.get(q, r)
            }
        })
    }

    /// Congruence transform `tᵀ · self · t`.
    pub fn congruence(&self, t: &Matrix) -> Result<SymMatrix> {
        let at = self.to_matrix().matmul(t)?;
        SymMatrix::symmetrize(&t.transpose().matmul(&at)?)
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        self.to_matrix().matmul(other)
    }
}

/// Lower-triangular `L` with positive diagonal such that `L·Lᵀ` is the factored matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    l: Matrix,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn lower(&self) -> &Matrix {
        &self.l
    }

    /// Solves `L z = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        check_len(n, b.len())?;
        let mut z = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let s = z[i] - dot(&row[..i], &z[..i]);
            z[i] = s / row[i];
        }
        Ok(z)
    }

    /// Solves `Lᵀ x = z`.
    pub fn solve_upper(&self, z: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        check_len(n, z.len())?;
        let mut x = z.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l.get(k, i) * x[k];
            }
            x[i] = s / self.l.get(i, i);
        }
        Ok(x)
    }

    /// `xᵀ (L·Lᵀ)⁻¹ x` as `‖L⁻¹ x‖²`, which avoids forming the inverse.
    pub fn inverse_quad_form(&self, x: &[f64]) -> Result<f64> {
        let z = self.solve_lower(x)?;
        Ok(dot(&z, &z))
    }

    /// `xaᵀ (L·Lᵀ)⁻¹ xb`
    pub fn inverse_bilinear(&self, xa: &[f64], xb: &[f64]) -> Result<f64> {
        Ok(dot(&self.solve_lower(xa)?, &self.solve_lower(xb)?))
    }

    /// `tr((L·Lᵀ)⁻¹) = ‖L⁻¹‖²_F`
    pub fn inverse_trace(&self) -> f64 {
        let n = self.dim();
        let mut e = vec![0.0; n];
        let mut total = 0.0;
        for c in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[c] = 1.0;
            let z = self.solve_lower(&e).expect("dimension matches");
            total += dot(&z, &z);
        }
        total
    }

    /// `L·Lᵀ`
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.dim();
        SymMatrix::from_upper(n, |q, r| {
            let k = q.min(r) + 1;
            dot(&self.l.row(q)[..k], &self.l.row(r)[..k])
        })
    }
}

/// Cholesky factorization `a = L·Lᵀ`.
pub fn cholesky(a: &SymMatrix) -> Result<CholeskyFactor> {
    let n = a.dim();
    let max_diag = a.diagonal().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !(max_diag > 0.0) {
        return Err(Error::NotPositiveDefinite { pivot_index: 0 });
    }
    let tol = PIVOT_TOLERANCE * max_diag;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let pivot = a.get(j, j) - l.row(j)[..j].iter().map(|v| v * v).sum::<f64>();
        if !(pivot > tol) {
            return Err(Error::NotPositiveDefinite { pivot_index: j });
        }
        let ljj = pivot.sqrt();
        l.set(j, j, ljj);
        for i in j + 1..n {
            let s = a.get(i, j) - dot(&l.row(i)[..j], &l.row(j)[..j]);
            l.set(i, j, s / ljj);
        }
    }
    Ok(CholeskyFactor { l })
}

/// Solves `(L·Lᵀ) z = b`.
pub fn solve_cholesky(f: &CholeskyFactor, b: &[f64]) -> Result<Vec<f64>> {
    f.solve_upper(&f.solve_lower(b)?)
}

/// Eigenvalues in ascending order; column `i` of `vectors` belongs to `values[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    pub fn value_sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Standard symmetric eigenproblem by cyclic Jacobi rotations.
pub fn sym_eigen(a: &SymMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let mut w = a.to_matrix();
    let mut v = Matrix::identity(n);
    let norm = a.frobenius_norm();
    let threshold = OFF_DIAGONAL_TOLERANCE * norm;

    let mut converged = false;
    for sweep in 0..=MAX_SWEEPS {
        if off_diagonal_norm(&w) <= threshold {
            converged = true;
            break;
        }
        if sweep == MAX_SWEEPS {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = w.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = w.get(p, p);
                let aqq = w.get(q, q);
                // Negligible relative to both diagonal entries: drop it.
                if sweep > 3 && (100.0 * apq).abs() + app.abs() == app.abs()
                    && (100.0 * apq).abs() + aqq.abs() == aqq.abs()
                {
                    w.set(p, q, 0.0);
                    w.set(q, p, 0.0);
                    continue;
                }
                rotate(&mut w, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: MAX_SWEEPS,
        });
    }

    let diag: Vec<f64> = (0..n).map(|i| w.get(i, i)).collect();
    Ok(sorted_decomposition(&diag, &v))
}

fn rotate(w: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let n = w.rows();
    let apq = w.get(p, q);
    let theta = (w.get(q, q) - w.get(p, p)) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    w.set(p, p, w.get(p, p) - t * apq);
    w.set(q, q, w.get(q, q) + t * apq);
    w.set(p, q, 0.0);
    w.set(q, p, 0.0);
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = w.get(k, p);
        let akq = w.get(k, q);
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        w.set(k, p, new_kp);
        w.set(p, k, new_kp);
        w.set(k, q, new_kq);
        w.set(q, k, new_kq);
    }
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

fn off_diagonal_norm(w: &Matrix) -> f64 {
    let n = w.rows();
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += w.get(p, q) * w.get(p, q);
            }
        }
    }
    s.sqrt()
}

/// Stable ascending sort of eigenpairs plus the sign convention: the first
/// non-negligible component of every eigenvector is positive.
fn sorted_decomposition(values: &[f64], vectors: &Matrix) -> EigenDecomposition {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut out = Matrix::zeros(vectors.rows(), n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..vectors.rows() {
            out.set(r, dst, vectors.get(r, src));
        }
    }
    normalize_signs(&mut out);
    EigenDecomposition {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: out,
    }
}

fn normalize_signs(vectors: &mut Matrix) {
    for c in 0..vectors.cols() {
        let col = vectors.column(c);
        let scale = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if let Some(first) = col.iter().find(|v| v.abs() > 1e-12 * scale) {
            if *first < 0.0 {
                for r in 0..vectors.rows() {
                    vectors.set(r, c, -vectors.get(r, c));
                }
            }
        }
    }
}

/// Generalized symmetric-definite eigenproblem `a ψ = λ b ψ`, eigenvectors
/// normalized so that `ψᵀ b ψ = I`.
pub fn gen_sym_eigen(a: &SymMatrix, b: &SymMatrix) -> Result<EigenDecomposition> {
    check_len(a.dim(), b.dim())?;
    let factor = cholesky(b)?;
    gen_sym_eigen_factored(a, &factor)
}

/// As [`gen_sym_eigen`] with the metric already factored.
pub fn gen_sym_eigen_factored(a: &SymMatrix, factor: &CholeskyFactor) -> Result<EigenDecomposition> {
    let n = a.dim();
    let standard = sym_eigen(&reduce(a, factor)?)?;

    let mut psi = Matrix::zeros(n, n);
    for i in 0..n {
        let col = factor.solve_upper(&standard.vector(i))?;
        for (r, v) in col.into_iter().enumerate() {
            psi.set(r, i, v);
        }
    }
    normalize_signs(&mut psi);
    Ok(EigenDecomposition {
        values: standard.values,
        vectors: psi,
    })
}

/// `L⁻¹ a L⁻ᵀ` for the factor `L·Lᵀ` of the metric. Its trace is `tr(b⁻¹ a)`.
pub fn reduce(a: &SymMatrix, factor: &CholeskyFactor) -> Result<SymMatrix> {
    let n = a.dim();
    check_len(n, factor.dim())?;
    // W = L⁻¹ a, solved column by column.
    let mut w = Matrix::zeros(n, n);
    for c in 0..n {
        let col = factor.solve_lower(a.row(c))?;
        for (r, v) in col.into_iter().enumerate() {
            w.set(r, c, v);
        }
    }
    // C = L⁻¹ Wᵀ = L⁻¹ a L⁻ᵀ; column c of Wᵀ is row c of W.
    let mut reduced = Matrix::zeros(n, n);
    for c in 0..n {
        let col = factor.solve_lower(w.row(c))?;
        for (r, v) in col.into_iter().enumerate() {
            reduced.set(r, c, v);
        }
    }
    SymMatrix::symmetrize(&reduced)
}

/// Inverse of a symmetric positive definite matrix.
pub fn invert_spd(a: &SymMatrix) -> Result<SymMatrix> {
    let factor = cholesky(a)?;
    invert_factored(&factor)
}

pub fn invert_factored(factor: &CholeskyFactor) -> Result<SymMatrix> {
    let n = factor.dim();
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for c in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[c] = 1.0;
        let col = solve_cholesky(factor, &e)?;
        for (r, v) in col.into_iter().enumerate() {
            inv.set(r, c, v);
        }
    }
    SymMatrix::symmetrize(&inv)
}

/// `max|λ| / min|λ|`; `+∞` when the smallest magnitude is below `1e-300` or the
/// eigensolver fails.
pub fn condition_estimate(a: &SymMatrix) -> f64 {
    let eig = match sym_eigen(a) {
        Ok(e) => e,
        Err(err) => {
            log::warn!("condition estimate unavailable: {err}");
            return f64::INFINITY;
        }
    };
    let max = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let min = eig.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min < 1e-300 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
