//! Dense matrix kernels sized for this crate: complex matrices up to 16x16
//! for unitaries and real matrices up to 256x256 for Pauli transfer algebra.
//!
//! Everything is row-major and allocation-light. The decompositions
//! (one-sided Jacobi SVD, cyclic Jacobi eigensolver, LU, modified
//! Gram-Schmidt QR) are the textbook dense forms, which at these sizes are
//! both fast and accurate to near machine precision.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

// ---------------------------------------------------------------------------
// Complex dense matrix
// ---------------------------------------------------------------------------

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from rows of real numbers (test and fixture helper).
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        let mut out = vec![ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = ZERO;
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn dagger(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: C64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.sub(other).max_abs()
    }

    /// `max |(A† A - I)_{ij}|`; zero for a perfect unitary.
    pub fn unitarity_error(&self) -> f64 {
        assert!(self.is_square());
        self.dagger().mul(self).max_abs_diff(&CMatrix::identity(self.rows))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    /// Block of rows `r0..r0+h`, columns `c0..c0+w`.
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> CMatrix {
        CMatrix::from_fn(h, w, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &CMatrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Orthonormalize columns `fixed..` against all earlier columns and each
    /// other, in place, assuming columns `0..fixed` are already orthonormal.
    /// Two Gram-Schmidt passes keep the result orthonormal to ~1e-14.
    pub fn orthonormalize_columns_from(&mut self, fixed: usize) -> Result<()> {
        let n = self.cols;
        for j in fixed..n {
            let mut col = self.column(j);
            for _pass in 0..2 {
                for k in 0..j {
                    let prev = self.column(k);
                    let proj: C64 = prev.iter().zip(&col).map(|(p, c)| p.conj() * c).sum();
                    for i in 0..self.rows {
                        col[i] -= proj * prev[i];
                    }
                }
            }
            let norm = col.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-10 {
                return Err(Error::SingularMatrix(format!(
                    "column {j} linearly dependent during orthonormalization"
                )));
            }
            for x in col.iter_mut() {
                *x /= norm;
            }
            self.set_column(j, &col);
        }
        Ok(())
    }

    /// Singular value decomposition `A = U diag(sigma) V†` by one-sided
    /// Jacobi rotations; singular values sorted descending.
    pub fn svd(&self) -> CSvd {
        one_sided_jacobi_svd(self)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

pub struct CSvd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

fn one_sided_jacobi_svd(a: &CMatrix) -> CSvd {
    let m = a.rows;
    let n = a.cols;
    assert!(m >= n, "one-sided Jacobi expects rows >= cols");
    let mut b = a.clone();
    let mut v = CMatrix::identity(n);
    let tol = 1e-15;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = ZERO;
                for i in 0..m {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    app += bp.norm_sqr();
                    aqq += bq.norm_sqr();
                    apq += bp.conj() * bq;
                }
                let r = apq.norm();
                if r <= tol * (app * aqq).sqrt().max(f64::MIN_POSITIVE) {
                    continue;
                }
                off = off.max(r / (app * aqq).sqrt().max(f64::MIN_POSITIVE));
                // Phase-align column q so the pair Gram matrix becomes real,
                // then apply a classical symmetric Jacobi rotation.
                let phase = apq / r;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)] * phase.conj();
                    b[(i, p)] = c * bp - s * bq;
                    b[(i, q)] = s * bp + c * bq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)] * phase.conj();
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if off < tol {
            break;
        }
    }
    // Column norms are the singular values.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| b[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());
    let mut u = CMatrix::zeros(m, n);
    let mut sigma = vec![0.0; n];
    let mut vs = CMatrix::zeros(n, n);
    let max_norm = norms.iter().cloned().fold(0.0, f64::max);
    let degenerate = 1e-13 * max_norm;
    for (dst, &src) in order.iter().enumerate() {
        sigma[dst] = norms[src];
        vs.set_column(dst, &v.column(src));
        if norms[src] > degenerate {
            let col: Vec<C64> = b.column(src).iter().map(|x| x / norms[src]).collect();
            u.set_column(dst, &col);
        }
    }
    // Zero singular values leave U columns undetermined; complete them to an
    // orthonormal set (still-empty columns project to nothing, so plain
    // Gram-Schmidt against every other column works).
    for j in 0..n {
        if sigma[j] > degenerate {
            continue;
        }
        for cand in 0..m {
            let mut col = vec![ZERO; m];
            col[cand] = ONE;
            for _pass in 0..2 {
                for k in 0..n {
                    if k == j {
                        continue;
                    }
                    let prev = u.column(k);
                    let proj: C64 = prev.iter().zip(&col).map(|(p, c)| p.conj() * c).sum();
                    for i in 0..m {
                        col[i] -= proj * prev[i];
                    }
                }
            }
            let norm = col.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for x in col.iter_mut() {
                    *x /= norm;
                }
                u.set_column(j, &col);
                break;
            }
        }
    }
    CSvd { u, sigma, v: vs }
}

/// Haar-like random unitary: complex Gaussian entries orthonormalized.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
    loop {
        let mut m = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(gaussian(rng), gaussian(rng))
        });
        if m.orthonormalize_columns_from(0).is_ok() {
            return m;
        }
    }
}

/// Standard normal draw, used for seeded random matrix completion.
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    gaussian(rng)
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller; rejects the measure-zero log(0) draw.
    loop {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        if u1 > 0.0 {
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

// ---------------------------------------------------------------------------
// Real dense matrix
// ---------------------------------------------------------------------------

/// Row-major dense real matrix.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
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

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        Self::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    pub fn mul(&self, other: &RMatrix) -> RMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = RMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let row = i * other.cols;
                let src = k * other.cols;
                for j in 0..other.cols {
                    out.data[row + j] += a * other.data[src + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            let row = i * self.cols;
            for j in 0..self.cols {
                acc += self.data[row + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "vec_mul shape mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let a = v[i];
            if a == 0.0 {
                continue;
            }
            let row = i * self.cols;
            for j in 0..self.cols {
                out[j] += a * self.data[row + j];
            }
        }
        out
    }

    pub fn transpose(&self) -> RMatrix {
        RMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn kron(&self, other: &RMatrix) -> RMatrix {
        let mut out = RMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &RMatrix) -> RMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &RMatrix) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    /// Solve `A x = b` with partial-pivot LU; `A` square.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let x = self.solve_many(&RMatrix { rows: b.len(), cols: 1, data: b.to_vec() })?;
        Ok(x.data)
    }

    /// Solve `A X = B` column-wise with a single factorization.
    pub fn solve_many(&self, b: &RMatrix) -> Result<RMatrix> {
        assert!(self.rows == self.cols && self.rows == b.rows);
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut pivot, mut pval) = (k, lu[(k, k)].abs());
            for i in (k + 1)..n {
                if lu[(i, k)].abs() > pval {
                    pivot = i;
                    pval = lu[(i, k)].abs();
                }
            }
            if pval < 1e-300 {
                return Err(Error::SingularMatrix(format!("pivot {k} vanished in LU")));
            }
            if pivot != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, pivot * n + j);
                }
                perm.swap(k, pivot);
            }
            for i in (k + 1)..n {
                let f = lu[(i, k)] / lu[(k, k)];
                lu[(i, k)] = f;
                for j in (k + 1)..n {
                    let v = lu[(k, j)];
                    lu[(i, j)] -= f * v;
                }
            }
        }
        let mut out = RMatrix::zeros(n, b.cols);
        let mut y = vec![0.0; n];
        for c in 0..b.cols {
            for i in 0..n {
                let mut acc = b[(perm[i], c)];
                for j in 0..i {
                    acc -= lu[(i, j)] * y[j];
                }
                y[i] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = y[i];
                for j in (i + 1)..n {
                    acc -= lu[(i, j)] * out[(j, c)];
                }
                out[(i, c)] = acc / lu[(i, i)];
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<RMatrix> {
        self.solve_many(&RMatrix::identity(self.rows))
    }

    /// Least-squares solution of `A x = b` (rows >= cols) by two-pass
    /// modified Gram-Schmidt QR. Returns the solution and the smallest and
    /// largest diagonal magnitude of `R` for rank diagnostics.
    pub fn least_squares(&self, b: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
        assert!(self.rows >= self.cols);
        assert_eq!(self.rows, b.len());
        let (m, n) = (self.rows, self.cols);
        let mut q = self.clone();
        let mut r = RMatrix::zeros(n, n);
        for j in 0..n {
            let mut col = q.column(j);
            for _pass in 0..2 {
                for k in 0..j {
                    let qk = q.column(k);
                    let proj: f64 = qk.iter().zip(&col).map(|(a, c)| a * c).sum();
                    r[(k, j)] += proj;
                    for i in 0..m {
                        col[i] -= proj * qk[i];
                    }
                }
            }
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            r[(j, j)] = norm;
            if norm > 0.0 {
                for x in col.iter_mut() {
                    *x /= norm;
                }
            }
            for i in 0..m {
                q[(i, j)] = col[i];
            }
        }
        let rmin = (0..n).map(|j| r[(j, j)].abs()).fold(f64::INFINITY, f64::min);
        let rmax = (0..n).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
        if rmin <= 1e-10 * rmax.max(1.0) {
            return Err(Error::SingularMatrix(format!(
                "rank-deficient least-squares system (min |R_jj| = {rmin:.3e})"
            )));
        }
        // x = R^{-1} Q^T b
        let mut qtb = vec![0.0; n];
        for j in 0..n {
            qtb[j] = (0..m).map(|i| q[(i, j)] * b[i]).sum();
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = qtb[i];
            for j in (i + 1)..n {
                acc -= r[(i, j)] * x[j];
            }
            x[i] = acc / r[(i, i)];
        }
        Ok((x, rmin, rmax))
    }

    /// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
    /// Returns eigenvalues (descending) and the matching orthonormal
    /// eigenvectors as columns.
    pub fn sym_eigen(&self) -> (Vec<f64>, RMatrix) {
        assert!(self.rows == self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut v = RMatrix::identity(n);
        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(a[(p, q)].abs());
                }
            }
            let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.abs() <= 1e-18 * scale {
                        continue;
                    }
                    let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..n {
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        a[(i, p)] = c * aip - s * aiq;
                        a[(i, q)] = s * aip + c * aiq;
                    }
                    for j in 0..n {
                        let apj = a[(p, j)];
                        let aqj = a[(q, j)];
                        a[(p, j)] = c * apj - s * aqj;
                        a[(q, j)] = s * apj + c * aqj;
                    }
                    for i in 0..n {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = c * vip - s * viq;
                        v[(i, q)] = s * vip + c * viq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| a[(y, y)].partial_cmp(&a[(x, x)]).unwrap());
        let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
        let mut vecs = RMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..n {
                vecs[(i, dst)] = v[(i, src)];
            }
        }
        (vals, vecs)
    }

    /// Cholesky factor `L` (lower triangular, `L L^T = A`) of a symmetric
    /// positive semi-definite matrix. Fails when a pivot drops below
    /// `tol` times the largest diagonal entry.
    pub fn cholesky(&self, tol: f64) -> Result<RMatrix> {
        assert!(self.rows == self.cols);
        let n = self.rows;
        let scale = (0..n).map(|i| self[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let mut l = RMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= tol * scale {
                return Err(Error::RankDeficientGram(format!(
                    "pivot {j} fell to {d:.3e}"
                )));
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut acc = self[(i, j)];
                for k in 0..j {
                    acc -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = acc / djj;
            }
        }
        Ok(l)
    }

    /// Condition number estimate from the symmetric eigenvalues of `A^T A`.
    pub fn condition_number(&self) -> f64 {
        let ata = self.transpose().mul(self);
        let (vals, _) = ata.sym_eigen();
        let max = vals.first().copied().unwrap_or(0.0).max(0.0);
        let min = vals.last().copied().unwrap_or(0.0).max(0.0);
        if min <= 0.0 {
            f64::INFINITY
        } else {
            (max / min).sqrt()
        }
    }
}

impl std::ops::Index<(usize, usize)> for RMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}
