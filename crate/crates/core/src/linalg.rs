//! Dense and compressed-row matrices plus the few factorizations the solvers need.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::math::{dot, norm, sin, sqrt};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("dense matrix data", rows * cols, data.len())?;
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_len("matrix row", cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    pub fn mul_t_vec_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, xi) in x.iter().enumerate() {
            if *xi != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(i)) {
                    *o += xi * a;
                }
            }
        }
    }

    /// `self * other`
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        check_len("matrix product inner dimension", self.cols, other.rows)?;
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_len("CSR indptr", rows + 1, indptr.len())?;
        check_len("CSR values", indices.len(), values.len())?;
        if indptr[0] != 0 || indptr[rows] != indices.len() {
            return Err(Error::InvalidData(
                "CSR indptr must start at 0 and end at nnz".into(),
            ));
        }
        if indptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidData(
                "CSR indptr must be nondecreasing".into(),
            ));
        }
        if indices.iter().any(|&j| j >= cols) {
            return Err(Error::InvalidData("CSR column index out of range".into()));
        }
        Ok(CsrMatrix {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    /// Keeps the nonzero entries of a dense matrix.
    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut indptr = Vec::with_capacity(m.rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..m.rows {
            for (j, v) in m.row(i).iter().enumerate() {
                if *v != 0.0 {
                    indices.push(j);
                    values.push(*v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            rows: m.rows,
            cols: m.cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (idx, val) = self.row(i);
            *o = idx.iter().zip(val).map(|(j, v)| v * x[*j]).sum();
        }
    }

    pub fn mul_t_vec_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            let (idx, val) = self.row(i);
            for (j, v) in idx.iter().zip(val) {
                out[*j] += xi * v;
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (idx, val) = self.row(i);
            for (j, v) in idx.iter().zip(val) {
                let cur = m.get(i, *j);
                m.set(i, *j, cur + v);
            }
        }
        m
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.rows {
            let (idx, val) = self.row(i);
            for (j, v) in idx.iter().zip(val) {
                let dst = next[*j];
                indices[dst] = i;
                values[dst] = *v;
                next[*j] += 1;
            }
        }
        CsrMatrix {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            values,
        }
    }
}

/// A linear map stored densely or in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Dense(DenseMatrix),
    Sparse(CsrMatrix),
}

impl From<DenseMatrix> for Matrix {
    fn from(m: DenseMatrix) -> Self {
        Matrix::Dense(m)
    }
}

impl From<CsrMatrix> for Matrix {
    fn from(m: CsrMatrix) -> Self {
        Matrix::Sparse(m)
    }
}

impl Matrix {
    pub fn rows(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.rows(),
            Matrix::Sparse(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.cols(),
            Matrix::Sparse(m) => m.cols(),
        }
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols());
        debug_assert_eq!(out.len(), self.rows());
        match self {
            Matrix::Dense(m) => m.mul_vec_into(x, out),
            Matrix::Sparse(m) => m.mul_vec_into(x, out),
        }
    }

    pub fn mul_t_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows());
        debug_assert_eq!(out.len(), self.cols());
        match self {
            Matrix::Dense(m) => m.mul_t_vec_into(x, out),
            Matrix::Sparse(m) => m.mul_t_vec_into(x, out),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn mul_t_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        self.mul_t_vec_into(x, &mut out);
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Dense(m) => m.clone(),
            Matrix::Sparse(m) => m.to_dense(),
        }
    }

    /// The diagonal, if every off-diagonal entry is zero.
    pub fn diagonal_if_diagonal(&self) -> Option<Vec<f64>> {
        if self.rows() != self.cols() {
            return None;
        }
        let n = self.rows();
        let mut diag = vec![0.0; n];
        match self {
            Matrix::Dense(m) => {
                for i in 0..n {
                    for j in 0..n {
                        let v = m.get(i, j);
                        if i == j {
                            diag[i] = v;
                        } else if v != 0.0 {
                            return None;
                        }
                    }
                }
            }
            Matrix::Sparse(m) => {
                for i in 0..n {
                    let (idx, val) = m.row(i);
                    for (j, v) in idx.iter().zip(val) {
                        if *j == i {
                            diag[i] += v;
                        } else if *v != 0.0 {
                            return None;
                        }
                    }
                }
            }
        }
        Some(diag)
    }

    /// Largest absolute asymmetry `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        match self {
            Matrix::Dense(m) => {
                let mut worst: f64 = 0.0;
                for i in 0..m.rows() {
                    for j in (i + 1)..m.cols() {
                        worst = worst.max((m.get(i, j) - m.get(j, i)).abs());
                    }
                }
                worst
            }
            Matrix::Sparse(m) => {
                let t = m.transpose();
                let mut worst: f64 = 0.0;
                let mut row_a = vec![0.0; m.cols()];
                for i in 0..m.rows() {
                    let (ia, va) = m.row(i);
                    let (ib, vb) = t.row(i);
                    for (j, v) in ia.iter().zip(va) {
                        row_a[*j] += v;
                    }
                    for (j, v) in ib.iter().zip(vb) {
                        row_a[*j] -= v;
                    }
                    for j in ia.iter().chain(ib) {
                        worst = worst.max(row_a[*j].abs());
                    }
                    for j in ia.iter().chain(ib) {
                        row_a[*j] = 0.0;
                    }
                }
                worst
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Matrix::Dense(m) => crate::math::max_abs(m.data()),
            Matrix::Sparse(m) => crate::math::max_abs(m.values()),
        }
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        check_len("Cholesky input columns", a.rows(), a.cols())?;
        let n = a.rows();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = a.get(j, j);
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if !(diag > 0.0) {
                return Err(Error::Singular {
                    what: "Cholesky factorization",
                });
            }
            let ljj = sqrt(diag);
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// the columns of the second matrix.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    check_len("eigen input columns", a.rows(), a.cols())?;
    let n = a.rows();
    let mut m = a.data().to_vec();
    let mut v = DenseMatrix::identity(n).data;
    let frob = sqrt(m.iter().map(|x| x * x).sum());
    let max_sweeps = 100;
    let mut converged = n <= 1 || frob == 0.0;
    for _ in 0..max_sweeps {
        if converged {
            break;
        }
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if sqrt(off) <= 1e-15 * frob {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if sqrt(off) > 1e-12 * frob {
            return Err(Error::NoConvergence {
                what: "Jacobi eigenvalue sweep",
                iterations: max_sweeps,
                residual: sqrt(off),
            });
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, col, v[r * n + src]);
        }
    }
    Ok((values, vectors))
}

/// Deterministic, generic unit start vector for power iterations.
fn start_vector(n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * sin(1.0 + i as f64 * 0.7))
        .collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    v
}

/// Largest eigenvalue of `MᵀM` (the squared spectral norm of `M`) by power
/// iteration. Stops once the Rayleigh quotient changes by at most
/// `rel_tol` relative to its value.
pub fn gram_lambda_max(m: &Matrix, rel_tol: f64, max_iter: usize) -> Result<f64> {
    let (p, n) = (m.rows(), m.cols());
    if p == 0 || n == 0 {
        return Ok(0.0);
    }
    let mut v = start_vector(n);
    let mut w = vec![0.0; p];
    let mut z = vec![0.0; n];
    let mut lam_prev = f64::NAN;
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        m.mul_vec_into(&v, &mut w);
        let lam = dot(&w, &w);
        m.mul_t_vec_into(&w, &mut z);
        let nz = norm(&z);
        if nz == 0.0 {
            return Ok(0.0);
        }
        if lam_prev.is_finite() {
            change = (lam - lam_prev).abs();
            if change <= rel_tol * lam {
                return Ok(lam);
            }
        }
        lam_prev = lam;
        for (vi, zi) in v.iter_mut().zip(&z) {
            *vi = zi / nz;
        }
    }
    Err(Error::NoConvergence {
        what: "power iteration",
        iterations: max_iter,
        residual: change / lam_prev.abs().max(f64::MIN_POSITIVE),
    })
}

/// Spectral norm `‖M‖₂`, with the default tolerance 1e-10 and an
/// iteration cap of `10 (rows + cols)`.
pub fn spectral_norm(m: &Matrix) -> Result<f64> {
    let cap = 10 * (m.rows() + m.cols()).max(10);
    Ok(sqrt(gram_lambda_max(m, 1e-10, cap)?))
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
pub fn psd_lambda_max(q: &Matrix, rel_tol: f64, max_iter: usize) -> Result<f64> {
    let n = q.rows();
    if n == 0 {
        return Ok(0.0);
    }
    if let Some(d) = q.diagonal_if_diagonal() {
        return Ok(d.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }
    let mut v = start_vector(n);
    let mut z = vec![0.0; n];
    let mut lam_prev = f64::NAN;
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        q.mul_vec_into(&v, &mut z);
        let lam = dot(&v, &z);
        let nz = norm(&z);
        if nz == 0.0 {
            return Ok(0.0);
        }
        if lam_prev.is_finite() {
            change = (lam - lam_prev).abs();
            if change <= rel_tol * lam.abs() {
                return Ok(lam);
            }
        }
        lam_prev = lam;
        for (vi, zi) in v.iter_mut().zip(&z) {
            *vi = zi / nz;
        }
    }
    Err(Error::NoConvergence {
        what: "power iteration",
        iterations: max_iter,
        residual: change,
    })
}

/// Conjugate gradients for `A x = b` with `A` symmetric positive definite.
pub fn conjugate_gradient(
    a: &Matrix,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<usize> {
    let n = b.len();
    let mut r = vec![0.0; n];
    a.mul_vec_into(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for it in 0..max_iter {
        if sqrt(rr) <= rel_tol * bnorm {
            return Ok(it);
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Singular {
                what: "conjugate gradient",
            });
        }
        let alpha = rr / pap;
        crate::math::axpy(alpha, &p, x);
        crate::math::axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    if sqrt(rr) <= rel_tol * bnorm {
        return Ok(max_iter);
    }
    Err(Error::NoConvergence {
        what: "conjugate gradient",
        iterations: max_iter,
        residual: sqrt(rr) / bnorm,
    })
}

/// Dimension up to which dense Jacobi sweeps are used for the smallest eigenvalue.
const DENSE_EIGEN_LIMIT: usize = 400;

/// Smallest eigenvalue of a symmetric matrix. Dense Jacobi for small sizes,
/// inverse power iteration with inner conjugate gradients otherwise.
pub fn symmetric_lambda_min(q: &Matrix) -> Result<f64> {
    let n = q.rows();
    if n == 0 {
        return Ok(f64::INFINITY);
    }
    if let Some(d) = q.diagonal_if_diagonal() {
        return Ok(d.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    if n <= DENSE_EIGEN_LIMIT {
        let (vals, _) = symmetric_eigen(&q.to_dense())?;
        return Ok(vals[0]);
    }
    let mut v = start_vector(n);
    let mut z = vec![0.0; n];
    let mut mu_prev = f64::NAN;
    for _ in 0..500 {
        z.iter_mut().for_each(|x| *x = 0.0);
        conjugate_gradient(q, &v, &mut z, 1e-13, 20 * n)?;
        // Rayleigh quotient of Q⁻¹ at v.
        let mu = dot(&v, &z);
        let nz = norm(&z);
        for (vi, zi) in v.iter_mut().zip(&z) {
            *vi = zi / nz;
        }
        if mu_prev.is_finite() && (mu - mu_prev).abs() <= 1e-10 * mu.abs() {
            return Ok(1.0 / mu);
        }
        mu_prev = mu;
    }
    Err(Error::NoConvergence {
        what: "inverse power iteration",
        iterations: 500,
        residual: f64::NAN,
    })
}

/// Moore-Penrose pseudo-inverse application for a symmetric PSD matrix given
/// its eigen-decomposition. Eigenvalues below `rel_cut * λ_max` are dropped.
pub(crate) fn pinv_apply(
    values: &[f64],
    vectors: &DenseMatrix,
    b: &[f64],
    rel_cut: f64,
) -> Vec<f64> {
    let n = values.len();
    let top = values.iter().cloned().fold(0.0, f64::max);
    let mut out = vec![0.0; n];
    for (k, &lam) in values.iter().enumerate() {
        if lam <= rel_cut * top || lam <= 0.0 {
            continue;
        }
        let mut c = 0.0;
        for i in 0..n {
            c += vectors.get(i, k) * b[i];
        }
        c /= lam;
        for (i, o) in out.iter_mut().enumerate() {
            *o += c * vectors.get(i, k);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn csr_and_dense_products_agree() {
        let d = DenseMatrix::from_rows(&[vec![1.0, 0.0, 2.0], vec![0.0, -3.0, 0.0]]).unwrap();
        let s = CsrMatrix::from_dense(&d);
        assert_eq!(s.nnz(), 3);
        let x = [1.0, 2.0, 3.0];
        let y = [0.5, -1.0];
        assert_eq!(
            Matrix::from(d.clone()).mul_vec(&x),
            Matrix::from(s.clone()).mul_vec(&x)
        );
        assert_eq!(
            Matrix::from(d.clone()).mul_t_vec(&y),
            Matrix::from(s.clone()).mul_t_vec(&y)
        );
        assert_eq!(s.to_dense(), d);
        assert_eq!(s.transpose().to_dense(), d.transpose());
    }

    #[test]
    fn csr_rejects_bad_layout() {
        assert!(CsrMatrix::new(1, 2, vec![0, 1], vec![5], vec![1.0]).is_err());
        assert!(CsrMatrix::new(2, 2, vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(1, 2, vec![0, 2], vec![0], vec![1.0]).is_err());
    }

    #[test]
    fn power_iteration_on_small_examples() {
        let g = Matrix::from(DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap());
        assert!((gram_lambda_max(&g, 1e-10, 200).unwrap() - 4.0).abs() < 1e-8);
        let g = Matrix::from(DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap());
        assert!((gram_lambda_max(&g, 1e-10, 200).unwrap() - 2.0).abs() < 1e-12);
        let z = Matrix::from(DenseMatrix::zeros(3, 2));
        assert_eq!(gram_lambda_max(&z, 1e-10, 10).unwrap(), 0.0);
    }

    #[test]
    fn power_iteration_reports_cap() {
        let g =
            Matrix::from(DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0 + 1e-6]]).unwrap());
        assert!(matches!(
            gram_lambda_max(&g, 1e-16, 2),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn cholesky_solves_and_detects_indefinite() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let c = Cholesky::factor(&a).unwrap();
        let x = c.solve(&[1.0, 2.0]);
        let mut r = [0.0; 2];
        a.mul_vec_into(&x, &mut r);
        assert!((r[0] - 1.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14);
        let bad = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(Cholesky::factor(&bad).is_err());
    }

    #[test]
    fn jacobi_eigenvalues_of_known_matrix() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let v0 = [vecs.get(0, 0), vecs.get(1, 0)];
        assert!((v0[0] + v0[1]).abs() < 1e-14);
    }

    #[test]
    fn conjugate_gradient_matches_cholesky() {
        let a = DenseMatrix::from_rows(&[
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 0.5],
            vec![0.0, 0.5, 2.0],
        ])
        .unwrap();
        let b = [1.0, -1.0, 2.0];
        let exact = Cholesky::factor(&a).unwrap().solve(&b);
        let mut x = [0.0; 3];
        conjugate_gradient(&Matrix::from(a), &b, &mut x, 1e-14, 50).unwrap();
        for (u, v) in x.iter().zip(&exact) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetry_detects_sparse_mismatch() {
        let s = CsrMatrix::new(2, 2, vec![0, 1, 2], vec![1, 1], vec![1.0, 2.0]).unwrap();
        assert_eq!(Matrix::from(s).asymmetry(), 1.0);
        let s = CsrMatrix::new(2, 2, vec![0, 1, 2], vec![1, 0], vec![1.0, 1.0]).unwrap();
        assert_eq!(Matrix::from(s).asymmetry(), 0.0);
    }
}
