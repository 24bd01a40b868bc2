//! Small dense matrices over a [`Real`] scalar.
//!
//! State counts in this crate are tiny (r is 2..6 in practice), so the
//! implementations favor clarity over blocking: LU with partial pivoting for
//! determinants, cyclic Jacobi for symmetric eigenvalues, and singular values
//! through the eigenvalues of `AᵀA`.

use crate::error::{Error, Result};
use crate::num::{real, stochastic_tol, Real};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Real> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged rows in matrix literal".into()));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Build from a flat row-major slice.
    pub fn from_flat(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidParameter(format!(
                "flat data has {} entries, expected {}",
                data.len(),
                rows * cols
            )));
        }
        Ok(Matrix { rows, cols, data })
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix<F> {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == F::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Scales every entry.
    pub fn scaled(&self, s: F) -> Matrix<F> {
        let mut m = self.clone();
        for v in &mut m.data {
            *v *= s;
        }
        m
    }

    /// Multiplies row `i` by `s[i]` (left multiplication by `diag(s)`).
    pub fn scale_rows(&self, s: &[F]) -> Matrix<F> {
        assert_eq!(s.len(), self.rows);
        let mut m = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = m.get(i, j) * s[i];
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn row_sums(&self) -> Vec<F> {
        (0..self.rows).map(|i| self.row(i).iter().copied().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<F> {
        let mut sums = vec![F::zero(); self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                sums[j] += self.get(i, j);
            }
        }
        sums
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn determinant(&self) -> F {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut lu = self.data.clone();
        let mut det = F::one();
        for k in 0..n {
            let mut pivot = k;
            let mut best = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let cand = lu[i * n + k].abs();
                if cand > best {
                    best = cand;
                    pivot = i;
                }
            }
            if best == F::zero() {
                return F::zero();
            }
            if pivot != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot * n + j);
                }
                det = -det;
            }
            let pk = lu[k * n + k];
            det *= pk;
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pk;
                for j in (k + 1)..n {
                    let v = lu[i * n + j] - factor * lu[k * n + j];
                    lu[i * n + j] = v;
                }
            }
        }
        det
    }

    /// True when every entry is nonnegative and every row sums to one.
    pub fn is_row_stochastic(&self) -> bool {
        let tol = stochastic_tol::<F>();
        self.data.iter().all(|&v| v >= F::zero())
            && self
                .row_sums()
                .iter()
                .all(|&s| (s - F::one()).abs() <= tol)
    }

    /// True when the matrix is a 0/1 permutation matrix (within tolerance).
    pub fn is_permutation(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let tol = stochastic_tol::<F>();
        let near = |v: F, t: F| (v - t).abs() <= tol;
        let ones_per_row = (0..self.rows).all(|i| {
            let mut ones = 0;
            for j in 0..self.cols {
                let v = self.get(i, j);
                if near(v, F::one()) {
                    ones += 1;
                } else if !near(v, F::zero()) {
                    return false;
                }
            }
            ones == 1
        });
        if !ones_per_row {
            return false;
        }
        self.col_sums().iter().all(|&s| near(s, F::one()))
    }

    /// Lower-triangular Cholesky factor, or `None` when the matrix is not
    /// symmetric positive definite.
    pub fn cholesky(&self) -> Option<Matrix<F>> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if sum <= F::zero() {
                        return None;
                    }
                    l.set(i, j, sum.sqrt());
                } else {
                    l.set(i, j, sum / l.get(j, j));
                }
            }
        }
        Some(l)
    }

    /// Eigenvalues of a symmetric matrix by the cyclic Jacobi method,
    /// sorted descending.
    pub fn symmetric_eigenvalues(&self) -> Vec<F> {
        assert!(self.is_square(), "eigenvalues of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let tol = F::epsilon() * real::<F>(16.0);
        for _sweep in 0..60 {
            let mut off = F::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a.get(p, q).abs();
                }
            }
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq.abs() <= F::epsilon() {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let theta = (aqq - app) / (real::<F>(2.0) * apq);
                    let t = {
                        let sign = if theta >= F::zero() { F::one() } else { -F::one() };
                        sign / (theta.abs() + (theta * theta + F::one()).sqrt())
                    };
                    let c = F::one() / (t * t + F::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        let mut eig: Vec<F> = (0..n).map(|i| a.get(i, i)).collect();
        eig.sort_by(|x, y| y.partial_cmp(x).expect("eigenvalues are finite"));
        eig
    }

    /// Singular values, sorted descending, via the eigenvalues of `AᵀA`.
    pub fn singular_values(&self) -> Vec<F> {
        let gram = self.transpose().matmul(self);
        gram.symmetric_eigenvalues()
            .into_iter()
            .map(|e| if e > F::zero() { e.sqrt() } else { F::zero() })
            .collect()
    }

    /// Ratio of extreme singular values; `None` when numerically singular.
    pub fn condition_number(&self) -> Option<F> {
        let sv = self.singular_values();
        let max = *sv.first()?;
        let min = *sv.last()?;
        if min <= F::epsilon() * max {
            None
        } else {
            Some(max / min)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn determinant_of_known_matrices() {
        let m = Matrix::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        assert!(close(m.determinant(), 0.15, 1e-15));
        let id = Matrix::<f64>::identity(4);
        assert!(close(id.determinant(), 1.0, 0.0));
        let singular = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(close(singular.determinant(), 0.0, 1e-15));
    }

    #[test]
    fn determinant_picks_up_permutation_sign() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(close(m.determinant(), -1.0, 1e-15));
    }

    #[test]
    fn stochastic_and_permutation_predicates() {
        let m = Matrix::from_rows(&[vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        assert!(m.is_row_stochastic());
        assert!(!m.is_permutation());
        let p = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(p.is_permutation());
        let id = Matrix::<f64>::identity(3);
        assert!(id.is_permutation());
    }

    #[test]
    fn cholesky_detects_definiteness() {
        let pd = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let l = pd.cholesky().unwrap();
        let rebuilt = l.matmul(&l.transpose());
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(rebuilt.get(i, j), pd.get(i, j), 1e-12));
            }
        }
        let not_pd = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(not_pd.cholesky().is_none());
    }

    #[test]
    fn jacobi_eigenvalues_of_symmetric_channel() {
        // [[1-q, q], [q, 1-q]] has eigenvalues 1 and 1-2q.
        let q = 0.3;
        let m = Matrix::from_rows(&[vec![1.0 - q, q], vec![q, 1.0 - q]]).unwrap();
        let eig = m.symmetric_eigenvalues();
        assert!(close(eig[0], 1.0, 1e-12));
        assert!(close(eig[1], 1.0 - 2.0 * q, 1e-12));
    }

    #[test]
    fn condition_number_of_symmetric_channel() {
        // At flip probability (1 - e^{-1})/2 the condition number is e.
        let q = (1.0 - (-1.0f64).exp()) / 2.0;
        let m = Matrix::from_rows(&[vec![1.0 - q, q], vec![q, 1.0 - q]]).unwrap();
        let cond = m.condition_number().unwrap();
        assert!(close(cond, 1.0f64.exp(), 1e-9), "cond = {cond}");
    }

    #[test]
    fn singular_values_match_eigenvalue_magnitudes_for_symmetric() {
        let m = Matrix::from_rows(&[vec![0.2, 0.8], vec![0.8, 0.2]]).unwrap();
        let sv = m.singular_values();
        assert!(close(sv[0], 1.0, 1e-10));
        assert!(close(sv[1], 0.6, 1e-10));
    }
}
