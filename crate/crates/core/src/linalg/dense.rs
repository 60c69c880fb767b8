//! Dense matrices, Cholesky and LU solves for subdomain-sized problems.

use super::vec_ops::dot;
use super::LinalgError;
use crate::math;
use alloc::vec;
use alloc::vec::Vec;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from nested rows; all rows must have length `n`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "rows must form a square matrix");
            data.extend_from_slice(row);
        }
        DenseMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "dimension mismatch");
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for j in 0..i {
                if math::abs(self.get(i, j) - self.get(j, i)) > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Cholesky factorization of the (symmetric) matrix, reading the lower
    /// triangle. Fails with the pivot index when a pivot is not positive.
    pub fn cholesky(&self) -> Result<PackedCholesky, LinalgError> {
        let n = self.n;
        // Copy the lower triangle into packed row-major storage.
        let mut l = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            l.extend_from_slice(&self.data[i * n..i * n + i + 1]);
        }
        factor_packed_lower(n, &mut l)?;
        Ok(PackedCholesky { n, l })
    }
}

/// In-place Cholesky of a packed row-major lower triangle.
fn factor_packed_lower(n: usize, l: &mut [f64]) -> Result<(), LinalgError> {
    for i in 0..n {
        let off_i = i * (i + 1) / 2;
        let (done, row_i) = l.split_at_mut(off_i);
        for j in 0..i {
            let off_j = j * (j + 1) / 2;
            let s = dot(&row_i[..j], &done[off_j..off_j + j]);
            row_i[j] = (row_i[j] - s) / done[off_j + j];
        }
        let d = row_i[i] - dot(&row_i[..i], &row_i[..i]);
        if d <= 0.0 || !d.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { pivot: i });
        }
        row_i[i] = math::sqrt(d);
    }
    Ok(())
}

/// Lower Cholesky factor in packed row-major storage, applied as the inverse
/// of the factored matrix.
#[derive(Debug, Clone)]
pub struct PackedCholesky {
    n: usize,
    l: Vec<f64>,
}

impl PackedCholesky {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place given `A = L L^T`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n, "dimension mismatch");
        let n = self.n;
        let l = &self.l;
        // Forward substitution L y = b.
        for i in 0..n {
            let off = i * (i + 1) / 2;
            let s = dot(&l[off..off + i], &b[..i]);
            b[i] = (b[i] - s) / l[off + i];
        }
        // Back substitution L^T x = y.
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= l[k * (k + 1) / 2 + i] * b[k];
            }
            b[i] = s / l[i * (i + 1) / 2 + i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Direct SPD solve via dense Cholesky.
pub fn dense_cholesky_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    assert_eq!(b.len(), a.n(), "dimension mismatch");
    Ok(a.cholesky()?.solve(b))
}

/// Dense LU solve with partial pivoting, for non-symmetric systems.
pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = a.n();
    assert_eq!(b.len(), n, "dimension mismatch");
    let mut m = a.clone();
    let mut x = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = math::abs(m.get(k, k));
        for r in k + 1..n {
            let v = math::abs(m.get(r, k));
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 {
            return Err(LinalgError::SingularMatrix { column: k });
        }
        if p != k {
            for c in 0..n {
                let t = m.get(k, c);
                m.set(k, c, m.get(p, c));
                m.set(p, c, t);
            }
            perm.swap(k, p);
            x.swap(k, p);
        }
        let pivot = m.get(k, k);
        for r in k + 1..n {
            let f = m.get(r, k) / pivot;
            if f == 0.0 {
                continue;
            }
            m.set(r, k, f);
            for c in k + 1..n {
                m.add_to(r, c, -f * m.get(k, c));
            }
            x[r] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for c in i + 1..n {
            s -= m.get(i, c) * x[c];
        }
        x[i] = s / m.get(i, i);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_identity_solve_returns_rhs() {
        let a = DenseMatrix::identity(5);
        let b = [1.0, -2.0, 3.0, 0.5, 4.0];
        let x = dense_cholesky_solve(&a, &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn cholesky_construct_then_solve_recovers_solution() {
        // A = M^T M + I is SPD; b = A x* for a known x*.
        let n = 12;
        let mut rng = crate::rng::Rng::from_seed(5);
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, rng.next_f64() - 0.5);
            }
        }
        let mut a = m.transpose().matmul(&m);
        for i in 0..n {
            a.add_to(i, i, 1.0);
        }
        let x_star: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0) / 3.0).collect();
        let b = a.mul_vec(&x_star);
        let x = dense_cholesky_solve(&a, &b).unwrap();
        for i in 0..n {
            assert!(
                (x[i] - x_star[i]).abs() <= 1e-10 * x_star[i].abs().max(1.0),
                "x[{i}] = {}, want {}",
                x[i],
                x_star[i]
            );
        }
    }

    #[test]
    fn cholesky_reports_failing_pivot() {
        let mut a = DenseMatrix::identity(3);
        a.set(2, 2, -1.0);
        match a.cholesky() {
            Err(LinalgError::NotPositiveDefinite { pivot }) => assert_eq!(pivot, 2),
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn residual_of_cholesky_solve_is_small() {
        let n = 20;
        let mut rng = crate::rng::Rng::from_seed(11);
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, rng.next_f64() - 0.5);
            }
        }
        let mut a = m.transpose().matmul(&m);
        for i in 0..n {
            a.add_to(i, i, 2.0);
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64) - 7.0).collect();
        let x = dense_cholesky_solve(&a, &b).unwrap();
        let r = a.mul_vec(&x);
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..n {
            err += (r[i] - b[i]) * (r[i] - b[i]);
            scale += b[i] * b[i];
        }
        assert!(err.sqrt() <= 1e-10 * scale.sqrt());
    }

    #[test]
    fn lu_solves_nonsymmetric_system() {
        let a = DenseMatrix::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, -1.0, 0.0],
            vec![3.0, 0.0, -2.0],
        ]);
        let x_star = [1.0, 2.0, -1.0];
        let b = a.mul_vec(&x_star);
        let x = lu_solve(&a, &b).unwrap();
        for i in 0..3 {
            assert!((x[i] - x_star[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_detects_singularity() {
        let a = DenseMatrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![0.0, 1.0, 1.0],
        ]);
        assert!(matches!(
            lu_solve(&a, &[1.0, 2.0, 3.0]),
            Err(LinalgError::SingularMatrix { .. })
        ));
    }
}
