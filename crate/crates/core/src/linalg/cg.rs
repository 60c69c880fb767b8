//! Preconditioned conjugate gradients with Lanczos coefficient recording.

use super::lanczos::lanczos_extremal_eigs;
use super::vec_ops::{axpy, dot, norm2};
use super::{BlockSparseMatrix, DenseMatrix, LinalgError, PackedCholesky};
use alloc::vec;
use alloc::vec::Vec;

/// A symmetric linear operator on scalar vectors.
pub trait Operator {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[f64], out: &mut [f64]);
}

impl Operator for BlockSparseMatrix {
    fn dim(&self) -> usize {
        BlockSparseMatrix::dim(self)
    }
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        self.spmv_into(v, out);
    }
}

impl Operator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n()
    }
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.mul_vec(v));
    }
}

/// A Cholesky factorization acts as the inverse of the factored matrix.
impl Operator for PackedCholesky {
    fn dim(&self) -> usize {
        self.n()
    }
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(v);
        self.solve_in_place(out);
    }
}

/// The identity preconditioner; turns [`pcg`] into plain CG.
pub struct IdentityOperator {
    pub dim: usize,
}

impl Operator for IdentityOperator {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(v);
    }
}

/// Outcome of a conjugate gradient run.
#[derive(Debug, Clone)]
pub struct CgReport {
    pub iterations: usize,
    pub converged: bool,
    /// Unpreconditioned residual 2-norms, one entry per iterate including
    /// the initial residual (length `iterations + 1`).
    pub residual_history: Vec<f64>,
    /// CG step lengths `alpha_k`, one per iteration.
    pub lanczos_alpha: Vec<f64>,
    /// CG direction updates `beta_k`, one per iteration after the first.
    pub lanczos_beta: Vec<f64>,
    /// Smallest eigenvalue of the preconditioned operator, estimated from
    /// the Lanczos tridiagonal matrix implied by the CG coefficients.
    pub lambda_min: Option<f64>,
    /// Largest eigenvalue estimate, same source.
    pub lambda_max: Option<f64>,
}

/// Preconditioned conjugate gradients for `A x = b`, starting from `x = 0`.
///
/// Stops when `||b - A x_k|| <= rel_tol * ||b||` or after `max_iter`
/// iterations (reported via `converged`). Fails on breakdown, i.e. when an
/// inner product certifies that `A` or the preconditioner is not positive
/// definite.
pub fn pcg<A: Operator + ?Sized, M: Operator + ?Sized>(
    a: &A,
    m_inv: &M,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgReport), LinalgError> {
    let n = a.dim();
    assert_eq!(b.len(), n, "dimension mismatch");
    assert_eq!(m_inv.dim(), n, "dimension mismatch");
    assert!(rel_tol > 0.0 && rel_tol < 1.0, "rel_tol must be in (0, 1)");

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let norm0 = norm2(&r);
    let mut history = vec![norm0];
    let mut alphas = Vec::new();
    let mut betas = Vec::new();

    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut rz_prev = 0.0;
    let mut k = 0;
    let converged = loop {
        if history[k] <= rel_tol * norm0 {
            break true;
        }
        if k >= max_iter {
            break false;
        }
        m_inv.apply(&r, &mut z);
        let rz = dot(&r, &z);
        if rz <= 0.0 || !rz.is_finite() {
            return Err(LinalgError::CgBreakdown {
                quantity: "r^T M^{-1} r",
                value: rz,
                iteration: k,
            });
        }
        if k == 0 {
            p.copy_from_slice(&z);
        } else {
            let beta = rz / rz_prev;
            betas.push(beta);
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
        a.apply(&p, &mut ap);
        let p_ap = dot(&p, &ap);
        if p_ap <= 0.0 || !p_ap.is_finite() {
            return Err(LinalgError::CgBreakdown {
                quantity: "p^T A p",
                value: p_ap,
                iteration: k,
            });
        }
        let alpha = rz / p_ap;
        alphas.push(alpha);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        history.push(norm2(&r));
        rz_prev = rz;
        k += 1;
    };

    let (lambda_min, lambda_max) = if alphas.is_empty() {
        (None, None)
    } else {
        let (lo, hi) = lanczos_extremal_eigs(&alphas, &betas)?;
        (Some(lo), Some(hi))
    };
    let report = CgReport {
        iterations: k,
        converged,
        residual_history: history,
        lanczos_alpha: alphas,
        lanczos_beta: betas,
        lambda_min,
        lambda_max,
    };
    Ok((x, report))
}
