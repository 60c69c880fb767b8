//! Extremal eigenvalue estimates from CG coefficients via the Lanczos
//! tridiagonal matrix.

use super::LinalgError;
use crate::math;
use alloc::vec::Vec;

/// Builds the Lanczos tridiagonal matrix implied by a CG run and returns its
/// extremal eigenvalues `(lambda_min, lambda_max)`.
///
/// With `alpha_k` and `beta_k` the CG coefficients, the tridiagonal has
/// diagonal `1/alpha_k + beta_{k-1}/alpha_{k-1}` (with `beta_{-1} = 0`) and
/// off-diagonal `sqrt(beta_k)/alpha_k`. The eigenvalues approximate the
/// spectrum of the preconditioned operator.
pub fn lanczos_extremal_eigs(alpha: &[f64], beta: &[f64]) -> Result<(f64, f64), LinalgError> {
    if alpha.is_empty() {
        return Err(LinalgError::EmptyCoefficients);
    }
    assert_eq!(
        beta.len(),
        alpha.len() - 1,
        "beta must be one shorter than alpha"
    );
    let m = alpha.len();
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m.saturating_sub(1));
    for k in 0..m {
        let mut d = 1.0 / alpha[k];
        if k > 0 {
            d += beta[k - 1] / alpha[k - 1];
        }
        diag.push(d);
        if k + 1 < m {
            off.push(math::sqrt(beta[k]) / alpha[k]);
        }
    }
    let lo = tridiag_eigenvalue(&diag, &off, 0);
    let hi = tridiag_eigenvalue(&diag, &off, m - 1);
    Ok((lo, hi))
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly less
/// than `x`, by the Sturm sequence count.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let mut denom = q;
        if denom == 0.0 {
            denom = 1e-300;
        }
        q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based) via bisection on the Sturm count.
fn tridiag_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let mut radius = 0.0;
        if i > 0 {
            radius += math::abs(off[i - 1]);
        }
        if i < off.len() {
            radius += math::abs(off[i]);
        }
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    if lo == hi {
        return lo;
    }
    // count(x) < k+1 for x below the eigenvalue, >= k+1 above it.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
