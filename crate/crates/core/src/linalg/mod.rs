//! Block-sparse and dense linear algebra: storage, matrix-vector products,
//! Cholesky and LU factorizations, conjugate gradients, and eigenvalue
//! estimation from CG coefficients.

mod block;
mod cg;
mod dense;
mod lanczos;
pub(crate) mod vec_ops;

pub use block::{Block3, BlockSparseBuilder, BlockSparseMatrix, ZERO_BLOCK};
pub use cg::{pcg, CgReport, IdentityOperator, Operator};
pub use dense::{dense_cholesky_solve, lu_solve, DenseMatrix, PackedCholesky};
pub use lanczos::lanczos_extremal_eigs;
pub use vec_ops::{dot, norm2};

use core::fmt;

/// Failures of the numerical kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// Cholesky hit a non-positive pivot; the matrix is not SPD.
    NotPositiveDefinite { pivot: usize },
    /// LU found no usable pivot in the given column.
    SingularMatrix { column: usize },
    /// A CG inner product certified a non-SPD operator.
    CgBreakdown {
        quantity: &'static str,
        value: f64,
        iteration: usize,
    },
    /// Lanczos estimation needs at least one CG iteration.
    EmptyCoefficients,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NotPositiveDefinite { pivot } => {
                write!(f, "matrix is not positive definite (pivot {pivot})")
            }
            LinalgError::SingularMatrix { column } => {
                write!(f, "matrix is singular (column {column})")
            }
            LinalgError::CgBreakdown {
                quantity,
                value,
                iteration,
            } => write!(
                f,
                "conjugate gradient breakdown at iteration {iteration}: {quantity} = {value}"
            ),
            LinalgError::EmptyCoefficients => {
                write!(f, "no CG coefficients to estimate eigenvalues from")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LinalgError {}
