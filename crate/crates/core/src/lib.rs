//! 2D pose-graph optimization back-end.
//!
//! Solves planar pose-graph least-squares problems with Gauss-Newton, where
//! each linearized system is solved by preconditioned conjugate gradients
//! using a one-level additive overlapping Schwarz preconditioner. The crate
//! also ships a synthetic square-trajectory benchmark generator and a 1D
//! elastic bar-chain model that doubles as an analytic oracle for assembly
//! and Dirichlet handling.
//!
//! The crate is `no_std`-compatible (requires `alloc`). Scalar math comes
//! from `std` by default; enable the `libm` feature instead for `no_std`
//! targets.

#![no_std]
// Indexed loops mirror the matrix notation throughout.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("posegraph-core needs either the `std` or the `libm` feature");

mod math;
mod rng;

pub mod fem1d;
pub mod graph;
pub mod linalg;
pub mod pose;
pub mod schwarz;
pub mod solver;
pub mod synth;

pub use graph::{Edge, EdgeKind, PoseGraph, StackedResidual};
pub use linalg::{BlockSparseMatrix, CgReport, DenseMatrix, LinalgError, Operator};
pub use pose::{EdgeJacobian, Pose2, RelPose};
pub use schwarz::{SchwarzError, SchwarzPreconditioner, SubdomainPartition};
pub use solver::{GnConfig, GnReport, PreconditionerKind, SolverError};
pub use synth::{ClosureTarget, SynthConfig, SynthOutput};
