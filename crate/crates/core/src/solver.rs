//! Outer Gauss-Newton loop: assemble, gauge-fix, solve the linearized system
//! by (preconditioned) conjugate gradients, and update the poses.

use crate::graph::{
    assemble_gauss_newton, embed_gauged, fix_gauge, gradient, objective, GraphError, PoseGraph,
};
use crate::linalg::{norm2, pcg, CgReport, IdentityOperator, LinalgError};
use crate::pose::Pose2;
use crate::schwarz::{SchwarzError, SchwarzPreconditioner, SubdomainPartition};
use alloc::vec::Vec;
use core::fmt;

/// Which preconditioner the inner CG solves use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerKind {
    None,
    /// Additive overlapping Schwarz with the given overlap width in poses.
    AdditiveSchwarz { overlap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnConfig {
    /// Absolute tolerance on the Euclidean norm of the gauged gradient.
    pub gn_abs_tol: f64,
    pub gn_max_iter: usize,
    /// Relative tolerance on the unpreconditioned CG residual.
    pub cg_rel_tol: f64,
    /// Inner iteration cap; `None` means ten times the system dimension.
    pub cg_max_iter: Option<usize>,
    pub preconditioner: PreconditionerKind,
}

impl Default for GnConfig {
    fn default() -> Self {
        GnConfig {
            gn_abs_tol: 1e-6,
            gn_max_iter: 100,
            cg_rel_tol: 1e-8,
            cg_max_iter: None,
            preconditioner: PreconditionerKind::None,
        }
    }
}

/// Per-solve record: one CG report per Gauss-Newton iteration.
#[derive(Debug, Clone)]
pub struct GnReport {
    pub gn_iterations: usize,
    pub cg_reports: Vec<CgReport>,
    pub final_objective: f64,
    pub final_gradient_norm: f64,
    /// True when the gradient norm reached `gn_abs_tol`; false means the
    /// iteration cap was hit.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    Graph(GraphError),
    Linalg(LinalgError),
    Schwarz(SchwarzError),
    /// The Schwarz preconditioner was requested without a partition.
    MissingPartition,
    /// The inner CG hit its iteration cap.
    CgDidNotConverge { gn_iteration: usize, cg_iterations: usize },
    /// Precondition failure of a diagnostic that needs a nonzero gradient.
    ZeroGradient,
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::Graph(e) => write!(f, "{e}"),
            SolverError::Linalg(e) => write!(f, "{e}"),
            SolverError::Schwarz(e) => write!(f, "{e}"),
            SolverError::MissingPartition => {
                write!(f, "additive Schwarz requested but no partition was provided")
            }
            SolverError::CgDidNotConverge {
                gn_iteration,
                cg_iterations,
            } => write!(
                f,
                "CG hit its iteration cap ({cg_iterations}) in Gauss-Newton iteration {gn_iteration}"
            ),
            SolverError::ZeroGradient => write!(f, "gradient is zero; nothing to check"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SolverError {}

impl From<GraphError> for SolverError {
    fn from(e: GraphError) -> Self {
        SolverError::Graph(e)
    }
}
impl From<LinalgError> for SolverError {
    fn from(e: LinalgError) -> Self {
        SolverError::Linalg(e)
    }
}
impl From<SchwarzError> for SolverError {
    fn from(e: SchwarzError) -> Self {
        SolverError::Schwarz(e)
    }
}

fn apply_increment(poses: &mut [Pose2], delta: &[f64]) {
    for (p, d) in poses.iter_mut().zip(delta.chunks_exact(3)) {
        *p = Pose2::new(p.x + d[0], p.y + d[1], p.theta + d[2]);
    }
}

/// Minimizes the pose-graph objective by full-step Gauss-Newton.
///
/// Each iteration assembles the gauged normal equations, solves them with
/// (preconditioned) CG from a zero initial guess, and applies the increment
/// with angle renormalization; the fixed pose never changes. Terminates when
/// the gauged gradient norm falls below `gn_abs_tol`, or at `gn_max_iter`
/// with `converged = false` in the report. The Schwarz factorizations are
/// rebuilt from the fresh matrix every iteration.
pub fn solve(
    g: &PoseGraph,
    cfg: &GnConfig,
    partition: Option<&SubdomainPartition>,
) -> Result<(PoseGraph, GnReport), SolverError> {
    g.validate()?;
    if matches!(cfg.preconditioner, PreconditionerKind::AdditiveSchwarz { .. })
        && partition.is_none()
    {
        return Err(SolverError::MissingPartition);
    }
    let mut graph = g.clone();
    let mut cg_reports = Vec::new();
    let mut converged = false;
    let mut grad_norm;
    loop {
        let (h, b) = assemble_gauss_newton(&graph);
        let (h_red, b_red) = fix_gauge(&h, &b, graph.fixed)?;
        grad_norm = norm2(&b_red);
        if grad_norm <= cfg.gn_abs_tol {
            converged = true;
            break;
        }
        if cg_reports.len() >= cfg.gn_max_iter {
            break;
        }
        let cg_cap = cfg.cg_max_iter.unwrap_or(10 * h_red.dim());
        let (delta_red, report) = match cfg.preconditioner {
            PreconditionerKind::None => {
                let m = IdentityOperator { dim: h_red.dim() };
                pcg(&h_red, &m, &b_red, cfg.cg_rel_tol, cg_cap)?
            }
            PreconditionerKind::AdditiveSchwarz { .. } => {
                let m = SchwarzPreconditioner::build(&h_red, partition.unwrap())?;
                pcg(&h_red, &m, &b_red, cfg.cg_rel_tol, cg_cap)?
            }
        };
        if !report.converged {
            return Err(SolverError::CgDidNotConverge {
                gn_iteration: cg_reports.len(),
                cg_iterations: report.iterations,
            });
        }
        cg_reports.push(report);
        let delta = embed_gauged(&delta_red, graph.fixed, graph.poses.len());
        apply_increment(&mut graph.poses, &delta);
    }
    let report = GnReport {
        gn_iterations: cg_reports.len(),
        cg_reports,
        final_objective: objective(&graph),
        final_gradient_norm: grad_norm,
        converged,
    };
    Ok((graph, report))
}

/// Verifies that the Gauss-Newton step is a descent direction and returns
/// the inner product `delta^T grad` (negative for an SPD system).
pub fn step_direction_check(g: &PoseGraph) -> Result<f64, SolverError> {
    g.validate()?;
    let (h, b) = assemble_gauss_newton(g);
    let (h_red, b_red) = fix_gauge(&h, &b, g.fixed)?;
    if norm2(&b_red) == 0.0 {
        return Err(SolverError::ZeroGradient);
    }
    let m = IdentityOperator { dim: h_red.dim() };
    let (delta_red, _) = pcg(&h_red, &m, &b_red, 1e-10, 10 * h_red.dim())?;
    let grad = gradient(g);
    let delta = embed_gauged(&delta_red, g.fixed, g.poses.len());
    Ok(crate::linalg::dot(&delta, &grad))
}
