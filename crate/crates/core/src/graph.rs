//! Pose-graph data model and evaluation: objective, stacked residual,
//! gradient, Gauss-Newton assembly, and gauge fixing.

use crate::linalg::{Block3, BlockSparseBuilder, BlockSparseMatrix, ZERO_BLOCK};
use crate::pose::{edge_jacobian, residual, Pose2, RelPose};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Whether an edge is a sequential odometry measurement or a loop closure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Odometry,
    LoopClosure,
}

/// A relative-pose measurement between two vertices, with its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub meas: RelPose,
    /// Symmetric positive (semi)definite 3x3 weight matrix.
    pub weight: Block3,
    pub kind: EdgeKind,
}

impl Edge {
    /// Edge weighted by `w * I_3`.
    pub fn with_scalar_weight(i: usize, j: usize, meas: RelPose, w: f64, kind: EdgeKind) -> Self {
        let mut weight = ZERO_BLOCK;
        for d in 0..3 {
            weight[d][d] = w;
        }
        Edge {
            i,
            j,
            meas,
            weight,
            kind,
        }
    }
}

/// A pose graph: vertices, measurement edges, and the gauge-fixed vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseGraph {
    pub poses: Vec<Pose2>,
    pub edges: Vec<Edge>,
    /// Index of the pose held fixed to remove the rigid-motion null space.
    pub fixed: usize,
}

/// Stacked residual vector, blocks ordered by the edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedResidual {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    EdgeOutOfRange { edge: usize },
    SelfLoop { edge: usize },
    FixedOutOfRange { fixed: usize, n_poses: usize },
    AsymmetricWeight { edge: usize },
    OdometryNotSequential { edge: usize },
    BrokenOdometryChain { from: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::EdgeOutOfRange { edge } => {
                write!(f, "edge {edge} references a vertex out of range")
            }
            GraphError::SelfLoop { edge } => write!(f, "edge {edge} connects a vertex to itself"),
            GraphError::FixedOutOfRange { fixed, n_poses } => {
                write!(f, "fixed pose {fixed} out of range for {n_poses} poses")
            }
            GraphError::AsymmetricWeight { edge } => {
                write!(f, "edge {edge} has an asymmetric weight matrix")
            }
            GraphError::OdometryNotSequential { edge } => {
                write!(f, "odometry edge {edge} does not connect consecutive poses")
            }
            GraphError::BrokenOdometryChain { from } => {
                write!(f, "no odometry edge between poses {from} and {}", from + 1)
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GraphError {}

impl PoseGraph {
    pub fn new(poses: Vec<Pose2>, edges: Vec<Edge>, fixed: usize) -> Self {
        PoseGraph {
            poses,
            edges,
            fixed,
        }
    }

    pub fn n_poses(&self) -> usize {
        self.poses.len()
    }

    /// Checks the structural invariants: indices in range, no self loops,
    /// symmetric weights, a gauge vertex, and an intact odometry chain.
    pub fn validate(&self) -> Result<(), GraphError> {
        let n = self.poses.len();
        if self.fixed >= n {
            return Err(GraphError::FixedOutOfRange {
                fixed: self.fixed,
                n_poses: n,
            });
        }
        let mut chain = vec![false; n.saturating_sub(1)];
        for (k, e) in self.edges.iter().enumerate() {
            if e.i >= n || e.j >= n {
                return Err(GraphError::EdgeOutOfRange { edge: k });
            }
            if e.i == e.j {
                return Err(GraphError::SelfLoop { edge: k });
            }
            for r in 0..3 {
                for c in 0..r {
                    if e.weight[r][c] != e.weight[c][r] {
                        return Err(GraphError::AsymmetricWeight { edge: k });
                    }
                }
            }
            if e.kind == EdgeKind::Odometry {
                if e.i.abs_diff(e.j) != 1 {
                    return Err(GraphError::OdometryNotSequential { edge: k });
                }
                chain[e.i.min(e.j)] = true;
            }
        }
        if let Some(from) = chain.iter().position(|&c| !c) {
            return Err(GraphError::BrokenOdometryChain { from });
        }
        Ok(())
    }
}

#[inline]
fn mat3_mul(a: &Block3, b: &Block3) -> Block3 {
    let mut out = ZERO_BLOCK;
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c];
        }
    }
    out
}

#[inline]
fn mat3_transpose(a: &Block3) -> Block3 {
    let mut out = ZERO_BLOCK;
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = a[c][r];
        }
    }
    out
}

#[inline]
fn mat3_mul_vec(a: &Block3, v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for r in 0..3 {
        out[r] = a[r][0] * v[0] + a[r][1] * v[1] + a[r][2] * v[2];
    }
    out
}

/// Mirrors the upper triangle onto the lower one, making the block exactly
/// symmetric.
#[inline]
fn mat3_symmetrize(a: &mut Block3) {
    for r in 1..3 {
        for c in 0..r {
            a[r][c] = a[c][r];
        }
    }
}

/// The least-squares objective `1/2 sum_E r^T W r`.
pub fn objective(g: &PoseGraph) -> f64 {
    let mut total = 0.0;
    for e in &g.edges {
        let r = residual(&g.poses[e.i], &g.poses[e.j], &e.meas);
        let wr = mat3_mul_vec(&e.weight, &r);
        total += 0.5 * (r[0] * wr[0] + r[1] * wr[1] + r[2] * wr[2]);
    }
    total
}

/// All edge residuals stacked in edge-list order (length `3 |E|`).
pub fn stacked_residual(g: &PoseGraph) -> StackedResidual {
    let mut values = Vec::with_capacity(3 * g.edges.len());
    for e in &g.edges {
        values.extend_from_slice(&residual(&g.poses[e.i], &g.poses[e.j], &e.meas));
    }
    StackedResidual { values }
}

/// Gradient of the objective over all poses (ungauged, length `3 N`).
///
/// Each vertex block sums `DPhi^T W r` over its incident edges.
pub fn gradient(g: &PoseGraph) -> Vec<f64> {
    let mut grad = vec![0.0; 3 * g.poses.len()];
    for e in &g.edges {
        let r = residual(&g.poses[e.i], &g.poses[e.j], &e.meas);
        let jac = edge_jacobian(&g.poses[e.i], &g.poses[e.j]);
        let wr = mat3_mul_vec(&e.weight, &r);
        let gi = mat3_mul_vec(&mat3_transpose(&jac.wrt_i), &wr);
        let gj = mat3_mul_vec(&mat3_transpose(&jac.wrt_j), &wr);
        for d in 0..3 {
            grad[3 * e.i + d] += gi[d];
            grad[3 * e.j + d] += gj[d];
        }
    }
    grad
}

/// Assembles the Gauss-Newton system: `H = J^T W J` stamped edge by edge and
/// the right-hand side `-J^T W r`.
///
/// The matrix is exactly symmetric: diagonal stamps are mirrored and each
/// off-diagonal pair is written from a single stamp and its transpose.
pub fn assemble_gauss_newton(g: &PoseGraph) -> (BlockSparseMatrix, Vec<f64>) {
    let n = g.poses.len();
    let mut builder = BlockSparseBuilder::new(n);
    let mut rhs = vec![0.0; 3 * n];
    for e in &g.edges {
        let r = residual(&g.poses[e.i], &g.poses[e.j], &e.meas);
        let jac = edge_jacobian(&g.poses[e.i], &g.poses[e.j]);
        let ji_t = mat3_transpose(&jac.wrt_i);
        let jj_t = mat3_transpose(&jac.wrt_j);
        let w_ji = mat3_mul(&e.weight, &jac.wrt_i);
        let w_jj = mat3_mul(&e.weight, &jac.wrt_j);

        let mut h_ii = mat3_mul(&ji_t, &w_ji);
        let mut h_jj = mat3_mul(&jj_t, &w_jj);
        mat3_symmetrize(&mut h_ii);
        mat3_symmetrize(&mut h_jj);
        let h_ij = mat3_mul(&ji_t, &w_jj);
        let h_ji = mat3_transpose(&h_ij);
        builder.add(e.i, e.i, &h_ii);
        builder.add(e.j, e.j, &h_jj);
        builder.add(e.i, e.j, &h_ij);
        builder.add(e.j, e.i, &h_ji);

        let wr = mat3_mul_vec(&e.weight, &r);
        let gi = mat3_mul_vec(&ji_t, &wr);
        let gj = mat3_mul_vec(&jj_t, &wr);
        for d in 0..3 {
            rhs[3 * e.i + d] -= gi[d];
            rhs[3 * e.j + d] -= gj[d];
        }
    }
    (builder.build(), rhs)
}

/// Removes the three rows and columns of the gauge-fixed pose, yielding the
/// reduced system whose increment for the fixed pose is identically zero.
pub fn fix_gauge(
    h: &BlockSparseMatrix,
    b: &[f64],
    fixed: usize,
) -> Result<(BlockSparseMatrix, Vec<f64>), GraphError> {
    let n = h.n_blocks();
    if fixed >= n {
        return Err(GraphError::FixedOutOfRange {
            fixed,
            n_poses: n,
        });
    }
    assert_eq!(b.len(), 3 * n, "dimension mismatch");
    let reduced = h.remove_block_row_col(fixed);
    let mut rb = Vec::with_capacity(3 * (n - 1));
    rb.extend_from_slice(&b[..3 * fixed]);
    rb.extend_from_slice(&b[3 * fixed + 3..]);
    Ok((reduced, rb))
}

/// Re-embeds a gauged increment into the full space, zero at the fixed pose.
pub fn embed_gauged(delta: &[f64], fixed: usize, n_poses: usize) -> Vec<f64> {
    assert_eq!(delta.len(), 3 * (n_poses - 1), "dimension mismatch");
    let mut full = vec![0.0; 3 * n_poses];
    full[..3 * fixed].copy_from_slice(&delta[..3 * fixed]);
    full[3 * fixed + 3..].copy_from_slice(&delta[3 * fixed..]);
    full
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::relative_pose;

    fn two_pose_graph() -> PoseGraph {
        // One edge with residual (0.1, 0, 0) and weight 20 I.
        PoseGraph::new(
            vec![Pose2::origin(), Pose2::new(1.0, 0.0, 0.0)],
            vec![Edge::with_scalar_weight(
                0,
                1,
                RelPose::new(0.9, 0.0, 0.0),
                20.0,
                EdgeKind::Odometry,
            )],
            0,
        )
    }

    fn perfect_square_graph() -> PoseGraph {
        use core::f64::consts::PI;
        let poses = vec![
            Pose2::new(0.0, 0.0, 0.0),
            Pose2::new(1.0, 0.0, PI / 2.0),
            Pose2::new(1.0, 1.0, PI),
            Pose2::new(0.0, 1.0, -PI / 2.0),
        ];
        let mut edges = Vec::new();
        for t in 0..3 {
            edges.push(Edge::with_scalar_weight(
                t,
                t + 1,
                relative_pose(&poses[t], &poses[t + 1]),
                20.0,
                EdgeKind::Odometry,
            ));
        }
        edges.push(Edge::with_scalar_weight(
            3,
            0,
            relative_pose(&poses[3], &poses[0]),
            100.0,
            EdgeKind::LoopClosure,
        ));
        PoseGraph::new(poses, edges, 0)
    }

    #[test]
    fn objective_zero_for_perfect_measurements() {
        assert_eq!(objective(&perfect_square_graph()), 0.0);
    }

    #[test]
    fn objective_hand_evaluated_single_edge() {
        let g = two_pose_graph();
        let got = objective(&g);
        assert!((got - 0.1).abs() < 1e-14, "objective {got}");
    }

    #[test]
    fn objective_scales_linearly_with_weights() {
        let mut g = perfect_square_graph();
        // Perturb a pose so the objective is nonzero.
        g.poses[2] = Pose2::new(1.1, 0.95, 3.0);
        let base = objective(&g);
        let c = 3.5;
        let mut scaled = g.clone();
        for e in &mut scaled.edges {
            for r in 0..3 {
                for col in 0..3 {
                    e.weight[r][col] *= c;
                }
            }
        }
        let got = objective(&scaled);
        assert!((got - c * base).abs() <= 1e-12 * got.abs());
    }

    #[test]
    fn stacked_residual_shape_and_consistency() {
        let g = perfect_square_graph();
        let r = stacked_residual(&g);
        assert_eq!(r.values.len(), 3 * g.edges.len());
        assert!(r.values.iter().all(|&v| v == 0.0));

        let g = two_pose_graph();
        let r = stacked_residual(&g);
        assert!((r.values[0] - 0.1).abs() < 1e-15);
        assert_eq!(&r.values[1..], &[0.0, 0.0]);
        // objective == 1/2 r^T W r, here W = 20 I.
        let quad: f64 = 0.5 * 20.0 * r.values.iter().map(|v| v * v).sum::<f64>();
        let obj = objective(&g);
        assert!((quad - obj).abs() <= 1e-12 * obj.abs().max(1e-30));
    }

    #[test]
    fn gradient_zero_for_perfect_measurements() {
        let g = perfect_square_graph();
        assert!(gradient(&g).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_zero_for_isolated_vertex() {
        let mut g = two_pose_graph();
        g.poses.push(Pose2::new(5.0, 5.0, 1.0));
        let grad = gradient(&g);
        assert_eq!(&grad[6..9], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn gradient_matches_finite_differences_of_objective() {
        let mut g = perfect_square_graph();
        g.poses[1] = Pose2::new(1.05, -0.02, 1.52);
        g.poses[2] = Pose2::new(0.97, 1.03, -3.1);
        let grad = gradient(&g);
        let h = 1e-6;
        for k in 0..3 * g.poses.len() {
            let mut lo = g.clone();
            let mut hi = g.clone();
            let (p, d) = (k / 3, k % 3);
            match d {
                0 => {
                    lo.poses[p].x -= h;
                    hi.poses[p].x += h;
                }
                1 => {
                    lo.poses[p].y -= h;
                    hi.poses[p].y += h;
                }
                _ => {
                    lo.poses[p].theta -= h;
                    hi.poses[p].theta += h;
                }
            }
            let fd = (objective(&hi) - objective(&lo)) / (2.0 * h);
            let scale = grad[k].abs().max(1.0);
            assert!(
                (grad[k] - fd).abs() <= 1e-5 * scale,
                "component {k}: gradient {}, fd {fd}",
                grad[k]
            );
        }
    }

    #[test]
    fn single_edge_assembly_has_full_two_by_two_block_pattern() {
        let g = two_pose_graph();
        let (h, _) = assemble_gauss_newton(&g);
        assert_eq!(h.n_blocks(), 2);
        assert_eq!(h.nnz_blocks(), 4);
        for i in 0..2 {
            for j in 0..2 {
                assert!(h.block(i, j).is_some(), "block ({i},{j}) missing");
            }
        }
    }

    #[test]
    fn assembled_matrix_is_exactly_symmetric() {
        let mut g = perfect_square_graph();
        g.poses[1] = Pose2::new(0.9, 0.1, 1.4);
        let (h, _) = assemble_gauss_newton(&g);
        assert!(h.is_symmetric(0.0));
    }

    #[test]
    fn loop_closure_adds_off_diagonal_block() {
        let mut g = two_pose_graph();
        g.poses.push(Pose2::new(2.0, 0.0, 0.0));
        g.edges.push(Edge::with_scalar_weight(
            1,
            2,
            relative_pose(&g.poses[1], &g.poses[2]),
            20.0,
            EdgeKind::Odometry,
        ));
        let (before, _) = assemble_gauss_newton(&g);
        assert!(before.block(0, 2).is_none());
        g.edges.push(Edge::with_scalar_weight(
            0,
            2,
            relative_pose(&g.poses[0], &g.poses[2]),
            100.0,
            EdgeKind::LoopClosure,
        ));
        let (after, _) = assemble_gauss_newton(&g);
        assert!(after.block(0, 2).is_some());
        assert!(after.block(2, 0).is_some());
    }

    #[test]
    fn off_diagonal_pairs_count_distinct_edges() {
        let g = perfect_square_graph();
        let (h, _) = assemble_gauss_newton(&g);
        assert_eq!(h.off_diagonal_pairs(), g.edges.len());
    }

    #[test]
    fn rhs_is_negative_gradient() {
        let mut g = perfect_square_graph();
        g.poses[3] = Pose2::new(0.1, 1.1, -1.5);
        let (_, rhs) = assemble_gauss_newton(&g);
        let grad = gradient(&g);
        for k in 0..rhs.len() {
            assert_eq!(rhs[k], -grad[k]);
        }
    }

    #[test]
    fn fix_gauge_reduces_dimension_and_passes_cholesky() {
        let mut g = perfect_square_graph();
        g.poses[1] = Pose2::new(1.02, 0.01, 1.55);
        let (h, b) = assemble_gauss_newton(&g);
        let (hr, br) = fix_gauge(&h, &b, 0).unwrap();
        assert_eq!(hr.n_blocks(), g.poses.len() - 1);
        assert_eq!(br.len(), 3 * (g.poses.len() - 1));
        assert!(hr.to_dense().cholesky().is_ok());
    }

    #[test]
    fn fix_gauge_rejects_out_of_range_index() {
        let g = two_pose_graph();
        let (h, b) = assemble_gauss_newton(&g);
        assert!(matches!(
            fix_gauge(&h, &b, 5),
            Err(GraphError::FixedOutOfRange { .. })
        ));
    }

    #[test]
    fn embed_gauged_places_zero_increment_at_fixed_pose() {
        let delta = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let full = embed_gauged(&delta, 1, 3);
        assert_eq!(full, vec![1.0, 2.0, 3.0, 0.0, 0.0, 0.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn validate_accepts_benchmark_shape_and_rejects_broken_graphs() {
        assert!(perfect_square_graph().validate().is_ok());

        let mut g = two_pose_graph();
        g.edges[0].j = 9;
        assert!(matches!(
            g.validate(),
            Err(GraphError::EdgeOutOfRange { .. })
        ));

        let mut g = two_pose_graph();
        g.fixed = 7;
        assert!(matches!(
            g.validate(),
            Err(GraphError::FixedOutOfRange { .. })
        ));

        let mut g = two_pose_graph();
        g.edges[0].weight[0][1] = 1.0;
        assert!(matches!(
            g.validate(),
            Err(GraphError::AsymmetricWeight { .. })
        ));

        let mut g = perfect_square_graph();
        g.edges.remove(1);
        assert!(matches!(
            g.validate(),
            Err(GraphError::BrokenOdometryChain { from: 1 })
        ));
    }
}
