//! One-level additive overlapping Schwarz preconditioning: trajectory
//! partitioning into overlapping subdomains, subdomain matrix extraction and
//! factorization, and application of `sum_i R_i^T A_i^{-1} R_i`.

use crate::graph::{EdgeKind, PoseGraph};
use crate::linalg::{BlockSparseMatrix, LinalgError, Operator, PackedCholesky};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Overlapping cover of the gauged pose indices by subdomain index sets.
///
/// Index sets hold *gauged* block indices: pose indices with the fixed pose
/// removed and later poses shifted down by one.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainPartition {
    index_sets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchwarzError {
    /// The graph does not match the `loops`/`points_per_side` layout.
    PartitionMismatch {
        expected_poses: usize,
        actual_poses: usize,
    },
    /// Some gauged index belongs to no subdomain.
    UncoveredIndex { index: usize },
    /// No subdomain contains both endpoints of this edge.
    UncoveredEdge { i: usize, j: usize },
    /// A subdomain matrix failed its Cholesky factorization.
    SubdomainNotSpd { subdomain: usize, pivot: usize },
    EmptyPartition,
}

impl fmt::Display for SchwarzError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchwarzError::PartitionMismatch {
                expected_poses,
                actual_poses,
            } => write!(
                f,
                "graph has {actual_poses} poses but the loop layout implies {expected_poses}"
            ),
            SchwarzError::UncoveredIndex { index } => {
                write!(f, "gauged index {index} is not covered by any subdomain")
            }
            SchwarzError::UncoveredEdge { i, j } => {
                write!(f, "edge ({i}, {j}) is interior to no subdomain")
            }
            SchwarzError::SubdomainNotSpd { subdomain, pivot } => write!(
                f,
                "subdomain {subdomain} matrix is not positive definite (pivot {pivot})"
            ),
            SchwarzError::EmptyPartition => write!(f, "partition has no subdomains"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SchwarzError {}

/// Gauged block index of a pose, `None` for the fixed pose itself.
fn gauged_index(pose: usize, fixed: usize) -> Option<usize> {
    use core::cmp::Ordering;
    match pose.cmp(&fixed) {
        Ordering::Less => Some(pose),
        Ordering::Equal => None,
        Ordering::Greater => Some(pose - 1),
    }
}

impl SubdomainPartition {
    /// Builds a partition from explicit gauged index sets. Sets are sorted
    /// and deduplicated.
    pub fn from_index_sets(mut index_sets: Vec<Vec<usize>>) -> Result<Self, SchwarzError> {
        if index_sets.is_empty() {
            return Err(SchwarzError::EmptyPartition);
        }
        for set in &mut index_sets {
            set.sort_unstable();
            set.dedup();
        }
        Ok(SubdomainPartition { index_sets })
    }

    pub fn index_sets(&self) -> &[Vec<usize>] {
        &self.index_sets
    }

    pub fn num_subdomains(&self) -> usize {
        self.index_sets.len()
    }

    /// Checks that the union of the sets covers `0..n_gauged` and that both
    /// endpoints of every listed edge share at least one subdomain.
    pub fn validate_cover(
        &self,
        n_gauged: usize,
        edges: impl Iterator<Item = (usize, usize)>,
    ) -> Result<(), SchwarzError> {
        let mut covered = vec![false; n_gauged];
        for set in &self.index_sets {
            for &k in set {
                if k < n_gauged {
                    covered[k] = true;
                }
            }
        }
        if let Some(index) = covered.iter().position(|&c| !c) {
            return Err(SchwarzError::UncoveredIndex { index });
        }
        for (i, j) in edges {
            let interior = self
                .index_sets
                .iter()
                .any(|set| set.binary_search(&i).is_ok() && set.binary_search(&j).is_ok());
            if !interior {
                return Err(SchwarzError::UncoveredEdge { i, j });
            }
        }
        Ok(())
    }
}

/// Partitions a square-trajectory benchmark graph into one subdomain per
/// loop with one shared trajectory pose between consecutive subdomains
/// (minimal overlap, three degrees of freedom).
///
/// Subdomains containing one endpoint of a loop-closure edge are extended to
/// contain the other endpoint, so every edge is interior to some subdomain.
/// The gauge-fixed pose is removed from all index sets.
pub fn loop_partition(
    g: &PoseGraph,
    loops: usize,
    points_per_side: usize,
) -> Result<SubdomainPartition, SchwarzError> {
    loop_partition_with_overlap(g, loops, points_per_side, 1)
}

/// [`loop_partition`] with a wider overlap: each subdomain is extended by
/// `overlap - 1` additional trajectory poses on both sides.
pub fn loop_partition_with_overlap(
    g: &PoseGraph,
    loops: usize,
    points_per_side: usize,
    overlap: usize,
) -> Result<SubdomainPartition, SchwarzError> {
    assert!(loops >= 1 && points_per_side >= 1 && overlap >= 1);
    let n_poses = g.poses.len();
    let per_loop = 4 * points_per_side;
    let expected = loops * per_loop + 1;
    if n_poses != expected {
        return Err(SchwarzError::PartitionMismatch {
            expected_poses: expected,
            actual_poses: n_poses,
        });
    }
    let fixed = g.fixed;
    let extra = overlap - 1;
    let mut index_sets: Vec<Vec<usize>> = Vec::with_capacity(loops);
    for k in 0..loops {
        let lo = (k * per_loop).saturating_sub(extra);
        let hi = ((k + 1) * per_loop + extra).min(n_poses - 1);
        let set: Vec<usize> = (lo..=hi).filter_map(|p| gauged_index(p, fixed)).collect();
        index_sets.push(set);
    }
    // Pull the far endpoint of every closure edge into each subdomain that
    // already contains the near one, so the coupling sits in the overlap.
    // Membership is tested against the trajectory sets, not against sets
    // already extended by other closure edges; otherwise extensions cascade
    // along the closure chain.
    let base_sets = index_sets.clone();
    for e in &g.edges {
        if e.kind != EdgeKind::LoopClosure {
            continue;
        }
        let (gi, gj) = (gauged_index(e.i, fixed), gauged_index(e.j, fixed));
        let (gi, gj) = match (gi, gj) {
            (Some(a), Some(b)) => (a, b),
            // An endpoint at the fixed pose is not an unknown; nothing to do.
            _ => continue,
        };
        for (set, base) in index_sets.iter_mut().zip(&base_sets) {
            let has_i = base.contains(&gi);
            let has_j = base.contains(&gj);
            if has_i && !has_j {
                set.push(gj);
            } else if has_j && !has_i {
                set.push(gi);
            }
        }
    }
    let partition = SubdomainPartition::from_index_sets(index_sets)?;
    partition.validate_cover(
        n_poses - 1,
        g.edges.iter().filter_map(|e| {
            match (gauged_index(e.i, fixed), gauged_index(e.j, fixed)) {
                (Some(a), Some(b)) => Some((a, b)),
                _ => None,
            }
        }),
    )?;
    Ok(partition)
}

/// The assembled one-level additive Schwarz preconditioner: per-subdomain
/// Cholesky factors of the extracted principal submatrices.
///
/// Immutable after `build`; safe to apply from concurrent callers.
pub struct SchwarzPreconditioner {
    /// Scalar index lists per subdomain (three per pose block).
    scalar_sets: Vec<Vec<usize>>,
    factors: Vec<PackedCholesky>,
    dim: usize,
}

impl SchwarzPreconditioner {
    /// Extracts and factorizes every subdomain matrix `A_i = R_i A R_i^T`
    /// from the gauged system matrix.
    pub fn build(
        a: &BlockSparseMatrix,
        partition: &SubdomainPartition,
    ) -> Result<Self, SchwarzError> {
        let mut scalar_sets = Vec::with_capacity(partition.num_subdomains());
        let mut factors = Vec::with_capacity(partition.num_subdomains());
        for (s, set) in partition.index_sets().iter().enumerate() {
            let sub = a.principal_submatrix(set);
            let factor = sub.cholesky().map_err(|e| match e {
                LinalgError::NotPositiveDefinite { pivot } => SchwarzError::SubdomainNotSpd {
                    subdomain: s,
                    pivot,
                },
                _ => SchwarzError::SubdomainNotSpd {
                    subdomain: s,
                    pivot: 0,
                },
            })?;
            let mut scalars = Vec::with_capacity(3 * set.len());
            for &blk in set {
                scalars.extend_from_slice(&[3 * blk, 3 * blk + 1, 3 * blk + 2]);
            }
            scalar_sets.push(scalars);
            factors.push(factor);
        }
        Ok(SchwarzPreconditioner {
            scalar_sets,
            factors,
            dim: a.dim(),
        })
    }

    pub fn num_subdomains(&self) -> usize {
        self.factors.len()
    }

    /// Applies `sum_i R_i^T A_i^{-1} R_i v`: gather, local solve, and
    /// scatter-add in ascending subdomain order.
    pub fn apply_to(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(v, &mut out);
        out
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        assert_eq!(out.len(), self.dim, "dimension mismatch");
        out.fill(0.0);
        for (scalars, factor) in self.scalar_sets.iter().zip(&self.factors) {
            let mut local: Vec<f64> = scalars.iter().map(|&k| v[k]).collect();
            factor.solve_in_place(&mut local);
            for (&k, &val) in scalars.iter().zip(&local) {
                out[k] += val;
            }
        }
    }
}

impl Operator for SchwarzPreconditioner {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        self.apply_into(v, out);
    }
}
