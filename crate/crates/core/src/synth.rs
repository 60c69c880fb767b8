//! Synthetic square-trajectory benchmark: ground truth on a repeated unit
//! square, Gaussian-noise odometry, and one loop-closure edge per lap.

use crate::graph::{Edge, EdgeKind, PoseGraph};
use crate::pose::{normalize_angle, relative_pose, Pose2, RelPose};
use crate::rng::Rng;
use core::f64::consts::FRAC_PI_2;

/// Which pose a lap's closure edge connects back to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureTarget {
    /// Every return to the origin closes against pose 0.
    Origin,
    /// Each lap closes against the previous lap's origin visit.
    PreviousLap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub loops: usize,
    pub points_per_side: usize,
    /// Standard deviation of the translational odometry noise.
    pub sigma_trans: f64,
    /// Standard deviation of the rotational odometry noise, radians.
    pub sigma_rot: f64,
    pub seed: u64,
    /// Scalar weight of odometry edges (`w * I_3`).
    pub w_odom: f64,
    /// Scalar weight of loop-closure edges.
    pub w_loop: f64,
    pub closure_target: ClosureTarget,
    /// Closures are exact place recognition by default.
    pub noisy_closures: bool,
}

impl SynthConfig {
    pub fn new(loops: usize, points_per_side: usize, seed: u64) -> Self {
        SynthConfig {
            loops,
            points_per_side,
            sigma_trans: 0.01,
            sigma_rot: 0.005,
            seed,
            w_odom: 20.0,
            w_loop: 100.0,
            closure_target: ClosureTarget::Origin,
            noisy_closures: false,
        }
    }
}

/// Ground truth plus the pose graph initialized at integrated odometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub ground_truth: alloc::vec::Vec<Pose2>,
    pub graph: PoseGraph,
}

/// Ground-truth pose at trajectory index `t`: the robot walks the unit
/// square counterclockwise in steps of `1 / points_per_side`, turning left
/// by 90 degrees on arrival at each corner.
fn ground_truth_pose(t: usize, points_per_side: usize) -> Pose2 {
    let per_loop = 4 * points_per_side;
    let u = t % per_loop;
    let side = u / points_per_side;
    let along = (u % points_per_side) as f64 / points_per_side as f64;
    let (corner, dir) = match side {
        0 => ((0.0, 0.0), (1.0, 0.0)),
        1 => ((1.0, 0.0), (0.0, 1.0)),
        2 => ((1.0, 1.0), (-1.0, 0.0)),
        _ => ((0.0, 1.0), (0.0, -1.0)),
    };
    let heading = normalize_angle(side as f64 * FRAC_PI_2);
    Pose2::new(
        corner.0 + along * dir.0,
        corner.1 + along * dir.1,
        heading,
    )
}

/// Generates the benchmark problem for the given configuration.
///
/// Odometry edges carry the true relative pose plus independent Gaussian
/// noise; one closure edge per completed lap carries the exact relative
/// measurement (unless `noisy_closures` is set). The initial guess
/// integrates the noisy odometry from pose 0, and the weights are
/// `w_odom * I_3` and `w_loop * I_3`.
pub fn generate(cfg: &SynthConfig) -> SynthOutput {
    assert!(cfg.loops >= 1 && cfg.points_per_side >= 1);
    assert!(cfg.sigma_trans >= 0.0 && cfg.sigma_rot >= 0.0);
    let per_loop = 4 * cfg.points_per_side;
    let n_poses = cfg.loops * per_loop + 1;
    let mut rng = Rng::from_seed(cfg.seed);

    let ground_truth: alloc::vec::Vec<Pose2> = (0..n_poses)
        .map(|t| ground_truth_pose(t, cfg.points_per_side))
        .collect();

    let mut edges = alloc::vec::Vec::with_capacity(n_poses - 1 + cfg.loops);
    let mut guess = alloc::vec::Vec::with_capacity(n_poses);
    guess.push(ground_truth[0]);
    for t in 0..n_poses - 1 {
        let truth = relative_pose(&ground_truth[t], &ground_truth[t + 1]);
        let meas = RelPose::new(
            truth.dx + cfg.sigma_trans * rng.next_gaussian(),
            truth.dy + cfg.sigma_trans * rng.next_gaussian(),
            truth.dtheta + cfg.sigma_rot * rng.next_gaussian(),
        );
        guess.push(guess[t].compose(&meas));
        edges.push(Edge::with_scalar_weight(
            t,
            t + 1,
            meas,
            cfg.w_odom,
            EdgeKind::Odometry,
        ));
    }
    for lap in 1..=cfg.loops {
        let i = lap * per_loop;
        let j = match cfg.closure_target {
            ClosureTarget::Origin => 0,
            ClosureTarget::PreviousLap => (lap - 1) * per_loop,
        };
        let truth = relative_pose(&ground_truth[i], &ground_truth[j]);
        let meas = if cfg.noisy_closures {
            RelPose::new(
                truth.dx + cfg.sigma_trans * rng.next_gaussian(),
                truth.dy + cfg.sigma_trans * rng.next_gaussian(),
                truth.dtheta + cfg.sigma_rot * rng.next_gaussian(),
            )
        } else {
            truth
        };
        edges.push(Edge::with_scalar_weight(
            i,
            j,
            meas,
            cfg.w_loop,
            EdgeKind::LoopClosure,
        ));
    }

    SynthOutput {
        ground_truth,
        graph: PoseGraph::new(guess, edges, 0),
    }
}

/// Largest position error between the odometry-integrated initial guess and
/// the ground truth.
pub fn drift_norm(out: &SynthOutput) -> f64 {
    let mut worst = 0.0f64;
    for (guess, truth) in out.graph.poses.iter().zip(&out.ground_truth) {
        let dx = guess.x - truth.x;
        let dy = guess.y - truth.y;
        worst = worst.max(crate::math::sqrt(dx * dx + dy * dy));
    }
    worst
}
