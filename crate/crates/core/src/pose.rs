//! SE(2) pose algebra: angle normalization, relative poses, measurement
//! residuals, and the closed-form 3x6 Jacobian of the relative-pose map.

use crate::math;
use core::f64::consts::{PI, TAU};

/// Maps an angle to the principal interval `(-pi, pi]`.
///
/// A single remainder plus a boundary fix-up; `-pi` maps to `+pi`.
///
/// Panics on non-finite input.
pub fn normalize_angle(a: f64) -> f64 {
    assert!(a.is_finite(), "angle must be finite, got {a}");
    let mut r = a % TAU;
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// A planar robot configuration: position and heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    /// Heading in radians, kept in `(-pi, pi]` by every constructor.
    pub theta: f64,
}

impl Pose2 {
    /// Creates a pose with the heading normalized to `(-pi, pi]`.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2 {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn origin() -> Self {
        Pose2 {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
        }
    }

    /// Applies a relative motion expressed in this pose's frame.
    ///
    /// Inverse of [`relative_pose`]: `p.compose(&relative_pose(p, q)) == q`.
    pub fn compose(&self, d: &RelPose) -> Pose2 {
        let (s, c) = math::sin_cos(self.theta);
        Pose2::new(
            self.x + c * d.dx - s * d.dy,
            self.y + s * d.dx + c * d.dy,
            self.theta + d.dtheta,
        )
    }
}

/// A relative pose: the configuration of one pose expressed in the frame of
/// another, or equally a relative-pose measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelPose {
    pub dx: f64,
    pub dy: f64,
    /// Orientation difference in radians, kept in `(-pi, pi]`.
    pub dtheta: f64,
}

impl RelPose {
    pub fn new(dx: f64, dy: f64, dtheta: f64) -> Self {
        RelPose {
            dx,
            dy,
            dtheta: normalize_angle(dtheta),
        }
    }
}

/// The relative pose of `p_j` expressed in the local frame of `p_i`:
/// translation `R(theta_i)^T (t_j - t_i)` and wrapped heading difference.
pub fn relative_pose(p_i: &Pose2, p_j: &Pose2) -> RelPose {
    let (s, c) = math::sin_cos(p_i.theta);
    let dx = p_j.x - p_i.x;
    let dy = p_j.y - p_i.y;
    RelPose {
        dx: c * dx + s * dy,
        dy: -s * dx + c * dy,
        dtheta: normalize_angle(p_j.theta - p_i.theta),
    }
}

/// Residual of a relative-pose measurement: predicted minus measured, with
/// the rotational component re-wrapped to `(-pi, pi]`.
pub fn residual(p_i: &Pose2, p_j: &Pose2, meas: &RelPose) -> [f64; 3] {
    let pred = relative_pose(p_i, p_j);
    [
        pred.dx - meas.dx,
        pred.dy - meas.dy,
        normalize_angle(pred.dtheta - meas.dtheta),
    ]
}

/// The 3x6 Jacobian of the relative-pose map, split into the two 3x3 blocks
/// for the endpoint poses. It is also the Jacobian of [`residual`], since the
/// measurement is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeJacobian {
    /// Derivatives with respect to `(x_i, y_i, theta_i)`.
    pub wrt_i: [[f64; 3]; 3],
    /// Derivatives with respect to `(x_j, y_j, theta_j)`. The last column is
    /// always `(0, 0, 1)^T`.
    pub wrt_j: [[f64; 3]; 3],
}

impl EdgeJacobian {
    /// Entry access across the full 3x6 matrix, columns `0..3` for `p_i`.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        if col < 3 {
            self.wrt_i[row][col]
        } else {
            self.wrt_j[row][col - 3]
        }
    }
}

/// Closed-form Jacobian of `relative_pose(p_i, p_j)`.
pub fn edge_jacobian(p_i: &Pose2, p_j: &Pose2) -> EdgeJacobian {
    let (s, c) = math::sin_cos(p_i.theta);
    let dx = p_j.x - p_i.x;
    let dy = p_j.y - p_i.y;
    EdgeJacobian {
        wrt_i: [
            [-c, -s, -s * dx + c * dy],
            [s, -c, -c * dx - s * dy],
            [0.0, 0.0, -1.0],
        ],
        wrt_j: [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force wrap: repeated shifts by 2*pi until inside the interval.
    fn wrap_by_shifts(mut a: f64) -> f64 {
        while a > PI {
            a -= TAU;
        }
        while a <= -PI {
            a += TAU;
        }
        a
    }

    #[test]
    fn normalize_identity_and_boundary() {
        assert_eq!(normalize_angle(0.0), 0.0);
        assert_eq!(normalize_angle(-PI), PI);
        assert_eq!(normalize_angle(PI), PI);
    }

    #[test]
    fn normalize_matches_shift_oracle() {
        let samples = [3.0 * PI, -3.0 * PI, 7.5, -7.5, 123.456, -123.456, TAU, -TAU];
        for &a in &samples {
            let got = normalize_angle(a);
            let want = wrap_by_shifts(a);
            assert!((got - want).abs() < 1e-12, "a={a}: got {got}, want {want}");
            assert!(got > -PI && got <= PI);
        }
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn normalize_large_angles_stay_congruent_mod_two_pi() {
        // The shift oracle drifts at this magnitude; check congruence
        // directly instead.
        for &a in &[1e6, -1e6, 9.7e8] {
            let got = normalize_angle(a);
            assert!(got > -PI && got <= PI);
            let turns = (a - got) / TAU;
            assert!((turns - turns.round()).abs() < 1e-6, "a={a}: turns {turns}");
        }
    }

    #[test]
    #[should_panic]
    fn normalize_rejects_non_finite() {
        normalize_angle(f64::NAN);
    }

    #[test]
    fn relative_pose_identity_frame() {
        let r = relative_pose(&Pose2::new(0.0, 0.0, 0.0), &Pose2::new(1.0, 0.0, 0.0));
        assert_eq!((r.dx, r.dy, r.dtheta), (1.0, 0.0, 0.0));
    }

    #[test]
    fn relative_pose_of_pose_with_itself_is_zero() {
        let p = Pose2::new(2.0, -1.0, 0.5);
        let r = relative_pose(&p, &p);
        assert_eq!((r.dx, r.dy, r.dtheta), (0.0, 0.0, 0.0));
    }

    #[test]
    fn relative_pose_quarter_turn_frame() {
        // R(pi/2)^T (0, 1)^T = (1, 0)^T.
        let r = relative_pose(
            &Pose2::new(1.0, 1.0, PI / 2.0),
            &Pose2::new(1.0, 2.0, PI),
        );
        assert!((r.dx - 1.0).abs() < 1e-15);
        assert!(r.dy.abs() < 1e-15);
        assert!((r.dtheta - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn residual_of_exact_measurement_is_zero() {
        let p_i = Pose2::new(0.3, -0.7, 1.1);
        let p_j = Pose2::new(1.4, 0.2, -2.0);
        let meas = relative_pose(&p_i, &p_j);
        assert_eq!(residual(&p_i, &p_j, &meas), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn residual_biased_step() {
        let r = residual(
            &Pose2::new(0.0, 0.0, 0.0),
            &Pose2::new(1.0, 0.0, 0.0),
            &RelPose::new(0.9, 0.0, 0.0),
        );
        assert!((r[0] - 0.1).abs() < 1e-15);
        assert_eq!(r[1], 0.0);
        assert_eq!(r[2], 0.0);
    }

    #[test]
    fn residual_angle_wraps_into_principal_interval() {
        // Predicted dtheta 3, measured -3: raw difference 6 wraps to 6 - 2*pi.
        let r = residual(
            &Pose2::new(0.0, 0.0, 0.0),
            &Pose2::new(0.0, 0.0, 3.0),
            &RelPose::new(0.0, 0.0, -3.0),
        );
        assert!((r[2] - (6.0 - TAU)).abs() < 1e-12);
    }

    /// Central finite differences of `relative_pose` with step 1e-6.
    fn jacobian_fd(p_i: &Pose2, p_j: &Pose2) -> [[f64; 6]; 3] {
        let h = 1e-6;
        let eval = |pi: &Pose2, pj: &Pose2| -> [f64; 3] {
            let r = relative_pose(pi, pj);
            [r.dx, r.dy, r.dtheta]
        };
        let mut out = [[0.0; 6]; 3];
        for col in 0..6 {
            let mut lo_i = *p_i;
            let mut hi_i = *p_i;
            let mut lo_j = *p_j;
            let mut hi_j = *p_j;
            match col {
                0 => {
                    lo_i.x -= h;
                    hi_i.x += h;
                }
                1 => {
                    lo_i.y -= h;
                    hi_i.y += h;
                }
                2 => {
                    lo_i.theta -= h;
                    hi_i.theta += h;
                }
                3 => {
                    lo_j.x -= h;
                    hi_j.x += h;
                }
                4 => {
                    lo_j.y -= h;
                    hi_j.y += h;
                }
                _ => {
                    lo_j.theta -= h;
                    hi_j.theta += h;
                }
            }
            let f_lo = eval(&lo_i, &lo_j);
            let f_hi = eval(&hi_i, &hi_j);
            for row in 0..3 {
                let mut diff = f_hi[row] - f_lo[row];
                // The dtheta component may wrap across the boundary; compare
                // the difference modulo 2*pi.
                if row == 2 {
                    diff = normalize_angle(diff);
                }
                out[row][col] = diff / (2.0 * h);
            }
        }
        out
    }

    #[test]
    fn jacobian_axis_aligned_case() {
        let j = edge_jacobian(&Pose2::new(0.0, 0.0, 0.0), &Pose2::new(2.0, 3.0, 0.0));
        let want_i = [[-1.0, 0.0, 3.0], [0.0, -1.0, -2.0], [0.0, 0.0, -1.0]];
        let want_j = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(j.wrt_i, want_i);
        assert_eq!(j.wrt_j, want_j);
    }

    #[test]
    fn jacobian_quarter_turn_case() {
        // Frozen from the finite-difference oracle below.
        let p_i = Pose2::new(0.0, 0.0, PI / 2.0);
        let p_j = Pose2::new(0.0, 1.0, PI / 2.0);
        let j = edge_jacobian(&p_i, &p_j);
        let want_i = [[0.0, -1.0, 0.0], [1.0, 0.0, -1.0], [0.0, 0.0, -1.0]];
        let fd = jacobian_fd(&p_i, &p_j);
        for r in 0..3 {
            for c in 0..3 {
                assert!(
                    (j.wrt_i[r][c] - want_i[r][c]).abs() < 1e-9,
                    "closed form ({r},{c})"
                );
                assert!(
                    (fd[r][c] - want_i[r][c]).abs() < 1e-6,
                    "oracle ({r},{c}): fd {}",
                    fd[r][c]
                );
            }
        }
    }

    #[test]
    fn jacobian_last_column_is_constant() {
        let j = edge_jacobian(&Pose2::new(0.4, -2.0, 1.3), &Pose2::new(-1.0, 0.5, -2.2));
        assert_eq!(j.wrt_j[0][2], 0.0);
        assert_eq!(j.wrt_j[1][2], 0.0);
        assert_eq!(j.wrt_j[2][2], 1.0);
        assert_eq!(j.wrt_i[2][2], -1.0);
    }

    #[test]
    fn jacobian_matches_finite_differences_at_random_poses() {
        let mut rng = crate::rng::Rng::from_seed(2024);
        let mut checked = 0;
        while checked < 100 {
            let p_i = Pose2::new(
                4.0 * rng.next_f64() - 2.0,
                4.0 * rng.next_f64() - 2.0,
                TAU * rng.next_f64() - PI,
            );
            let p_j = Pose2::new(
                4.0 * rng.next_f64() - 2.0,
                4.0 * rng.next_f64() - 2.0,
                TAU * rng.next_f64() - PI,
            );
            // Skip samples where a theta perturbation crosses the wrap
            // boundary; the wrap is a genuine non-smoothness.
            let h = 1e-6;
            if PI - p_i.theta.abs() < 2.0 * h || PI - p_j.theta.abs() < 2.0 * h {
                continue;
            }
            let j = edge_jacobian(&p_i, &p_j);
            let fd = jacobian_fd(&p_i, &p_j);
            for r in 0..3 {
                for c in 0..6 {
                    let exact = j.entry(r, c);
                    let approx = fd[r][c];
                    let scale = exact.abs().max(1.0);
                    assert!(
                        (exact - approx).abs() <= 1e-5 * scale,
                        "entry ({r},{c}) at {p_i:?}, {p_j:?}: exact {exact}, fd {approx}"
                    );
                }
            }
            checked += 1;
        }
    }

    #[test]
    fn compose_inverts_relative_pose() {
        let p = Pose2::new(0.7, -1.2, 2.1);
        let q = Pose2::new(-0.4, 0.9, -2.8);
        let d = relative_pose(&p, &q);
        let q2 = p.compose(&d);
        assert!((q2.x - q.x).abs() < 1e-12);
        assert!((q2.y - q.y).abs() < 1e-12);
        assert!((normalize_angle(q2.theta - q.theta)).abs() < 1e-12);
    }
}
