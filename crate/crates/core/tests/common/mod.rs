//! Shared helpers for the integration suites: dense oracles built with
//! plain nested vectors, independent of the crate's sparse path, plus small
//! random-graph generators.

use posegraph_core::pose::{edge_jacobian, residual, Pose2, RelPose};
use posegraph_core::{Edge, EdgeKind, PoseGraph};

/// Small xorshift generator so the oracles do not share the crate's RNG.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.max(1))
    }
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

/// Random connected pose graph: a noisy odometry chain plus random loop
/// closures, with dense symmetric positive definite weight blocks.
pub fn random_graph(n_poses: usize, n_closures: usize, seed: u64) -> PoseGraph {
    let mut rng = TestRng::new(seed);
    let mut poses = Vec::with_capacity(n_poses);
    for _ in 0..n_poses {
        poses.push(Pose2::new(
            rng.range(-2.0, 2.0),
            rng.range(-2.0, 2.0),
            rng.range(-3.0, 3.0),
        ));
    }
    let mut random_weight = |scale: f64| -> [[f64; 3]; 3] {
        // M^T M + I, exactly symmetrized.
        let mut m = [[0.0; 3]; 3];
        for row in m.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.range(-1.0, 1.0);
            }
        }
        let mut w = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..=r {
                let mut s = if r == c { 1.0 } else { 0.0 };
                for k in 0..3 {
                    s += m[k][r] * m[k][c];
                }
                w[r][c] = scale * s;
                w[c][r] = w[r][c];
            }
        }
        w
    };
    let mut edges = Vec::new();
    for t in 0..n_poses - 1 {
        let mut meas = posegraph_core::pose::relative_pose(&poses[t], &poses[t + 1]);
        meas = RelPose::new(meas.dx + 0.05, meas.dy - 0.03, meas.dtheta + 0.02);
        edges.push(Edge {
            i: t,
            j: t + 1,
            meas,
            weight: random_weight(20.0),
            kind: EdgeKind::Odometry,
        });
    }
    for k in 0..n_closures {
        let span = n_poses.saturating_sub(3).max(1);
        let i = 2 + (k * 7) % span;
        let j = (k * 3) % i.saturating_sub(1).max(1);
        if i >= n_poses || j >= n_poses || i == j || i.abs_diff(j) <= 1 {
            continue;
        }
        let meas = posegraph_core::pose::relative_pose(&poses[i], &poses[j]);
        edges.push(Edge {
            i,
            j,
            meas,
            weight: random_weight(100.0),
            kind: EdgeKind::LoopClosure,
        });
    }
    PoseGraph::new(poses, edges, 0)
}

/// Dense 3m x 3n Jacobian of the stacked residual, row blocks in edge order.
pub fn dense_jacobian(g: &PoseGraph) -> Vec<Vec<f64>> {
    let rows = 3 * g.edges.len();
    let cols = 3 * g.poses.len();
    let mut j = vec![vec![0.0; cols]; rows];
    for (e_idx, e) in g.edges.iter().enumerate() {
        let jac = edge_jacobian(&g.poses[e.i], &g.poses[e.j]);
        for r in 0..3 {
            for c in 0..3 {
                j[3 * e_idx + r][3 * e.i + c] = jac.wrt_i[r][c];
                j[3 * e_idx + r][3 * e.j + c] = jac.wrt_j[r][c];
            }
        }
    }
    j
}

/// Dense block-diagonal weight matrix in edge order.
pub fn dense_weight(g: &PoseGraph) -> Vec<Vec<f64>> {
    let m = 3 * g.edges.len();
    let mut w = vec![vec![0.0; m]; m];
    for (e_idx, e) in g.edges.iter().enumerate() {
        for r in 0..3 {
            for c in 0..3 {
                w[3 * e_idx + r][3 * e_idx + c] = e.weight[r][c];
            }
        }
    }
    w
}

pub fn stacked_residual_vec(g: &PoseGraph) -> Vec<f64> {
    let mut out = Vec::with_capacity(3 * g.edges.len());
    for e in &g.edges {
        out.extend_from_slice(&residual(&g.poses[e.i], &g.poses[e.j], &e.meas));
    }
    out
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for p in 0..k {
            let v = a[i][p];
            if v == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += v * b[p][j];
            }
        }
    }
    out
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m) = (a.len(), a[0].len());
    let mut out = vec![vec![0.0; n]; m];
    for i in 0..n {
        for j in 0..m {
            out[j][i] = a[i][j];
        }
    }
    out
}

pub fn matvec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// Dense Gauss-Newton matrix `J^T W J` and gradient `J^T W r`, formed as
/// explicit products.
pub fn dense_gn_oracle(g: &PoseGraph) -> (Vec<Vec<f64>>, Vec<f64>) {
    let j = dense_jacobian(g);
    let w = dense_weight(g);
    let jt = transpose(&j);
    let h = matmul(&matmul(&jt, &w), &j);
    let grad = matvec(&jt, &matvec(&w, &stacked_residual_vec(g)));
    (h, grad)
}

/// Gaussian elimination solve for the dense oracles (partial pivoting).
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&r, &s| m[r][k].abs().partial_cmp(&m[s][k].abs()).unwrap())
            .unwrap();
        m.swap(k, p);
        x.swap(k, p);
        for r in k + 1..n {
            let f = m[r][k] / m[k][k];
            if f == 0.0 {
                continue;
            }
            for c in k..n {
                let v = m[k][c];
                m[r][c] -= f * v;
            }
            x[r] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for c in i + 1..n {
            s -= m[i][c] * x[c];
        }
        x[i] = s / m[i][i];
    }
    x
}
