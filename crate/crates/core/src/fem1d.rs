//! One-dimensional elastic bar-chain model: a scalar SLAM problem whose
//! normal equations are the classical `(-1, 2, -1)` stiffness matrix. Serves
//! as an analytic oracle for assembly and Dirichlet handling.

use crate::linalg::DenseMatrix;
use crate::rng::Rng;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// A chain of linear elastic bars with prescribed endpoint positions.
///
/// The scalar states `x_0 .. x_n` are node positions; each bar measures a
/// biased rest length between neighbors, and the endpoints are hard
/// constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarChain {
    pub n_bars: usize,
    pub rest_length: f64,
    pub left_value: f64,
    pub right_value: f64,
}

impl Default for BarChain {
    /// The ten-bar chain with rest length 0.9 pinned to 0 and 10.
    fn default() -> Self {
        BarChain {
            n_bars: 10,
            rest_length: 0.9,
            left_value: 0.0,
            right_value: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fem1dError {
    NormalMatrixMismatch {
        row: usize,
        col: usize,
        stiffness: f64,
        normal: f64,
    },
    EnergyMismatch {
        sample: usize,
        elastic: f64,
        least_squares: f64,
    },
}

impl fmt::Display for Fem1dError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fem1dError::NormalMatrixMismatch {
                row,
                col,
                stiffness,
                normal,
            } => write!(
                f,
                "stiffness/normal-matrix mismatch at ({row}, {col}): {stiffness} vs {normal}"
            ),
            Fem1dError::EnergyMismatch {
                sample,
                elastic,
                least_squares,
            } => write!(
                f,
                "energy mismatch at sample {sample}: elastic {elastic} vs least-squares {least_squares}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Fem1dError {}

/// Local stiffness matrix of one bar, acting on its two endpoint dofs.
pub fn element_stiffness() -> [[f64; 2]; 2] {
    [[1.0, -1.0], [-1.0, 1.0]]
}

/// Assembles the global `(n+1) x (n+1)` stiffness matrix: tridiagonal with
/// stencil `(-1, 2, -1)` and diagonal `(1, 2, ..., 2, 1)`.
pub fn assemble_chain(c: &BarChain) -> DenseMatrix {
    assert!(c.n_bars >= 1);
    let n = c.n_bars + 1;
    let mut k = DenseMatrix::zeros(n);
    let local = element_stiffness();
    for e in 0..c.n_bars {
        for (r, gr) in [e, e + 1].into_iter().enumerate() {
            for (col, gc) in [e, e + 1].into_iter().enumerate() {
                k.add_to(gr, gc, local[r][col]);
            }
        }
    }
    k
}

/// Imposes the endpoint constraints in strong form: fixed rows are zeroed,
/// their diagonals set to one, and the prescribed values moved to the
/// right-hand side. The result is non-symmetric.
pub fn apply_dirichlet(k: &DenseMatrix, c: &BarChain) -> (DenseMatrix, Vec<f64>) {
    let n = k.n();
    let mut kt = k.clone();
    let mut bt = vec![0.0; n];
    for (dof, value) in [(0, c.left_value), (n - 1, c.right_value)] {
        for col in 0..n {
            kt.set(dof, col, 0.0);
        }
        kt.set(dof, dof, 1.0);
        bt[dof] = value;
    }
    (kt, bt)
}

/// Restores symmetry by eliminating the off-diagonal entries in the fixed
/// columns, moving them to the right-hand side. Fixed dofs are recognized by
/// their unit rows.
pub fn symmetrize_dirichlet(kt: &DenseMatrix, bt: &[f64]) -> (DenseMatrix, Vec<f64>) {
    let n = kt.n();
    assert_eq!(bt.len(), n, "dimension mismatch");
    let is_fixed = |i: usize| (0..n).all(|c| kt.get(i, c) == if c == i { 1.0 } else { 0.0 });
    let mut kh = kt.clone();
    let mut bh = bt.to_vec();
    for dof in 0..n {
        if !is_fixed(dof) {
            continue;
        }
        for row in 0..n {
            if row == dof {
                continue;
            }
            let coupling = kh.get(row, dof);
            if coupling != 0.0 {
                bh[row] -= coupling * bt[dof];
                kh.set(row, dof, 0.0);
            }
        }
    }
    (kh, bh)
}

/// Residuals of the scalar least-squares formulation, one per bar.
fn scalar_residuals(c: &BarChain, x: &[f64]) -> Vec<f64> {
    (0..c.n_bars)
        .map(|i| (x[i + 1] - x[i]) - c.rest_length)
        .collect()
}

/// Least-squares objective `1/2 sum r_i^2` (unit weights).
fn scalar_objective(c: &BarChain, x: &[f64]) -> f64 {
    0.5 * scalar_residuals(c, x).iter().map(|r| r * r).sum::<f64>()
}

/// Total elastic energy of the bar chain, summed bar by bar.
fn elastic_energy(c: &BarChain, x: &[f64]) -> f64 {
    let mut e = 0.0;
    for i in 0..c.n_bars {
        let stretch = (x[i + 1] - x[i]) - c.rest_length;
        e += 0.5 * stretch * stretch;
    }
    e
}

/// Gauss-Newton normal matrix of the scalar least-squares problem, built
/// from the explicit residual Jacobian (rows `(-1, +1)`).
fn scalar_normal_matrix(c: &BarChain) -> DenseMatrix {
    let n = c.n_bars + 1;
    let mut jt_j = DenseMatrix::zeros(n);
    for i in 0..c.n_bars {
        // Row i of J has -1 at column i and +1 at column i+1.
        let cols = [(i, -1.0), (i + 1, 1.0)];
        for (a, va) in cols {
            for (b, vb) in cols {
                jt_j.add_to(a, b, va * vb);
            }
        }
    }
    jt_j
}

/// Verifies the equivalence of the bar-chain stiffness matrix with the
/// Gauss-Newton normal matrix of the scalar least-squares problem, and of
/// the elastic energy with the least-squares objective at random states.
pub fn slam_equivalence_check(c: &BarChain) -> Result<(), Fem1dError> {
    let k = assemble_chain(c);
    let normal = scalar_normal_matrix(c);
    let n = c.n_bars + 1;
    for row in 0..n {
        for col in 0..n {
            if k.get(row, col) != normal.get(row, col) {
                return Err(Fem1dError::NormalMatrixMismatch {
                    row,
                    col,
                    stiffness: k.get(row, col),
                    normal: normal.get(row, col),
                });
            }
        }
    }
    let mut rng = Rng::from_seed(0x1d);
    for sample in 0..100 {
        let x: Vec<f64> = (0..n).map(|_| 20.0 * rng.next_f64() - 10.0).collect();
        let elastic = elastic_energy(c, &x);
        let ls = scalar_objective(c, &x);
        if (elastic - ls).abs() > 1e-14 * elastic.abs().max(1.0) {
            return Err(Fem1dError::EnergyMismatch {
                sample,
                elastic,
                least_squares: ls,
            });
        }
    }
    Ok(())
}
