//! Symmetric sparse matrices of dense 3x3 blocks in block-CSR storage.

use super::dense::DenseMatrix;
use crate::math;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

/// A dense 3x3 block, row-major.
pub type Block3 = [[f64; 3]; 3];

pub const ZERO_BLOCK: Block3 = [[0.0; 3]; 3];

/// Accumulating builder; blocks at the same position sum in insertion order.
pub struct BlockSparseBuilder {
    n_blocks: usize,
    entries: BTreeMap<(usize, usize), Block3>,
}

impl BlockSparseBuilder {
    pub fn new(n_blocks: usize) -> Self {
        BlockSparseBuilder {
            n_blocks,
            entries: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, i: usize, j: usize, block: &Block3) {
        assert!(i < self.n_blocks && j < self.n_blocks, "block out of range");
        let e = self.entries.entry((i, j)).or_insert(ZERO_BLOCK);
        for r in 0..3 {
            for c in 0..3 {
                e[r][c] += block[r][c];
            }
        }
    }

    pub fn build(self) -> BlockSparseMatrix {
        let mut row_ptr = vec![0usize; self.n_blocks + 1];
        for &(i, _) in self.entries.keys() {
            row_ptr[i + 1] += 1;
        }
        for i in 0..self.n_blocks {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut blocks = Vec::with_capacity(self.entries.len());
        // BTreeMap iterates in row-major key order, exactly CSR order.
        for ((_, j), b) in self.entries {
            col_idx.push(j);
            blocks.push(b);
        }
        BlockSparseMatrix {
            n_blocks: self.n_blocks,
            row_ptr,
            col_idx,
            blocks,
        }
    }
}

/// Sparse matrix of 3x3 blocks, block-CSR with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSparseMatrix {
    n_blocks: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    blocks: Vec<Block3>,
}

impl BlockSparseMatrix {
    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    /// Scalar dimension, `3 * n_blocks`.
    pub fn dim(&self) -> usize {
        3 * self.n_blocks
    }

    pub fn nnz_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block identity matrix of the given block dimension.
    pub fn block_identity(n_blocks: usize) -> Self {
        let mut b = BlockSparseBuilder::new(n_blocks);
        let eye = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for i in 0..n_blocks {
            b.add(i, i, &eye);
        }
        b.build()
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&Block3> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => Some(&self.blocks[lo + k]),
            Err(_) => None,
        }
    }

    /// Iterates the blocks of one block row as `(column, block)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, &Block3)> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.blocks[lo..hi].iter())
    }

    /// Iterates all stored blocks as `(row, column, block)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Block3)> {
        (0..self.n_blocks).flat_map(move |i| self.row(i).map(move |(j, b)| (i, j, b)))
    }

    /// Sparse matrix-vector product.
    pub fn spmv(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.spmv_into(v, &mut out);
        out
    }

    pub fn spmv_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.dim(), "dimension mismatch");
        assert_eq!(out.len(), self.dim(), "dimension mismatch");
        for i in 0..self.n_blocks {
            let mut acc = [0.0f64; 3];
            for (j, b) in self.row(i) {
                let vj = &v[3 * j..3 * j + 3];
                for r in 0..3 {
                    acc[r] += b[r][0] * vj[0] + b[r][1] * vj[1] + b[r][2] * vj[2];
                }
            }
            out[3 * i..3 * i + 3].copy_from_slice(&acc);
        }
    }

    /// Checks structural symmetry and `block(j,i) == block(i,j)^T` within
    /// `tol` entrywise.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        for (i, j, b) in self.entries() {
            match self.block(j, i) {
                None => return false,
                Some(bt) => {
                    for r in 0..3 {
                        for c in 0..3 {
                            if math::abs(b[r][c] - bt[c][r]) > tol {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    /// Number of stored off-diagonal block pairs `{(i,j), (j,i)}`.
    pub fn off_diagonal_pairs(&self) -> usize {
        self.entries().filter(|(i, j, _)| i < j).count()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.dim());
        for (i, j, b) in self.entries() {
            for r in 0..3 {
                for c in 0..3 {
                    d.set(3 * i + r, 3 * j + c, b[r][c]);
                }
            }
        }
        d
    }

    /// Dense principal submatrix on the given (sorted, unique) block indices.
    pub fn principal_submatrix(&self, block_ids: &[usize]) -> DenseMatrix {
        let m = block_ids.len();
        // Global block index -> local position.
        let mut local = vec![usize::MAX; self.n_blocks];
        for (p, &g) in block_ids.iter().enumerate() {
            local[g] = p;
        }
        let mut d = DenseMatrix::zeros(3 * m);
        for (p, &g) in block_ids.iter().enumerate() {
            for (j, b) in self.row(g) {
                let q = local[j];
                if q == usize::MAX {
                    continue;
                }
                for r in 0..3 {
                    for c in 0..3 {
                        d.set(3 * p + r, 3 * q + c, b[r][c]);
                    }
                }
            }
        }
        d
    }

    /// Copy of the matrix with one block row and column removed; remaining
    /// block indices shift down past the removed one.
    pub fn remove_block_row_col(&self, k: usize) -> BlockSparseMatrix {
        assert!(k < self.n_blocks);
        let mut b = BlockSparseBuilder::new(self.n_blocks - 1);
        for (i, j, blk) in self.entries() {
            if i == k || j == k {
                continue;
            }
            let ni = if i > k { i - 1 } else { i };
            let nj = if j > k { j - 1 } else { j };
            b.add(ni, nj, blk);
        }
        b.build()
    }
}
