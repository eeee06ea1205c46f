//! Sparse LU without pivoting for structurally symmetric matrices.
//!
//! The symbolic phase builds the elimination tree of the pattern and, for
//! every row `k`, the set of earlier rows reachable from the nonzeros of
//! column `k` (the row pattern of `L` and column pattern of `U`, which
//! coincide for a symmetric pattern). The numeric phase is up-looking: row
//! `k` of `L` and column `k` of `U` are each one sparse triangular solve
//! against the already-computed factors.
//!
//! The grid Jacobians are diagonally dominant enough in practice that the
//! natural pivots are safe; a zero or non-finite pivot is reported as
//! [`Error::SingularPivot`].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Compressed sparse column matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    /// Builds from `(row, col, value)` triplets, summing duplicates. Rows
    /// within a column come out sorted.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(_, c, _) in triplets {
            counts[c + 1] += 1;
        }
        for c in 0..n {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut rows = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            rows[next[c]] = r;
            vals[next[c]] = v;
            next[c] += 1;
        }
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut order: Vec<usize> = Vec::new();
        for c in 0..n {
            order.clear();
            order.extend(counts[c]..counts[c + 1]);
            order.sort_by_key(|&p| rows[p]);
            for &p in &order {
                if row_idx.len() > col_ptr[c] && *row_idx.last().unwrap() == rows[p] {
                    *values.last_mut().unwrap() += vals[p];
                } else {
                    row_idx.push(rows[p]);
                    values.push(vals[p]);
                }
            }
            col_ptr[c + 1] = row_idx.len();
        }
        CscMatrix {
            n,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            let xc = x[c];
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[p]] += self.values[p] * xc;
            }
        }
        y
    }

    /// Position of entry `(r, c)` in `values`, if structurally present.
    pub fn position(&self, r: usize, c: usize) -> Option<usize> {
        let slice = &self.row_idx[self.col_ptr[c]..self.col_ptr[c + 1]];
        slice.binary_search(&r).ok().map(|i| self.col_ptr[c] + i)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for c in 0..self.n {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                d[self.row_idx[p] * self.n + c] = self.values[p];
            }
        }
        d
    }
}

/// Pattern analysis reusable across matrices with identical structure.
#[derive(Debug, Clone)]
pub struct SymbolicLu {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    /// For every stored entry, the position of its transpose.
    transpose_pos: Vec<usize>,
    /// Position of the diagonal entry of each column.
    diag_pos: Vec<usize>,
    /// Row pattern of `L` (= column pattern of `U`) for each `k`, ascending.
    reach_ptr: Vec<usize>,
    reach_idx: Vec<usize>,
    pub parent: Vec<Option<usize>>,
}

impl SymbolicLu {
    /// Requires a structurally symmetric pattern with every diagonal present.
    pub fn analyze(a: &CscMatrix) -> Result<Self> {
        let n = a.n;
        let mut transpose_pos = vec![0usize; a.nnz()];
        let mut diag_pos = vec![usize::MAX; n];
        for c in 0..n {
            for p in a.col_ptr[c]..a.col_ptr[c + 1] {
                let r = a.row_idx[p];
                if r == c {
                    diag_pos[c] = p;
                }
                transpose_pos[p] = a.position(c, r).ok_or_else(|| {
                    Error::Grid(alloc::format!(
                        "pattern is not symmetric: ({r}, {c}) present without ({c}, {r})"
                    ))
                })?;
            }
        }
        if let Some(k) = diag_pos.iter().position(|&p| p == usize::MAX) {
            return Err(Error::SingularPivot(k));
        }

        // Elimination tree with path compression.
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut ancestor: Vec<Option<usize>> = vec![None; n];
        for k in 0..n {
            for p in a.col_ptr[k]..a.col_ptr[k + 1] {
                let mut i = a.row_idx[p];
                while i < k {
                    let next = ancestor[i];
                    ancestor[i] = Some(k);
                    match next {
                        None => {
                            parent[i] = Some(k);
                            break;
                        }
                        Some(nx) if nx == k => break,
                        Some(nx) => i = nx,
                    }
                }
            }
        }

        // Reach of each column in the etree, stored ascending.
        let mut reach_ptr = vec![0usize; n + 1];
        let mut reach_idx = Vec::new();
        let mut mark = vec![usize::MAX; n];
        let mut scratch = Vec::new();
        for k in 0..n {
            mark[k] = k;
            scratch.clear();
            for p in a.col_ptr[k]..a.col_ptr[k + 1] {
                let mut i = a.row_idx[p];
                if i >= k {
                    continue;
                }
                while mark[i] != k {
                    mark[i] = k;
                    scratch.push(i);
                    match parent[i] {
                        Some(pi) => i = pi,
                        None => break,
                    }
                }
            }
            scratch.sort_unstable();
            reach_idx.extend_from_slice(&scratch);
            reach_ptr[k + 1] = reach_idx.len();
        }

        Ok(SymbolicLu {
            n,
            col_ptr: a.col_ptr.clone(),
            row_idx: a.row_idx.clone(),
            transpose_pos,
            diag_pos,
            reach_ptr,
            reach_idx,
            parent,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Off-diagonal entries of `L` (equal to those of `U`).
    pub fn factor_nnz(&self) -> usize {
        self.reach_idx.len()
    }

    fn same_pattern(&self, a: &CscMatrix) -> bool {
        a.n == self.n && a.col_ptr == self.col_ptr && a.row_idx == self.row_idx
    }

    /// Numeric factorization of a matrix with the analyzed pattern.
    pub fn factor(&self, a: &CscMatrix) -> Result<LuFactors<'_>> {
        if !self.same_pattern(a) {
            return Err(Error::Grid("matrix pattern differs from the analyzed one".into()));
        }
        let n = self.n;
        let nnz = self.reach_idx.len();
        let mut l = vec![0.0; nnz];
        let mut u = vec![0.0; nnz];
        let mut diag = vec![0.0; n];
        // Dense scatter buffers for column k of A above the diagonal and row k
        // of A left of the diagonal.
        let mut col = vec![0.0; n];
        let mut row = vec![0.0; n];
        for k in 0..n {
            let (r0, r1) = (self.reach_ptr[k], self.reach_ptr[k + 1]);
            for p in a.col_ptr[k]..a.col_ptr[k + 1] {
                let i = a.row_idx[p];
                if i < k {
                    col[i] = a.values[p];
                    row[i] = a.values[self.transpose_pos[p]];
                }
            }
            let mut dot = 0.0;
            for q in r0..r1 {
                let j = self.reach_idx[q];
                let (s0, s1) = (self.reach_ptr[j], self.reach_ptr[j + 1]);
                // y_j = a_jk - Σ L[j,i] y_i and z_j = (a_kj - Σ U[i,j] z_i) / U_jj.
                let mut y = col[j];
                let mut z = row[j];
                for s in s0..s1 {
                    let i = self.reach_idx[s];
                    y -= l[s] * col[i];
                    z -= u[s] * row[i];
                }
                z /= diag[j];
                col[j] = y;
                row[j] = z;
                u[q] = y;
                l[q] = z;
                dot += y * z;
            }
            let d = a.values[self.diag_pos[k]] - dot;
            if d == 0.0 || !d.is_finite() {
                return Err(Error::SingularPivot(k));
            }
            diag[k] = d;
            for q in r0..r1 {
                let j = self.reach_idx[q];
                col[j] = 0.0;
                row[j] = 0.0;
            }
        }
        Ok(LuFactors {
            symbolic: self,
            l,
            u,
            diag,
        })
    }
}

/// `A = L U` with unit lower `L` stored by rows and `U` by columns over the
/// shared pattern.
#[derive(Debug, Clone)]
pub struct LuFactors<'a> {
    symbolic: &'a SymbolicLu,
    l: Vec<f64>,
    u: Vec<f64>,
    diag: Vec<f64>,
}

impl LuFactors<'_> {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let s = self.symbolic;
        for k in 0..s.n {
            let mut acc = b[k];
            for q in s.reach_ptr[k]..s.reach_ptr[k + 1] {
                acc -= self.l[q] * b[s.reach_idx[q]];
            }
            b[k] = acc;
        }
        for k in (0..s.n).rev() {
            let xk = b[k] / self.diag[k];
            b[k] = xk;
            for q in s.reach_ptr[k]..s.reach_ptr[k + 1] {
                b[s.reach_idx[q]] -= self.u[q] * xk;
            }
        }
    }

    /// Solve followed by one step of iterative refinement against `a`.
    pub fn solve_refined(&self, a: &CscMatrix, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        let ax = a.matvec(&x);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
        self.solve_in_place(&mut r);
        for (xi, ri) in x.iter_mut().zip(&r) {
            *xi += ri;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::lu_solve;

    fn laplacian_2d(m: usize) -> CscMatrix {
        let idx = |i: usize, j: usize| i * m + j;
        let mut t = Vec::new();
        for i in 0..m {
            for j in 0..m {
                t.push((idx(i, j), idx(i, j), 4.5));
                if i > 0 {
                    t.push((idx(i, j), idx(i - 1, j), -1.0));
                }
                if i + 1 < m {
                    t.push((idx(i, j), idx(i + 1, j), -1.25));
                }
                if j > 0 {
                    t.push((idx(i, j), idx(i, j - 1), -0.75));
                }
                if j + 1 < m {
                    t.push((idx(i, j), idx(i, j + 1), -1.0));
                }
            }
        }
        CscMatrix::from_triplets(m * m, &t)
    }

    #[test]
    fn matches_dense_solve_on_nonsymmetric_values() {
        let a = laplacian_2d(7);
        let n = a.n;
        let b: Vec<f64> = (0..n).map(|i| libm::sin(i as f64)).collect();
        let sym = SymbolicLu::analyze(&a).unwrap();
        let lu = sym.factor(&a).unwrap();
        let x = lu.solve_refined(&a, &b);
        let mut dense = a.to_dense();
        let mut xd = b.clone();
        lu_solve(&mut dense, n, &mut xd).unwrap();
        for (x, y) in x.iter().zip(&xd) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn duplicates_are_summed_and_asymmetric_patterns_rejected() {
        let a = CscMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0)]);
        assert_eq!(a.values, vec![3.0, 1.0]);
        let b = CscMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(SymbolicLu::analyze(&b).is_err());
        let z = CscMatrix::from_triplets(2, &[(0, 0, 0.0), (1, 1, 1.0)]);
        let s = SymbolicLu::analyze(&z).unwrap();
        assert!(matches!(s.factor(&z), Err(Error::SingularPivot(0))));
    }
}
