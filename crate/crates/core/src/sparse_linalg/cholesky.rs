use std::collections::VecDeque;

use faer::Mat;

use crate::error::{Error, Result};

use super::SparseSymmetric;

const NONE: usize = usize::MAX;

fn adjacency(a: &SparseSymmetric) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); a.n()];
    for i in 0..a.n() {
        for (j, _) in a.row(i) {
            if j != i {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}

/// BFS level structure from `root`; returns (visit order, level of the last
/// visited node) while marking nodes in `seen` with `stamp`.
fn bfs_levels(adj: &[Vec<usize>], root: usize, seen: &mut [usize], stamp: usize) -> (Vec<usize>, Vec<usize>) {
    let mut order = vec![root];
    let mut level = vec![0usize];
    seen[root] = stamp;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        let lv = level[head];
        head += 1;
        for &u in &adj[v] {
            if seen[u] != stamp {
                seen[u] = stamp;
                order.push(u);
                level.push(lv + 1);
            }
        }
    }
    (order, level)
}

/// Reverse Cuthill–McKee ordering; `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseSymmetric) -> Vec<usize> {
    let n = a.n();
    let adj = adjacency(a);
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut placed = vec![false; n];
    let mut seen = vec![NONE; n];
    let mut stamp = 0;
    let mut perm = Vec::with_capacity(n);

    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));

    for &seed in &by_degree {
        if placed[seed] {
            continue;
        }
        // pseudo-peripheral node for this component (George–Liu)
        let mut root = seed;
        let mut eccentricity = 0;
        loop {
            stamp += 1;
            let (order, level) = bfs_levels(&adj, root, &mut seen, stamp);
            let depth = *level.last().unwrap();
            if depth <= eccentricity && root != seed {
                break;
            }
            eccentricity = depth;
            let candidate = order
                .iter()
                .zip(&level)
                .filter(|&(_, &l)| l == depth)
                .map(|(&v, _)| v)
                .min_by_key(|&v| (degree[v], v))
                .unwrap();
            if candidate == root {
                break;
            }
            root = candidate;
        }

        let start = perm.len();
        let mut queue = VecDeque::from([root]);
        placed[root] = true;
        while let Some(v) = queue.pop_front() {
            perm.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !placed[u]).collect();
            next.sort_by_key(|&u| (degree[u], u));
            for u in next {
                placed[u] = true;
                queue.push_back(u);
            }
        }
        perm[start..].reverse();
    }
    perm.reverse();
    perm
}

/// Sparse Cholesky factor `P A Pᵀ = L Lᵀ` with a fill-reducing permutation.
///
/// `L` is stored by columns with the diagonal entry first in each column.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    perm: Vec<usize>,
    inv_perm: Vec<usize>,
}

/// Factorizes a symmetric positive-definite sparse matrix, ordering it by
/// reverse Cuthill–McKee first.
pub fn cholesky(a: &SparseSymmetric) -> Result<CholeskyFactor> {
    let perm = reverse_cuthill_mckee(a);
    CholeskyFactor::with_ordering(a, perm)
}

impl CholeskyFactor {
    /// Factorizes `P A Pᵀ` for a caller-supplied ordering (`perm[new] = old`).
    pub fn with_ordering(a: &SparseSymmetric, perm: Vec<usize>) -> Result<Self> {
        let n = a.n();
        assert_eq!(perm.len(), n);
        let mut inv_perm = vec![NONE; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }
        assert!(inv_perm.iter().all(|&v| v != NONE), "ordering is not a permutation");

        // lower rows of the permuted matrix
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for i in 0..n {
            for (j, v) in a.row(i) {
                let (pi, pj) = (inv_perm[i], inv_perm[j]);
                let (r, c) = if pi >= pj { (pi, pj) } else { (pj, pi) };
                rows[r].push((c, v));
            }
        }
        for row in &mut rows {
            row.sort_unstable_by_key(|&(j, _)| j);
        }

        // elimination tree
        let mut parent = vec![NONE; n];
        let mut ancestor = vec![NONE; n];
        for k in 0..n {
            for &(mut i, _) in &rows[k] {
                while i != NONE && i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == NONE {
                        parent[i] = k;
                    }
                    i = next;
                }
            }
        }

        // up-looking numeric factorization, one row of L at a time
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut x = vec![0.0; n];
        let mut mark = vec![NONE; n];
        let mut path = vec![0usize; n];
        let mut pattern = vec![0usize; n];
        for k in 0..n {
            let mut top = n;
            mark[k] = k;
            for &(i0, _) in &rows[k] {
                let mut i = i0;
                let mut len = 0;
                while mark[i] != k {
                    path[len] = i;
                    len += 1;
                    mark[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    len -= 1;
                    top -= 1;
                    pattern[top] = path[len];
                }
            }
            for &(j, v) in &rows[k] {
                x[j] = v;
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &j in &pattern[top..n] {
                let col = &cols[j];
                let lkj = x[j] / col[0].1;
                x[j] = 0.0;
                for &(i, lij) in &col[1..] {
                    x[i] -= lij * lkj;
                }
                d -= lkj * lkj;
                cols[j].push((k, lkj));
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: perm[k], value: d });
            }
            cols[k].push((k, d.sqrt()));
        }

        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        let nnz = cols.iter().map(Vec::len).sum();
        let mut row_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for col in cols {
            for (i, v) in col {
                row_idx.push(i);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        Ok(Self { n, col_ptr, row_idx, values, perm, inv_perm })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored nonzeros of `L`.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Fill-reducing ordering, `perm[new] = old`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let span = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[span.clone()], &self.values[span])
    }

    fn diag(&self, j: usize) -> Result<f64> {
        let d = self.values[self.col_ptr[j]];
        if d == 0.0 {
            Err(Error::SingularFactor(j))
        } else {
            Ok(d)
        }
    }

    /// Dense copy of `L` (permuted ordering), for inspection and tests.
    pub fn lower_dense(&self) -> Mat<f64> {
        let mut l = Mat::<f64>::zeros(self.n, self.n);
        for j in 0..self.n {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                l[(i, j)] = v;
            }
        }
        l
    }

    /// In-place forward substitution on `m` right-hand sides stored row-major.
    fn forward_rows(&self, buf: &mut [f64], m: usize) -> Result<()> {
        for j in 0..self.n {
            let d = self.diag(j)?;
            let (head, tail) = buf.split_at_mut((j + 1) * m);
            let row_j = &mut head[j * m..];
            row_j.iter_mut().for_each(|v| *v /= d);
            let (rows, vals) = self.column(j);
            for (&i, &l) in rows[1..].iter().zip(&vals[1..]) {
                let row_i = &mut tail[(i - j - 1) * m..(i - j) * m];
                for (t, s) in row_i.iter_mut().zip(row_j.iter()) {
                    *t -= l * s;
                }
            }
        }
        Ok(())
    }

    /// In-place back substitution with `Lᵀ` on row-major right-hand sides.
    fn backward_rows(&self, buf: &mut [f64], m: usize) -> Result<()> {
        for j in (0..self.n).rev() {
            let d = self.diag(j)?;
            let (head, tail) = buf.split_at_mut((j + 1) * m);
            let row_j = &mut head[j * m..];
            let (rows, vals) = self.column(j);
            for (&i, &l) in rows[1..].iter().zip(&vals[1..]) {
                let row_i = &tail[(i - j - 1) * m..(i - j) * m];
                for (t, s) in row_j.iter_mut().zip(row_i) {
                    *t -= l * s;
                }
            }
            row_j.iter_mut().for_each(|v| *v /= d);
        }
        Ok(())
    }

    fn check_rows(&self, rows: usize) -> Result<()> {
        if rows != self.n {
            return Err(Error::Shape { expected: self.n, got: rows });
        }
        Ok(())
    }

    /// `L⁻¹ P b` for every column `b` of `rhs`. The result lives in the
    /// permuted ordering.
    pub fn solve_lower(&self, rhs: &Mat<f64>) -> Result<Mat<f64>> {
        self.check_rows(rhs.nrows())?;
        let m = rhs.ncols();
        let mut buf = vec![0.0; self.n * m];
        for (new, &old) in self.perm.iter().enumerate() {
            for c in 0..m {
                buf[new * m + c] = rhs[(old, c)];
            }
        }
        self.forward_rows(&mut buf, m)?;
        Ok(Mat::from_fn(self.n, m, |i, c| buf[i * m + c]))
    }

    /// `Pᵀ L⁻ᵀ y` for every column `y` of `rhs` (given in permuted ordering).
    pub fn solve_upper(&self, rhs: &Mat<f64>) -> Result<Mat<f64>> {
        self.check_rows(rhs.nrows())?;
        let m = rhs.ncols();
        let mut buf = vec![0.0; self.n * m];
        for i in 0..self.n {
            for c in 0..m {
                buf[i * m + c] = rhs[(i, c)];
            }
        }
        self.backward_rows(&mut buf, m)?;
        Ok(Mat::from_fn(self.n, m, |old, c| buf[self.inv_perm[old] * m + c]))
    }

    pub fn solve_lower_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_rows(b.len())?;
        let mut buf: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        self.forward_rows(&mut buf, 1)?;
        Ok(buf)
    }

    pub fn solve_upper_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_rows(y.len())?;
        let mut buf = y.to_vec();
        self.backward_rows(&mut buf, 1)?;
        Ok((0..self.n).map(|old| buf[self.inv_perm[old]]).collect())
    }

    /// `A⁻¹ b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_upper_vec(&self.solve_lower_vec(b)?)
    }

    /// `Pᵀ L y`: undoes [`CholeskyFactor::solve_lower_vec`].
    pub fn mul_lower(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n);
        let mut out = vec![0.0; self.n];
        for j in 0..self.n {
            let (rows, vals) = self.column(j);
            for (&i, &l) in rows.iter().zip(vals) {
                out[i] += l * y[j];
            }
        }
        (0..self.n).map(|old| out[self.inv_perm[old]]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Smoothness, WendlandKernel};
    use crate::nodes::{dart_throw, DomainTag};
    use crate::sparse_linalg::assemble_gramian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
        let mut m = 0.0f64;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                m = m.max((a[(i, j)] - b[(i, j)]).abs());
            }
        }
        m
    }

    fn permuted_dense(a: &SparseSymmetric, perm: &[usize]) -> Mat<f64> {
        let d = a.to_dense();
        Mat::from_fn(a.n(), a.n(), |i, j| d[(perm[i], perm[j])])
    }

    fn random_gramian(n_target: usize, seed: u64) -> SparseSymmetric {
        let h = crate::nodes::dart_spacing_for_count(DomainTag::Disk, n_target).unwrap();
        let p = dart_throw(DomainTag::Disk, h, seed).unwrap();
        let k = WendlandKernel::new(Smoothness::C2, 0.25 / p.separation()).unwrap();
        assemble_gramian(&p, &k)
    }

    #[test]
    fn identity_factor() {
        let a = SparseSymmetric::identity(6);
        let f = cholesky(&a).unwrap();
        assert_eq!(f.nnz(), 6);
        let l = f.lower_dense();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(l[(i, j)], if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        let a_val = 0.3;
        let a = SparseSymmetric::from_lower_rows(vec![vec![(0, 1.0)], vec![(0, a_val), (1, 1.0)]]);
        let f = CholeskyFactor::with_ordering(&a, vec![0, 1]).unwrap();
        let l = f.lower_dense();
        let s = (1.0 - a_val * a_val).sqrt();
        assert_eq!(l[(0, 0)], 1.0);
        assert!((l[(1, 0)] - a_val).abs() < 1e-16);
        assert!((l[(1, 1)] - s).abs() < 1e-16);
        let y = f.solve_lower_vec(&[1.0, 1.0]).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-16);
        assert!((y[1] - (1.0 - a_val) / s).abs() < 1e-15);
    }

    #[test]
    fn reconstruction_of_random_gramian() {
        let a = random_gramian(50, 4);
        let f = cholesky(&a).unwrap();
        let l = f.lower_dense();
        let llt = &l * l.transpose();
        let pap = permuted_dense(&a, f.permutation());
        assert!(max_abs_diff(&llt, &pap) <= 1e-12 * a.max_abs());
    }

    #[test]
    fn rejects_indefinite() {
        let a = SparseSymmetric::from_lower_rows(vec![vec![(0, 1.0)], vec![(0, 2.0), (1, 1.0)]]);
        assert!(matches!(cholesky(&a), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn lower_solve_round_trip() {
        let a = random_gramian(100, 5);
        let f = cholesky(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = (0..a.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let back = f.mul_lower(&f.solve_lower_vec(&v).unwrap());
        for (a, b) in back.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn full_solve_residual() {
        let a = random_gramian(300, 6);
        let f = cholesky(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y: Vec<f64> = (0..a.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = f.solve(&y).unwrap();
        let ax = a.mul_vec(&x);
        let res: f64 = ax.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res <= 1e-8 * norm);
    }

    #[test]
    fn matrix_solves_match_vector_solves() {
        let a = random_gramian(80, 7);
        let f = cholesky(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rhs = Mat::from_fn(a.n(), 3, |_, _| rng.gen_range(-1.0..1.0));
        let lo = f.solve_lower(&rhs).unwrap();
        let up = f.solve_upper(&lo).unwrap();
        for c in 0..3 {
            let col: Vec<f64> = (0..a.n()).map(|i| rhs[(i, c)]).collect();
            let lv = f.solve_lower_vec(&col).unwrap();
            let uv = f.solve_upper_vec(&lv).unwrap();
            for i in 0..a.n() {
                assert_eq!(lo[(i, c)], lv[i]);
                assert_eq!(up[(i, c)], uv[i]);
            }
        }
        assert!(f.solve_lower(&Mat::zeros(a.n() + 1, 1)).is_err());
    }

    #[test]
    fn rcm_is_a_permutation_and_reduces_bandwidth() {
        let a = random_gramian(400, 8);
        let perm = reverse_cuthill_mckee(&a);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..a.n()).collect::<Vec<_>>());
        let bandwidth = |perm: &[usize]| {
            let mut inv = vec![0; perm.len()];
            for (new, &old) in perm.iter().enumerate() {
                inv[old] = new;
            }
            (0..a.n())
                .flat_map(|i| a.row(i).map(move |(j, _)| (i, j)))
                .map(|(i, j)| inv[i].abs_diff(inv[j]))
                .max()
                .unwrap()
        };
        let natural: Vec<usize> = (0..a.n()).collect();
        assert!(bandwidth(&perm) <= bandwidth(&natural));
        let f = cholesky(&a).unwrap();
        let g = CholeskyFactor::with_ordering(&a, natural).unwrap();
        assert!(f.nnz() <= g.nnz());
    }
}
