use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::householder;
use faer::linalg::solvers::{ColPivQr, Qr};
use faer::{Conj, Mat, MatRef, Par};

use crate::error::{Error, Result};

/// Distance from `x` to the next representable double above it.
pub fn ulp(x: f64) -> f64 {
    let x = x.abs();
    x.next_up() - x
}

/// Rank cut-off `max(rows, cols) · ulp(‖R‖∞)` for a triangular factor.
pub fn truncation_tolerance(rows: usize, cols: usize, r_inf_norm: f64) -> f64 {
    rows.max(cols) as f64 * ulp(r_inf_norm)
}

fn inf_norm(r: MatRef<'_, f64>) -> f64 {
    (0..r.nrows())
        .map(|i| (i..r.ncols()).map(|j| r[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Debug)]
enum Factor {
    Plain(Qr<f64>),
    Pivoted(ColPivQr<f64>),
}

/// Householder QR factor of a tall matrix, optionally column pivoted and
/// truncated to a numerical rank.
#[derive(Debug)]
pub struct QrFactor {
    nrows: usize,
    ncols: usize,
    factor: Factor,
    perm: Option<Vec<usize>>,
    rank: usize,
    tol: f64,
}

/// Unpivoted thin QR. The recorded rank is `min(rows, cols)`; the tolerance
/// is still computed so callers can inspect the diagonal against it.
pub fn qr(a: &Mat<f64>) -> QrFactor {
    let f = a.qr();
    let tol = truncation_tolerance(a.nrows(), a.ncols(), inf_norm(f.thin_R()));
    QrFactor {
        nrows: a.nrows(),
        ncols: a.ncols(),
        factor: Factor::Plain(f),
        perm: None,
        rank: a.nrows().min(a.ncols()),
        tol,
    }
}

/// Column-pivoted QR truncated at the leading diagonal entries with
/// `|r_kk| > max(rows, cols) · ulp(‖R‖∞)`.
pub fn cpqr_truncated(a: &Mat<f64>) -> QrFactor {
    let f = a.col_piv_qr();
    let r = f.thin_R();
    let tol = truncation_tolerance(a.nrows(), a.ncols(), inf_norm(r));
    let k = r.nrows().min(r.ncols());
    let rank = (0..k).take_while(|&i| r[(i, i)].abs() > tol).count();
    let perm = Some(f.P().arrays().0.to_vec());
    QrFactor { nrows: a.nrows(), ncols: a.ncols(), factor: Factor::Pivoted(f), perm, rank, tol }
}

impl QrFactor {
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Column order of the factorization: `perm[j]` is the original column
    /// placed at position `j`. `None` for the unpivoted factor.
    pub fn permutation(&self) -> Option<&[usize]> {
        self.perm.as_deref()
    }

    fn householder(&self) -> (MatRef<'_, f64>, MatRef<'_, f64>) {
        match &self.factor {
            Factor::Plain(f) => (f.Q_basis(), f.Q_coeff()),
            Factor::Pivoted(f) => (f.Q_basis(), f.Q_coeff()),
        }
    }

    /// Upper-trapezoidal factor `R` (`min(rows, cols) × cols`).
    pub fn r_full(&self) -> MatRef<'_, f64> {
        match &self.factor {
            Factor::Plain(f) => f.thin_R(),
            Factor::Pivoted(f) => f.thin_R(),
        }
    }

    /// Leading `rank × rank` triangular block.
    pub fn r(&self) -> MatRef<'_, f64> {
        self.r_full().get(..self.rank, ..self.rank)
    }

    pub fn r_diagonal(&self) -> Vec<f64> {
        let r = self.r_full();
        (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)]).collect()
    }

    /// Index of the first diagonal entry of `R` at or below the tolerance.
    pub fn first_small_pivot(&self) -> Option<usize> {
        self.r_diagonal().iter().position(|d| !(d.abs() > self.tol))
    }

    /// Upper estimate of the smallest singular value of [`Self::r`], from
    /// inverse iteration on `RᵀR`. Catches near-dependence that leaves every
    /// diagonal entry of an unpivoted `R` comfortably large.
    pub fn min_singular_estimate(&self) -> f64 {
        let r = self.r();
        let n = r.nrows();
        if n == 0 {
            return f64::INFINITY;
        }
        if (0..n).any(|i| r[(i, i)] == 0.0) {
            return 0.0;
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i % 7) as f64).collect();
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let mut est = f64::INFINITY;
        for _ in 0..INVERSE_ITERATIONS {
            let w = solve_upper_transposed(r, &v);
            let Ok(z) = solve_upper_triangular(r, &w) else { return 0.0 };
            let nz = norm(&z);
            if !nz.is_finite() {
                return 0.0;
            }
            est = est.min(nz.recip().sqrt());
            v = z.into_iter().map(|x| x / nz).collect();
        }
        est
    }

    /// `Qᵀ B` for the full orthogonal factor (`rows × ncols(B)`).
    pub fn apply_qt(&self, b: &Mat<f64>) -> Result<Mat<f64>> {
        if b.nrows() != self.nrows {
            return Err(Error::Shape { expected: self.nrows, got: b.nrows() });
        }
        let (basis, coeff) = self.householder();
        let mut out = b.clone();
        let req = householder::apply_block_householder_sequence_transpose_on_the_left_in_place_scratch::<f64>(
            self.nrows,
            coeff.nrows(),
            out.ncols(),
        );
        let mut mem = MemBuffer::new(req);
        householder::apply_block_householder_sequence_transpose_on_the_left_in_place_with_conj(
            basis,
            coeff,
            Conj::No,
            out.as_mut(),
            Par::Seq,
            MemStack::new(&mut mem),
        );
        Ok(out)
    }

    pub fn apply_qt_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        let m = self.apply_qt(&Mat::from_fn(b.len(), 1, |i, _| b[i]))?;
        Ok((0..m.nrows()).map(|i| m[(i, 0)]).collect())
    }

    fn apply_q_in_place(&self, mut m: Mat<f64>) -> Mat<f64> {
        let (basis, coeff) = self.householder();
        let req = householder::apply_block_householder_sequence_on_the_left_in_place_scratch::<f64>(
            self.nrows,
            coeff.nrows(),
            m.ncols(),
        );
        let mut mem = MemBuffer::new(req);
        householder::apply_block_householder_sequence_on_the_left_in_place_with_conj(
            basis,
            coeff,
            Conj::No,
            m.as_mut(),
            Par::Seq,
            MemStack::new(&mut mem),
        );
        m
    }

    /// First `rank` columns of `Q`.
    pub fn thin_q(&self) -> Mat<f64> {
        self.apply_q_in_place(Mat::<f64>::identity(self.nrows, self.rank))
    }

    /// Least-squares residual `b − A x` for the basic solution, computed as
    /// the projection of `b` onto the complement of the leading `rank`
    /// columns of `Q`. Orthogonal to those columns up to rounding even when
    /// `A` is badly conditioned.
    pub fn residual(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut m = self.apply_qt(&Mat::from_fn(b.len(), 1, |i, _| b[i]))?;
        for i in 0..self.rank {
            m[(i, 0)] = 0.0;
        }
        let m = self.apply_q_in_place(m);
        Ok((0..m.nrows()).map(|i| m[(i, 0)]).collect())
    }

    /// Basic least-squares solution: the leading `rank` coefficients come
    /// from the triangular solve and are scattered to their original
    /// columns; the remaining coefficients are zero.
    pub fn solve_least_squares(&self, b: &[f64]) -> Result<Vec<f64>> {
        let qtb = self.apply_qt_vec(b)?;
        let z = solve_upper_triangular(self.r(), &qtb[..self.rank])?;
        let mut x = vec![0.0; self.ncols];
        for (k, zk) in z.into_iter().enumerate() {
            let col = self.perm.as_ref().map_or(k, |p| p[k]);
            x[col] = zk;
        }
        Ok(x)
    }
}

const INVERSE_ITERATIONS: usize = 8;

/// Solves `Rᵀ x = b` for upper-triangular `R` with a nonzero diagonal.
fn solve_upper_transposed(r: MatRef<'_, f64>, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in 0..x.len() {
        let mut acc = x[i];
        for j in 0..i {
            acc -= r[(j, i)] * x[j];
        }
        x[i] = acc / r[(i, i)];
    }
    x
}

/// Back substitution with an upper-triangular matrix.
pub fn solve_upper_triangular(r: MatRef<'_, f64>, b: &[f64]) -> Result<Vec<f64>> {
    let n = r.nrows();
    if r.ncols() != n || b.len() != n {
        return Err(Error::Shape { expected: n, got: b.len() });
    }
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= r[(i, j)] * x[j];
        }
        let d = r[(i, i)];
        if d == 0.0 {
            return Err(Error::SingularFactor(i));
        }
        x[i] = acc / d;
    }
    Ok(x)
}
