use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::{cholesky, CholeskyFactor, SparseSymmetric};

const MAX_ITERATIONS: usize = 300;
const CHECK_EVERY: usize = 5;
const REL_TOL: f64 = 1e-7;
const DENSE_FALLBACK_LIMIT: usize = 2000;

/// How a condition estimate was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CondMethod {
    /// Diagonal matrix: ratio of extreme diagonal entries.
    Diagonal,
    /// Lanczos on `A` for the largest and on `A⁻¹` for the smallest
    /// eigenvalue.
    Iterative,
    /// Dense symmetric eigensolver.
    Dense,
}

/// 2-norm condition number estimate `λ_max / λ_min` of an SPD matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CondEstimate {
    pub value: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub converged: bool,
    pub method: CondMethod,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn largest_ritz_value(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let t = Mat::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    t.self_adjoint_eigenvalues(Side::Lower)
        .map(|e| e.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .unwrap_or(f64::NAN)
}

/// Largest eigenvalue of a symmetric operator by Lanczos with full
/// reorthogonalization, started from a seeded vector. Returns the Ritz
/// value and whether it settled to `REL_TOL`.
fn lanczos_max(n: usize, seed: u64, mut op: impl FnMut(&[f64]) -> Result<Vec<f64>>) -> Result<(f64, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    let steps = n.min(MAX_ITERATIONS);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut prev = f64::NAN;
    for j in 0..steps {
        let mut w = op(&v)?;
        let a = dot(&v, &w);
        alpha.push(a);
        basis.push(v);
        for _ in 0..2 {
            for q in &basis {
                let h = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= h * y);
            }
        }
        let b = dot(&w, &w).sqrt();
        let scale = alpha.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let breakdown = !(b > 1e-14 * scale);
        let last = j + 1 == steps;
        if breakdown || last || (j + 1) % CHECK_EVERY == 0 {
            let ritz = largest_ritz_value(&alpha, &beta);
            let settled = (ritz - prev).abs() <= REL_TOL * ritz.abs();
            if breakdown || settled || last {
                return Ok((ritz, breakdown || settled || j + 1 == n));
            }
            prev = ritz;
        }
        beta.push(b);
        v = w.into_iter().map(|x| x / b).collect();
    }
    Ok((prev, false))
}

/// Estimates the 2-norm condition number of a symmetric positive-definite
/// sparse matrix. A factor of `a` may be supplied to avoid refactorizing.
pub fn cond_estimate(a: &SparseSymmetric, factor: Option<&CholeskyFactor>) -> Result<CondEstimate> {
    let n = a.n();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if a.is_diagonal() {
        let diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
        let hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
        if !(lo > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: diag.iter().position(|&d| d == lo).unwrap_or(0), value: lo });
        }
        return Ok(CondEstimate { value: hi / lo, lambda_max: hi, lambda_min: lo, converged: true, method: CondMethod::Diagonal });
    }

    let owned;
    let factor = match factor {
        Some(f) => f,
        None => {
            owned = cholesky(a)?;
            &owned
        }
    };
    let (lambda_max, ok_max) = lanczos_max(n, 0x5eed, |v| Ok(a.mul_vec(v)))?;
    let (inv_min, ok_min) = lanczos_max(n, 0x5eed + 1, |v| factor.solve(v))?;
    let lambda_min = 1.0 / inv_min;
    let converged = ok_max && ok_min;
    if !converged && n <= DENSE_FALLBACK_LIMIT {
        return dense_estimate(a);
    }
    Ok(CondEstimate { value: lambda_max / lambda_min, lambda_max, lambda_min, converged, method: CondMethod::Iterative })
}

fn dense_estimate(a: &SparseSymmetric) -> Result<CondEstimate> {
    let eig = a
        .to_dense()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::InvalidArgument(format!("eigensolver failed: {e:?}")))?;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) {
        return Err(Error::NotPositiveDefinite { pivot: 0, value: lo });
    }
    Ok(CondEstimate { value: hi / lo, lambda_max: hi, lambda_min: lo, converged: true, method: CondMethod::Dense })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Smoothness, WendlandKernel};
    use crate::nodes::{dart_spacing_for_count, dart_throw, DomainTag};
    use crate::sparse_linalg::assemble_gramian;

    #[test]
    fn identity_is_one() {
        let c = cond_estimate(&SparseSymmetric::identity(20), None).unwrap();
        assert_eq!(c.value, 1.0);
        assert!(c.converged);
    }

    #[test]
    fn diagonal_ratio() {
        let a = SparseSymmetric::from_lower_rows(vec![vec![(0, 1.0)], vec![(1, 1e4)]]);
        let c = cond_estimate(&a, None).unwrap();
        assert!((c.value - 1e4).abs() <= 1e-6 * 1e4);
    }

    #[test]
    fn two_by_two_closed_form() {
        let a = SparseSymmetric::from_lower_rows(vec![vec![(0, 1.0)], vec![(0, 0.5), (1, 1.0)]]);
        let c = cond_estimate(&a, None).unwrap();
        assert!((c.value - 3.0).abs() < 1e-6);
    }

    #[test]
    fn gramian_matches_dense_eigenvalues() {
        let h = dart_spacing_for_count(DomainTag::Disk, 200).unwrap();
        let p = dart_throw(DomainTag::Disk, h, 9).unwrap();
        let k = WendlandKernel::new(Smoothness::C4, 0.3 / p.separation()).unwrap();
        let a = assemble_gramian(&p, &k);
        let f = cholesky(&a).unwrap();
        let est = cond_estimate(&a, Some(&f)).unwrap();
        let eig = a.to_dense().self_adjoint_eigenvalues(Side::Lower).unwrap();
        let truth = eig.iter().copied().fold(0.0, f64::max) / eig.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((est.value - truth).abs() <= 0.05 * truth, "{} vs {truth}", est.value);
    }
}
