//! Total-degree tensor-product Legendre basis.

use faer::Mat;

use crate::error::{Error, Result};
use crate::nodes::PointSet;

/// Per-axis affine map from a bounding box onto `[-1, 1]`.
///
/// Degenerate axes (`hi == lo`) map every coordinate to 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Rescale {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Rescale {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Shape { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidArgument("rescale box needs finite lo <= hi".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn identity(dim: usize) -> Self {
        Self { lo: vec![-1.0; dim], hi: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    #[inline]
    pub fn apply(&self, axis: usize, x: f64) -> f64 {
        let (lo, hi) = (self.lo[axis], self.hi[axis]);
        if hi == lo {
            0.0
        } else if lo == -1.0 && hi == 1.0 {
            x
        } else {
            2.0 * (x - lo) / (hi - lo) - 1.0
        }
    }
}

/// Legendre polynomials `P_0..=P_degree` at `x` by the three-term recurrence.
pub fn legendre_table(x: f64, degree: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if degree >= 1 {
        out[1] = x;
    }
    for k in 1..degree {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Multi-indices with `|α| ≤ degree` in graded lexicographic order: by total
/// degree, then with larger leading exponents first.
fn graded_lex(dim: usize, degree: usize) -> Vec<Vec<u32>> {
    fn fill(prefix: &mut Vec<u32>, remaining_dims: usize, total: usize, out: &mut Vec<Vec<u32>>) {
        if remaining_dims == 1 {
            prefix.push(total as u32);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first as u32);
            fill(prefix, remaining_dims - 1, total - first, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(degree + dim, dim));
    for total in 0..=degree {
        fill(&mut Vec::with_capacity(dim), dim, total, &mut out);
    }
    out
}

/// Polynomials of total degree at most `degree` in `dim` variables, as
/// products of univariate Legendre polynomials in rescaled coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct TotalDegreeBasis {
    dim: usize,
    degree: usize,
    indices: Vec<Vec<u32>>,
    rescale: Rescale,
}

impl TotalDegreeBasis {
    pub fn new(degree: usize, rescale: Rescale) -> Result<Self> {
        let dim = rescale.dim();
        if dim == 0 {
            return Err(Error::InvalidArgument("basis dimension must be at least 1".into()));
        }
        Ok(Self { dim, degree, indices: graded_lex(dim, degree), rescale })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions `M = binomial(degree + dim, dim)`.
    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[Vec<u32>] {
        &self.indices
    }

    pub fn rescale(&self) -> &Rescale {
        &self.rescale
    }

    /// Per-axis Legendre tables for one point, laid out `axis * (degree+1) + k`.
    fn tables(&self, point: &[f64], buf: &mut [f64]) {
        let stride = self.degree + 1;
        for k in 0..self.dim {
            let x = self.rescale.apply(k, point[k]);
            legendre_table(x, self.degree, &mut buf[k * stride..(k + 1) * stride]);
        }
    }

    #[inline]
    fn column_value(&self, j: usize, tables: &[f64]) -> f64 {
        let stride = self.degree + 1;
        self.indices[j]
            .iter()
            .enumerate()
            .map(|(k, &a)| tables[k * stride + a as usize])
            .product()
    }

    /// Dense `K × M` matrix of basis values at the given points.
    pub fn vandermonde(&self, points: &PointSet) -> Result<Mat<f64>> {
        self.vandermonde_columns(points, &(0..self.size()).collect::<Vec<_>>())
    }

    /// Vandermonde matrix restricted to the listed columns.
    pub fn vandermonde_columns(&self, points: &PointSet, cols: &[usize]) -> Result<Mat<f64>> {
        if points.dim() != self.dim {
            return Err(Error::Shape { expected: self.dim, got: points.dim() });
        }
        let mut tables = vec![0.0; self.dim * (self.degree + 1)];
        let mut out = Mat::<f64>::zeros(points.len(), cols.len());
        for (i, p) in points.iter().enumerate() {
            self.tables(p, &mut tables);
            for (c, &j) in cols.iter().enumerate() {
                out[(i, c)] = self.column_value(j, &tables);
            }
        }
        Ok(out)
    }

    /// Values of `Σ_j coeffs[j] p_j` at every point, without forming the
    /// Vandermonde matrix.
    pub fn evaluate(&self, points: &PointSet, coeffs: &[f64]) -> Result<Vec<f64>> {
        if points.dim() != self.dim {
            return Err(Error::Shape { expected: self.dim, got: points.dim() });
        }
        if coeffs.len() != self.size() {
            return Err(Error::Shape { expected: self.size(), got: coeffs.len() });
        }
        let active: Vec<usize> = (0..self.size()).filter(|&j| coeffs[j] != 0.0).collect();
        let mut tables = vec![0.0; self.dim * (self.degree + 1)];
        Ok(points
            .iter()
            .map(|p| {
                self.tables(p, &mut tables);
                active.iter().map(|&j| coeffs[j] * self.column_value(j, &tables)).sum()
            })
            .collect())
    }
    /// `Pᵀ w`: weighted column sums of the Vandermonde matrix, computed
    /// point by point.
    pub fn transpose_apply(&self, points: &PointSet, weights: &[f64]) -> Result<Vec<f64>> {
        if points.dim() != self.dim {
            return Err(Error::Shape { expected: self.dim, got: points.dim() });
        }
        if weights.len() != points.len() {
            return Err(Error::Shape { expected: points.len(), got: weights.len() });
        }
        let mut tables = vec![0.0; self.dim * (self.degree + 1)];
        let mut out = vec![0.0; self.size()];
        for (p, &w) in points.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            self.tables(p, &mut tables);
            for (j, o) in out.iter_mut().enumerate() {
                *o += w * self.column_value(j, &tables);
            }
        }
        Ok(out)
    }
}

/// Basis of the given degree with the rescale map taken from the bounding
/// box of `points`.
pub fn build_basis(points: &PointSet, degree: usize) -> Result<TotalDegreeBasis> {
    let (lo, hi) = points.bounding_box();
    TotalDegreeBasis::new(degree, Rescale::new(lo, hi)?)
}

/// `floor(scale · N^(1/d))`, with exact handling of perfect powers.
pub fn degree_from_points(n: usize, dim: usize, scale: f64) -> usize {
    assert!(n >= 1 && dim >= 1 && scale > 0.0);
    let mut root = (n as f64).powf(1.0 / dim as f64);
    let nearest = root.round();
    if (nearest as u128).checked_pow(dim as u32) == Some(n as u128) {
        root = nearest;
    }
    let x = scale * root;
    // absorb representation error in scale (e.g. 0.8 * 10)
    let snapped = x.round();
    if (x - snapped).abs() <= 1e-12 * x.max(1.0) {
        snapped as usize
    } else {
        x.floor() as usize
    }
}

/// Default degree scale `C(d)`: 0.8 in 2D, 1 otherwise (including manifolds).
pub fn default_degree_scale(dim: usize, manifold: bool) -> f64 {
    if dim == 2 && !manifold {
        0.8
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodes::{DomainTag, PointSet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(dim: usize, coords: Vec<f64>) -> PointSet {
        PointSet::new(dim, coords, DomainTag::Custom).unwrap()
    }

    #[test]
    fn degree_rule() {
        assert_eq!(degree_from_points(100, 2, 0.8), 8);
        assert_eq!(degree_from_points(1000, 3, 1.0), 10);
        assert_eq!(degree_from_points(16, 1, 1.0), 16);
        assert_eq!(degree_from_points(999, 3, 1.0), 9);
        assert_eq!(degree_from_points(8000, 2, 0.8), 71);
        assert_eq!(degree_from_points(343, 3, 1.0), 7);
    }

    #[test]
    fn basis_sizes_and_order() {
        let p = pts(1, vec![-1.0, 0.3, 1.0]);
        let b = build_basis(&p, 2).unwrap();
        assert_eq!(b.size(), 3);
        assert_eq!(b.rescale(), &Rescale::identity(1));

        let b2 = TotalDegreeBasis::new(2, Rescale::identity(2)).unwrap();
        assert_eq!(b2.size(), 6);
        let b3 = TotalDegreeBasis::new(1, Rescale::identity(3)).unwrap();
        assert_eq!(b3.indices(), &[vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        for d in 1..=4 {
            for l in 0..=7 {
                let b = TotalDegreeBasis::new(l, Rescale::identity(d)).unwrap();
                assert_eq!(b.size(), binomial(l + d, d));
            }
        }
    }

    #[test]
    fn vandermonde_rows() {
        let b = TotalDegreeBasis::new(1, Rescale::identity(1)).unwrap();
        let v = b.vandermonde(&pts(1, vec![0.5])).unwrap();
        assert_eq!((v[(0, 0)], v[(0, 1)]), (1.0, 0.5));

        let b = TotalDegreeBasis::new(2, Rescale::identity(1)).unwrap();
        let v = b.vandermonde(&pts(1, vec![1.0])).unwrap();
        assert_eq!((v[(0, 0)], v[(0, 1)], v[(0, 2)]), (1.0, 1.0, 1.0));

        let b = TotalDegreeBasis::new(1, Rescale::identity(2)).unwrap();
        let v = b.vandermonde(&pts(2, vec![0.25, -0.75])).unwrap();
        assert_eq!((v[(0, 0)], v[(0, 1)], v[(0, 2)]), (1.0, 0.25, -0.75));

        assert!(b.vandermonde(&pts(1, vec![0.0])).is_err());
    }

    #[test]
    fn rescale_maps_box_and_degenerate_axes() {
        let p = pts(2, vec![2.0, 5.0, 4.0, 5.0]);
        let b = build_basis(&p, 1).unwrap();
        assert_eq!(b.rescale().apply(0, 2.0), -1.0);
        assert_eq!(b.rescale().apply(0, 4.0), 1.0);
        assert_eq!(b.rescale().apply(0, 3.0), 0.0);
        assert_eq!(b.rescale().apply(1, 5.0), 0.0);
        // extrapolation outside the box is still evaluated
        assert_eq!(b.rescale().apply(0, 6.0), 3.0);
    }

    #[test]
    fn gauss_orthogonality_1d() {
        // 40-point Gauss-Legendre integrates products up to degree 79 exactly.
        let n = 40;
        let mut x = Vec::new();
        let mut w = Vec::new();
        for i in 0..n {
            let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let mut tab = vec![0.0; n + 1];
                legendre_table(t, n, &mut tab);
                dp = n as f64 * (t * tab[n] - tab[n - 1]) / (t * t - 1.0);
                let dx = tab[n] / dp;
                t -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            x.push(t);
            w.push(2.0 / ((1.0 - t * t) * dp * dp));
        }
        let b = TotalDegreeBasis::new(30, Rescale::identity(1)).unwrap();
        let v = b.vandermonde(&pts(1, x)).unwrap();
        for a in 0..=30 {
            for c in 0..=30 {
                let ip: f64 = (0..n).map(|i| w[i] * v[(i, a)] * v[(i, c)]).sum();
                let expect = if a == c { 2.0 / (2 * a + 1) as f64 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "({a},{c}): {ip}");
            }
        }
    }

    #[test]
    fn full_column_rank_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (dim, degree) in [(1usize, 6usize), (2, 5), (3, 3)] {
            let basis = TotalDegreeBasis::new(degree, Rescale::identity(dim)).unwrap();
            let n = 3 * basis.size();
            let coords: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v = basis.vandermonde(&pts(dim, coords)).unwrap();
            let s = v.singular_values().unwrap();
            let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(smin > 1e-8 * s[0], "dim {dim}: smin {smin}");
        }
    }

    #[test]
    fn evaluate_matches_vandermonde_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = pts(2, (0..60).map(|_| rng.gen_range(-2.0..3.0)).collect());
        let b = build_basis(&p, 4).unwrap();
        let coeffs: Vec<f64> = (0..b.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v = b.vandermonde(&p).unwrap();
        let direct = b.evaluate(&p, &coeffs).unwrap();
        for i in 0..p.len() {
            let expect: f64 = (0..b.size()).map(|j| v[(i, j)] * coeffs[j]).sum();
            assert!((expect - direct[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn transpose_apply_matches_vandermonde_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = pts(3, (0..90).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let b = build_basis(&p, 3).unwrap();
        let w: Vec<f64> = (0..p.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v = b.vandermonde(&p).unwrap();
        let got = b.transpose_apply(&p, &w).unwrap();
        for j in 0..b.size() {
            let expect: f64 = (0..p.len()).map(|i| v[(i, j)] * w[i]).sum();
            assert!((expect - got[j]).abs() < 1e-12);
        }
        assert!(b.transpose_apply(&p, &w[1..]).is_err());
    }
}
