use crate::error::{Error, Result};
use crate::kernel::WendlandKernel;
use crate::nodes::PointSet;
use crate::spatial::CellGrid;

use super::{SparseMatrix, SparseSymmetric};

/// Kernel Gramian `A_ij = φ(eps ‖x_i − x_j‖)`, found by a fixed-radius search
/// on a background grid whose cells match the support radius.
pub fn assemble_gramian(points: &PointSet, kernel: &WendlandKernel) -> SparseSymmetric {
    let support = kernel.support_radius();
    let dim = points.dim();
    let grid = CellGrid::new(points.coords(), dim, support);
    let rows = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row = vec![(i, 1.0)];
            grid.for_each_within(p, support, |j, dist| {
                if j < i && dist < support {
                    let v = kernel.eval_unchecked(dist);
                    if v != 0.0 {
                        row.push((j, v));
                    }
                }
            });
            row
        })
        .collect();
    SparseSymmetric::from_lower_rows(rows)
}

/// Rectangular kernel matrix between evaluation points (rows) and centers
/// (columns).
pub fn assemble_cross(
    eval_points: &PointSet,
    centers: &PointSet,
    kernel: &WendlandKernel,
) -> Result<SparseMatrix> {
    if eval_points.dim() != centers.dim() {
        return Err(Error::Shape { expected: centers.dim(), got: eval_points.dim() });
    }
    let support = kernel.support_radius();
    let grid = CellGrid::new(centers.coords(), centers.dim(), support);
    let rows = eval_points
        .iter()
        .map(|p| {
            let mut row = Vec::new();
            grid.for_each_within(p, support, |j, dist| {
                if dist < support {
                    let v = kernel.eval_unchecked(dist);
                    if v != 0.0 {
                        row.push((j, v));
                    }
                }
            });
            row
        })
        .collect();
    Ok(SparseMatrix::from_rows(centers.len(), rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Smoothness;
    use crate::nodes::{dart_throw, DomainTag};

    fn brute_dense(points: &PointSet, kernel: &WendlandKernel) -> Vec<Vec<f64>> {
        (0..points.len())
            .map(|i| {
                (0..points.len())
                    .map(|j| {
                        let d = points
                            .point(i)
                            .iter()
                            .zip(points.point(j))
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt();
                        kernel.eval(d).unwrap()
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn identity_below_separation() {
        let p = dart_throw(DomainTag::Disk, 0.1, 1).unwrap();
        let k = WendlandKernel::new(Smoothness::C2, 1.01 / p.separation()).unwrap();
        let a = assemble_gramian(&p, &k);
        assert_eq!(a.nnz(), p.len());
        assert!(a.is_diagonal());
        assert!((0..p.len()).all(|i| a.get(i, i) == 1.0));
    }

    #[test]
    fn two_points_half_radius() {
        let p = PointSet::new(1, vec![0.0, 0.5], DomainTag::Custom).unwrap();
        let k = WendlandKernel::new(Smoothness::C2, 1.0).unwrap();
        let a = assemble_gramian(&p, &k);
        assert!((a.get(1, 0) - 0.1875).abs() < 1e-15);
        assert_eq!(a.get(0, 1), a.get(1, 0));
    }

    #[test]
    fn dense_when_support_exceeds_diameter() {
        let p = dart_throw(DomainTag::Disk, 0.3, 2).unwrap();
        let n = p.len();
        let k = WendlandKernel::new(Smoothness::C4, 0.5 / p.diameter()).unwrap();
        assert_eq!(assemble_gramian(&p, &k).nnz(), n * (n + 1) / 2);
    }

    #[test]
    fn matches_brute_force_scan() {
        for (domain, h, eps) in [(DomainTag::Disk, 0.1, 4.0), (DomainTag::Ball, 0.3, 2.5), (DomainTag::Interval, 0.01, 20.0)] {
            let p = dart_throw(domain, h, 3).unwrap();
            assert!(p.len() <= 500, "{} points", p.len());
            let k = WendlandKernel::new(Smoothness::C2, eps).unwrap();
            let a = assemble_gramian(&p, &k);
            let dense = brute_dense(&p, &k);
            let mut nonzero = 0;
            for i in 0..p.len() {
                for j in 0..=i {
                    assert_eq!(a.get(i, j), dense[i][j], "entry ({i},{j})");
                    if dense[i][j] != 0.0 {
                        nonzero += 1;
                    }
                }
            }
            assert_eq!(a.nnz(), nonzero);
        }
    }

    #[test]
    fn cross_matrix_rows() {
        let centers = PointSet::new(1, vec![0.0], DomainTag::Custom).unwrap();
        let eval = PointSet::new(1, vec![0.0, 0.5, 3.0], DomainTag::Custom).unwrap();
        let k = WendlandKernel::new(Smoothness::C2, 1.0).unwrap();
        let ae = assemble_cross(&eval, &centers, &k).unwrap();
        assert_eq!(ae.row(0).collect::<Vec<_>>(), vec![(0, 1.0)]);
        let r1: Vec<_> = ae.row(1).collect();
        assert!((r1[0].1 - 0.1875).abs() < 1e-15);
        assert_eq!(ae.row(2).count(), 0);
        let bad = PointSet::new(2, vec![0.0, 0.0], DomainTag::Custom).unwrap();
        assert!(assemble_cross(&bad, &centers, &k).is_err());
    }
}
