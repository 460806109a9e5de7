//! Uniform background grid for fixed-radius neighbor queries.

/// Points bucketed into axis-aligned cells of equal width, stored as a
/// counting-sort (cell offsets plus a permutation of point indices).
pub(crate) struct CellGrid<'a> {
    dim: usize,
    coords: &'a [f64],
    origin: Vec<f64>,
    cell: f64,
    counts: Vec<usize>,
    strides: Vec<usize>,
    cell_start: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> CellGrid<'a> {
    /// Buckets `coords` (row-major, `dim` values per point) into cells of
    /// width at least `cell_hint`. The width grows if the box would need
    /// more than ~4 cells per point.
    pub(crate) fn new(coords: &'a [f64], dim: usize, cell_hint: f64) -> Self {
        let n = if dim == 0 { 0 } else { coords.len() / dim };
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in coords.chunks_exact(dim) {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if n == 0 {
            lo.fill(0.0);
            hi.fill(0.0);
        }
        let max_cells = (4 * n).max(64) as f64;
        let mut cell = if cell_hint.is_finite() && cell_hint > 0.0 { cell_hint } else { 1.0 };
        let counts_for = |cell: f64| -> Vec<usize> {
            (0..dim)
                .map(|k| (((hi[k] - lo[k]) / cell).floor() as usize).saturating_add(1))
                .collect()
        };
        let mut counts = counts_for(cell);
        loop {
            let total: f64 = counts.iter().map(|&c| c as f64).product();
            if total <= max_cells {
                break;
            }
            cell *= (total / max_cells).powf(1.0 / dim as f64).max(1.01);
            counts = counts_for(cell);
        }
        let mut strides = vec![1usize; dim];
        for k in 1..dim {
            strides[k] = strides[k - 1] * counts[k - 1];
        }
        let ncells: usize = counts.iter().product();

        let mut grid = Self {
            dim,
            coords,
            origin: lo,
            cell,
            counts,
            strides,
            cell_start: vec![0; ncells + 1],
            order: vec![0; n],
        };
        let keys: Vec<usize> = coords.chunks_exact(dim).map(|p| grid.key_of(p)).collect();
        for &key in &keys {
            grid.cell_start[key + 1] += 1;
        }
        for c in 0..ncells {
            grid.cell_start[c + 1] += grid.cell_start[c];
        }
        let mut fill = grid.cell_start.clone();
        for (i, &key) in keys.iter().enumerate() {
            grid.order[fill[key]] = i;
            fill[key] += 1;
        }
        grid
    }

    fn axis_cell(&self, k: usize, x: f64) -> isize {
        ((x - self.origin[k]) / self.cell).floor() as isize
    }

    fn key_of(&self, p: &[f64]) -> usize {
        (0..self.dim)
            .map(|k| {
                let c = self.axis_cell(k, p[k]).clamp(0, self.counts[k] as isize - 1);
                c as usize * self.strides[k]
            })
            .sum()
    }

    /// Calls `visit(j, dist)` for every stored point `j` with
    /// `‖coords[j] − query‖ ≤ radius`.
    pub(crate) fn for_each_within(&self, query: &[f64], radius: f64, mut visit: impl FnMut(usize, f64)) {
        let dim = self.dim;
        let mut lo = vec![0usize; dim];
        let mut hi = vec![0usize; dim];
        for k in 0..dim {
            let a = self.axis_cell(k, query[k] - radius);
            let b = self.axis_cell(k, query[k] + radius);
            let top = self.counts[k] as isize - 1;
            if b < 0 || a > top {
                return;
            }
            lo[k] = a.max(0) as usize;
            hi[k] = b.min(top) as usize;
        }
        let r2 = radius * radius;
        let mut idx = lo.clone();
        loop {
            let key: usize = (0..dim).map(|k| idx[k] * self.strides[k]).sum();
            for &j in &self.order[self.cell_start[key]..self.cell_start[key + 1]] {
                let p = &self.coords[j * dim..(j + 1) * dim];
                let d2: f64 = p.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2 <= r2 {
                    visit(j, d2.sqrt());
                }
            }
            // odometer over the cell box
            let mut k = 0;
            loop {
                if k == dim {
                    return;
                }
                if idx[k] < hi[k] {
                    idx[k] += 1;
                    break;
                }
                idx[k] = lo[k];
                k += 1;
            }
        }
    }
}

/// Minimum pairwise distance of a point cloud, or `+inf` for fewer than two
/// points. Exact: the search radius doubles until some pair is found inside
/// it, at which point no closer pair can have been missed.
pub(crate) fn min_pair_distance(coords: &[f64], dim: usize) -> f64 {
    let n = coords.len() / dim;
    if n < 2 {
        return f64::INFINITY;
    }
    let mut extent = 0.0f64;
    for k in 0..dim {
        let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in coords.chunks_exact(dim) {
            a = a.min(p[k]);
            b = b.max(p[k]);
        }
        extent = extent.max(b - a);
    }
    if extent == 0.0 {
        return 0.0;
    }
    let mut radius = extent / (n as f64).powf(1.0 / dim as f64);
    loop {
        let grid = CellGrid::new(coords, dim, radius);
        let mut best = f64::INFINITY;
        for (i, p) in coords.chunks_exact(dim).enumerate() {
            grid.for_each_within(p, radius, |j, d| {
                if j != i && d < best {
                    best = d;
                }
            });
            if best == 0.0 {
                return 0.0;
            }
        }
        if best <= radius {
            return best;
        }
        radius *= 2.0;
    }
}

/// Largest pairwise distance, by direct scan.
pub(crate) fn max_pair_distance(coords: &[f64], dim: usize) -> f64 {
    let mut best = 0.0f64;
    let pts: Vec<&[f64]> = coords.chunks_exact(dim).collect();
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            let d2: f64 = p.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.max(d2);
        }
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_min(coords: &[f64], dim: usize) -> f64 {
        let pts: Vec<&[f64]> = coords.chunks_exact(dim).collect();
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d: f64 = pts[i].iter().zip(pts[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                best = best.min(d.sqrt());
            }
        }
        best
    }

    #[test]
    fn neighbor_query_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..=3 {
            let coords: Vec<f64> = (0..300 * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for &radius in &[0.01, 0.2, 0.7, 5.0] {
                let grid = CellGrid::new(&coords, dim, radius);
                for q in coords.chunks_exact(dim).take(40) {
                    let mut found = Vec::new();
                    grid.for_each_within(q, radius, |j, _| found.push(j));
                    found.sort_unstable();
                    let expect: Vec<usize> = coords
                        .chunks_exact(dim)
                        .enumerate()
                        .filter(|(_, p)| {
                            p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
                                <= radius * radius
                        })
                        .map(|(j, _)| j)
                        .collect();
                    assert_eq!(found, expect);
                }
            }
        }
    }

    #[test]
    fn query_outside_box_is_empty() {
        let coords = vec![0.0, 0.0, 1.0, 1.0];
        let grid = CellGrid::new(&coords, 2, 0.5);
        let mut hits = 0;
        grid.for_each_within(&[10.0, 10.0], 1.0, |_, _| hits += 1);
        assert_eq!(hits, 0);
    }

    #[test]
    fn min_distance_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in 1..=3 {
            let coords: Vec<f64> = (0..500 * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert_eq!(min_pair_distance(&coords, dim), brute_min(&coords, dim));
        }
        let equi: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        assert!((min_pair_distance(&equi, 1) - 0.1).abs() < 1e-12);
        assert_eq!(min_pair_distance(&[1.0, 2.0, 1.0, 2.0], 2), 0.0);
    }
}
