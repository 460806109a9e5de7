//! Point sets: construction, generators, geometry statistics and the plain
//! text point file format.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spatial;

/// Domain a point set was generated on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DomainTag {
    Interval,
    Disk,
    Ball,
    Sphere,
    Hemisphere,
    Torus,
    Custom,
}

impl DomainTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainTag::Interval => "interval",
            DomainTag::Disk => "disk",
            DomainTag::Ball => "ball",
            DomainTag::Sphere => "sphere",
            DomainTag::Hemisphere => "hemisphere",
            DomainTag::Torus => "torus",
            DomainTag::Custom => "custom",
        }
    }

    /// Ambient dimension of generated points, if fixed by the domain.
    pub fn dim(self) -> Option<usize> {
        match self {
            DomainTag::Interval => Some(1),
            DomainTag::Disk => Some(2),
            DomainTag::Ball | DomainTag::Sphere | DomainTag::Hemisphere | DomainTag::Torus => Some(3),
            DomainTag::Custom => None,
        }
    }

    /// True for the unit sphere and hemisphere, whose points must lie on
    /// the unit sphere.
    pub fn on_unit_sphere(self) -> bool {
        matches!(self, DomainTag::Sphere | DomainTag::Hemisphere)
    }

    pub fn is_manifold(self) -> bool {
        matches!(self, DomainTag::Sphere | DomainTag::Hemisphere | DomainTag::Torus)
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DomainTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "interval" => DomainTag::Interval,
            "disk" => DomainTag::Disk,
            "ball" => DomainTag::Ball,
            "sphere" => DomainTag::Sphere,
            "hemisphere" => DomainTag::Hemisphere,
            "torus" => DomainTag::Torus,
            "custom" => DomainTag::Custom,
            other => return Err(Error::InvalidArgument(format!("unknown domain `{other}`"))),
        })
    }
}

/// An immutable set of distinct points in `R^d`.
///
/// The separation distance is the raw minimum pairwise distance (not half
/// of it): a kernel support below this value makes the Gramian diagonal.
#[derive(Clone, Debug)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    sep: f64,
    diam: OnceLock<f64>,
    tag: DomainTag,
}

const SPHERE_TOL: f64 = 1e-12;

impl PointSet {
    /// Builds a point set from row-major coordinates, rejecting duplicates,
    /// non-finite values and (for spherical tags) off-sphere points.
    pub fn new(dim: usize, coords: Vec<f64>, tag: DomainTag) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("point dimension must be at least 1".into()));
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::Shape {
                expected: dim * (coords.len() / dim).max(1),
                got: coords.len(),
            });
        }
        if let Some(d) = tag.dim() {
            if d != dim {
                return Err(Error::Shape { expected: d, got: dim });
            }
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Degenerate("non-finite coordinate".into()));
        }
        if tag.on_unit_sphere() {
            for (i, p) in coords.chunks_exact(dim).enumerate() {
                let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > SPHERE_TOL {
                    return Err(Error::Degenerate(format!(
                        "point {i} has norm {norm}, expected a unit vector"
                    )));
                }
            }
        }
        let sep = spatial::min_pair_distance(&coords, dim);
        if sep == 0.0 {
            return Err(Error::Degenerate("point set contains duplicate points".into()));
        }
        Ok(Self { dim, coords, sep, diam: OnceLock::new(), tag })
    }

    pub fn from_rows(rows: &[Vec<f64>], tag: DomainTag) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::Shape { expected: dim, got: bad.len() });
        }
        Self::new(dim, rows.concat(), tag)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn tag(&self) -> DomainTag {
        self.tag
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    /// Minimum pairwise distance `q` (`+inf` for a single point).
    pub fn separation(&self) -> f64 {
        self.sep
    }

    /// Largest pairwise distance `w`, computed on first use.
    pub fn diameter(&self) -> f64 {
        *self.diam.get_or_init(|| spatial::max_pair_distance(&self.coords, self.dim))
    }

    /// Per-axis bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.iter() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Same points, different domain tag (re-validated).
    pub fn retag(self, tag: DomainTag) -> Result<Self> {
        Self::new(self.dim, self.coords, tag)
    }

    /// Writes the point file format: a `d N` header line followed by one
    /// line per point with 17 significant digits per coordinate.
    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{} {}", self.dim, self.len())?;
        for p in self.iter() {
            let line: Vec<String> = p.iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_from(input: impl BufRead, tag: DomainTag) -> Result<Self> {
        let mut lines = input.lines();
        let header = loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(Error::Parse("empty point file".into())),
            }
        };
        let mut head = header.split_whitespace();
        let parse_usize = |tok: Option<&str>, what: &str| -> Result<usize> {
            tok.ok_or_else(|| Error::Parse(format!("missing {what} in header")))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad {what} in header: {e}")))
        };
        let dim = parse_usize(head.next(), "dimension")?;
        let n = parse_usize(head.next(), "point count")?;
        let mut coords = Vec::with_capacity(dim * n);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let before = coords.len();
            for tok in line.split_whitespace() {
                coords.push(
                    tok.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad coordinate `{tok}`: {e}")))?,
                );
            }
            if coords.len() - before != dim {
                return Err(Error::Parse(format!(
                    "expected {dim} coordinates per line, found {}",
                    coords.len() - before
                )));
            }
        }
        if coords.len() != dim * n {
            return Err(Error::Parse(format!(
                "header declares {n} points but file holds {}",
                coords.len() / dim.max(1)
            )));
        }
        Self::new(dim, coords, tag)
    }
}

/// Separation distance `q` and diameter `w` of a point set with at least two
/// points.
pub fn geometry_stats(points: &PointSet) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "geometry statistics need at least two points".into(),
        ));
    }
    Ok((points.separation(), points.diameter()))
}

/// Chebyshev extrema on [-1, 1], in ascending order.
pub fn chebyshev_lobatto(n: usize) -> Result<PointSet> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Chebyshev-Lobatto nodes need N >= 2, got {n}"
        )));
    }
    let m = (n - 1) as f64;
    // sin form keeps the set exactly symmetric with an exact midpoint
    let coords = (0..n)
        .map(|k| (std::f64::consts::PI * (2.0 * k as f64 - m) / (2.0 * m)).sin())
        .collect();
    PointSet::new(1, coords, DomainTag::Interval)
}

/// Kosloff–Tal-Ezer map `x ↦ arcsin(αx)/arcsin(α)`, applied coordinatewise.
pub fn kte_map(points: &PointSet, alpha: f64) -> Result<PointSet> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("KTE alpha must lie in (0, 1), got {alpha}")));
    }
    if points.coords().iter().any(|x| x.abs() > 1.0) {
        return Err(Error::InvalidArgument("KTE map needs points inside [-1, 1]".into()));
    }
    let scale = alpha.asin();
    let coords = points.coords().iter().map(|&x| (alpha * x).asin() / scale).collect();
    PointSet::new(points.dim(), coords, points.tag())
}

/// Golden-angle spiral on the upper unit hemisphere, clustered toward the
/// equator by the exponent `q_cluster > 1`.
pub fn hemisphere_fibonacci(n: usize, q_cluster: f64) -> Result<PointSet> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("hemisphere nodes need N >= 2, got {n}")));
    }
    if !(q_cluster > 1.0 && q_cluster.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "clustering exponent must exceed 1, got {q_cluster}"
        )));
    }
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut coords = Vec::with_capacity(3 * n);
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let z = 1.0 - (1.0 - t).powf(q_cluster);
        let azimuth = 2.0 * std::f64::consts::PI * golden * k as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        coords.extend_from_slice(&[r * azimuth.cos(), r * azimuth.sin(), z]);
    }
    PointSet::new(3, coords, DomainTag::Hemisphere)
}

/// Generalized spiral points on the unit sphere (Rakhmanov–Saff–Zhou).
pub fn sphere_spiral(n: usize) -> Result<PointSet> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("spiral nodes need N >= 2, got {n}")));
    }
    let mut coords = Vec::with_capacity(3 * n);
    let mut azimuth = 0.0f64;
    let step = 3.6 / (n as f64).sqrt();
    for k in 0..n {
        let z = if k == 0 {
            -1.0
        } else if k == n - 1 {
            1.0
        } else {
            -1.0 + 2.0 * k as f64 / (n - 1) as f64
        };
        let r = (1.0 - z * z).max(0.0).sqrt();
        if k == 0 || k == n - 1 {
            azimuth = 0.0;
        } else {
            azimuth = (azimuth + step / r) % (2.0 * std::f64::consts::PI);
        }
        coords.extend_from_slice(&[r * azimuth.cos(), r * azimuth.sin(), z]);
    }
    PointSet::new(3, coords, DomainTag::Sphere)
}

/// Dense occupancy grid over [-1, 1]^d used while throwing darts.
struct DartGrid {
    dim: usize,
    cell: f64,
    per_axis: usize,
    cells: Vec<Vec<usize>>,
}

impl DartGrid {
    fn new(dim: usize, cell: f64) -> Self {
        let per_axis = (2.0 / cell).ceil() as usize + 1;
        Self { dim, cell, per_axis, cells: vec![Vec::new(); per_axis.pow(dim as u32)] }
    }

    fn axis(&self, x: f64) -> isize {
        (((x + 1.0) / self.cell).floor() as isize).clamp(0, self.per_axis as isize - 1)
    }

    fn key(&self, p: &[f64]) -> usize {
        p.iter().rev().fold(0, |acc, &x| acc * self.per_axis + self.axis(x) as usize)
    }

    fn insert(&mut self, p: &[f64], idx: usize) {
        let k = self.key(p);
        self.cells[k].push(idx);
    }

    /// True if no accepted point lies strictly within `radius` of `p`.
    /// `radius` must not exceed the cell width.
    fn is_clear(&self, p: &[f64], radius: f64, accepted: &[f64]) -> bool {
        let dim = self.dim;
        let centre: Vec<isize> = p.iter().map(|&x| self.axis(x)).collect();
        let top = self.per_axis as isize - 1;
        let mut offset = vec![-1isize; dim];
        loop {
            let mut key = 0usize;
            let mut inside = true;
            for k in (0..dim).rev() {
                let c = centre[k] + offset[k];
                if c < 0 || c > top {
                    inside = false;
                    break;
                }
                key = key * self.per_axis + c as usize;
            }
            if inside {
                for &j in &self.cells[key] {
                    let q = &accepted[j * dim..(j + 1) * dim];
                    let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 < radius * radius {
                        return false;
                    }
                }
            }
            let mut k = 0;
            loop {
                if k == dim {
                    return true;
                }
                if offset[k] < 1 {
                    offset[k] += 1;
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
        }
    }
}

fn uniform_in_ball(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return p;
        }
    }
}

fn uniform_on_sphere(rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let p = uniform_in_ball(rng, 3);
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return p.iter().map(|x| x / norm).collect();
        }
    }
}

const DART_MISS_LIMIT: usize = 2000;

/// Poisson-disk style node set on the unit interval, disk or ball.
///
/// A boundary layer at spacing `0.75 h` is placed first, then uniformly drawn
/// interior candidates are kept if they are at least `h` from every accepted
/// point. Generation stops after a run of consecutive rejections. The output
/// is a deterministic function of `(domain, h, seed)`.
pub fn dart_throw(domain: DomainTag, h: f64, seed: u64) -> Result<PointSet> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("spacing h must be positive, got {h}")));
    }
    let dim = match domain {
        DomainTag::Interval => 1,
        DomainTag::Disk => 2,
        DomainTag::Ball => 3,
        other => {
            return Err(Error::InvalidArgument(format!(
                "dart throwing supports interval, disk and ball, not {other}"
            )))
        }
    };
    let boundary_h = 0.75 * h;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = DartGrid::new(dim, h);
    let mut accepted: Vec<f64> = Vec::new();

    match dim {
        1 => {
            if 2.0 < boundary_h {
                return Err(Error::Generation(format!("spacing {h} too large for the interval")));
            }
            accepted.extend_from_slice(&[-1.0, 1.0]);
        }
        2 => {
            if boundary_h >= 2.0 {
                return Err(Error::Generation(format!("spacing {h} too large for the disk")));
            }
            // chord between neighbours must be at least 0.75 h
            let count = (std::f64::consts::PI / (0.5 * boundary_h).asin()).floor() as usize;
            if count < 3 {
                return Err(Error::Generation(format!("spacing {h} too large for the disk")));
            }
            for k in 0..count {
                let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                accepted.extend_from_slice(&[t.cos(), t.sin()]);
            }
        }
        _ => {
            let mut shell_grid = DartGrid::new(3, h);
            let mut misses = 0;
            while misses < DART_MISS_LIMIT {
                let p = uniform_on_sphere(&mut rng);
                if shell_grid.is_clear(&p, boundary_h, &accepted) {
                    shell_grid.insert(&p, accepted.len() / 3);
                    accepted.extend_from_slice(&p);
                    misses = 0;
                } else {
                    misses += 1;
                }
            }
        }
    }
    for (i, p) in accepted.chunks_exact(dim).enumerate() {
        grid.insert(p, i);
    }

    let mut misses = 0;
    while misses < DART_MISS_LIMIT {
        let p = uniform_in_ball(&mut rng, dim);
        if grid.is_clear(&p, h, &accepted) {
            grid.insert(&p, accepted.len() / dim);
            accepted.extend_from_slice(&p);
            misses = 0;
        } else {
            misses += 1;
        }
    }
    if accepted.len() / dim < 2 {
        return Err(Error::Generation(format!("could not place two points at spacing {h}")));
    }
    PointSet::new(dim, accepted, domain)
}

/// Spacing that makes [`dart_throw`] produce roughly `n` points, using the
/// random-sequential-adsorption jamming densities in one to three dimensions.
pub fn dart_spacing_for_count(domain: DomainTag, n: usize) -> Result<f64> {
    let n = n.max(2) as f64;
    match domain {
        DomainTag::Interval => Ok(2.0 * 0.7476 / n),
        DomainTag::Disk => Ok((0.547 * 4.0 / n).sqrt()),
        DomainTag::Ball => Ok((0.38 * 8.0 / n).cbrt()),
        other => Err(Error::InvalidArgument(format!("no dart spacing rule for {other}"))),
    }
}

/// A reproducible recipe for one node set.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeRecipe {
    Chebyshev { n: usize },
    Kte { n: usize, alpha: f64 },
    Dart { domain: DomainTag, h: f64, seed: u64 },
    DartCount { domain: DomainTag, n: usize, seed: u64 },
    Spiral { n: usize },
    Hemisphere { n: usize, q_cluster: f64 },
    Equispaced { n: usize },
}

/// Default equator clustering exponent for hemisphere nodes.
pub const DEFAULT_Q_CLUSTER: f64 = 1.5;

impl NodeRecipe {
    pub fn generate(&self) -> Result<PointSet> {
        match *self {
            NodeRecipe::Chebyshev { n } => chebyshev_lobatto(n),
            NodeRecipe::Kte { n, alpha } => kte_map(&chebyshev_lobatto(n)?, alpha),
            NodeRecipe::Dart { domain, h, seed } => dart_throw(domain, h, seed),
            NodeRecipe::DartCount { domain, n, seed } => {
                dart_throw(domain, dart_spacing_for_count(domain, n)?, seed)
            }
            NodeRecipe::Spiral { n } => sphere_spiral(n),
            NodeRecipe::Hemisphere { n, q_cluster } => hemisphere_fibonacci(n, q_cluster),
            NodeRecipe::Equispaced { n } => equispaced(n),
        }
    }
}

/// `n` equispaced points on [-1, 1].
pub fn equispaced(n: usize) -> Result<PointSet> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("equispaced nodes need N >= 2, got {n}")));
    }
    let coords = (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect();
    PointSet::new(1, coords, DomainTag::Interval)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_stats(p: &PointSet) -> (f64, f64) {
        let mut q = f64::INFINITY;
        let mut w = 0.0f64;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let d = p
                    .point(i)
                    .iter()
                    .zip(p.point(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                q = q.min(d);
                w = w.max(d);
            }
        }
        (q, w)
    }

    #[test]
    fn chebyshev_small_sets() {
        assert_eq!(chebyshev_lobatto(2).unwrap().coords(), &[-1.0, 1.0]);
        assert_eq!(chebyshev_lobatto(3).unwrap().coords(), &[-1.0, 0.0, 1.0]);
        let c5 = chebyshev_lobatto(5).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (a, b) in c5.coords().iter().zip([-1.0, -h, 0.0, h, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(chebyshev_lobatto(1).is_err());
        let (q, w) = geometry_stats(&c5).unwrap();
        assert!((q - (1.0 - h)).abs() < 1e-15);
        assert_eq!(w, 2.0);
    }

    #[test]
    fn stats_of_simple_sets() {
        let p = PointSet::new(1, vec![-1.0, 0.0, 1.0], DomainTag::Interval).unwrap();
        assert_eq!(geometry_stats(&p).unwrap(), (1.0, 2.0));
        let sq = PointSet::from_rows(
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            DomainTag::Custom,
        )
        .unwrap();
        let (q, w) = geometry_stats(&sq).unwrap();
        assert_eq!(q, 1.0);
        assert!((w - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn duplicates_are_rejected() {
        let err = PointSet::new(2, vec![0.5, 0.5, 0.5, 0.5], DomainTag::Custom).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
        let single = PointSet::new(1, vec![0.0], DomainTag::Interval).unwrap();
        assert!(geometry_stats(&single).is_err());
    }

    #[test]
    fn off_sphere_points_are_rejected() {
        assert!(PointSet::new(3, vec![1.0, 0.0, 1e-5], DomainTag::Sphere).is_err());
        assert!(PointSet::new(3, vec![1.0, 0.0, 0.0], DomainTag::Sphere).is_ok());
    }

    #[test]
    fn kte_fixes_endpoints_and_origin() {
        let p = PointSet::new(1, vec![-1.0, 0.0, 0.5, 1.0], DomainTag::Interval).unwrap();
        for alpha in [1e-4, 0.3, 0.99] {
            let m = kte_map(&p, alpha).unwrap();
            assert_eq!(m.coords()[0], -1.0);
            assert_eq!(m.coords()[1], 0.0);
            assert_eq!(m.coords()[3], 1.0);
        }
        let small = kte_map(&p, 1e-4).unwrap();
        assert!((small.coords()[2] - 0.5).abs() < 1e-6);
        assert!(kte_map(&p, 1.0).is_err());
        assert!(kte_map(&p, 0.0).is_err());
    }

    #[test]
    fn hemisphere_nodes() {
        let n = 200;
        let p = hemisphere_fibonacci(n, 1.5).unwrap();
        assert_eq!(p.point(0)[2], 0.0);
        assert_eq!(p.point(n - 1), &[0.0, 0.0, 1.0]);
        for x in p.iter() {
            let norm2: f64 = x.iter().map(|v| v * v).sum();
            assert!((norm2 - 1.0).abs() < 1e-14);
            assert!(x[2] >= 0.0);
        }
        assert!(hemisphere_fibonacci(n, 1.0).is_err());
    }

    #[test]
    fn hemisphere_uniform_limit() {
        let n = 100;
        let p = hemisphere_fibonacci(n, 1.001).unwrap();
        let step = 1.0 / (n - 1) as f64;
        let worst = (1..n)
            .map(|k| ((p.point(k)[2] - p.point(k - 1)[2]) - step).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3 * step * 10.0, "worst {worst}");
    }

    #[test]
    fn spiral_nodes() {
        let two = sphere_spiral(2).unwrap();
        assert_eq!(two.point(0), &[0.0, 0.0, -1.0]);
        assert_eq!(two.point(1), &[0.0, 0.0, 1.0]);
        let p = sphere_spiral(1000).unwrap();
        for x in p.iter() {
            let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
        let (q, _) = brute_stats(&p);
        assert_eq!(q, p.separation());
        let c = (4.0 * std::f64::consts::PI / 1000.0).sqrt();
        assert!(q >= 0.5 * c && q <= 2.0 * c, "q = {q}, c = {c}");
    }

    #[test]
    fn dart_throw_properties() {
        for (domain, h) in [(DomainTag::Interval, 0.05), (DomainTag::Disk, 0.1), (DomainTag::Ball, 0.25)] {
            let a = dart_throw(domain, h, 42).unwrap();
            let b = dart_throw(domain, h, 42).unwrap();
            assert_eq!(a.coords(), b.coords());
            assert!(a.separation() >= 0.75 * h);
            for x in a.iter() {
                assert!(x.iter().map(|v| v * v).sum::<f64>() <= 1.0 + 1e-15);
            }
            let (q, w) = brute_stats(&a);
            assert_eq!(q, a.separation());
            assert_eq!(w, a.diameter());
            let c = dart_throw(domain, h, 43).unwrap();
            assert_ne!(a.coords(), c.coords());
        }
        assert!(dart_throw(DomainTag::Sphere, 0.1, 1).is_err());
        assert!(dart_throw(DomainTag::Disk, 5.0, 1).is_err());
    }

    #[test]
    fn dart_count_is_close_to_request() {
        let p = NodeRecipe::DartCount { domain: DomainTag::Disk, n: 1000, seed: 3 }
            .generate()
            .unwrap();
        let ratio = p.len() as f64 / 1000.0;
        assert!((0.6..1.5).contains(&ratio), "got {} points", p.len());
    }

    #[test]
    fn point_file_round_trip_is_bit_exact() {
        let p = dart_throw(DomainTag::Disk, 0.2, 9).unwrap();
        let mut buf = Vec::new();
        p.write_to(&mut buf).unwrap();
        let back = PointSet::read_from(buf.as_slice(), DomainTag::Disk).unwrap();
        assert_eq!(back.coords(), p.coords());
        assert!(PointSet::read_from("2 3\n0 0\n1 1\n".as_bytes(), DomainTag::Custom).is_err());
        assert!(PointSet::read_from("2 1\n0 0 0\n".as_bytes(), DomainTag::Custom).is_err());
    }
}
