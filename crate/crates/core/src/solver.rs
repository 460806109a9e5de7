//! Fit pipelines for the unified kernel + polynomial interpolant
//!
//! ```text
//! s(x) = Σ_k c_k φ(ε‖x − x_k‖) + Σ_j d_j p_j(x),   A c + P d = y,   Pᵀ c = 0
//! ```

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::time::Instant;

use faer::prelude::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::kernel::{Smoothness, WendlandKernel};
use crate::nodes::{DomainTag, PointSet};
use crate::polynomial::{Rescale, TotalDegreeBasis};
use crate::sparse_linalg::{
    assemble_cross, assemble_gramian, cholesky, cond_estimate, cpqr_truncated, qr, CholeskyFactor, CondEstimate,
    CondMethod, QrFactor, SparseSymmetric,
};

const MODEL_MAGIC: &str = "unified-interp-model";
const MODEL_VERSION: u32 = 1;
const DENSE_ORACLE_LIMIT: usize = 6000;

/// Which pipeline produced a fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FitMode {
    Diag,
    Hybrid,
    RankDeficient,
}

impl FitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FitMode::Diag => "diag",
            FitMode::Hybrid => "hybrid",
            FitMode::RankDeficient => "rank_deficient",
        }
    }
}

impl fmt::Display for FitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diag" => Ok(FitMode::Diag),
            "hybrid" => Ok(FitMode::Hybrid),
            "rank_deficient" => Ok(FitMode::RankDeficient),
            other => Err(Error::Parse(format!("unknown fit mode `{other}`"))),
        }
    }
}

/// Wall-clock seconds spent in each stage of a fit.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub assemble: f64,
    pub factor: f64,
    pub solve: f64,
}

/// Diagnostics recorded alongside a fitted model.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub mode: FitMode,
    pub q: f64,
    pub w: f64,
    pub support: f64,
    /// Stored lower-triangle nonzeros of the Gramian (`N` in the diagonal regime).
    pub nnz_a: usize,
    /// Nonzeros of the Cholesky factor (`N` in the diagonal regime).
    pub nnz_l: usize,
    /// Numerical rank of the least-squares block (`P` or `B`).
    pub rank: usize,
    /// Polynomial columns kept by a truncated pivoted factorization, in
    /// pivot order. `None` when every column was retained.
    pub retained_columns: Option<Vec<usize>>,
    pub cond: Option<f64>,
    /// True when the support radius reaches the diameter, so the Gramian is dense.
    pub dense_gramian: bool,
    /// `max_k |s(x_k) − y_k|`.
    pub interp_residual: f64,
    /// `‖Pᵀ c‖∞`.
    pub moment_residual: f64,
    pub timings: Timings,
}

/// A fitted interpolant. Immutable once built.
#[derive(Clone, Debug)]
pub struct UnifiedInterpolant {
    centers: PointSet,
    kernel: WendlandKernel,
    basis: TotalDegreeBasis,
    c: Vec<f64>,
    d: Vec<f64>,
    report: FitReport,
}

enum Plan {
    Diag { qr: QrFactor },
    Kernel { a: SparseSymmetric, chol: CholeskyFactor, qr: QrFactor },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RankPolicy {
    /// Unpivoted QR; a small pivot or a near-singular `R` is an error.
    Strict,
    /// Unpivoted QR, refactorized with column pivoting when `R` is
    /// numerically singular.
    Fallback,
    /// Always column pivoted and truncated.
    Pivoted,
}

fn factor_least_squares(m: &Mat<f64>, policy: RankPolicy) -> Result<QrFactor> {
    if policy != RankPolicy::Pivoted {
        let f = qr(m);
        let tall = m.nrows() >= m.ncols();
        if tall && f.first_small_pivot().is_none() && f.min_singular_estimate() > f.tolerance() {
            return Ok(f);
        }
        if policy == RankPolicy::Strict {
            let tol = f.tolerance();
            let rank = f.r_diagonal().iter().filter(|v| v.abs() > tol).count();
            return Err(Error::RankDeficient { rank: rank.min(m.ncols().saturating_sub(1)), cols: m.ncols() });
        }
    }
    Ok(cpqr_truncated(m))
}

fn retained_columns(f: &QrFactor) -> Option<Vec<usize>> {
    match f.permutation() {
        Some(p) if f.rank() < f.ncols() => Some(p[..f.rank()].to_vec()),
        _ => None,
    }
}

#[cfg(test)]
fn mat_vec(m: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let x = faer::Col::from_fn(x.len(), |j| x[j]);
    let y = m * &x;
    (0..y.nrows()).map(|i| y[i]).collect()
}

fn check_inputs(x: &PointSet, y: &[f64], basis: &TotalDegreeBasis) -> Result<()> {
    if y.len() != x.len() {
        return Err(Error::Shape { expected: x.len(), got: y.len() });
    }
    if basis.dim() != x.dim() {
        return Err(Error::Shape { expected: x.dim(), got: basis.dim() });
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("data value {i} is not finite")));
    }
    Ok(())
}

/// Factorizations for one node set, kernel and basis, reusable across
/// right-hand sides.
pub struct FitPlan {
    centers: PointSet,
    kernel: WendlandKernel,
    basis: TotalDegreeBasis,
    mode: FitMode,
    plan: Plan,
    report: FitReport,
}

impl FitPlan {
    /// Factorizes for the requested pipeline.
    pub fn prepare(x: &PointSet, kernel: &WendlandKernel, basis: &TotalDegreeBasis, mode: FitMode) -> Result<Self> {
        match mode {
            FitMode::Diag => Self::diag(x, kernel, basis),
            FitMode::Hybrid => Self::kernel(x, kernel, basis, RankPolicy::Strict),
            FitMode::RankDeficient => Self::kernel(x, kernel, basis, RankPolicy::Pivoted),
        }
    }

    /// Picks the pipeline from the support radius: diagonal below the
    /// separation distance, hybrid otherwise with a pivoted fallback when
    /// the whitened polynomial block is rank deficient.
    pub fn auto(x: &PointSet, kernel: &WendlandKernel, basis: &TotalDegreeBasis) -> Result<Self> {
        if x.len() >= 2 && kernel.support_radius() < x.separation() {
            Self::diag(x, kernel, basis)
        } else {
            Self::kernel(x, kernel, basis, RankPolicy::Fallback)
        }
    }

    fn base_report(x: &PointSet, kernel: &WendlandKernel, mode: FitMode) -> FitReport {
        let (q, w) = if x.len() >= 2 { (x.separation(), x.diameter()) } else { (f64::INFINITY, 0.0) };
        let support = kernel.support_radius();
        FitReport {
            mode,
            q,
            w,
            support,
            nnz_a: x.len(),
            nnz_l: x.len(),
            rank: 0,
            retained_columns: None,
            cond: None,
            dense_gramian: support >= w,
            interp_residual: 0.0,
            moment_residual: 0.0,
            timings: Timings::default(),
        }
    }

    fn diag(x: &PointSet, kernel: &WendlandKernel, basis: &TotalDegreeBasis) -> Result<Self> {
        if basis.dim() != x.dim() {
            return Err(Error::Shape { expected: x.dim(), got: basis.dim() });
        }
        let mut report = Self::base_report(x, kernel, FitMode::Diag);
        if !(report.support < report.q) {
            return Err(Error::InvalidArgument(format!(
                "diagonal pipeline needs support {} below the separation distance {}",
                report.support, report.q
            )));
        }
        let t = Instant::now();
        let p = basis.vandermonde(x)?;
        report.timings.assemble = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let qr = factor_least_squares(&p, RankPolicy::Fallback)?;
        report.timings.factor = t.elapsed().as_secs_f64();
        report.rank = qr.rank();
        report.retained_columns = retained_columns(&qr);
        report.cond = Some(1.0);
        Ok(Self { centers: x.clone(), kernel: *kernel, basis: basis.clone(), mode: FitMode::Diag, plan: Plan::Diag { qr }, report })
    }

    fn kernel(x: &PointSet, kernel: &WendlandKernel, basis: &TotalDegreeBasis, policy: RankPolicy) -> Result<Self> {
        if basis.dim() != x.dim() {
            return Err(Error::Shape { expected: x.dim(), got: basis.dim() });
        }
        let mut report = Self::base_report(x, kernel, FitMode::Hybrid);
        let t = Instant::now();
        let a = assemble_gramian(x, kernel);
        report.timings.assemble = t.elapsed().as_secs_f64();
        report.nnz_a = a.nnz();

        let t = Instant::now();
        let chol = cholesky(&a)?;
        let b = {
            let p = basis.vandermonde(x)?;
            chol.solve_lower(&p)?
        };
        let qr = factor_least_squares(&b, policy)?;
        report.timings.factor = t.elapsed().as_secs_f64();
        report.nnz_l = chol.nnz();
        report.rank = qr.rank();
        report.retained_columns = retained_columns(&qr);
        let mode = if qr.permutation().is_some() { FitMode::RankDeficient } else { FitMode::Hybrid };
        report.mode = mode;
        Ok(Self { centers: x.clone(), kernel: *kernel, basis: basis.clone(), mode, plan: Plan::Kernel { a, chol, qr }, report })
    }

    pub fn mode(&self) -> FitMode {
        self.mode
    }

    pub fn report(&self) -> &FitReport {
        &self.report
    }

    pub fn gramian(&self) -> Option<&SparseSymmetric> {
        match &self.plan {
            Plan::Kernel { a, .. } => Some(a),
            Plan::Diag { .. } => None,
        }
    }

    pub fn cholesky_factor(&self) -> Option<&CholeskyFactor> {
        match &self.plan {
            Plan::Kernel { chol, .. } => Some(chol),
            Plan::Diag { .. } => None,
        }
    }

    /// Condition estimate of the Gramian, reusing the retained factor.
    pub fn estimate_cond(&self) -> Result<CondEstimate> {
        match &self.plan {
            Plan::Kernel { a, chol, .. } => cond_estimate(a, Some(chol)),
            Plan::Diag { .. } => Ok(CondEstimate {
                value: 1.0,
                lambda_max: 1.0,
                lambda_min: 1.0,
                converged: true,
                method: CondMethod::Diagonal,
            }),
        }
    }

    /// Coefficients `(c, d)` for data `y`, followed by one step of
    /// iterative refinement on the interpolation conditions. The moment
    /// conditions hold by construction for every correction.
    pub fn coefficients(&self, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_inputs(&self.centers, y, &self.basis)?;
        let (mut c, mut d) = self.raw_coefficients(y)?;
        let fitted = self.fitted_values(&c, &d)?;
        let r: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        if r.iter().any(|v| *v != 0.0) {
            let (dc, dd) = self.raw_coefficients(&r)?;
            c.iter_mut().zip(&dc).for_each(|(a, b)| *a += b);
            d.iter_mut().zip(&dd).for_each(|(a, b)| *a += b);
        }
        Ok((c, d))
    }

    /// `A c + P d` at the centers.
    fn fitted_values(&self, c: &[f64], d: &[f64]) -> Result<Vec<f64>> {
        let kc = match &self.plan {
            Plan::Kernel { a, .. } => a.mul_vec(c),
            Plan::Diag { .. } => c.to_vec(),
        };
        let pd = self.basis.evaluate(&self.centers, d)?;
        Ok(kc.iter().zip(&pd).map(|(a, b)| a + b).collect())
    }

    fn raw_coefficients(&self, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        match &self.plan {
            Plan::Diag { qr } => {
                let d = qr.solve_least_squares(y)?;
                Ok((qr.residual(y)?, d))
            }
            Plan::Kernel { chol, qr, .. } => {
                let g = chol.solve_lower_vec(y)?;
                let d = qr.solve_least_squares(&g)?;
                let c = chol.solve_upper_vec(&qr.residual(&g)?)?;
                Ok((c, d))
            }
        }
    }

    /// Solves for `y` and packages the interpolant with its diagnostics.
    pub fn solve(&self, y: &[f64]) -> Result<UnifiedInterpolant> {
        let t = Instant::now();
        let (c, d) = self.coefficients(y)?;
        let solve_time = t.elapsed().as_secs_f64();

        let mut report = self.report.clone();
        report.timings.solve = solve_time;
        let fitted = self.fitted_values(&c, &d)?;
        report.interp_residual = fitted.iter().zip(y).map(|(s, y)| (s - y).abs()).fold(0.0, f64::max);
        report.moment_residual =
            self.basis.transpose_apply(&self.centers, &c)?.iter().fold(0.0, |m, v| f64::max(m, v.abs()));
        Ok(UnifiedInterpolant {
            centers: self.centers.clone(),
            kernel: self.kernel,
            basis: self.basis.clone(),
            c,
            d,
            report,
        })
    }
}

/// Diagonal-regime fit: `d` is the polynomial least-squares solution and `c`
/// its residual. Requires a support radius below the separation distance.
pub fn fit_diag(x: &PointSet, y: &[f64], kernel: &WendlandKernel, basis: &TotalDegreeBasis) -> Result<UnifiedInterpolant> {
    FitPlan::prepare(x, kernel, basis, FitMode::Diag)?.solve(y)
}

/// Sparse Cholesky of the Gramian followed by a QR-based whitened least
/// squares for `d`. Fails with [`Error::RankDeficient`] when the whitened
/// polynomial block loses rank.
pub fn fit_hybrid(x: &PointSet, y: &[f64], kernel: &WendlandKernel, basis: &TotalDegreeBasis) -> Result<UnifiedInterpolant> {
    FitPlan::prepare(x, kernel, basis, FitMode::Hybrid)?.solve(y)
}

/// Hybrid pipeline with a truncated column-pivoted QR; coefficients of
/// dropped columns are zero.
pub fn fit_rank_deficient(
    x: &PointSet,
    y: &[f64],
    kernel: &WendlandKernel,
    basis: &TotalDegreeBasis,
) -> Result<UnifiedInterpolant> {
    FitPlan::prepare(x, kernel, basis, FitMode::RankDeficient)?.solve(y)
}

/// Chooses the pipeline from the support radius and the rank of the
/// polynomial block.
pub fn fit_auto(x: &PointSet, y: &[f64], kernel: &WendlandKernel, basis: &TotalDegreeBasis) -> Result<UnifiedInterpolant> {
    FitPlan::auto(x, kernel, basis)?.solve(y)
}

/// Rank-aware polynomial least squares `min ‖P d − y‖`, with no kernel part.
pub fn polynomial_least_squares(x: &PointSet, y: &[f64], basis: &TotalDegreeBasis) -> Result<Vec<f64>> {
    check_inputs(x, y, basis)?;
    let p = basis.vandermonde(x)?;
    factor_least_squares(&p, RankPolicy::Fallback)?.solve_least_squares(y)
}

impl UnifiedInterpolant {
    /// Assembles a model from explicit parts.
    pub fn from_parts(
        centers: PointSet,
        kernel: WendlandKernel,
        basis: TotalDegreeBasis,
        c: Vec<f64>,
        d: Vec<f64>,
        report: FitReport,
    ) -> Result<Self> {
        if c.len() != centers.len() {
            return Err(Error::Shape { expected: centers.len(), got: c.len() });
        }
        if d.len() != basis.size() {
            return Err(Error::Shape { expected: basis.size(), got: d.len() });
        }
        if basis.dim() != centers.dim() {
            return Err(Error::Shape { expected: centers.dim(), got: basis.dim() });
        }
        Ok(Self { centers, kernel, basis, c, d, report })
    }

    /// Records a condition estimate in the report.
    pub fn with_cond(mut self, cond: f64) -> Self {
        self.report.cond = Some(cond);
        self
    }

    pub fn centers(&self) -> &PointSet {
        &self.centers
    }

    pub fn kernel(&self) -> &WendlandKernel {
        &self.kernel
    }

    pub fn basis(&self) -> &TotalDegreeBasis {
        &self.basis
    }

    pub fn kernel_coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn polynomial_coefficients(&self) -> &[f64] {
        &self.d
    }

    pub fn mode(&self) -> FitMode {
        self.report.mode
    }

    pub fn report(&self) -> &FitReport {
        &self.report
    }

    /// `s(x)` at every point: the sparse cross-Gramian times `c` plus the
    /// polynomial part.
    pub fn evaluate(&self, points: &PointSet) -> Result<Vec<f64>> {
        if points.dim() != self.centers.dim() {
            return Err(Error::Shape { expected: self.centers.dim(), got: points.dim() });
        }
        let mut out = self.basis.evaluate(points, &self.d)?;
        if self.c.iter().any(|&v| v != 0.0) {
            let ae = assemble_cross(points, &self.centers, &self.kernel)?;
            for (o, k) in out.iter_mut().zip(ae.mul_vec(&self.c)) {
                *o += k;
            }
        }
        Ok(out)
    }

    /// Writes the model as versioned text with round-trip precision.
    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        let r = &self.report;
        let dim = self.centers.dim();
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ");
        writeln!(out, "{MODEL_MAGIC} {MODEL_VERSION}")?;
        writeln!(out, "kernel {}", self.kernel.smoothness().id())?;
        writeln!(out, "eps {:.16e}", self.kernel.eps())?;
        writeln!(out, "degree {}", self.basis.degree())?;
        writeln!(out, "dim {dim}")?;
        writeln!(out, "domain {}", self.centers.tag())?;
        writeln!(out, "rescale_lo {}", join(self.basis.rescale().lo()))?;
        writeln!(out, "rescale_hi {}", join(self.basis.rescale().hi()))?;
        writeln!(out, "mode {}", r.mode)?;
        writeln!(out, "n {}", self.c.len())?;
        writeln!(out, "m {}", self.d.len())?;
        writeln!(out, "q {:.16e}", r.q)?;
        writeln!(out, "w {:.16e}", r.w)?;
        writeln!(out, "nnz_a {}", r.nnz_a)?;
        writeln!(out, "nnz_l {}", r.nnz_l)?;
        writeln!(out, "rank {}", r.rank)?;
        if let Some(cols) = &r.retained_columns {
            let s: Vec<String> = cols.iter().map(usize::to_string).collect();
            writeln!(out, "retained {}", s.join(" "))?;
        }
        if let Some(cond) = r.cond {
            writeln!(out, "cond {cond:.16e}")?;
        }
        writeln!(out, "interp_residual {:.16e}", r.interp_residual)?;
        writeln!(out, "moment_residual {:.16e}", r.moment_residual)?;
        writeln!(out, "centers")?;
        for p in self.centers.iter() {
            writeln!(out, "{}", join(p))?;
        }
        writeln!(out, "c")?;
        for v in &self.c {
            writeln!(out, "{v:.16e}")?;
        }
        writeln!(out, "d")?;
        for v in &self.d {
            writeln!(out, "{v:.16e}")?;
        }
        Ok(())
    }

    /// Reads a model written by [`UnifiedInterpolant::write_to`].
    pub fn read_from(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        let mut next = |what: &str| -> Result<String> {
            lines.next().transpose()?.ok_or_else(|| Error::Parse(format!("model file ended before {what}")))
        };
        let header = next("the header")?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(MODEL_MAGIC) {
            return Err(Error::Parse("not a model file".into()));
        }
        let version: u32 = parse_token(parts.next(), "version")?;
        if version != MODEL_VERSION {
            return Err(Error::Parse(format!("unsupported model version {version}")));
        }

        let mut fields = std::collections::HashMap::new();
        loop {
            let line = next("the centers block")?;
            let line = line.trim();
            if line == "centers" {
                break;
            }
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once(' ').unwrap_or((line, ""));
            fields.insert(k.to_string(), v.trim().to_string());
        }
        let field = |k: &str| fields.get(k).map(String::as_str).ok_or_else(|| Error::Parse(format!("missing `{k}`")));
        let floats = |s: &str| -> Result<Vec<f64>> { s.split_whitespace().map(|t| parse_token(Some(t), "number")).collect() };

        let smoothness: Smoothness = field("kernel")?.parse()?;
        let eps: f64 = parse_token(Some(field("eps")?), "eps")?;
        let degree: usize = parse_token(Some(field("degree")?), "degree")?;
        let dim: usize = parse_token(Some(field("dim")?), "dim")?;
        let tag: DomainTag = field("domain")?.parse()?;
        let rescale = Rescale::new(floats(field("rescale_lo")?)?, floats(field("rescale_hi")?)?)?;
        if rescale.dim() != dim {
            return Err(Error::Parse("rescale box dimension differs from `dim`".into()));
        }
        let n: usize = parse_token(Some(field("n")?), "n")?;
        let m: usize = parse_token(Some(field("m")?), "m")?;

        let mut coords = Vec::with_capacity(n * dim);
        for _ in 0..n {
            let row = floats(&next("all centers")?)?;
            if row.len() != dim {
                return Err(Error::Parse(format!("center has {} coordinates, expected {dim}", row.len())));
            }
            coords.extend(row);
        }
        let mut read_block = |name: &str, len: usize| -> Result<Vec<f64>> {
            if next(name)?.trim() != name {
                return Err(Error::Parse(format!("expected `{name}` block")));
            }
            (0..len).map(|_| next(name).and_then(|l| parse_token(Some(l.trim()), name))).collect()
        };
        let c = read_block("c", n)?;
        let d = read_block("d", m)?;

        let opt_f64 = |k: &str| fields.get(k).map(|v| parse_token::<f64>(Some(v), k)).transpose();
        let report = FitReport {
            mode: field("mode")?.parse()?,
            q: opt_f64("q")?.unwrap_or(f64::NAN),
            w: opt_f64("w")?.unwrap_or(f64::NAN),
            support: 1.0 / eps,
            nnz_a: fields.get("nnz_a").map(|v| parse_token(Some(v), "nnz_a")).transpose()?.unwrap_or(0),
            nnz_l: fields.get("nnz_l").map(|v| parse_token(Some(v), "nnz_l")).transpose()?.unwrap_or(0),
            rank: fields.get("rank").map(|v| parse_token(Some(v), "rank")).transpose()?.unwrap_or(m),
            retained_columns: fields
                .get("retained")
                .map(|v| v.split_whitespace().map(|t| parse_token(Some(t), "retained")).collect::<Result<Vec<usize>>>())
                .transpose()?,
            cond: opt_f64("cond")?,
            dense_gramian: opt_f64("w")?.is_some_and(|w| 1.0 / eps >= w),
            interp_residual: opt_f64("interp_residual")?.unwrap_or(f64::NAN),
            moment_residual: opt_f64("moment_residual")?.unwrap_or(f64::NAN),
            timings: Timings::default(),
        };
        let centers = PointSet::new(dim, coords, tag)?;
        let kernel = WendlandKernel::new(smoothness, eps)?;
        let basis = TotalDegreeBasis::new(degree, rescale)?;
        Self::from_parts(centers, kernel, basis, c, d, report)
    }
}

fn parse_token<T: FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?;
    tok.parse().map_err(|_| Error::Parse(format!("invalid {what} `{tok}`")))
}

/// Solves the dense block system `[[A, P], [Pᵀ, 0]] [c; d] = [y; 0]` by LU
/// with partial pivoting.
pub fn saddle_solve_dense(a: &Mat<f64>, p: &Mat<f64>, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, m) = (p.nrows(), p.ncols());
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Shape { expected: n, got: a.nrows() });
    }
    if y.len() != n {
        return Err(Error::Shape { expected: n, got: y.len() });
    }
    let size = n + m;
    let k = Mat::from_fn(size, size, |i, j| match (i < n, j < n) {
        (true, true) => a[(i, j)],
        (true, false) => p[(i, j - n)],
        (false, true) => p[(j, i - n)],
        (false, false) => 0.0,
    });
    let lu = k.partial_piv_lu();
    let u = lu.U();
    let big = (0..size).map(|i| u[(i, i)].abs()).fold(0.0, f64::max);
    if let Some(i) = (0..size).find(|&i| !(u[(i, i)].abs() > size as f64 * f64::EPSILON * big)) {
        return Err(Error::Oracle(format!("block matrix is numerically singular at pivot {i}")));
    }
    let rhs = Mat::from_fn(size, 1, |i, _| if i < n { y[i] } else { 0.0 });
    let sol = lu.solve(&rhs);
    if (0..size).any(|i| !sol[(i, 0)].is_finite()) {
        return Err(Error::Oracle("non-finite solution".into()));
    }
    Ok(((0..n).map(|i| sol[(i, 0)]).collect(), (n..size).map(|i| sol[(i, 0)]).collect()))
}

/// Dense reference solve of the interpolation conditions. The Gramian is
/// formed entry by entry from the kernel, independently of the sparse
/// assembly path.
pub fn direct_saddle_solve(
    x: &PointSet,
    y: &[f64],
    kernel: &WendlandKernel,
    basis: &TotalDegreeBasis,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_inputs(x, y, basis)?;
    if x.len() + basis.size() > DENSE_ORACLE_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "dense oracle limited to N + M <= {DENSE_ORACLE_LIMIT}, got {}",
            x.len() + basis.size()
        )));
    }
    let a = Mat::from_fn(x.len(), x.len(), |i, j| {
        let dist = x.point(i).iter().zip(x.point(j)).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        kernel.eval_unchecked(dist)
    });
    let p = basis.vandermonde(x)?;
    saddle_solve_dense(&a, &p, y)
}
