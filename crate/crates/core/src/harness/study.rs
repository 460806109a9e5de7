use std::fs::File;
use std::io::{BufReader, Write};
use std::time::Instant;

use serde::Serialize;

use super::config::{EvalSource, NodeSource, StudyConfig, StudyMode};
use super::targets::{registry_lookup, TargetFunction};
use super::rel_l2_error;
use crate::error::{Error, Result};
use crate::kernel::{Smoothness, WendlandKernel};
use crate::nodes::{
    chebyshev_lobatto, dart_spacing_for_count, dart_throw, hemisphere_fibonacci, kte_map, sphere_spiral, DomainTag,
    PointSet, DEFAULT_Q_CLUSTER,
};
use crate::polynomial::{build_basis, default_degree_scale, degree_from_points};
use crate::shape::{solve_eps_for_cond, ShapeStrategy};
use crate::solver::{polynomial_least_squares, FitPlan};

/// Bumped whenever the CSV columns change.
pub const CSV_SCHEMA_VERSION: u32 = 1;

const EVAL_1D: usize = 1 << 14;
const EVAL_VOLUME: usize = 20_000;
const EVAL_MANIFOLD: usize = 15_000;
const EVAL_SEED_OFFSET: u64 = 0x9e37_79b9;

/// One node set of a study with its polynomial degree.
#[derive(Clone, Debug)]
pub struct NodeSet {
    pub points: PointSet,
    pub degree: usize,
}

/// One CSV row: a (node set, mode) pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub ell: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub eps: f64,
    pub mode: String,
    pub cond_est: f64,
    pub q: f64,
    pub w: f64,
    #[serde(rename = "nnz_A")]
    pub nnz_a: usize,
    pub rel_l2: f64,
    pub err_flag: String,
    pub t_assemble: f64,
    pub t_factor: f64,
    pub t_solve: f64,
    pub t_eval: f64,
}

impl ConvergenceRow {
    pub fn is_ok(&self) -> bool {
        self.err_flag == "ok"
    }
}

fn read_points(path: &std::path::Path, tag: DomainTag) -> Result<PointSet> {
    let file = File::open(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot open node file {}: {e}", path.display())))?;
    PointSet::read_from(BufReader::new(file), tag)
}

/// Resolves the node sequence and polynomial degrees of a study.
pub fn build_node_sets(config: &StudyConfig) -> Result<Vec<NodeSet>> {
    let explicit = |i: usize| config.degrees.as_ref().map(|d| d[i]);
    let by_formula = |p: &PointSet| {
        let manifold = p.tag().is_manifold();
        let scale = config.degree_scale.unwrap_or_else(|| default_degree_scale(p.dim(), manifold));
        degree_from_points(p.len(), p.dim(), scale)
    };
    let mut sets = Vec::new();
    match &config.nodes {
        NodeSource::Chebyshev | NodeSource::Kte { .. } => {
            let pairs: Vec<(usize, Option<usize>)> = if config.sizes.is_empty() {
                config.degrees.iter().flatten().map(|&l| (2 * l + 1, Some(l))).collect()
            } else {
                config.sizes.iter().enumerate().map(|(i, &n)| (n, explicit(i))).collect()
            };
            for (n, degree) in pairs {
                let mut points = chebyshev_lobatto(n)?;
                if let NodeSource::Kte { alpha } = config.nodes {
                    points = kte_map(&points, alpha)?;
                }
                let degree = degree.unwrap_or_else(|| match config.degree_scale {
                    Some(_) => by_formula(&points),
                    None => (n - 1) / 2,
                });
                sets.push(NodeSet { points, degree });
            }
        }
        NodeSource::Dart { domain } => {
            for (i, &n) in config.sizes.iter().enumerate() {
                let h = dart_spacing_for_count(*domain, n)?;
                let points = dart_throw(*domain, h, config.seed.wrapping_add(i as u64))?;
                let degree = explicit(i).unwrap_or_else(|| by_formula(&points));
                sets.push(NodeSet { points, degree });
            }
        }
        NodeSource::Spiral | NodeSource::Hemisphere { .. } => {
            for (i, &n) in config.sizes.iter().enumerate() {
                let points = match config.nodes {
                    NodeSource::Hemisphere { q_cluster } => hemisphere_fibonacci(n, q_cluster)?,
                    _ => sphere_spiral(n)?,
                };
                let degree = explicit(i).unwrap_or_else(|| by_formula(&points));
                sets.push(NodeSet { points, degree });
            }
        }
        NodeSource::Files { paths, tag } => {
            for (i, path) in paths.iter().enumerate() {
                let points = read_points(path, *tag)?;
                let degree = explicit(i).unwrap_or_else(|| by_formula(&points));
                sets.push(NodeSet { points, degree });
            }
        }
    }
    if let Some(w) = sets.windows(2).find(|w| w[1].points.len() <= w[0].points.len()) {
        return Err(Error::InvalidArgument(format!(
            "node sets must grow strictly: N = {} followed by N = {}",
            w[0].points.len(),
            w[1].points.len()
        )));
    }
    if let Some(s) = sets.first() {
        if sets.iter().any(|t| t.points.dim() != s.points.dim()) {
            return Err(Error::InvalidArgument("node sets have different dimensions".into()));
        }
    }
    Ok(sets)
}

fn equispaced_box(lo: f64, hi: f64, n: usize) -> Result<PointSet> {
    let coords = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    PointSet::new(1, coords, DomainTag::Custom)
}

/// Evaluation points for a study.
pub fn build_eval_set(config: &StudyConfig, sets: &[NodeSet]) -> Result<PointSet> {
    let count = match &config.eval {
        EvalSource::File(path) => return read_points(path, DomainTag::Custom),
        EvalSource::Auto { count } => *count,
    };
    let first = sets.first().ok_or_else(|| Error::InvalidArgument("study has no node sets".into()))?;
    let dim = first.points.dim();
    let eval_seed = config.seed.wrapping_add(EVAL_SEED_OFFSET);
    let volume = |domain: DomainTag| -> Result<PointSet> {
        let h = dart_spacing_for_count(domain, count.unwrap_or(EVAL_VOLUME))?;
        dart_throw(domain, h, eval_seed)
    };
    let tag = match &config.nodes {
        NodeSource::Chebyshev | NodeSource::Kte { .. } => DomainTag::Interval,
        NodeSource::Dart { domain } => *domain,
        NodeSource::Spiral => DomainTag::Sphere,
        NodeSource::Hemisphere { .. } => DomainTag::Hemisphere,
        NodeSource::Files { tag, .. } => *tag,
    };
    match tag {
        DomainTag::Disk | DomainTag::Ball => volume(tag),
        DomainTag::Sphere => sphere_spiral(count.unwrap_or(EVAL_MANIFOLD)),
        DomainTag::Hemisphere => {
            let q = match config.nodes {
                NodeSource::Hemisphere { q_cluster } => q_cluster,
                _ => DEFAULT_Q_CLUSTER,
            };
            hemisphere_fibonacci(count.unwrap_or(EVAL_MANIFOLD), q)
        }
        _ if dim == 1 => {
            let lo = sets.iter().map(|s| s.points.bounding_box().0[0]).fold(f64::INFINITY, f64::min);
            let hi = sets.iter().map(|s| s.points.bounding_box().1[0]).fold(f64::NEG_INFINITY, f64::max);
            equispaced_box(lo, hi, count.unwrap_or(EVAL_1D))
        }
        other => Err(Error::InvalidArgument(format!(
            "no default evaluation set for {dim}-dimensional {other} nodes; set `eval` to a point file"
        ))),
    }
}

/// Shape parameters per node set; a failure is recorded per set.
fn resolve_eps(strategy: ShapeStrategy, sets: &[NodeSet], kernel: Smoothness) -> Vec<Result<f64, String>> {
    let tune = |s: &NodeSet, k: f64| solve_eps_for_cond(&s.points, kernel, k).map(|e| e.eps).map_err(|e| e.to_string());
    match strategy {
        ShapeStrategy::ExplicitEps(eps) => vec![Ok(eps); sets.len()],
        ShapeStrategy::FixedCondition { target_cond } => sets.iter().map(|s| tune(s, target_cond)).collect(),
        ShapeStrategy::FixedSupport { target_cond } => {
            let Some(finest) = sets.iter().max_by_key(|s| s.points.len()) else {
                return Vec::new();
            };
            vec![tune(finest, target_cond); sets.len()]
        }
    }
}

struct Outcome {
    eps: f64,
    cond: f64,
    nnz_a: usize,
    values: Vec<f64>,
    t_assemble: f64,
    t_factor: f64,
    t_solve: f64,
    t_eval: f64,
}

fn run_mode(
    mode: StudyMode,
    set: &NodeSet,
    y: &[f64],
    eval: &PointSet,
    kernel: Smoothness,
    strategy: ShapeStrategy,
    eps: &Result<f64, String>,
) -> Result<Outcome> {
    let x = &set.points;
    let basis = build_basis(x, set.degree)?;
    match mode {
        StudyMode::Pls => {
            let t = Instant::now();
            let d = polynomial_least_squares(x, y, &basis)?;
            let t_factor = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let values = basis.evaluate(eval, &d)?;
            Ok(Outcome {
                eps: f64::NAN,
                cond: f64::NAN,
                nnz_a: 0,
                values,
                t_assemble: 0.0,
                t_factor,
                t_solve: 0.0,
                t_eval: t.elapsed().as_secs_f64(),
            })
        }
        StudyMode::Diag | StudyMode::Unified => {
            let eps = if mode == StudyMode::Diag {
                // reuse an explicit ε already in the diagonal regime, else 2/q
                match strategy {
                    ShapeStrategy::ExplicitEps(e) if 1.0 / e < x.separation() => e,
                    _ => 2.0 / x.separation(),
                }
            } else {
                eps.clone().map_err(Error::InvalidArgument)?
            };
            let k = WendlandKernel::new(kernel, eps)?;
            let plan = if mode == StudyMode::Diag {
                FitPlan::prepare(x, &k, &basis, crate::solver::FitMode::Diag)?
            } else {
                FitPlan::auto(x, &k, &basis)?
            };
            let model = plan.solve(y)?;
            let cond = plan.estimate_cond()?.value;
            let t = Instant::now();
            let values = model.evaluate(eval)?;
            let r = model.report();
            Ok(Outcome {
                eps,
                cond,
                nnz_a: r.nnz_a,
                values,
                t_assemble: r.timings.assemble,
                t_factor: r.timings.factor,
                t_solve: r.timings.solve,
                t_eval: t.elapsed().as_secs_f64(),
            })
        }
    }
}

fn sample(target: &TargetFunction, points: &PointSet) -> Vec<f64> {
    points.iter().map(|p| target.eval(p)).collect()
}

/// Runs every (node set × mode) pair of a study. Failures are recorded in
/// the row's `err_flag` and the study continues.
pub fn run_convergence(config: &StudyConfig) -> Result<Vec<ConvergenceRow>> {
    config.validate()?;
    let target = registry_lookup(&config.target)?;
    let sets = build_node_sets(config)?;
    if let Some(s) = sets.first() {
        if s.points.dim() != target.dim {
            return Err(Error::InvalidArgument(format!(
                "target {} is {}-dimensional but the nodes are {}-dimensional",
                target.id,
                target.dim,
                s.points.dim()
            )));
        }
    }
    let eval = build_eval_set(config, &sets)?;
    if eval.dim() != target.dim {
        return Err(Error::Shape { expected: target.dim, got: eval.dim() });
    }
    let f_eval = sample(&target, &eval);
    let needs_eps = config.modes.contains(&StudyMode::Unified);
    let eps = if needs_eps { resolve_eps(config.strategy, &sets, config.kernel) } else { vec![Ok(f64::NAN); sets.len()] };

    let mut rows = Vec::new();
    for (set, eps) in sets.iter().zip(&eps) {
        let y = sample(&target, &set.points);
        let (q, w) = (set.points.separation(), set.points.diameter());
        let m = build_basis(&set.points, set.degree)?.size();
        for &mode in &config.modes {
            let mut row = ConvergenceRow {
                n: set.points.len(),
                ell: set.degree,
                m,
                eps: f64::NAN,
                mode: mode.to_string(),
                cond_est: f64::NAN,
                q,
                w,
                nnz_a: 0,
                rel_l2: f64::NAN,
                err_flag: "ok".into(),
                t_assemble: 0.0,
                t_factor: 0.0,
                t_solve: 0.0,
                t_eval: 0.0,
            };
            match run_mode(mode, set, &y, &eval, config.kernel, config.strategy, eps)
                .and_then(|o| rel_l2_error(&o.values, &f_eval).map(|e| (o, e)))
            {
                Ok((o, err)) => {
                    row.eps = o.eps;
                    row.cond_est = o.cond;
                    row.nnz_a = o.nnz_a;
                    row.rel_l2 = err;
                    row.t_assemble = o.t_assemble;
                    row.t_factor = o.t_factor;
                    row.t_solve = o.t_solve;
                    row.t_eval = o.t_eval;
                }
                Err(e) => row.err_flag = e.to_string().replace(['\n', '\r'], " "),
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Writes the study as CSV preceded by `#` lines echoing the configuration.
pub fn write_study_csv(mut out: impl Write, config: &StudyConfig, rows: &[ConvergenceRow]) -> Result<()> {
    writeln!(out, "# unified-interp convergence study, schema v{CSV_SCHEMA_VERSION}")?;
    for (k, v) in config.to_pairs() {
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "N", "ell", "M", "eps", "mode", "cond_est", "q", "w", "nnz_A", "rel_l2", "err_flag", "t_assemble",
            "t_factor", "t_solve", "t_eval",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> StudyConfig {
        text.parse().unwrap()
    }

    #[test]
    fn one_dimensional_schedule_defaults() {
        let c = cfg("target=runge1\nnodes=chebyshev\ndegrees=4,8\neps=100\n");
        let sets = build_node_sets(&c).unwrap();
        assert_eq!(sets.iter().map(|s| (s.points.len(), s.degree)).collect::<Vec<_>>(), vec![(9, 4), (17, 8)]);
        let e = build_eval_set(&c, &sets).unwrap();
        assert_eq!(e.len(), 1 << 14);
        assert_eq!(e.point(0)[0], -1.0);
        assert_eq!(e.point(e.len() - 1)[0], 1.0);
        let c2 = cfg("target=runge1\nnodes=chebyshev\nn=9,17\neps=100\n");
        let sets2 = build_node_sets(&c2).unwrap();
        assert_eq!(sets2[1].degree, 8);
    }

    #[test]
    fn decreasing_sizes_rejected() {
        let c = cfg("target=runge1\nnodes=chebyshev\nn=17,9\neps=100\n");
        assert!(build_node_sets(&c).is_err());
    }

    #[test]
    fn study_rows_and_csv() {
        let c = cfg("target=runge1\nnodes=chebyshev\ndegrees=4\nstrategy=eps\neps=100\nmodes=pls,diag,unified\neval_n=101\n");
        let rows = run_convergence(&c).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(ConvergenceRow::is_ok));
        assert_eq!(rows[0].t_assemble, 0.0);
        assert_eq!(rows[0].nnz_a, 0);
        let mut buf = Vec::new();
        write_study_csv(&mut buf, &c, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "N,ell,M,eps,mode,cond_est,q,w,nnz_A,rel_l2,err_flag,t_assemble,t_factor,t_solve,t_eval");
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
        assert!(text.contains("# target=runge1"));
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        // a target below the diagonal regime cannot be reached
        let c = cfg("target=abs1\nnodes=chebyshev\ndegrees=2,4\nstrategy=fc\ncond=1.01\nmodes=unified,pls\neval_n=50\n");
        let rows = run_convergence(&c).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(!rows[0].is_ok() && rows[0].rel_l2.is_nan());
        assert!(rows[1].is_ok());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let c = cfg("target=radial32_2d\nnodes=chebyshev\ndegrees=2\neps=1\n");
        assert!(run_convergence(&c).is_err());
    }
}
