//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::harness::{read_values, registry_lookup, run_convergence, write_study_csv, write_values, StudyConfig};
use crate::kernel::{Smoothness, WendlandKernel};
use crate::nodes::{DomainTag, NodeRecipe, PointSet, DEFAULT_Q_CLUSTER};
use crate::polynomial::{build_basis, default_degree_scale, degree_from_points};
use crate::shape::solve_eps_for_cond;
use crate::solver::{FitMode, FitPlan, UnifiedInterpolant};

#[derive(Parser, Debug)]
#[command(name = "unified-interp", version, about = "Wendland kernel + polynomial interpolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NodeKind {
    Chebyshev,
    Kte,
    Equispaced,
    Dart,
    Sphere,
    Hemisphere,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Auto,
    Diag,
    Hybrid,
    RankDeficient,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Fs,
    Fc,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a node set.
    GenNodes {
        #[arg(long, value_enum)]
        kind: NodeKind,
        /// Number of nodes (target count for dart throwing).
        #[arg(long)]
        n: Option<usize>,
        /// Dart-throwing spacing; overrides `--n`.
        #[arg(long)]
        h: Option<f64>,
        /// Domain for dart throwing: interval, disk or ball.
        #[arg(long, default_value = "disk")]
        domain: DomainTag,
        #[arg(long, default_value_t = 0.9)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_Q_CLUSTER)]
        qcluster: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a model to data at a node set.
    #[command(group(ArgGroup::new("data").required(true).args(["values", "target"])))]
    #[command(group(ArgGroup::new("shape").required(true).args(["eps", "cond"])))]
    Fit {
        #[arg(long)]
        nodes: PathBuf,
        /// Domain tag of the node file.
        #[arg(long, default_value = "custom")]
        domain: DomainTag,
        #[arg(long)]
        values: Option<PathBuf>,
        /// Registered target function sampled at the nodes.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value = "c2")]
        kernel: Smoothness,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        degree_scale: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// Target condition number of the Gramian.
        #[arg(long)]
        cond: Option<f64>,
        #[arg(long, value_enum, requires = "cond")]
        strategy: Option<StrategyArg>,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a model at points.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a convergence study described by a config file.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print kernel values on a radius grid.
    KernelTable {
        /// c2, c4, c6, or all.
        #[arg(long, default_value = "all")]
        kernel: String,
        #[arg(long, default_value_t = 11)]
        points: usize,
    },
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::InvalidArgument(format!("cannot open {}: {e}", path.display())))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn gen_nodes(kind: NodeKind, n: Option<usize>, h: Option<f64>, domain: DomainTag, alpha: f64, q_cluster: f64, seed: u64) -> Result<PointSet> {
    let need_n = || n.ok_or_else(|| Error::InvalidArgument("--n is required for this node kind".into()));
    let recipe = match kind {
        NodeKind::Chebyshev => NodeRecipe::Chebyshev { n: need_n()? },
        NodeKind::Kte => NodeRecipe::Kte { n: need_n()?, alpha },
        NodeKind::Equispaced => NodeRecipe::Equispaced { n: need_n()? },
        NodeKind::Sphere => NodeRecipe::Spiral { n: need_n()? },
        NodeKind::Hemisphere => NodeRecipe::Hemisphere { n: need_n()?, q_cluster },
        NodeKind::Dart => match h {
            Some(h) => NodeRecipe::Dart { domain, h, seed },
            None => NodeRecipe::DartCount { domain, n: need_n()?, seed },
        },
    };
    recipe.generate()
}

#[allow(clippy::too_many_arguments)]
fn fit(
    nodes: &Path,
    domain: DomainTag,
    values: Option<&Path>,
    target: Option<&str>,
    kernel: Smoothness,
    degree: Option<usize>,
    degree_scale: Option<f64>,
    eps: Option<f64>,
    cond: Option<f64>,
    mode: ModeArg,
) -> Result<UnifiedInterpolant> {
    let x = PointSet::read_from(open(nodes)?, domain)?;
    let y = match (values, target) {
        (Some(p), _) => read_values(open(p)?)?,
        (None, Some(id)) => {
            let t = registry_lookup(id)?;
            if t.dim != x.dim() {
                return Err(Error::InvalidArgument(format!("target {id} is {}-dimensional, nodes are {}-dimensional", t.dim, x.dim())));
            }
            x.iter().map(|p| t.eval(p)).collect()
        }
        (None, None) => unreachable!("clap enforces one data source"),
    };
    let degree = degree.unwrap_or_else(|| {
        let scale = degree_scale.unwrap_or_else(|| default_degree_scale(x.dim(), x.tag().is_manifold()));
        degree_from_points(x.len(), x.dim(), scale)
    });
    let eps = match (eps, cond) {
        (Some(e), _) => e,
        (None, Some(k)) => solve_eps_for_cond(&x, kernel, k)?.eps,
        (None, None) => unreachable!("clap enforces one shape source"),
    };
    let k = WendlandKernel::new(kernel, eps)?;
    let basis = build_basis(&x, degree)?;
    let plan = match mode {
        ModeArg::Auto => FitPlan::auto(&x, &k, &basis)?,
        ModeArg::Diag => FitPlan::prepare(&x, &k, &basis, FitMode::Diag)?,
        ModeArg::Hybrid => FitPlan::prepare(&x, &k, &basis, FitMode::Hybrid)?,
        ModeArg::RankDeficient => FitPlan::prepare(&x, &k, &basis, FitMode::RankDeficient)?,
    };
    let cond = plan.estimate_cond()?.value;
    let model = plan.solve(&y)?.with_cond(cond);
    Ok(model)
}

fn kernel_table(which: &str, points: usize, mut out: impl Write) -> Result<()> {
    let kernels: Vec<Smoothness> = if which == "all" { Smoothness::ALL.to_vec() } else { vec![which.parse()?] };
    if points < 2 {
        return Err(Error::InvalidArgument("--points must be at least 2".into()));
    }
    let header: Vec<String> = kernels.iter().map(|k| k.id().to_string()).collect();
    writeln!(out, "r,{}", header.join(","))?;
    for i in 0..points {
        let r = i as f64 / (points - 1) as f64;
        let vals: Vec<String> = kernels.iter().map(|k| format!("{:.16e}", k.profile(r))).collect();
        writeln!(out, "{r},{}", vals.join(","))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenNodes { kind, n, h, domain, alpha, qcluster, seed, out } => {
            let p = gen_nodes(kind, n, h, domain, alpha, qcluster, seed)?;
            let mut w = output(out.as_deref())?;
            p.write_to(&mut w)?;
            w.flush()?;
        }
        Command::Fit { nodes, domain, values, target, kernel, degree, degree_scale, eps, cond, strategy: _, mode, out } => {
            let model = fit(&nodes, domain, values.as_deref(), target.as_deref(), kernel, degree, degree_scale, eps, cond, mode)?;
            let r = model.report();
            eprintln!(
                "fit: mode={} N={} M={} rank={} eps={:e} cond={:e} interp_residual={:e} moment_residual={:e}",
                r.mode,
                model.centers().len(),
                model.basis().size(),
                r.rank,
                model.kernel().eps(),
                r.cond.unwrap_or(f64::NAN),
                r.interp_residual,
                r.moment_residual
            );
            let mut w = output(Some(&out))?;
            model.write_to(&mut w)?;
            w.flush()?;
        }
        Command::Eval { model, points, out } => {
            let m = UnifiedInterpolant::read_from(open(&model)?)?;
            let p = PointSet::read_from(open(&points)?, DomainTag::Custom)?;
            let v = m.evaluate(&p)?;
            let mut w = output(out.as_deref())?;
            write_values(&mut w, &v)?;
            w.flush()?;
        }
        Command::Convergence { config, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", config.display())))?;
            let cfg: StudyConfig = text.parse()?;
            let rows = run_convergence(&cfg)?;
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            let mut w = output(out.as_deref())?;
            write_study_csv(&mut w, &cfg, &rows)?;
            w.flush()?;
            if failed > 0 {
                eprintln!("convergence: {failed} of {} rows failed (see err_flag)", rows.len());
            }
        }
        Command::KernelTable { kernel, points } => {
            let mut w = output(None)?;
            kernel_table(&kernel, points, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Parses arguments and runs a subcommand. Returns the process exit code:
/// 0 on success, 2 for usage errors, 1 for numerical failures.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            let kind = if e.is_usage() { "usage error" } else { "error" };
            eprintln!("{kind}: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_table_rows() {
        let mut buf = Vec::new();
        kernel_table("c2", 3, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "r,c2");
        assert!(lines[1].starts_with("0,1.0000000000000000e0"));
        assert!(lines[2].contains("0.5,1.875"));
        assert!(lines[3].ends_with(",0.0000000000000000e0"));
        assert!(kernel_table("c9", 3, Vec::new()).is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["unified-interp", "frobnicate"]), 2);
        assert_eq!(run(["unified-interp", "fit", "--nodes", "x"]), 2);
        assert_eq!(run(["unified-interp", "kernel-table", "--kernel", "c7"]), 2);
        assert_eq!(run(["unified-interp", "--help"]), 0);
    }
}
