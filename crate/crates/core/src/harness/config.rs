use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernel::Smoothness;
use crate::nodes::{DomainTag, DEFAULT_Q_CLUSTER};
use crate::shape::ShapeStrategy;

/// Comparison modes of a convergence study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StudyMode {
    /// Automatic pipeline at the strategy's shape parameter.
    Unified,
    /// Diagonal-regime interpolant with a sub-separation support.
    Diag,
    /// Polynomial least squares only.
    Pls,
}

impl StudyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            StudyMode::Unified => "unified",
            StudyMode::Diag => "diag",
            StudyMode::Pls => "pls",
        }
    }
}

impl fmt::Display for StudyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StudyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "unified" => Ok(StudyMode::Unified),
            "diag" => Ok(StudyMode::Diag),
            "pls" => Ok(StudyMode::Pls),
            other => Err(Error::Parse(format!("unknown mode `{other}` (expected unified, diag or pls)"))),
        }
    }
}

/// Where the node sequence comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeSource {
    Chebyshev,
    Kte { alpha: f64 },
    /// Dart throwing on the interval, disk or ball.
    Dart { domain: DomainTag },
    Spiral,
    Hemisphere { q_cluster: f64 },
    Files { paths: Vec<PathBuf>, tag: DomainTag },
}

/// Where the evaluation points come from.
#[derive(Clone, Debug, PartialEq)]
pub enum EvalSource {
    /// Generated from the node source; `count` overrides the default size.
    Auto { count: Option<usize> },
    File(PathBuf),
}

/// A convergence study, read from flat `key = value` text.
///
/// Keys: `target`, `kernel`, `nodes`, `domain`, `alpha`, `qcluster`, `files`,
/// `n`, `degrees`, `degree_scale`, `strategy`, `cond`, `eps`, `eval`,
/// `eval_n`, `modes`, `seed`. Lists are comma separated; `#` starts a
/// comment.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub target: String,
    pub kernel: Smoothness,
    pub nodes: NodeSource,
    /// Requested node counts, coarse to fine.
    pub sizes: Vec<usize>,
    /// Explicit polynomial degrees, paired with `sizes` when both are given.
    pub degrees: Option<Vec<usize>>,
    pub degree_scale: Option<f64>,
    pub strategy: ShapeStrategy,
    pub eval: EvalSource,
    pub modes: Vec<StudyMode>,
    pub seed: u64,
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("`{key}`: invalid entry `{t}`"))))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Parse(format!("`{key}`: invalid value `{v}`")))
}

impl FromStr for StudyConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut kv: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            let k = k.trim().to_string();
            if kv.iter().any(|(seen, _)| *seen == k) {
                return Err(Error::Parse(format!("line {}: duplicate key `{k}`", lineno + 1)));
            }
            kv.push((k, v.trim().to_string()));
        }
        const KNOWN: [&str; 17] = [
            "target", "kernel", "nodes", "domain", "alpha", "qcluster", "files", "n", "degrees", "degree_scale",
            "strategy", "cond", "eps", "eval", "eval_n", "modes", "seed",
        ];
        if let Some((k, _)) = kv.iter().find(|(k, _)| !KNOWN.contains(&k.as_str())) {
            return Err(Error::Parse(format!("unknown key `{k}`")));
        }
        let get = |k: &str| kv.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let need = |k: &str| get(k).ok_or_else(|| Error::Parse(format!("missing required key `{k}`")));

        let target = need("target")?.to_string();
        let kernel = get("kernel").map(Smoothness::from_str).transpose()?.unwrap_or(Smoothness::C2);
        let nodes = match need("nodes")? {
            "chebyshev" => NodeSource::Chebyshev,
            "kte" => NodeSource::Kte { alpha: get("alpha").map(|v| parse_one("alpha", v)).transpose()?.unwrap_or(0.9) },
            "dart" => {
                let domain: DomainTag = need("domain")?.parse()?;
                if !matches!(domain, DomainTag::Interval | DomainTag::Disk | DomainTag::Ball) {
                    return Err(Error::Parse(format!("dart nodes need domain interval, disk or ball, got {domain}")));
                }
                NodeSource::Dart { domain }
            }
            "sphere" => NodeSource::Spiral,
            "hemisphere" => NodeSource::Hemisphere {
                q_cluster: get("qcluster").map(|v| parse_one("qcluster", v)).transpose()?.unwrap_or(DEFAULT_Q_CLUSTER),
            },
            "files" => NodeSource::Files {
                paths: need("files")?.split(',').map(|s| PathBuf::from(s.trim())).collect(),
                tag: get("domain").map(DomainTag::from_str).transpose()?.unwrap_or(DomainTag::Custom),
            },
            other => {
                return Err(Error::Parse(format!(
                    "unknown node source `{other}` (expected chebyshev, kte, dart, sphere, hemisphere or files)"
                )))
            }
        };
        let sizes: Vec<usize> = get("n").map(|v| parse_list("n", v)).transpose()?.unwrap_or_default();
        let degrees: Option<Vec<usize>> = get("degrees").map(|v| parse_list("degrees", v)).transpose()?;
        let degree_scale = get("degree_scale").map(|v| parse_one("degree_scale", v)).transpose()?;

        let strategy = match get("strategy").unwrap_or(if get("eps").is_some() { "eps" } else { "fc" }) {
            "eps" => {
                if get("cond").is_some() {
                    return Err(Error::Parse("`cond` and `eps` are mutually exclusive".into()));
                }
                ShapeStrategy::explicit(parse_one("eps", need("eps")?)?)?
            }
            kind @ ("fs" | "fc") => {
                if get("eps").is_some() {
                    return Err(Error::Parse("`cond` and `eps` are mutually exclusive".into()));
                }
                let k: f64 = parse_one("cond", need("cond")?)?;
                if kind == "fs" {
                    ShapeStrategy::fixed_support(k)?
                } else {
                    ShapeStrategy::fixed_condition(k)?
                }
            }
            other => return Err(Error::Parse(format!("unknown strategy `{other}` (expected fs, fc or eps)"))),
        };
        let eval = match get("eval") {
            None | Some("auto") => EvalSource::Auto { count: get("eval_n").map(|v| parse_one("eval_n", v)).transpose()? },
            Some(path) => EvalSource::File(PathBuf::from(path)),
        };
        let modes = match get("modes") {
            Some(v) => parse_list::<String>("modes", v)?.iter().map(|m| m.parse()).collect::<Result<Vec<_>>>()?,
            None => vec![StudyMode::Pls, StudyMode::Diag, StudyMode::Unified],
        };
        let seed = get("seed").map(|v| parse_one("seed", v)).transpose()?.unwrap_or(1);

        let cfg = StudyConfig { target, kernel, nodes, sizes, degrees, degree_scale, strategy, eval, modes, seed };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::Parse("`modes` is empty".into()));
        }
        let files = match &self.nodes {
            NodeSource::Files { paths, .. } => Some(paths.len()),
            _ => None,
        };
        let count = files.unwrap_or(self.sizes.len());
        match (&self.degrees, files) {
            (Some(d), _) if !self.sizes.is_empty() || files.is_some() => {
                if d.len() != count {
                    return Err(Error::Parse(format!("{} degrees given for {count} node sets", d.len())));
                }
            }
            (Some(d), None) => {
                if !matches!(self.nodes, NodeSource::Chebyshev | NodeSource::Kte { .. }) {
                    return Err(Error::Parse("`degrees` without `n` is only supported for 1D Chebyshev/KTE nodes".into()));
                }
                if d.is_empty() {
                    return Err(Error::Parse("`degrees` is empty".into()));
                }
            }
            (None, _) if count == 0 => return Err(Error::Parse("no node sets: give `n`, `degrees` or `files`".into())),
            _ => {}
        }
        Ok(())
    }

    /// Canonical `key=value` pairs, echoed into study output.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut out = vec![("target".to_string(), self.target.clone()), ("kernel".into(), self.kernel.id().into())];
        match &self.nodes {
            NodeSource::Chebyshev => out.push(("nodes".into(), "chebyshev".into())),
            NodeSource::Kte { alpha } => {
                out.push(("nodes".into(), "kte".into()));
                out.push(("alpha".into(), format!("{alpha}")));
            }
            NodeSource::Dart { domain } => {
                out.push(("nodes".into(), "dart".into()));
                out.push(("domain".into(), domain.to_string()));
            }
            NodeSource::Spiral => out.push(("nodes".into(), "sphere".into())),
            NodeSource::Hemisphere { q_cluster } => {
                out.push(("nodes".into(), "hemisphere".into()));
                out.push(("qcluster".into(), format!("{q_cluster}")));
            }
            NodeSource::Files { paths, tag } => {
                out.push(("nodes".into(), "files".into()));
                out.push(("domain".into(), tag.to_string()));
                let p: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
                out.push(("files".into(), p.join(",")));
            }
        }
        if !self.sizes.is_empty() {
            out.push(("n".into(), list(&self.sizes)));
        }
        if let Some(d) = &self.degrees {
            out.push(("degrees".into(), list(d)));
        }
        if let Some(s) = self.degree_scale {
            out.push(("degree_scale".into(), format!("{s}")));
        }
        match self.strategy {
            ShapeStrategy::FixedSupport { target_cond } => {
                out.push(("strategy".into(), "fs".into()));
                out.push(("cond".into(), format!("{target_cond:e}")));
            }
            ShapeStrategy::FixedCondition { target_cond } => {
                out.push(("strategy".into(), "fc".into()));
                out.push(("cond".into(), format!("{target_cond:e}")));
            }
            ShapeStrategy::ExplicitEps(eps) => {
                out.push(("strategy".into(), "eps".into()));
                out.push(("eps".into(), format!("{eps}")));
            }
        }
        match &self.eval {
            EvalSource::Auto { count } => {
                out.push(("eval".into(), "auto".into()));
                if let Some(n) = count {
                    out.push(("eval_n".into(), n.to_string()));
                }
            }
            EvalSource::File(p) => out.push(("eval".into(), p.display().to_string())),
        }
        let modes: Vec<&str> = self.modes.iter().map(|m| m.as_str()).collect();
        out.push(("modes".into(), modes.join(",")));
        out.push(("seed".into(), self.seed.to_string()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "# Runge study\n target = runge1\nkernel=c4\nnodes = chebyshev\ndegrees = 4, 8,16\nstrategy = fc\ncond = 1e4\nmodes = pls,diag\nseed = 7\n";
        let c: StudyConfig = text.parse().unwrap();
        assert_eq!(c.target, "runge1");
        assert_eq!(c.kernel, Smoothness::C4);
        assert_eq!(c.degrees, Some(vec![4, 8, 16]));
        assert_eq!(c.strategy, ShapeStrategy::FixedCondition { target_cond: 1e4 });
        assert_eq!(c.modes, vec![StudyMode::Pls, StudyMode::Diag]);
        assert_eq!(c.seed, 7);
        assert_eq!(c.eval, EvalSource::Auto { count: None });
    }

    #[test]
    fn canonical_pairs_reparse_identically() {
        let text = "target=radial32_2d\nnodes=dart\ndomain=disk\nn=100,200\nstrategy=eps\neps=10\neval_n=500\n";
        let c: StudyConfig = text.parse().unwrap();
        let echoed: String = c.to_pairs().iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        assert_eq!(echoed.parse::<StudyConfig>().unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "nodes=chebyshev\ndegrees=4\neps=1",
            "target=abs1\nnodes=chebyshev\ndegrees=4\neps=1\ncond=1e4",
            "target=abs1\nnodes=chebyshev\ndegrees=4\neps=1\nbogus=3",
            "target=abs1\nnodes=warp\ndegrees=4\neps=1",
            "target=abs1\nnodes=dart\ndomain=sphere\nn=10\neps=1",
            "target=abs1\nnodes=chebyshev\nn=9,17\ndegrees=4\neps=1",
            "target=abs1\nnodes=chebyshev\neps=1",
            "target=abs1\nnodes=chebyshev\ndegrees=4\nstrategy=fc\ncond=0.5",
            "target=abs1\nnodes=chebyshev\ndegrees=4\neps=1\nmodes=pls,fancy",
            "target=abs1\ntarget=abs1",
            "just text",
        ] {
            assert!(text.parse::<StudyConfig>().is_err(), "{text}");
        }
    }
}
