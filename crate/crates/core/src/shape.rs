//! Shape-parameter selection by rootfinding on the Gramian condition number.

use crate::error::{Error, Result};
use crate::kernel::{Smoothness, WendlandKernel};
use crate::nodes::PointSet;
use crate::sparse_linalg::{assemble_gramian, cholesky, cond_estimate};

const MAX_PROBES: usize = 40;
const LOG_TOL: f64 = 0.1;
const BRACKET_REL_TOL: f64 = 1e-3;

/// How shape parameters are assigned across a sequence of node sets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShapeStrategy {
    /// Tune on the largest set, reuse that ε everywhere.
    FixedSupport { target_cond: f64 },
    /// Tune separately on every set.
    FixedCondition { target_cond: f64 },
    ExplicitEps(f64),
}

impl ShapeStrategy {
    pub fn fixed_support(target_cond: f64) -> Result<Self> {
        check_target(target_cond)?;
        Ok(Self::FixedSupport { target_cond })
    }

    pub fn fixed_condition(target_cond: f64) -> Result<Self> {
        check_target(target_cond)?;
        Ok(Self::FixedCondition { target_cond })
    }

    pub fn explicit(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("shape parameter must be positive, got {eps}")));
        }
        Ok(Self::ExplicitEps(eps))
    }
}

fn check_target(k: f64) -> Result<()> {
    if !(k > 1.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("target condition number must exceed 1, got {k}")));
    }
    Ok(())
}

/// Result of a shape rootfind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsSolution {
    pub eps: f64,
    /// Estimated condition number at `eps`.
    pub cond: f64,
    pub probes: usize,
}

/// `log10 cond(A(eps))`, with `+inf` once the Gramian stops being
/// numerically positive definite.
fn log_cond(x: &PointSet, smoothness: Smoothness, eps: f64) -> Result<f64> {
    let kernel = WendlandKernel::new(smoothness, eps)?;
    let a = assemble_gramian(x, &kernel);
    if a.is_diagonal() {
        return Ok(0.0);
    }
    let factor = match cholesky(&a) {
        Ok(f) => f,
        Err(Error::NotPositiveDefinite { .. }) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    Ok(cond_estimate(&a, Some(&factor))?.value.log10())
}

struct Probe<'a> {
    x: &'a PointSet,
    smoothness: Smoothness,
    goal: f64,
    count: usize,
    highest: f64,
}

impl Probe<'_> {
    fn eval(&mut self, eps: f64) -> Result<f64> {
        self.count += 1;
        let lc = log_cond(self.x, self.smoothness, eps)?;
        if lc.is_finite() {
            self.highest = self.highest.max(lc);
        }
        Ok(lc - self.goal)
    }
}

/// Finds ε with `|log10 cond(A(ε)) − log10 K_t| ≤ 0.1` by bisection in
/// `log ε`, starting from `[ε_lo, 2/q]` and halving `ε_lo` until the
/// condition number exceeds the target.
pub fn solve_eps_for_cond(x: &PointSet, smoothness: Smoothness, target_cond: f64) -> Result<EpsSolution> {
    check_target(target_cond)?;
    if x.len() < 2 {
        return Err(Error::InvalidArgument("shape tuning needs at least two nodes".into()));
    }
    let q = x.separation();
    let goal = target_cond.log10();
    let mut probe = Probe { x, smoothness, goal, count: 0, highest: 0.0 };
    let unreachable = |highest: f64| Error::UnreachableCondition { target: target_cond, lo: 1.0, hi: 10f64.powf(highest) };

    let mut hi = 2.0 / q;
    let mut lo = hi / 2.0;
    let mut f_lo = probe.eval(lo)?;
    while f_lo <= 0.0 {
        if f_lo.abs() <= LOG_TOL {
            // support at or below q: the Gramian is the identity
            if 1.0 / lo <= q {
                return Err(unreachable(probe.highest));
            }
            let cond = 10f64.powf(f_lo + goal);
            return Ok(EpsSolution { eps: lo, cond, probes: probe.count });
        }
        if probe.count >= MAX_PROBES {
            return Err(unreachable(probe.highest));
        }
        hi = lo;
        lo /= 2.0;
        f_lo = probe.eval(lo)?;
    }
    if f_lo.is_finite() && f_lo <= LOG_TOL {
        return Ok(EpsSolution { eps: lo, cond: 10f64.powf(f_lo + goal), probes: probe.count });
    }

    loop {
        let mid = (lo * hi).sqrt();
        let fm = probe.eval(mid)?;
        let done = fm.abs() <= LOG_TOL || hi / lo - 1.0 <= BRACKET_REL_TOL;
        if done {
            if !fm.is_finite() || 1.0 / mid <= q {
                return Err(unreachable(probe.highest));
            }
            return Ok(EpsSolution { eps: mid, cond: 10f64.powf(fm + goal), probes: probe.count });
        }
        if probe.count >= MAX_PROBES {
            return Err(unreachable(probe.highest));
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Shape parameters for a coarse-to-fine node sequence.
pub fn apply_strategy(strategy: ShapeStrategy, node_sets: &[PointSet], smoothness: Smoothness) -> Result<Vec<f64>> {
    let tuned = |i: usize, k: f64| {
        solve_eps_for_cond(&node_sets[i], smoothness, k)
            .map(|s| s.eps)
            .map_err(|e| Error::Tuning { index: i, source: Box::new(e) })
    };
    match strategy {
        ShapeStrategy::ExplicitEps(eps) => Ok(vec![eps; node_sets.len()]),
        ShapeStrategy::FixedCondition { target_cond } => (0..node_sets.len()).map(|i| tuned(i, target_cond)).collect(),
        ShapeStrategy::FixedSupport { target_cond } => {
            let Some(finest) = (0..node_sets.len()).max_by_key(|&i| (node_sets[i].len(), i)) else {
                return Ok(Vec::new());
            };
            let eps = tuned(finest, target_cond)?;
            Ok(vec![eps; node_sets.len()])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodes::{chebyshev_lobatto, dart_spacing_for_count, dart_throw, DomainTag};
    use faer::Side;

    fn dense_log_cond(x: &PointSet, s: Smoothness, eps: f64) -> f64 {
        let k = WendlandKernel::new(s, eps).unwrap();
        let eig = assemble_gramian(x, &k).to_dense().self_adjoint_eigenvalues(Side::Lower).unwrap();
        let hi = eig.iter().copied().fold(0.0, f64::max);
        let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
        (hi / lo).log10()
    }

    #[test]
    fn chebyshev_target_1e4() {
        let x = chebyshev_lobatto(100).unwrap();
        let sol = solve_eps_for_cond(&x, Smoothness::C2, 1e4).unwrap();
        assert!(sol.probes <= MAX_PROBES);
        assert!((dense_log_cond(&x, Smoothness::C2, sol.eps) - 4.0).abs() <= 0.1);
        assert!(1.0 / sol.eps > x.separation());
    }

    #[test]
    fn near_one_target_is_unreachable() {
        let x = chebyshev_lobatto(30).unwrap();
        let err = solve_eps_for_cond(&x, Smoothness::C4, 1.05).unwrap_err();
        assert!(matches!(err, Error::UnreachableCondition { .. }));
        assert!(solve_eps_for_cond(&x, Smoothness::C4, 0.5).is_err());
    }

    #[test]
    fn condition_grows_as_eps_shrinks() {
        let h = dart_spacing_for_count(DomainTag::Disk, 150).unwrap();
        let sets = [chebyshev_lobatto(60).unwrap(), dart_throw(DomainTag::Disk, h, 3).unwrap()];
        for x in &sets {
            for s in Smoothness::ALL {
                let mut eps = 2.0 / x.separation();
                let mut prev = log_cond(x, s, eps).unwrap();
                for _ in 0..6 {
                    eps /= 2.0;
                    let next = log_cond(x, s, eps).unwrap();
                    assert!(next >= prev - 1e-9, "{s}: {next} < {prev}");
                    prev = next;
                }
            }
        }
    }

    #[test]
    fn strategies() {
        let sets: Vec<PointSet> = [9, 17, 33].iter().map(|&n| chebyshev_lobatto(n).unwrap()).collect();
        let fs = apply_strategy(ShapeStrategy::fixed_support(1e4).unwrap(), &sets, Smoothness::C2).unwrap();
        assert_eq!(fs.len(), 3);
        assert!(fs.iter().all(|&e| e == fs[0]));
        let direct = solve_eps_for_cond(&sets[2], Smoothness::C2, 1e4).unwrap();
        assert_eq!(fs[0], direct.eps);

        let fc = apply_strategy(ShapeStrategy::fixed_condition(1e4).unwrap(), &sets, Smoothness::C2).unwrap();
        for (x, &eps) in sets.iter().zip(&fc) {
            assert!((dense_log_cond(x, Smoothness::C2, eps) - 4.0).abs() <= 0.25);
        }
        let ex = apply_strategy(ShapeStrategy::explicit(10.0).unwrap(), &sets, Smoothness::C2).unwrap();
        assert_eq!(ex, vec![10.0; 3]);
        assert!(ShapeStrategy::fixed_condition(1.0).is_err());
        assert!(ShapeStrategy::explicit(-1.0).is_err());
    }

    #[test]
    fn failing_set_is_identified() {
        let sets = vec![chebyshev_lobatto(9).unwrap(), chebyshev_lobatto(17).unwrap()];
        let err = apply_strategy(ShapeStrategy::FixedCondition { target_cond: 1.01 }, &sets, Smoothness::C2).unwrap_err();
        assert!(matches!(err, Error::Tuning { index: 0, .. }));
    }
}
