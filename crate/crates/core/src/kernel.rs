//! Compactly supported Wendland kernels.
//!
//! Only the family that is positive definite on R³ is provided. Each profile
//! is normalized so that `φ(0) = 1`, which makes the Gramian the identity
//! once the support radius drops below the separation distance.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Smoothness order of a Wendland kernel, `C^{2n}` with `n ∈ {1, 2, 3}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Smoothness {
    C2,
    C4,
    C6,
}

impl Smoothness {
    pub const ALL: [Smoothness; 3] = [Smoothness::C2, Smoothness::C4, Smoothness::C6];

    /// The order `n` of the kernel (1, 2 or 3).
    pub fn order(self) -> u32 {
        match self {
            Smoothness::C2 => 1,
            Smoothness::C4 => 2,
            Smoothness::C6 => 3,
        }
    }

    pub fn from_order(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Smoothness::C2),
            2 => Ok(Smoothness::C4),
            3 => Ok(Smoothness::C6),
            other => Err(Error::InvalidArgument(format!(
                "kernel order must be 1, 2 or 3, got {other}"
            ))),
        }
    }

    /// Exponent of the truncated power `(1-r)^m` the kernel is built from,
    /// `m = floor(3/2) + n + 1`.
    pub fn power(self) -> u32 {
        self.order() + 2
    }

    pub fn id(self) -> &'static str {
        match self {
            Smoothness::C2 => "c2",
            Smoothness::C4 => "c4",
            Smoothness::C6 => "c6",
        }
    }

    /// Closed-form profile at a scaled radius `r ≥ 0`.
    #[inline]
    pub fn profile(self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        let t = 1.0 - r;
        match self {
            Smoothness::C2 => {
                let t2 = t * t;
                t2 * t2 * (4.0 * r + 1.0)
            }
            Smoothness::C4 => {
                let t2 = t * t;
                t2 * t2 * t2 * ((35.0 * r + 18.0) * r + 3.0) / 3.0
            }
            Smoothness::C6 => {
                let t2 = t * t;
                let t4 = t2 * t2;
                t4 * t4 * (((32.0 * r + 25.0) * r + 8.0) * r + 1.0)
            }
        }
    }
}

impl fmt::Display for Smoothness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Smoothness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "c2" => Ok(Smoothness::C2),
            "c4" => Ok(Smoothness::C4),
            "c6" => Ok(Smoothness::C6),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel `{other}` (expected c2, c4 or c6)"
            ))),
        }
    }
}

/// A Wendland kernel with a shape parameter.
///
/// The shape parameter is the reciprocal of the support radius, so the
/// kernel evaluated between two points is `φ(eps · ‖x − y‖)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WendlandKernel {
    smoothness: Smoothness,
    eps: f64,
}

impl WendlandKernel {
    pub fn new(smoothness: Smoothness, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "shape parameter must be positive and finite, got {eps}"
            )));
        }
        Ok(Self { smoothness, eps })
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn support_radius(&self) -> f64 {
        1.0 / self.eps
    }

    /// Kernel value at a nonnegative distance.
    pub fn eval(&self, dist: f64) -> Result<f64> {
        if !(dist >= 0.0) {
            return Err(Error::Domain(format!(
                "kernel distance must be nonnegative, got {dist}"
            )));
        }
        Ok(self.eval_unchecked(dist))
    }

    /// Kernel value without the sign check; `dist` must be nonnegative.
    #[inline]
    pub(crate) fn eval_unchecked(&self, dist: f64) -> f64 {
        self.smoothness.profile(self.eps * dist)
    }
}

const GAUSS_POINTS: usize = 16;

/// Gauss–Legendre nodes and weights on [-1, 1] via Newton iteration on the
/// Legendre polynomial of degree `n`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..n {
                let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gauss_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn adaptive_gauss(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    rule: &(Vec<f64>, Vec<f64>),
) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let left = gauss_panel(f, a, mid, rule);
    let right = gauss_panel(f, mid, b, rule);
    if (left + right - whole).abs() <= tol {
        return Ok(left + right);
    }
    if depth == 0 {
        return Err(Error::Quadrature { lo: a, hi: b });
    }
    Ok(adaptive_gauss(f, a, mid, left, 0.5 * tol, depth - 1, rule)?
        + adaptive_gauss(f, mid, b, right, 0.5 * tol, depth - 1, rule)?)
}

fn wendland_integral(m: u32, n: u32, r: f64, rule: &(Vec<f64>, Vec<f64>)) -> Result<f64> {
    let integrand = |s: f64| s * (1.0 - s).powi(m as i32) * (s * s - r * r).powi(n as i32 - 1);
    let whole = gauss_panel(&integrand, r, 1.0, rule);
    adaptive_gauss(&integrand, r, 1.0, whole, 1e-14, 30, rule)
}

/// Quadrature reference for the Wendland profile `φ_{m,n}(r)`, normalized so
/// the value at the origin is 1. Intended as a test oracle for the closed
/// forms used by [`WendlandKernel::eval`].
pub fn reference_eval(m: u32, n: u32, r: f64) -> Result<f64> {
    if m < 1 || n < 1 {
        return Err(Error::InvalidArgument(format!(
            "reference profile needs m, n >= 1 (got m={m}, n={n})"
        )));
    }
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
    }
    if r >= 1.0 {
        return Ok(0.0);
    }
    let rule = gauss_legendre(GAUSS_POINTS);
    let at_origin = wendland_integral(m, n, 0.0, &rule)?;
    Ok(wendland_integral(m, n, r, &rule)? / at_origin)
}
