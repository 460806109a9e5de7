use crate::error::{Error, Result};

/// A registered test function.
#[derive(Clone, Copy, Debug)]
pub struct TargetFunction {
    pub id: &'static str,
    pub dim: usize,
    pub eval: fn(&[f64]) -> f64,
    pub smoothness_note: &'static str,
}

impl TargetFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }
}

fn cubed_abs(t: f64) -> f64 {
    t * t * t.abs()
}

static REGISTRY: [TargetFunction; 7] = [
    TargetFunction { id: "abs1", dim: 1, eval: |x| x[0].abs(), smoothness_note: "C0, kink at the origin" },
    TargetFunction {
        id: "runge1",
        dim: 1,
        eval: |x| 1.0 / (1.0 + 25.0 * x[0] * x[0]),
        smoothness_note: "analytic, poles at ±i/5",
    },
    TargetFunction {
        id: "radial32_2d",
        dim: 2,
        eval: |x| (x[0] * x[0] + x[1] * x[1]).powf(1.5),
        smoothness_note: "C2, singular third derivative at the origin",
    },
    TargetFunction {
        id: "expridge_2d",
        dim: 2,
        eval: |x| ((x[0] + x[1]).powi(2) / 0.2).exp(),
        smoothness_note: "entire, steep along the diagonal",
    },
    TargetFunction {
        id: "radial32_3d",
        dim: 3,
        eval: |x| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).powf(1.5),
        smoothness_note: "C2, singular third derivative at the origin",
    },
    TargetFunction {
        id: "expridge_3d",
        dim: 3,
        eval: |x| ((x[0] + x[1] + x[2]).powi(2) / 0.8).exp(),
        smoothness_note: "entire, steep along the main diagonal",
    },
    TargetFunction {
        id: "c1_surface",
        dim: 3,
        eval: |x| cubed_abs(x[0]) + cubed_abs(x[1]) + cubed_abs(x[2]),
        smoothness_note: "C2, kinks in the third derivative on the coordinate planes",
    },
];

pub fn registry() -> &'static [TargetFunction] {
    &REGISTRY
}

pub fn registry_lookup(id: &str) -> Result<TargetFunction> {
    REGISTRY.iter().find(|t| t.id == id).copied().ok_or_else(|| Error::UnknownTarget(id.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        assert_eq!(registry_lookup("runge1").unwrap().eval(&[0.0]), 1.0);
        assert!((registry_lookup("radial32_2d").unwrap().eval(&[0.6, 0.8]) - 1.0).abs() < 1e-15);
        assert_eq!(registry_lookup("c1_surface").unwrap().eval(&[1.0, 0.0, 0.0]), 1.0);
        assert_eq!(registry_lookup("c1_surface").unwrap().eval(&[-1.0, 0.0, 0.0]), 1.0);
        assert_eq!(registry_lookup("abs1").unwrap().eval(&[-0.25]), 0.25);
        assert!((registry_lookup("expridge_2d").unwrap().eval(&[0.1, 0.1]) - 0.2f64.exp()).abs() < 1e-15);
        assert!((registry_lookup("expridge_3d").unwrap().eval(&[0.2, 0.2, 0.0]) - 0.2f64.exp()).abs() < 1e-15);
        assert!((registry_lookup("radial32_3d").unwrap().eval(&[0.0, 0.0, 2.0]) - 8.0).abs() < 1e-14);
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(registry_lookup("nope"), Err(Error::UnknownTarget(_))));
        assert_eq!(registry().len(), 7);
    }
}
