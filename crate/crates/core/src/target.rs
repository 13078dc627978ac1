//! Target functions a swarm can be programmed to compute.
//!
//! Anything implementing [`TargetFn`] can be programmed, including plain
//! closures over `&[f64]`. [`FunctionSpec`] is the small named catalog that
//! scenario files refer to.

use serde::{Deserialize, Serialize};

/// A real-valued function of the input vector.
///
/// A non-finite return value is treated as an evaluation failure by callers.
pub trait TargetFn {
    fn eval(&self, u: &[f64]) -> f64;
}

impl<F> TargetFn for F
where
    F: Fn(&[f64]) -> f64,
{
    fn eval(&self, u: &[f64]) -> f64 {
        self(u)
    }
}

fn default_amplitude() -> f64 {
    1.0
}

/// Built-in function catalog. Each one-variable entry reads input component
/// `var` (zero-based); `sum` combines entries over several inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `coeffs[0] + coeffs[1]·u + coeffs[2]·u² + …`
    Polynomial {
        coeffs: Vec<f64>,
        #[serde(default)]
        var: usize,
    },
    /// `amplitude · sin(a·u)`
    Sin {
        a: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default)]
        var: usize,
    },
    /// `amplitude · exp(a·u)`
    Exp {
        a: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default)]
        var: usize,
    },
    /// Piecewise-linear interpolation through `(x, y)` points; NaN outside
    /// the tabulated range.
    Tabulated {
        points: Vec<[f64; 2]>,
        #[serde(default)]
        var: usize,
    },
    Sum {
        terms: Vec<FunctionSpec>,
    },
}

impl FunctionSpec {
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self::Polynomial { coeffs, var: 0 }
    }

    pub fn sin(a: f64) -> Self {
        Self::Sin {
            a,
            amplitude: 1.0,
            var: 0,
        }
    }

    pub fn exp(a: f64) -> Self {
        Self::Exp {
            a,
            amplitude: 1.0,
            var: 0,
        }
    }

    /// Checks parameters against an input dimension count. Returns a
    /// human-readable message on the first problem found.
    pub fn validate(&self, dims: usize) -> Result<(), String> {
        let check_var = |var: usize| {
            if var < dims {
                Ok(())
            } else {
                Err(format!("var {var} out of range for {dims} input(s)"))
            }
        };
        match self {
            Self::Polynomial { coeffs, var } => {
                if coeffs.is_empty() {
                    return Err("polynomial needs at least one coefficient".into());
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err("polynomial coefficients must be finite".into());
                }
                check_var(*var)
            }
            Self::Sin { a, amplitude, var } | Self::Exp { a, amplitude, var } => {
                if !a.is_finite() || !amplitude.is_finite() {
                    return Err("parameters must be finite".into());
                }
                check_var(*var)
            }
            Self::Tabulated { points, var } => {
                if points.len() < 2 {
                    return Err("tabulated function needs at least two points".into());
                }
                if points.iter().flatten().any(|p| !p.is_finite()) {
                    return Err("tabulated points must be finite".into());
                }
                if points.windows(2).any(|w| w[0][0] >= w[1][0]) {
                    return Err("tabulated x values must be strictly increasing".into());
                }
                check_var(*var)
            }
            Self::Sum { terms } => {
                if terms.is_empty() {
                    return Err("sum needs at least one term".into());
                }
                terms.iter().try_for_each(|t| t.validate(dims))
            }
        }
    }
}

fn component(u: &[f64], var: usize) -> f64 {
    u.get(var).copied().unwrap_or(f64::NAN)
}

fn interpolate(points: &[[f64; 2]], x: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if !(first[0]..=last[0]).contains(&x) {
        return f64::NAN;
    }
    let j = points.partition_point(|p| p[0] <= x);
    if j == points.len() {
        return last[1];
    }
    let (lo, hi) = (points[j - 1], points[j]);
    let s = (x - lo[0]) / (hi[0] - lo[0]);
    lo[1] + s * (hi[1] - lo[1])
}

impl TargetFn for FunctionSpec {
    fn eval(&self, u: &[f64]) -> f64 {
        match self {
            Self::Polynomial { coeffs, var } => {
                let x = component(u, *var);
                coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            Self::Sin { a, amplitude, var } => amplitude * (a * component(u, *var)).sin(),
            Self::Exp { a, amplitude, var } => amplitude * (a * component(u, *var)).exp(),
            Self::Tabulated { points, var } => interpolate(points, component(u, *var)),
            Self::Sum { terms } => terms.iter().map(|t| t.eval(u)).sum(),
        }
    }
}
