//! Axis-wise monotonicity and convexity of coefficient (estimator) sequences.
//!
//! A w-increasing cloud has nondecreasing estimates at the knot averages, and
//! nondecreasing coefficients make the spline nondecreasing. Convexity uses the
//! divided differences `(c_i - c_{i-1}) / (t_{i+p} - t_i)`.

use serde::{Deserialize, Serialize};

use super::FitContext;
use crate::constants::SHAPE_TOL;
use crate::error::{Result, WqisaError};
use crate::spline::{KnotVector, TensorSplineSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum MonotoneClass {
    /// Nondecreasing; `constant` when also nonincreasing.
    Increasing {
        constant: bool,
    },
    Decreasing,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum ConvexClass {
    /// Divided differences nondecreasing; `affine` when also nonincreasing.
    Convex {
        affine: bool,
    },
    Concave,
    Neither,
}

fn scale(values: &[f64]) -> f64 {
    values.iter().fold(1.0f64, |m, v| m.max(v.abs())) * SHAPE_TOL
}

fn trend(values: &[f64]) -> (bool, bool) {
    let tol = scale(values);
    let up = values.windows(2).all(|w| w[1] - w[0] >= -tol);
    let down = values.windows(2).all(|w| w[1] - w[0] <= tol);
    (up, down)
}

/// Classifies one sequence of estimates.
pub fn classify_monotone(values: &[f64]) -> MonotoneClass {
    match trend(values) {
        (true, down) => MonotoneClass::Increasing { constant: down },
        (false, true) => MonotoneClass::Decreasing,
        (false, false) => MonotoneClass::Neither,
    }
}

fn divided_differences(values: &[f64], kv: &KnotVector) -> Result<Vec<f64>> {
    if values.len() != kv.dim() {
        return Err(WqisaError::LengthMismatch {
            left: values.len(),
            right: kv.dim(),
        });
    }
    let p = kv.degree();
    let t = kv.knots();
    let mut out: Vec<f64> = Vec::with_capacity(values.len().saturating_sub(1));
    for i in 1..values.len() {
        let h = t[i + p] - t[i];
        let delta = if h > 0.0 {
            (values[i] - values[i - 1]) / h
        } else {
            match out.last() {
                Some(&prev) => prev,
                None => {
                    return Err(WqisaError::InvalidKnots(
                        "first divided difference has a zero-width denominator".into(),
                    ))
                }
            }
        };
        out.push(delta);
    }
    Ok(out)
}

/// Classifies one sequence of estimates against the knot vector they live on.
pub fn classify_convexity(values: &[f64], kv: &KnotVector) -> Result<ConvexClass> {
    let deltas = divided_differences(values, kv)?;
    Ok(match trend(&deltas) {
        (true, flat) => ConvexClass::Convex { affine: flat },
        (false, true) => ConvexClass::Concave,
        (false, false) => ConvexClass::Neither,
    })
}

/// Every fiber of `coefficients` along `axis`.
fn fibers(coefficients: &[f64], space: &TensorSplineSpace, axis: usize) -> Result<Vec<Vec<f64>>> {
    if axis >= space.ndim() {
        return Err(WqisaError::IndexOutOfRange {
            index: axis,
            n: space.ndim(),
        });
    }
    if coefficients.len() != space.dim() {
        return Err(WqisaError::LengthMismatch {
            left: coefficients.len(),
            right: space.dim(),
        });
    }
    let shape = space.shape();
    let n = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = Vec::with_capacity(outer * inner);
    for o in 0..outer {
        for r in 0..inner {
            out.push(
                (0..n)
                    .map(|i| coefficients[(o * n + i) * inner + r])
                    .collect(),
            );
        }
    }
    Ok(out)
}

/// Monotonicity of every coefficient fiber along `axis`.
pub fn monotone_along(
    coefficients: &[f64],
    space: &TensorSplineSpace,
    axis: usize,
) -> Result<MonotoneClass> {
    let (mut up, mut down, mut flat) = (true, true, true);
    for fiber in fibers(coefficients, space, axis)? {
        match classify_monotone(&fiber) {
            MonotoneClass::Increasing { constant } => {
                flat &= constant;
                down &= constant;
            }
            MonotoneClass::Decreasing => {
                up = false;
                flat = false;
            }
            MonotoneClass::Neither => return Ok(MonotoneClass::Neither),
        }
    }
    Ok(if up {
        MonotoneClass::Increasing { constant: flat }
    } else if down {
        MonotoneClass::Decreasing
    } else {
        MonotoneClass::Neither
    })
}

/// Convexity of every coefficient fiber along `axis`.
pub fn convexity_along(
    coefficients: &[f64],
    space: &TensorSplineSpace,
    axis: usize,
) -> Result<ConvexClass> {
    let kv = &space.axes()[axis.min(space.ndim() - 1)];
    let (mut convex, mut concave, mut affine) = (true, true, true);
    for fiber in fibers(coefficients, space, axis)? {
        match classify_convexity(&fiber, kv)? {
            ConvexClass::Convex { affine: a } => {
                affine &= a;
                concave &= a;
            }
            ConvexClass::Concave => {
                convex = false;
                affine = false;
            }
            ConvexClass::Neither => return Ok(ConvexClass::Neither),
        }
    }
    Ok(if convex {
        ConvexClass::Convex { affine }
    } else if concave {
        ConvexClass::Concave
    } else {
        ConvexClass::Neither
    })
}

impl FitContext {
    /// Estimates at every knot-average site, in flat coefficient order.
    pub fn estimator_grid(&self) -> Result<Vec<f64>> {
        (0..self.space.dim())
            .map(|flat| {
                let set = self.coefficient_window(flat)?;
                Ok(self.weighted_mean(&set))
            })
            .collect()
    }

    /// w-monotonicity of the cloud along `axis`.
    pub fn w_monotone_check(&self, axis: usize) -> Result<MonotoneClass> {
        monotone_along(&self.estimator_grid()?, &self.space, axis)
    }

    /// w-convexity of the cloud along `axis`.
    pub fn w_convex_check(&self, axis: usize) -> Result<ConvexClass> {
        convexity_along(&self.estimator_grid()?, &self.space, axis)
    }
}
