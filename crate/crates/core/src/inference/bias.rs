use serde::{Deserialize, Serialize};

use crate::error::{Result, WqisaError};
use crate::fit::FitContext;

/// Bias diagnostics at one point, given the true function values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasBounds {
    /// `E[f(u)]`: the spline of expected coefficients.
    pub expected_fit: f64,
    /// True value at `u`.
    pub truth: f64,
    /// Smallest true value among the points behind the cell of `u`.
    pub alpha: f64,
    /// Largest true value among the points behind the cell of `u`.
    pub beta: f64,
    pub squared_bias: f64,
    /// `(alpha - f)^2` when `E[f] <= f`, otherwise `(beta - f)^2`.
    pub squared_bias_bound: f64,
}

/// Bias bounds at `u` for noise-free responses `true_values` (one per cloud
/// row) and the true value `truth_at_u`.
pub fn bias_bounds_at(
    ctx: &FitContext,
    true_values: &[f64],
    truth_at_u: f64,
    u: &[f64],
) -> Result<BiasBounds> {
    if true_values.len() != ctx.cloud_len() {
        return Err(WqisaError::LengthMismatch {
            left: true_values.len(),
            right: ctx.cloud_len(),
        });
    }
    let space = ctx.space();
    let cell = space.cell_of(u)?;
    let truth: Vec<f64> = (0..ctx.neighbors().len())
        .map(|i| true_values[ctx.original_index(i)])
        .collect();

    let row = space.basis_row(u)?;
    let mut expected_fit = 0.0;
    let mut failure = None;
    row.for_each(space, |flat, b| {
        if failure.is_some() {
            return;
        }
        match ctx.coefficient_window(flat) {
            Ok(set) => expected_fit += crate::fit::weighted_mean_of(&truth, &set) * b,
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let (alpha, beta) = ctx
        .cell_points(&cell)?
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
            (lo.min(truth[i]), hi.max(truth[i]))
        });
    let bias = expected_fit - truth_at_u;
    let squared_bias_bound = if expected_fit <= truth_at_u {
        (alpha - truth_at_u).powi(2)
    } else {
        (beta - truth_at_u).powi(2)
    };
    Ok(BiasBounds {
        expected_fit,
        truth: truth_at_u,
        alpha,
        beta,
        squared_bias: bias * bias,
        squared_bias_bound,
    })
}
