//! Regression-view diagnostics: estimator covariance, pointwise variance and
//! standard-error bands, bias bounds and K-fold cross-validation.

mod bias;
mod covariance;
mod cv;
mod quantile;

pub use bias::{bias_bounds_at, BiasBounds};
pub use covariance::CoefficientCovariance;
pub use cv::{fold_assignment, kfold_cv, scores_for_assignments, CvParameter, CvResult, CvSetup};
pub use quantile::normal_quantile;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Result, WqisaError};
use crate::fit::{FitContext, FitPolicy, WqisaModel};
use crate::spline::TensorSplineSpace;
use crate::weights::WeightSpec;

/// I.i.d. zero-mean residuals with standard deviation `sigma_eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_eps: f64,
}

impl NoiseModel {
    pub fn new(sigma_eps: f64) -> Result<Self> {
        if !(sigma_eps >= 0.0) || !sigma_eps.is_finite() {
            return Err(WqisaError::InvalidParameter(format!(
                "sigma_eps must be finite and nonnegative, got {sigma_eps}"
            )));
        }
        Ok(NoiseModel { sigma_eps })
    }
}

/// Covariance of the coefficient estimators for a cloud, space and weight.
pub fn coefficient_covariance(
    cloud: &PointCloud,
    space: &TensorSplineSpace,
    weight: &WeightSpec,
    policy: FitPolicy,
    noise: NoiseModel,
) -> Result<CoefficientCovariance> {
    let ctx = FitContext::new(cloud, space, weight, policy)?;
    CoefficientCovariance::new(&ctx, noise.sigma_eps)
}

/// `Var[f(u)] = sum_i sum_j Cov(c_i, c_j) B_i(u) B_j(u)` over the active block.
pub fn variance_at(
    model: &WqisaModel,
    covariance: &CoefficientCovariance,
    u: &[f64],
) -> Result<f64> {
    let space = model.space();
    if covariance.dim() != space.dim() {
        return Err(WqisaError::DimensionMismatch {
            expected: space.dim(),
            found: covariance.dim(),
        });
    }
    let row = space.basis_row(u)?;
    let mut active = Vec::with_capacity(row.values.len());
    row.for_each(space, |flat, b| {
        if b != 0.0 {
            active.push((flat, b));
        }
    });
    let mut var = 0.0;
    for &(i, bi) in &active {
        for &(j, bj) in &active {
            var += covariance.get(i, j) * bi * bj;
        }
    }
    Ok(var.max(0.0))
}

/// Two-sided band `f(u) -+ z * sqrt(Var)` with `z` the `1 - alpha/2` normal
/// quantile, i.e. nominal coverage `1 - alpha`.
pub fn se_band(
    model: &WqisaModel,
    covariance: &CoefficientCovariance,
    u: &[f64],
    alpha: f64,
) -> Result<(f64, f64)> {
    let z = band_z(alpha)?;
    let f = model.evaluate(u)?;
    let half = z * variance_at(model, covariance, u)?.sqrt();
    Ok((f - half, f + half))
}

/// The band multiplier for significance `alpha`.
pub fn band_z(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(WqisaError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    normal_quantile(1.0 - alpha / 2.0)
}

/// Plug-in noise level `sqrt(mean squared residual)` of a fitted model.
///
/// Biased low for flexible fits; intended only when the noise is unknown.
pub fn residual_sigma_estimate(model: &WqisaModel, cloud: &PointCloud) -> Result<f64> {
    let mut sse = 0.0;
    for i in 0..cloud.len() {
        let r = cloud.response(i) - model.evaluate_clamped(cloud.point(i))?;
        sse += r * r;
    }
    Ok((sse / cloud.len() as f64).sqrt())
}
