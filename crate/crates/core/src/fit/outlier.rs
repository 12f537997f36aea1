use super::{FitContext, FitPolicy};
use crate::cloud::PointCloud;
use crate::error::{Result, WqisaError};
use crate::spline::TensorSplineSpace;
use crate::weights::WeightSpec;

/// Result of the residual quartile filter.
#[derive(Debug, Clone)]
pub struct OutlierFilterResult {
    pub cloud: PointCloud,
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
    pub q1: f64,
    pub q3: f64,
}

/// Linearly interpolated sample quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Drops rows whose residual against a pilot fit falls outside the Tukey
/// fences `[Q1 - factor * IQR, Q3 + factor * IQR]`.
///
/// The pilot fit uses the caller's space and weight on the unfiltered cloud.
/// A zero IQR keeps every row.
pub fn iqr_outlier_filter(
    cloud: &PointCloud,
    space: &TensorSplineSpace,
    weight: &WeightSpec,
    policy: FitPolicy,
    factor: f64,
) -> Result<OutlierFilterResult> {
    if cloud.len() < 4 {
        return Err(WqisaError::TooFewPoints {
            needed: 4,
            found: cloud.len(),
        });
    }
    if !(factor >= 0.0) {
        return Err(WqisaError::InvalidParameter(format!(
            "fence factor must be nonnegative, got {factor}"
        )));
    }
    let pilot = FitContext::new(cloud, space, weight, policy)?.fit()?;
    let residuals = (0..cloud.len())
        .map(|i| Ok(cloud.response(i) - pilot.evaluate_clamped(cloud.point(i))?))
        .collect::<Result<Vec<f64>>>()?;
    let mut sorted = residuals.clone();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - factor * iqr, q3 + factor * iqr);
    let (kept, removed): (Vec<usize>, Vec<usize>) = if iqr > 0.0 {
        (0..cloud.len()).partition(|&i| residuals[i] >= lo && residuals[i] <= hi)
    } else {
        ((0..cloud.len()).collect(), Vec::new())
    };
    Ok(OutlierFilterResult {
        cloud: cloud.subset(&kept)?,
        kept,
        removed,
        q1,
        q3,
    })
}
