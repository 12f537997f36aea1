//! Fit-quality measures: dispersion of residuals, normalized directed
//! Hausdorff distance, Jaccard index and standard-error band coverage.

use std::collections::HashSet;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Result, WqisaError};
use crate::fit::WqisaModel;
use crate::inference::{se_band, CoefficientCovariance};
use crate::kdtree::KdTree;

/// Residual statistics of `observed - predicted`.
///
/// `min` and `max` are taken over absolute residuals, the other location
/// statistics over signed ones. `std` is the population standard deviation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub n: usize,
    pub mse: f64,
    pub mae: f64,
    pub rmse: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hausdorff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub jaccard: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub band_coverage: Option<f64>,
}

/// How residuals are scaled before the statistics are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    None,
    /// Divide by `max |observed|`.
    Max,
    /// Divide by `max observed - min observed`.
    Range,
}

impl std::str::FromStr for Normalization {
    type Err = WqisaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalization::None),
            "max" => Ok(Normalization::Max),
            "range" => Ok(Normalization::Range),
            other => Err(WqisaError::InvalidParameter(format!(
                "unknown normalization '{other}'"
            ))),
        }
    }
}

/// Dispersion statistics of `observed - predicted`.
pub fn dispersion(observed: &[f64], predicted: &[f64]) -> Result<ErrorReport> {
    dispersion_normalized(observed, predicted, Normalization::None)
}

pub fn dispersion_normalized(
    observed: &[f64],
    predicted: &[f64],
    normalization: Normalization,
) -> Result<ErrorReport> {
    if observed.len() != predicted.len() {
        return Err(WqisaError::LengthMismatch {
            left: observed.len(),
            right: predicted.len(),
        });
    }
    if observed.is_empty() {
        return Err(WqisaError::EmptyInput);
    }
    let scale = match normalization {
        Normalization::None => 1.0,
        Normalization::Max => observed.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        Normalization::Range => {
            let (lo, hi) = observed
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            hi - lo
        }
    };
    if !(scale > 0.0) {
        return Err(WqisaError::InvalidParameter(
            "normalization scale is zero".into(),
        ));
    }
    let r: Vec<f64> = observed
        .iter()
        .zip(predicted)
        .map(|(o, p)| (o - p) / scale)
        .collect();
    let n = r.len() as f64;
    let mse = r.iter().map(|v| v * v).sum::<f64>() / n;
    let mae = r.iter().map(|v| v.abs()).sum::<f64>() / n;
    let mean = r.iter().sum::<f64>() / n;
    let var = r.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let mut sorted = r.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };
    let (min, max) = r.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v.abs()), hi.max(v.abs()))
    });
    Ok(ErrorReport {
        n: m,
        mse,
        mae,
        rmse: mse.sqrt(),
        min,
        max,
        mean,
        median,
        std: var.sqrt(),
        ..Default::default()
    })
}

fn check_sets(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<usize> {
    if a.is_empty() || b.is_empty() {
        return Err(WqisaError::EmptySet);
    }
    let dim = b[0].len();
    if let Some(p) = a.iter().chain(b).find(|p| p.len() != dim) {
        return Err(WqisaError::DimensionMismatch {
            expected: dim,
            found: p.len(),
        });
    }
    Ok(dim)
}

/// `max_{a in A} min_{b in B} |a - b|`.
pub fn directed_hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    check_sets(a, b)?;
    let tree = KdTree::from_points(b)?;
    let mut worst = 0.0f64;
    for p in a {
        let nn = tree.knn(p, 1)?;
        worst = worst.max(nn[0].distance);
    }
    Ok(worst)
}

/// Directed Hausdorff distance divided by the diameter of `reference`.
pub fn directed_hausdorff_normalized(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    reference: &PointCloud,
) -> Result<f64> {
    directed_hausdorff_scaled(a, b, reference.diameter())
}

/// Directed Hausdorff distance divided by an explicit diameter.
pub fn directed_hausdorff_scaled(a: &[Vec<f64>], b: &[Vec<f64>], diameter: f64) -> Result<f64> {
    check_sets(a, b)?;
    if !(diameter > 0.0) {
        return Err(WqisaError::ZeroDiameter);
    }
    Ok(directed_hausdorff(a, b)? / diameter)
}

/// `|A n B| / |A u B|`.
pub fn jaccard<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> Result<f64> {
    let union = a.union(b).count();
    if union == 0 {
        return Err(WqisaError::EmptySet);
    }
    Ok(a.intersection(b).count() as f64 / union as f64)
}

/// Default snapping cell: 1/512 of the bounding-box diagonal of both sets.
pub fn default_cell_size(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let dim = a.first().or(b.first()).map_or(0, Vec::len);
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in a.iter().chain(b) {
        for k in 0..dim.min(p.len()) {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let diag = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (h - l) * (h - l))
        .sum::<f64>()
        .sqrt();
    diag / 512.0
}

fn snap(points: &[Vec<f64>], cell: f64) -> HashSet<Vec<i64>> {
    points
        .iter()
        .map(|p| p.iter().map(|v| (v / cell).floor() as i64).collect())
        .collect()
}

/// Jaccard index of two point sets after snapping to a grid of side `cell`
/// (default [`default_cell_size`]).
pub fn jaccard_points(a: &[Vec<f64>], b: &[Vec<f64>], cell: Option<f64>) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Err(WqisaError::EmptySet);
    }
    let cell = cell.unwrap_or_else(|| default_cell_size(a, b));
    if !(cell > 0.0) {
        // every point coincides; snapping is the identity on one cell
        return jaccard(&snap(a, 1.0), &snap(b, 1.0));
    }
    jaccard(&snap(a, cell), &snap(b, cell))
}

/// Fraction of cloud points whose response lies in the standard-error band at
/// their (clamped) predictor.
pub fn band_coverage(
    cloud: &PointCloud,
    model: &WqisaModel,
    covariance: &CoefficientCovariance,
    alpha: f64,
) -> Result<f64> {
    if cloud.is_empty() {
        return Err(WqisaError::EmptyInput);
    }
    let mut inside = 0usize;
    for i in 0..cloud.len() {
        let u = model.space().clamp(cloud.point(i));
        let (lo, hi) = se_band(model, covariance, &u, alpha)?;
        let y = cloud.response(i);
        if lo <= y && y <= hi {
            inside += 1;
        }
    }
    Ok(inside as f64 / cloud.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sequences() {
        let v = [1.0, -2.0, 3.5];
        let r = dispersion(&v, &v).unwrap();
        assert_eq!(r.mse, 0.0);
        assert_eq!(r.max, 0.0);
        assert_eq!(r.std, 0.0);
    }

    #[test]
    fn plus_minus_one() {
        let r = dispersion(&[1.0, -1.0], &[0.0, 0.0]).unwrap();
        assert_eq!((r.mse, r.mae, r.rmse, r.mean), (1.0, 1.0, 1.0, 0.0));
        assert_eq!((r.min, r.max, r.std, r.median), (1.0, 1.0, 1.0, 0.0));
    }

    #[test]
    fn mismatch_and_empty() {
        assert!(matches!(
            dispersion(&[1.0], &[1.0, 2.0]),
            Err(WqisaError::LengthMismatch { .. })
        ));
        assert!(matches!(dispersion(&[], &[]), Err(WqisaError::EmptyInput)));
    }

    #[test]
    fn normalization_modes() {
        let r = dispersion_normalized(&[2.0, 4.0], &[1.0, 4.0], Normalization::Max).unwrap();
        assert_eq!(r.max, 0.25);
        let r = dispersion_normalized(&[2.0, 4.0], &[1.0, 4.0], Normalization::Range).unwrap();
        assert_eq!(r.max, 0.5);
    }

    #[test]
    fn hausdorff_example() {
        let a = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
        let b = vec![vec![0.0, 0.0]];
        assert_eq!(directed_hausdorff(&a, &b).unwrap(), 5.0);
        assert_eq!(directed_hausdorff_scaled(&a, &b, 5.0).unwrap(), 1.0);
        assert_eq!(directed_hausdorff(&b, &a).unwrap(), 0.0);
        let reference = PointCloud::from_rows(&a).unwrap();
        assert_eq!(
            directed_hausdorff_normalized(&a, &b, &reference).unwrap(),
            1.0
        );
        assert_eq!(directed_hausdorff(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_errors() {
        let a = vec![vec![0.0]];
        assert!(matches!(
            directed_hausdorff(&a, &[]),
            Err(WqisaError::EmptySet)
        ));
        assert!(matches!(
            directed_hausdorff_scaled(&a, &a, 0.0),
            Err(WqisaError::ZeroDiameter)
        ));
    }

    #[test]
    fn jaccard_cases() {
        let a: HashSet<i32> = [1, 2, 3].into();
        let b: HashSet<i32> = [2, 3, 4].into();
        assert_eq!(jaccard(&a, &b).unwrap(), 0.5);
        assert_eq!(jaccard(&a, &a).unwrap(), 1.0);
        let c: HashSet<i32> = [9].into();
        assert_eq!(jaccard(&a, &c).unwrap(), 0.0);
        let e: HashSet<i32> = HashSet::new();
        assert!(jaccard(&e, &e).is_err());
    }

    #[test]
    fn jaccard_snapped() {
        let a = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let b = vec![vec![0.0, 0.0], vec![1.0, 1.0 + 1e-9]];
        assert_eq!(jaccard_points(&a, &b, Some(0.1)).unwrap(), 1.0);
        assert_eq!(jaccard_points(&a, &a, None).unwrap(), 1.0);
    }
}
