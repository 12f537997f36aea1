//! The weighted quasi-interpolant fit.
//!
//! Every coefficient is the weighted mean of cloud responses under the weight
//! window centred at the coefficient's knot-average site. No linear system is
//! solved; the fit costs one window evaluation per coefficient.

mod bounds;
mod outlier;
mod shape;

pub use bounds::GlobalBounds;
pub use outlier::{iqr_outlier_filter, OutlierFilterResult};
pub use shape::{
    classify_convexity, classify_monotone, convexity_along, monotone_along, ConvexClass,
    MonotoneClass,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Result, WqisaError};
use crate::spline::{SplineFunction, TensorSplineSpace};
use crate::weights::{NeighborContext, WeightSet, WeightSpec};

/// What to do when a weight window contains no cloud point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmptySupportPolicy {
    /// Abort, listing every empty knot-average site.
    #[default]
    Error,
    /// Use the 1-nearest-neighbour estimate at that site.
    Nearest,
}

impl std::str::FromStr for EmptySupportPolicy {
    type Err = WqisaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(EmptySupportPolicy::Error),
            "nearest" => Ok(EmptySupportPolicy::Nearest),
            other => Err(WqisaError::InvalidParameter(format!(
                "unknown empty-support policy '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FitPolicy {
    pub empty_support: EmptySupportPolicy,
    /// Drop points outside the domain box instead of clipping them onto it.
    #[serde(default)]
    pub drop_outside: bool,
}

/// Counters recorded while fitting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitStats {
    pub estimator_calls: usize,
    pub weight_lookups: usize,
    /// Coefficients that fell back to the nearest neighbour.
    pub fallbacks: usize,
    /// Points lying outside the domain box (clipped or dropped).
    pub outside_points: usize,
    /// `(requested, used)` when k exceeded the cloud size.
    pub k_clamped: Option<(usize, usize)>,
}

/// A fitted approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WqisaModel {
    pub spline: SplineFunction,
    pub weight: WeightSpec,
    pub policy: FitPolicy,
    /// Size of the effective point set.
    pub effective_count: usize,
    /// Number of nonzero-weight points behind each coefficient.
    pub support_sizes: Vec<usize>,
    pub stats: FitStats,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl WqisaModel {
    pub fn space(&self) -> &TensorSplineSpace {
        self.spline.space()
    }

    pub fn coefficients(&self) -> &[f64] {
        self.spline.coefficients()
    }

    pub fn evaluate(&self, u: &[f64]) -> Result<f64> {
        self.spline.eval(u)
    }

    /// Evaluates at `u` projected onto the domain box.
    pub fn evaluate_clamped(&self, u: &[f64]) -> Result<f64> {
        self.spline.eval(&self.space().clamp(u))
    }

    /// Prediction and global bound check against the cloud it was fitted on.
    pub fn global_bounds(&self, cloud: &PointCloud) -> GlobalBounds {
        bounds::global_bounds(self, cloud)
    }
}

/// Cloud prepared for one space and weight: clipped coordinates, tree and the
/// knot-average sites. Reused by the fit and by every post-fit diagnostic that
/// needs the weight windows again.
#[derive(Debug, Clone)]
pub struct FitContext {
    space: TensorSplineSpace,
    weight: WeightSpec,
    policy: FitPolicy,
    ctx: NeighborContext,
    responses: Vec<f64>,
    /// Cloud index of every context point.
    original: Vec<usize>,
    averages: Vec<Vec<f64>>,
    outside: usize,
    rows: usize,
    k_clamped: Option<(usize, usize)>,
}

impl FitContext {
    pub fn new(
        cloud: &PointCloud,
        space: &TensorSplineSpace,
        weight: &WeightSpec,
        policy: FitPolicy,
    ) -> Result<Self> {
        weight.validate()?;
        if cloud.dim() != space.ndim() {
            return Err(WqisaError::DimensionMismatch {
                expected: space.ndim(),
                found: cloud.dim(),
            });
        }
        let d = cloud.dim();
        let mut coords = Vec::with_capacity(cloud.len() * d);
        let mut responses = Vec::with_capacity(cloud.len());
        let mut original = Vec::with_capacity(cloud.len());
        let mut outside = 0;
        for i in 0..cloud.len() {
            let x = cloud.point(i);
            let inside = space.contains(x);
            if !inside {
                outside += 1;
                if policy.drop_outside {
                    continue;
                }
            }
            if inside {
                coords.extend_from_slice(x);
            } else {
                coords.extend(space.clamp(x));
            }
            responses.push(cloud.response(i));
            original.push(i);
        }
        if responses.is_empty() {
            return Err(WqisaError::EmptyInput);
        }
        let ctx = NeighborContext::from_coords(coords, d)?;
        let k_clamped = match *weight {
            WeightSpec::Knn { k } if k > ctx.len() => {
                log::warn!(
                    "knn k = {k} exceeds the {} available points; using k = {}",
                    ctx.len(),
                    ctx.len()
                );
                Some((k, ctx.len()))
            }
            _ => None,
        };
        Ok(FitContext {
            averages: space.knot_averages(),
            space: space.clone(),
            weight: *weight,
            policy,
            ctx,
            responses,
            original,
            outside,
            rows: cloud.len(),
            k_clamped,
        })
    }

    /// Context matching a fitted model.
    pub fn for_model(model: &WqisaModel, cloud: &PointCloud) -> Result<Self> {
        FitContext::new(cloud, model.space(), &model.weight, model.policy)
    }

    pub fn space(&self) -> &TensorSplineSpace {
        &self.space
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    pub fn neighbors(&self) -> &NeighborContext {
        &self.ctx
    }

    /// Responses of the points taking part in the fit.
    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    /// Row count of the cloud the context was built from.
    pub fn cloud_len(&self) -> usize {
        self.rows
    }

    /// Maps a context index back to the cloud row it came from.
    pub fn original_index(&self, i: usize) -> usize {
        self.original[i]
    }

    /// Knot-average site of coefficient `flat`.
    pub fn site(&self, flat: usize) -> Vec<f64> {
        self.space
            .multi_index(flat)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.averages[k][i])
            .collect()
    }

    /// Raw window at `u`, without any empty-support fallback.
    pub fn raw_window(&self, u: &[f64]) -> Result<WeightSet> {
        self.ctx.weights(&self.weight, u)
    }

    /// Window at `u` after applying the empty-support policy.
    ///
    /// Returns `Ok(None)` for an empty window under [`EmptySupportPolicy::Error`].
    pub fn window_at(&self, u: &[f64]) -> Result<Option<(WeightSet, bool)>> {
        let set = self.raw_window(u)?;
        if set.total() > 0.0 {
            return Ok(Some((set, false)));
        }
        match self.policy.empty_support {
            EmptySupportPolicy::Error => Ok(None),
            EmptySupportPolicy::Nearest => {
                let mut fallback = self.ctx.weights(&WeightSpec::Knn { k: 1 }, u)?;
                fallback.touched += set.touched;
                Ok(Some((fallback, true)))
            }
        }
    }

    /// Window of coefficient `flat`; empty windows are an error.
    pub fn coefficient_window(&self, flat: usize) -> Result<WeightSet> {
        let site = self.site(flat);
        match self.window_at(&site)? {
            Some((set, _)) => Ok(set),
            None => Err(WqisaError::EmptySupport { sites: vec![site] }),
        }
    }

    /// Weighted mean of the responses under `set`.
    pub fn weighted_mean(&self, set: &WeightSet) -> f64 {
        weighted_mean_of(&self.responses, set)
    }

    /// Control-point estimate at an arbitrary site `u`.
    pub fn estimate(&self, u: &[f64]) -> Result<f64> {
        match self.window_at(u)? {
            Some((set, _)) => Ok(self.weighted_mean(&set)),
            None => Err(WqisaError::EmptySupport {
                sites: vec![u.to_vec()],
            }),
        }
    }

    /// Estimates every coefficient and assembles the model.
    pub fn fit(&self) -> Result<WqisaModel> {
        let dim = self.space.dim();
        let windows: Vec<Result<Option<(WeightSet, bool)>>> = (0..dim)
            .into_par_iter()
            .map(|flat| self.window_at(&self.site(flat)))
            .collect();

        let mut coefficients = Vec::with_capacity(dim);
        let mut support_sizes = Vec::with_capacity(dim);
        let mut empty_sites = Vec::new();
        let mut used = vec![false; self.ctx.len()];
        let mut stats = FitStats {
            outside_points: self.outside,
            k_clamped: self.k_clamped,
            ..FitStats::default()
        };
        for (flat, window) in windows.into_iter().enumerate() {
            stats.estimator_calls += 1;
            match window? {
                Some((set, fell_back)) => {
                    stats.weight_lookups += set.touched;
                    stats.fallbacks += usize::from(fell_back);
                    for i in set.indices() {
                        used[i] = true;
                    }
                    support_sizes.push(set.entries.len());
                    coefficients.push(self.weighted_mean(&set));
                }
                None => {
                    empty_sites.push(self.site(flat));
                    support_sizes.push(0);
                    coefficients.push(f64::NAN);
                }
            }
        }
        if !empty_sites.is_empty() {
            return Err(WqisaError::EmptySupport { sites: empty_sites });
        }

        let mut warnings = Vec::new();
        if let Some((k, used_k)) = self.k_clamped {
            warnings.push(format!("knn k = {k} clamped to the cloud size {used_k}"));
        }
        if self.outside > 0 {
            let action = if self.policy.drop_outside {
                "dropped"
            } else {
                "clipped"
            };
            warnings.push(format!(
                "{} point(s) outside the domain were {action}",
                self.outside
            ));
        }
        if stats.fallbacks > 0 {
            warnings.push(format!(
                "{} coefficient(s) used the nearest-neighbour fallback",
                stats.fallbacks
            ));
        }
        Ok(WqisaModel {
            spline: SplineFunction::new(self.space.clone(), coefficients)?,
            weight: self.weight,
            policy: self.policy,
            effective_count: used.iter().filter(|&&u| u).count(),
            support_sizes,
            stats,
            warnings,
        })
    }
}

/// Convex combination of `responses` under `set`, kept inside the range of
/// the responses it averages.
pub(crate) fn weighted_mean_of(responses: &[f64], set: &WeightSet) -> f64 {
    let total = set.total();
    let mut acc = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(i, w) in &set.entries {
        let y = responses[i];
        acc += y * (w / total);
        lo = lo.min(y);
        hi = hi.max(y);
    }
    acc.clamp(lo, hi)
}

/// Control-point estimate `sum y w_u(x) / sum w_u(x)` at site `u`.
pub fn estimate_control_point(
    cloud: &PointCloud,
    ctx: &NeighborContext,
    weight: &WeightSpec,
    u: &[f64],
) -> Result<f64> {
    weight.validate()?;
    if ctx.len() != cloud.len() {
        return Err(WqisaError::LengthMismatch {
            left: ctx.len(),
            right: cloud.len(),
        });
    }
    let set = ctx.weights(weight, u)?;
    if !(set.total() > 0.0) {
        return Err(WqisaError::EmptySupport {
            sites: vec![u.to_vec()],
        });
    }
    Ok(weighted_mean_of(cloud.responses(), &set))
}

/// Fits a model; see [`FitContext::fit`].
pub fn fit(
    cloud: &PointCloud,
    space: &TensorSplineSpace,
    weight: &WeightSpec,
    policy: FitPolicy,
) -> Result<WqisaModel> {
    FitContext::new(cloud, space, weight, policy)?.fit()
}

/// Lower and upper bounds of the fit over one knot cell.
pub fn local_bounds(model: &WqisaModel, cloud: &PointCloud, cell: &[usize]) -> Result<(f64, f64)> {
    FitContext::for_model(model, cloud)?.local_bounds(cell)
}

/// Sorted cloud indices of the effective point set.
pub fn effective_points(model: &WqisaModel, cloud: &PointCloud) -> Result<Vec<usize>> {
    FitContext::for_model(model, cloud)?.effective_points()
}
