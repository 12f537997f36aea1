//! Weighted quasi-interpolant spline approximation (wQISA) of scattered,
//! noisy point clouds.
//!
//! A tensor-product B-spline is fitted without solving any linear system:
//! each coefficient is a weighted local mean of the responses around the
//! knot average of its basis function. The crate also provides the k-d tree
//! used for neighbourhood queries, covariance and standard-error bands of the
//! fit, K-fold cross-validation, fit-quality metrics and a command-line
//! driver.
//!
//! ```
//! use wqisa::{fit, FitPolicy, PointCloud, TensorSplineSpace, WeightSpec};
//!
//! let rows: Vec<Vec<f64>> = (0..50).map(|i| {
//!     let x = i as f64 / 49.0;
//!     vec![x, 2.0 * x + 1.0]
//! }).collect();
//! let cloud = PointCloud::from_rows(&rows).unwrap();
//! let space = TensorSplineSpace::uniform(&[(0.0, 1.0)], &[6], &[2]).unwrap();
//! let model = fit(&cloud, &space, &WeightSpec::Knn { k: 4 }, FitPolicy::default()).unwrap();
//! let (lo, hi) = cloud.response_range();
//! let v = model.evaluate(&[0.3]).unwrap();
//! assert!(lo <= v && v <= hi);
//! ```

// `!(x > 0.0)` style guards deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cloud;
pub mod constants;
pub mod error;
pub mod fit;
pub mod inference;
pub mod io;
pub mod kdtree;
pub mod metrics;
pub mod spline;
pub mod weights;

pub use cloud::PointCloud;
pub use error::{Result, WqisaError};
pub use fit::{
    effective_points, estimate_control_point, fit, iqr_outlier_filter, local_bounds,
    EmptySupportPolicy, FitContext, FitPolicy, FitStats, WqisaModel,
};
pub use inference::{
    coefficient_covariance, kfold_cv, se_band, variance_at, CoefficientCovariance, CvParameter,
    CvResult, CvSetup, NoiseModel,
};
pub use kdtree::{KdTree, Neighbor};
pub use metrics::{dispersion, ErrorReport};
pub use spline::{BasisRow, KnotVector, SplineFunction, TensorSplineSpace};
pub use weights::{NeighborContext, WeightSet, WeightSpec};
