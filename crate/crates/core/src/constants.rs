//! Shared numerical tolerances.

/// Partition-of-unity tolerance for basis rows.
pub const PARTITION_TOL: f64 = 1e-12;

/// Maximum pointwise drift allowed after knot insertion.
pub const INSERTION_TOL: f64 = 1e-10;

/// Relative slack used when classifying monotone/convex coefficient sequences.
pub const SHAPE_TOL: f64 = 1e-12;

/// Symmetry / positive-semidefiniteness tolerance for coefficient covariances.
pub const COVARIANCE_TOL: f64 = 1e-10;

/// Clouds up to this size get an exact O(N^2) diameter; larger ones fall back
/// to the bounding-box diagonal.
pub const EXACT_DIAMETER_LIMIT: usize = 5000;

/// Above this spline dimension the coefficient covariance is never densified.
pub const DENSE_COVARIANCE_LIMIT: usize = 4096;

/// k-d tree leaf bucket size.
pub const KD_LEAF_SIZE: usize = 16;

/// Tukey fence factor for the residual outlier filter.
pub const DEFAULT_IQR_FACTOR: f64 = 1.5;

/// Default spline degree per axis.
pub const DEFAULT_DEGREE: usize = 2;

/// Cross-validation scores closer than this fraction of the response variance
/// are treated as tied.
pub const CV_TIE_TOL: f64 = 1e-12;
