use std::sync::OnceLock;

use crate::constants::EXACT_DIAMETER_LIMIT;
use crate::error::{Result, WqisaError};

/// N records `(x, y)` with `x` in R^d and response `y`.
#[derive(Debug, Clone)]
pub struct PointCloud {
    dim: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    diameter: OnceLock<(f64, bool)>,
}

impl PartialEq for PointCloud {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.x == other.x && self.y == other.y
    }
}

impl PointCloud {
    /// `x` is row-major with `dim` predictors per row.
    pub fn new(dim: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(WqisaError::InvalidParameter(
                "predictor dimension must be >= 1".into(),
            ));
        }
        if y.is_empty() {
            return Err(WqisaError::EmptyInput);
        }
        if x.len() != dim * y.len() {
            return Err(WqisaError::LengthMismatch {
                left: x.len(),
                right: dim * y.len(),
            });
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(WqisaError::InvalidParameter(
                "point cloud contains non-finite values".into(),
            ));
        }
        Ok(PointCloud {
            dim,
            x,
            y,
            diameter: OnceLock::new(),
        })
    }

    /// Each row is `x_1, ..., x_d, y`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().ok_or(WqisaError::EmptyInput)?.len();
        if width < 2 {
            return Err(WqisaError::InvalidParameter(
                "rows need at least one predictor and a response".into(),
            ));
        }
        let mut x = Vec::with_capacity(rows.len() * (width - 1));
        let mut y = Vec::with_capacity(rows.len());
        for r in rows {
            if r.len() != width {
                return Err(WqisaError::DimensionMismatch {
                    expected: width,
                    found: r.len(),
                });
            }
            x.extend_from_slice(&r[..width - 1]);
            y.push(r[width - 1]);
        }
        PointCloud::new(width - 1, x, y)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn response(&self, i: usize) -> f64 {
        self.y[i]
    }

    /// Flat row-major predictor array.
    pub fn predictors(&self) -> &[f64] {
        &self.x
    }

    pub fn responses(&self) -> &[f64] {
        &self.y
    }

    /// Full record `(x_1..x_d, y)`.
    pub fn record(&self, i: usize) -> Vec<f64> {
        let mut r = self.point(i).to_vec();
        r.push(self.y[i]);
        r
    }

    /// Per-axis `(min, max)` of the predictors.
    pub fn bbox(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for row in self.x.chunks_exact(self.dim) {
            for (k, &v) in row.iter().enumerate() {
                b[k].0 = b[k].0.min(v);
                b[k].1 = b[k].1.max(v);
            }
        }
        b
    }

    /// `(min y, max y)`.
    pub fn response_range(&self) -> (f64, f64) {
        self.y
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Largest distance between two `(x, y)` records.
    ///
    /// Exact up to [`EXACT_DIAMETER_LIMIT`] points; beyond that the diagonal of
    /// the record bounding box is returned (see [`PointCloud::diameter_is_exact`]).
    pub fn diameter(&self) -> f64 {
        self.diameter_entry().0
    }

    pub fn diameter_is_exact(&self) -> bool {
        self.diameter_entry().1
    }

    fn diameter_entry(&self) -> (f64, bool) {
        *self.diameter.get_or_init(|| {
            let n = self.len();
            if n <= EXACT_DIAMETER_LIMIT {
                let records: Vec<Vec<f64>> = (0..n).map(|i| self.record(i)).collect();
                let mut best = 0.0f64;
                for i in 0..n {
                    for j in i + 1..n {
                        best = best.max(crate::kdtree::dist2(&records[i], &records[j]));
                    }
                }
                (best.sqrt(), true)
            } else {
                let (lo, hi) = self.response_range();
                let diag2: f64 = self
                    .bbox()
                    .iter()
                    .map(|(a, b)| (b - a) * (b - a))
                    .sum::<f64>()
                    + (hi - lo) * (hi - lo);
                (diag2.sqrt(), false)
            }
        })
    }

    /// Rows at the given indices, in order.
    pub fn subset(&self, indices: &[usize]) -> Result<PointCloud> {
        let mut x = Vec::with_capacity(indices.len() * self.dim);
        let mut y = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(WqisaError::IndexOutOfRange {
                    index: i,
                    n: self.len(),
                });
            }
            x.extend_from_slice(self.point(i));
            y.push(self.y[i]);
        }
        PointCloud::new(self.dim, x, y)
    }

    /// Same predictors with new responses.
    pub fn with_responses(&self, y: Vec<f64>) -> Result<PointCloud> {
        if y.len() != self.len() {
            return Err(WqisaError::LengthMismatch {
                left: y.len(),
                right: self.len(),
            });
        }
        PointCloud::new(self.dim, self.x.clone(), y)
    }
}
