use crate::constants::DENSE_COVARIANCE_LIMIT;
use crate::error::{Result, WqisaError};
use crate::fit::FitContext;

/// Covariance of the coefficient estimators under i.i.d. noise:
/// `Cov(c_i, c_j) = sigma^2 * sum_k w_i(x_k) w_j(x_k) / (sum w_i * sum w_j)`.
///
/// Stores the normalized windows; the matrix itself is densified only when the
/// spline dimension is at most [`DENSE_COVARIANCE_LIMIT`].
#[derive(Debug, Clone)]
pub struct CoefficientCovariance {
    sigma2: f64,
    windows: Vec<Vec<(usize, f64)>>,
    dense: Option<Vec<f64>>,
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

impl CoefficientCovariance {
    pub fn new(ctx: &FitContext, sigma_eps: f64) -> Result<Self> {
        if !(sigma_eps >= 0.0) || !sigma_eps.is_finite() {
            return Err(WqisaError::InvalidParameter(format!(
                "noise standard deviation must be finite and nonnegative, got {sigma_eps}"
            )));
        }
        let dim = ctx.space().dim();
        let windows = (0..dim)
            .map(|flat| {
                let set = ctx.coefficient_window(flat)?;
                set.normalized().ok_or_else(|| WqisaError::EmptySupport {
                    sites: vec![ctx.site(flat)],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cov = CoefficientCovariance {
            sigma2: sigma_eps * sigma_eps,
            windows,
            dense: None,
        };
        if dim <= DENSE_COVARIANCE_LIMIT {
            cov.dense = Some(cov.build_dense());
        }
        Ok(cov)
    }

    fn compute(&self, i: usize, j: usize) -> f64 {
        self.sigma2 * sparse_dot(&self.windows[i], &self.windows[j])
    }

    pub fn dim(&self) -> usize {
        self.windows.len()
    }

    pub fn sigma_eps(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.dense {
            Some(m) => m[i * self.dim() + j],
            None => self.compute(i, j),
        }
    }

    /// Dense row-major matrix, if it was materialized.
    pub fn dense(&self) -> Option<&[f64]> {
        self.dense.as_deref()
    }

    /// Same windows with a different noise level.
    pub fn with_sigma(&self, sigma_eps: f64) -> CoefficientCovariance {
        let mut out = CoefficientCovariance {
            sigma2: sigma_eps * sigma_eps,
            windows: self.windows.clone(),
            dense: None,
        };
        if self.dense.is_some() {
            out.dense = Some(out.build_dense());
        }
        out
    }

    fn build_dense(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut dense = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = self.compute(i, j);
                dense[i * dim + j] = v;
                dense[j * dim + i] = v;
            }
        }
        dense
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_dot_merges() {
        let a = [(0, 1.0), (3, 2.0), (7, 1.0)];
        let b = [(3, 0.5), (5, 9.0), (7, 4.0)];
        assert_eq!(sparse_dot(&a, &b), 5.0);
        assert_eq!(sparse_dot(&a, &[]), 0.0);
    }
}
