use std::f64::consts::PI;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Result, WqisaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// `y = sin(pi x) + N(0, sigma^2)`.
    Sine,
    /// As `Sine`, with a fraction of responses replaced by `+-magnitude`.
    SineOutliers,
    /// `y = sin(pi x / 2) + N(0, s(x)^2)` with
    /// `s(x) = exp(-1 / (4 (1 + exp(4x - 2))))`.
    VariableNoise,
}

impl FromStr for SyntheticKind {
    type Err = WqisaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(SyntheticKind::Sine),
            "sine_outliers" => Ok(SyntheticKind::SineOutliers),
            "variable_noise" => Ok(SyntheticKind::VariableNoise),
            other => Err(WqisaError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticParams {
    /// Noise standard deviation (ignored by `VariableNoise`).
    pub sigma: f64,
    /// Predictors are drawn from `U[low, high]`.
    pub low: f64,
    pub high: f64,
    pub outlier_fraction: f64,
    pub outlier_magnitude: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            sigma: 0.3,
            low: -2.0,
            high: 2.0,
            outlier_fraction: 0.05,
            outlier_magnitude: 10.0,
        }
    }
}

/// Noise-free response of a synthetic kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub kind: SyntheticKind,
}

impl GroundTruth {
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            SyntheticKind::Sine | SyntheticKind::SineOutliers => (PI * x).sin(),
            SyntheticKind::VariableNoise => (PI / 2.0 * x).sin(),
        }
    }

    /// Standard deviation of the noise at `x` for `VariableNoise`.
    pub fn noise_scale(x: f64) -> f64 {
        (-1.0 / (4.0 * (1.0 + (4.0 * x - 2.0).exp()))).exp()
    }
}

/// Deterministic synthetic 1-D cloud for a seed, with its ground truth.
pub fn gen_synthetic(
    kind: SyntheticKind,
    n: usize,
    seed: u64,
    params: &SyntheticParams,
) -> Result<(PointCloud, GroundTruth)> {
    if n == 0 {
        return Err(WqisaError::EmptyInput);
    }
    if !(params.low < params.high) || !params.low.is_finite() || !params.high.is_finite() {
        return Err(WqisaError::InvalidDomain {
            a: params.low,
            b: params.high,
        });
    }
    if !(params.sigma >= 0.0 && params.sigma.is_finite()) {
        return Err(WqisaError::InvalidParameter(format!(
            "sigma must be finite and nonnegative, got {}",
            params.sigma
        )));
    }
    if !(0.0..=1.0).contains(&params.outlier_fraction) || !params.outlier_magnitude.is_finite() {
        return Err(WqisaError::InvalidParameter(
            "outlier fraction must lie in [0, 1] with a finite magnitude".into(),
        ));
    }
    let truth = GroundTruth { kind };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n)
        .map(|_| rng.random_range(params.low..params.high))
        .collect();
    let mut y: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let sd = match kind {
                SyntheticKind::VariableNoise => GroundTruth::noise_scale(xi),
                _ => params.sigma,
            };
            truth.eval(xi) + sd * z
        })
        .collect();
    if kind == SyntheticKind::SineOutliers {
        let count = (params.outlier_fraction * n as f64).round() as usize;
        for i in sample(&mut rng, n, count.min(n)) {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            y[i] = sign * params.outlier_magnitude;
        }
    }
    Ok((PointCloud::new(1, x, y)?, truth))
}
