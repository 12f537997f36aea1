use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::constants::{DEFAULT_DEGREE, DEFAULT_IQR_FACTOR};
use crate::error::{Result, WqisaError};
use crate::fit::{EmptySupportPolicy, FitPolicy};
use crate::inference::band_z;
use crate::spline::TensorSplineSpace;
use crate::weights::WeightSpec;

/// Run configuration shared by the command-line subcommands.
///
/// Single-entry `degrees` and `n` are broadcast to every axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub degrees: Vec<usize>,
    pub n: Vec<usize>,
    /// Candidate values for cross-validation.
    pub cv_grid: Option<Vec<usize>>,
    pub weight: WeightSpec,
    pub empty_support: EmptySupportPolicy,
    pub drop_outside: bool,
    pub outlier_filter: bool,
    pub iqr_factor: f64,
    /// Per-axis `(a, b)`; the data bounding box when absent.
    pub domain: Option<Vec<(f64, f64)>>,
    pub seed: u64,
    pub alpha: f64,
    /// Known noise level; the residual plug-in estimate is used when absent.
    pub sigma_eps: Option<f64>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            degrees: vec![DEFAULT_DEGREE],
            n: vec![10],
            cv_grid: None,
            weight: WeightSpec::Knn { k: 10 },
            empty_support: EmptySupportPolicy::Error,
            drop_outside: false,
            outlier_filter: false,
            iqr_factor: DEFAULT_IQR_FACTOR,
            domain: None,
            seed: 0,
            alpha: 0.05,
            sigma_eps: None,
            input: None,
            output: None,
        }
    }
}

fn broadcast(values: &[usize], dim: usize, what: &str) -> Result<Vec<usize>> {
    match values.len() {
        1 => Ok(vec![values[0]; dim]),
        l if l == dim => Ok(values.to_vec()),
        l => Err(WqisaError::InvalidParameter(format!(
            "{what} has {l} entries for a {dim}-dimensional cloud"
        ))),
    }
}

impl FitConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| WqisaError::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| WqisaError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn policy(&self) -> FitPolicy {
        FitPolicy {
            empty_support: self.empty_support,
            drop_outside: self.drop_outside,
        }
    }

    pub fn degrees_for(&self, dim: usize) -> Result<Vec<usize>> {
        broadcast(&self.degrees, dim, "degrees")
    }

    pub fn n_for(&self, dim: usize) -> Result<Vec<usize>> {
        broadcast(&self.n, dim, "n")
    }

    pub fn domain_for(&self, cloud: &PointCloud) -> Result<Vec<(f64, f64)>> {
        match &self.domain {
            Some(d) if d.len() != cloud.dim() => Err(WqisaError::DimensionMismatch {
                expected: cloud.dim(),
                found: d.len(),
            }),
            Some(d) => Ok(d.clone()),
            None => Ok(cloud.bbox()),
        }
    }

    pub fn space_for(&self, cloud: &PointCloud) -> Result<TensorSplineSpace> {
        let dim = cloud.dim();
        TensorSplineSpace::uniform(
            &self.domain_for(cloud)?,
            &self.n_for(dim)?,
            &self.degrees_for(dim)?,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.weight.validate()?;
        band_z(self.alpha)?;
        if self.degrees.is_empty() || self.n.is_empty() {
            return Err(WqisaError::InvalidParameter(
                "degrees and n must be nonempty".into(),
            ));
        }
        if !(self.iqr_factor > 0.0) {
            return Err(WqisaError::InvalidParameter(
                "iqr_factor must be positive".into(),
            ));
        }
        if let Some(s) = self.sigma_eps {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(WqisaError::InvalidParameter(
                    "sigma_eps must be nonnegative".into(),
                ));
            }
        }
        Ok(())
    }
}
