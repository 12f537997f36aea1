use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::constants::CV_TIE_TOL;
use crate::error::{Result, WqisaError};
use crate::fit::{fit, FitPolicy};
use crate::spline::TensorSplineSpace;
use crate::weights::WeightSpec;

/// Which hyperparameter the candidate grid varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvParameter {
    /// Basis dimension `n`, the same on every axis.
    BasisSize,
    /// `k` of a k-NN weight.
    Neighbors,
}

impl std::str::FromStr for CvParameter {
    type Err = WqisaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" | "basis_size" => Ok(CvParameter::BasisSize),
            "k" | "neighbors" => Ok(CvParameter::Neighbors),
            other => Err(WqisaError::InvalidParameter(format!(
                "unknown cross-validation parameter '{other}'"
            ))),
        }
    }
}

/// Everything held fixed while the candidate grid is scanned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSetup {
    pub degrees: Vec<usize>,
    pub n: Vec<usize>,
    pub weight: WeightSpec,
    pub policy: FitPolicy,
    /// Domain box; defaults to the bounding box of the whole cloud so every
    /// held-out point lies inside.
    pub domain: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub parameter: CvParameter,
    pub grid: Vec<usize>,
    /// Mean held-out squared error per candidate; `+inf` when a fit failed.
    pub scores: Vec<f64>,
    pub best: usize,
    pub folds: usize,
    pub repeats: usize,
}

/// Seeded shuffle of `0..n` split into `folds` near-equal groups; entry `i` is
/// the fold of row `i`.
pub fn fold_assignment(n: usize, folds: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut fold = vec![0; n];
    for (pos, &row) in perm.iter().enumerate() {
        fold[row] = pos * folds / n;
    }
    fold
}

fn candidate_model(
    setup: &CvSetup,
    parameter: CvParameter,
    value: usize,
    domain: &[(f64, f64)],
) -> Result<(TensorSplineSpace, WeightSpec)> {
    let d = domain.len();
    let (n, weight) = match parameter {
        CvParameter::BasisSize => (vec![value; d], setup.weight),
        CvParameter::Neighbors => (setup.n.clone(), WeightSpec::Knn { k: value }),
    };
    Ok((
        TensorSplineSpace::uniform(domain, &n, &setup.degrees)?,
        weight,
    ))
}

fn held_out_sse(
    cloud: &PointCloud,
    space: &TensorSplineSpace,
    weight: &WeightSpec,
    policy: FitPolicy,
    assignment: &[usize],
    folds: usize,
) -> Result<f64> {
    let mut sse = 0.0;
    for f in 0..folds {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..cloud.len()).partition(|&i| assignment[i] == f);
        if test.is_empty() {
            continue;
        }
        let model = fit(&cloud.subset(&train)?, space, weight, policy)?;
        for &i in &test {
            let r = cloud.response(i) - model.evaluate_clamped(cloud.point(i))?;
            sse += r * r;
        }
    }
    Ok(sse)
}

/// CV scores for explicit fold assignments (one per repeat).
pub fn scores_for_assignments(
    cloud: &PointCloud,
    setup: &CvSetup,
    parameter: CvParameter,
    candidates: &[usize],
    assignments: &[Vec<usize>],
) -> Result<Vec<f64>> {
    let domain = match &setup.domain {
        Some(d) => d.clone(),
        None => cloud.bbox(),
    };
    if domain.len() != cloud.dim() {
        return Err(WqisaError::DimensionMismatch {
            expected: cloud.dim(),
            found: domain.len(),
        });
    }
    if setup.degrees.len() != cloud.dim() {
        return Err(WqisaError::DimensionMismatch {
            expected: cloud.dim(),
            found: setup.degrees.len(),
        });
    }
    let folds = assignments
        .iter()
        .flat_map(|a| a.iter())
        .max()
        .map_or(0, |&m| m + 1);
    let n = cloud.len() as f64;
    Ok(candidates
        .par_iter()
        .map(|&value| {
            let score = (|| -> Result<f64> {
                let (space, weight) = candidate_model(setup, parameter, value, &domain)?;
                let mut total = 0.0;
                for a in assignments {
                    total += held_out_sse(cloud, &space, &weight, setup.policy, a, folds)? / n;
                }
                Ok(total / assignments.len() as f64)
            })();
            match score {
                Ok(s) => s,
                Err(e) => {
                    log::debug!("candidate {value} failed: {e}");
                    f64::INFINITY
                }
            }
        })
        .collect())
}

/// Repeated K-fold cross-validation over `candidates`.
///
/// Each repeat draws a fresh seeded fold assignment; a candidate's score is
/// `(1/N) sum (y_i - f(x_i))^2` over held-out predictions, averaged over
/// repeats. Scores within `CV_TIE_TOL * Var(y)` of the minimum count as
/// ties, which go to the smallest candidate.
pub fn kfold_cv(
    cloud: &PointCloud,
    setup: &CvSetup,
    parameter: CvParameter,
    candidates: &[usize],
    folds: usize,
    repeats: usize,
    seed: u64,
) -> Result<CvResult> {
    if folds < 2 || cloud.len() < folds {
        return Err(WqisaError::FoldTooSmall {
            folds,
            n: cloud.len(),
        });
    }
    if candidates.is_empty() || repeats == 0 {
        return Err(WqisaError::InvalidParameter(
            "cross-validation needs at least one candidate and one repeat".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assignments: Vec<Vec<usize>> = (0..repeats)
        .map(|_| fold_assignment(cloud.len(), folds, &mut rng))
        .collect();
    let scores = scores_for_assignments(cloud, setup, parameter, candidates, &assignments)?;
    let min = scores
        .iter()
        .copied()
        .filter(|s| s.is_finite())
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(WqisaError::InvalidParameter(
            "every candidate failed to fit".into(),
        ));
    }
    let tol = CV_TIE_TOL * response_variance(cloud.responses());
    let best = candidates
        .iter()
        .zip(&scores)
        .filter(|(_, s)| **s <= min + tol)
        .map(|(&c, _)| c)
        .min()
        .expect("the minimum is attained");
    Ok(CvResult {
        parameter,
        grid: candidates.to_vec(),
        scores,
        best,
        folds,
        repeats,
    })
}

fn response_variance(y: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64
}
