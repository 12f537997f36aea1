//! Parzen-window weight families.
//!
//! The estimator only ever uses ratios of weights, so [`NeighborContext::weights`]
//! may return the smooth families rescaled by a common positive factor (the
//! nearest point gets weight 1). [`weight_eval`] returns the unscaled value.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Result, WqisaError};
use crate::kdtree::{dist2, KdTree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum WeightSpec {
    /// `1/k` on the k nearest cloud points.
    Knn { k: usize },
    /// Indicator of the closed ball of radius `r`.
    Characteristic { r: f64 },
    /// `exp(-|x-u| / (2 sigma^2))`, or `exp(-|x-u|^2 / (2 sigma^2))` when
    /// `squared_norm` is set.
    Gaussian {
        sigma: f64,
        #[serde(default)]
        squared_norm: bool,
    },
    /// `exp(-|x-u| / (sqrt(2) sigma))`.
    Exponential { sigma: f64 },
    /// Inverse distance, or uniform mass on points coinciding with `u`.
    Idw,
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            WeightSpec::Knn { k } => k >= 1,
            WeightSpec::Characteristic { r } => r > 0.0 && r.is_finite(),
            WeightSpec::Gaussian { sigma, .. } | WeightSpec::Exponential { sigma } => {
                sigma > 0.0 && sigma.is_finite()
            }
            WeightSpec::Idw => true,
        };
        if ok {
            Ok(())
        } else {
            Err(WqisaError::InvalidWeight(format!(
                "parameters of {self} must be strictly positive"
            )))
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            WeightSpec::Knn { .. } => "knn",
            WeightSpec::Characteristic { .. } => "characteristic",
            WeightSpec::Gaussian { .. } => "gaussian",
            WeightSpec::Exponential { .. } => "exponential",
            WeightSpec::Idw => "idw",
        }
    }

    /// True when every weight window has bounded support.
    pub fn has_bounded_support(&self) -> bool {
        matches!(
            self,
            WeightSpec::Knn { .. } | WeightSpec::Characteristic { .. }
        )
    }

    /// Weight as a function of distance for the translation-invariant families.
    pub fn radial(&self, distance: f64) -> Option<f64> {
        match *self {
            WeightSpec::Characteristic { r } => Some(if distance <= r { 1.0 } else { 0.0 }),
            WeightSpec::Gaussian {
                sigma,
                squared_norm,
            } => {
                let d = if squared_norm {
                    distance * distance
                } else {
                    distance
                };
                Some((-d / (2.0 * sigma * sigma)).exp())
            }
            WeightSpec::Exponential { sigma } => {
                Some((-distance / (std::f64::consts::SQRT_2 * sigma)).exp())
            }
            WeightSpec::Knn { .. } | WeightSpec::Idw => None,
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            WeightSpec::Knn { k } => write!(f, "knn:k={k}"),
            WeightSpec::Characteristic { r } => write!(f, "characteristic:r={r}"),
            WeightSpec::Gaussian {
                sigma,
                squared_norm,
            } => {
                write!(f, "gaussian:sigma={sigma}")?;
                if squared_norm {
                    write!(f, ",squared=true")?;
                }
                Ok(())
            }
            WeightSpec::Exponential { sigma } => write!(f, "exponential:sigma={sigma}"),
            WeightSpec::Idw => write!(f, "idw"),
        }
    }
}

impl FromStr for WeightSpec {
    type Err = WqisaError;

    /// Parses `family[:key=value,...]`, e.g. `knn:k=9` or `gaussian:sigma=0.2`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, params) = s.split_once(':').unwrap_or((s, ""));
        let mut k = None;
        let mut r = None;
        let mut sigma = None;
        let mut squared = false;
        for kv in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = kv.split_once('=').ok_or_else(|| {
                WqisaError::InvalidWeight(format!("expected key=value in '{kv}'"))
            })?;
            let bad = |_| WqisaError::InvalidWeight(format!("bad value '{value}' for {key}"));
            match key.trim() {
                "k" => {
                    k = Some(
                        value
                            .trim()
                            .parse::<usize>()
                            .map_err(|e| bad(e.to_string()))?,
                    )
                }
                "r" => {
                    r = Some(
                        value
                            .trim()
                            .parse::<f64>()
                            .map_err(|e| bad(e.to_string()))?,
                    )
                }
                "sigma" => {
                    sigma = Some(
                        value
                            .trim()
                            .parse::<f64>()
                            .map_err(|e| bad(e.to_string()))?,
                    )
                }
                "squared" | "squared_norm" => {
                    squared = value
                        .trim()
                        .parse::<bool>()
                        .map_err(|e| bad(e.to_string()))?
                }
                other => {
                    return Err(WqisaError::InvalidWeight(format!(
                        "unknown parameter '{other}'"
                    )))
                }
            }
        }
        let missing = |what: &str| WqisaError::InvalidWeight(format!("{family} needs {what}"));
        let spec = match family.trim() {
            "knn" => WeightSpec::Knn {
                k: k.ok_or_else(|| missing("k"))?,
            },
            "characteristic" => WeightSpec::Characteristic {
                r: r.ok_or_else(|| missing("r"))?,
            },
            "gaussian" => WeightSpec::Gaussian {
                sigma: sigma.ok_or_else(|| missing("sigma"))?,
                squared_norm: squared,
            },
            "exponential" => WeightSpec::Exponential {
                sigma: sigma.ok_or_else(|| missing("sigma"))?,
            },
            "idw" => WeightSpec::Idw,
            other => {
                return Err(WqisaError::InvalidWeight(format!(
                    "unknown family '{other}'"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Nonzero weights of one window, sorted by cloud index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightSet {
    pub entries: Vec<(usize, f64)>,
    /// Number of cloud points whose weight was looked up.
    pub touched: usize,
}

impl WeightSet {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w).sum()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }

    /// Weights divided by their sum; `None` for an empty window.
    pub fn normalized(&self) -> Option<Vec<(usize, f64)>> {
        let total = self.total();
        if !(total > 0.0) {
            return None;
        }
        Some(self.entries.iter().map(|&(i, w)| (i, w / total)).collect())
    }
}

/// Support of a weight window.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Ball { center: Vec<f64>, radius: f64 },
    Points(Vec<usize>),
    Unbounded,
}

/// Predictor coordinates plus a k-d tree, shared by every window evaluation.
#[derive(Debug, Clone)]
pub struct NeighborContext {
    dim: usize,
    coords: Vec<f64>,
    tree: KdTree,
}

impl NeighborContext {
    pub fn new(cloud: &PointCloud) -> Result<Self> {
        Self::from_coords(cloud.predictors().to_vec(), cloud.dim())
    }

    pub fn from_coords(coords: Vec<f64>, dim: usize) -> Result<Self> {
        let tree = KdTree::build(&coords, dim)?;
        Ok(NeighborContext { dim, coords, tree })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tree(&self) -> &KdTree {
        &self.tree
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// `k` clamped to the cloud size.
    pub fn effective_k(&self, k: usize) -> usize {
        k.min(self.len())
    }

    /// Nonzero weights of the window centred at `u`.
    pub fn weights(&self, spec: &WeightSpec, u: &[f64]) -> Result<WeightSet> {
        if u.len() != self.dim {
            return Err(WqisaError::DimensionMismatch {
                expected: self.dim,
                found: u.len(),
            });
        }
        let n = self.len();
        match *spec {
            WeightSpec::Knn { k } => {
                let k = self.effective_k(k);
                let w = 1.0 / k as f64;
                let mut entries: Vec<(usize, f64)> = self
                    .tree
                    .knn(u, k)?
                    .into_iter()
                    .map(|nb| (nb.index, w))
                    .collect();
                entries.sort_by_key(|e| e.0);
                Ok(WeightSet {
                    entries,
                    touched: k,
                })
            }
            WeightSpec::Characteristic { r } => {
                let mut entries: Vec<(usize, f64)> = self
                    .tree
                    .radius_query(u, r)?
                    .into_iter()
                    .map(|nb| (nb.index, 1.0))
                    .collect();
                entries.sort_by_key(|e| e.0);
                let touched = entries.len();
                Ok(WeightSet { entries, touched })
            }
            WeightSpec::Gaussian { .. } | WeightSpec::Exponential { .. } => {
                let d: Vec<f64> = (0..n).map(|i| dist2(self.point(i), u).sqrt()).collect();
                let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
                let base = spec.radial(dmin).expect("radial family");
                let entries = d
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &di)| {
                        let w = rescaled(spec, di, dmin, base);
                        (w > 0.0).then_some((i, w))
                    })
                    .collect();
                Ok(WeightSet {
                    entries,
                    touched: n,
                })
            }
            WeightSpec::Idw => {
                let d2: Vec<f64> = (0..n).map(|i| dist2(self.point(i), u)).collect();
                let coincident: Vec<usize> = (0..n).filter(|&i| d2[i] == 0.0).collect();
                let entries = if coincident.is_empty() {
                    d2.iter()
                        .enumerate()
                        .map(|(i, &v)| (i, 1.0 / v.sqrt()))
                        .collect()
                } else {
                    let w = 1.0 / coincident.len() as f64;
                    coincident.into_iter().map(|i| (i, w)).collect()
                };
                Ok(WeightSet {
                    entries,
                    touched: n,
                })
            }
        }
    }

    /// Support of the window centred at `u`.
    pub fn support(&self, spec: &WeightSpec, u: &[f64]) -> Result<Support> {
        Ok(match *spec {
            WeightSpec::Characteristic { r } => Support::Ball {
                center: u.to_vec(),
                radius: r,
            },
            WeightSpec::Knn { .. } => Support::Points(self.weights(spec, u)?.indices().collect()),
            _ => Support::Unbounded,
        })
    }
}

/// `w(d) / w(dmin)` computed without underflow for the exponential-type kernels.
fn rescaled(spec: &WeightSpec, d: f64, dmin: f64, base: f64) -> f64 {
    match *spec {
        WeightSpec::Gaussian {
            sigma,
            squared_norm,
        } => {
            let (a, b) = if squared_norm {
                (d * d, dmin * dmin)
            } else {
                (d, dmin)
            };
            (-(a - b) / (2.0 * sigma * sigma)).exp()
        }
        WeightSpec::Exponential { sigma } => {
            (-(d - dmin) / (std::f64::consts::SQRT_2 * sigma)).exp()
        }
        _ => spec.radial(d).unwrap_or(0.0) / base,
    }
}

/// Unscaled weight of cloud point `index` in the window centred at `u`.
pub fn weight_eval(
    spec: &WeightSpec,
    u: &[f64],
    index: usize,
    ctx: &NeighborContext,
) -> Result<f64> {
    if index >= ctx.len() {
        return Err(WqisaError::IndexOutOfRange {
            index,
            n: ctx.len(),
        });
    }
    if let Some(w) = spec.radial(dist2(ctx.point(index), u).sqrt()) {
        return Ok(w);
    }
    let set = ctx.weights(spec, u)?;
    Ok(set
        .entries
        .iter()
        .find(|e| e.0 == index)
        .map_or(0.0, |e| e.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> NeighborContext {
        NeighborContext::from_coords(xs.to_vec(), 1).unwrap()
    }

    #[test]
    fn characteristic_indicator() {
        let ctx = line(&[0.5, 1.5]);
        let spec = WeightSpec::Characteristic { r: 1.0 };
        assert_eq!(weight_eval(&spec, &[0.0], 0, &ctx).unwrap(), 1.0);
        assert_eq!(weight_eval(&spec, &[0.0], 1, &ctx).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_at_centre() {
        let ctx = line(&[0.25]);
        let spec = WeightSpec::Gaussian {
            sigma: 1.0,
            squared_norm: false,
        };
        assert_eq!(weight_eval(&spec, &[0.25], 0, &ctx).unwrap(), 1.0);
        assert!((weight_eval(&spec, &[1.25], 0, &ctx).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn knn_weights_on_line() {
        let ctx = line(&[0.0, 1.0, 2.0]);
        let spec = WeightSpec::Knn { k: 2 };
        let w: Vec<f64> = (0..3)
            .map(|i| weight_eval(&spec, &[0.0], i, &ctx).unwrap())
            .collect();
        assert_eq!(w, vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn knn_clamps_k() {
        let ctx = line(&[0.0, 1.0]);
        let set = ctx.weights(&WeightSpec::Knn { k: 5 }, &[0.3]).unwrap();
        assert_eq!(set.entries, vec![(0, 0.5), (1, 0.5)]);
    }

    #[test]
    fn idw_coincidence_branch() {
        let ctx = line(&[1.0, 1.0, 3.0]);
        let set = ctx.weights(&WeightSpec::Idw, &[1.0]).unwrap();
        assert_eq!(set.entries, vec![(0, 0.5), (1, 0.5)]);
        let set = ctx.weights(&WeightSpec::Idw, &[2.0]).unwrap();
        assert_eq!(set.entries, vec![(0, 1.0), (1, 1.0), (2, 1.0)]);
    }

    #[test]
    fn supports() {
        let ctx = line(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(
            ctx.support(&WeightSpec::Characteristic { r: 2.0 }, &[1.0])
                .unwrap(),
            Support::Ball {
                center: vec![1.0],
                radius: 2.0
            }
        );
        match ctx.support(&WeightSpec::Knn { k: 3 }, &[0.0]).unwrap() {
            Support::Points(p) => assert_eq!(p.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
        let g = WeightSpec::Gaussian {
            sigma: 1.0,
            squared_norm: false,
        };
        assert_eq!(ctx.support(&g, &[0.0]).unwrap(), Support::Unbounded);
    }

    #[test]
    fn parse_and_display() {
        for s in [
            "knn:k=9",
            "characteristic:r=0.5",
            "gaussian:sigma=0.2",
            "exponential:sigma=1",
            "idw",
            "gaussian:sigma=0.2,squared=true",
        ] {
            let spec: WeightSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<WeightSpec>().unwrap(), spec);
        }
        assert!("knn".parse::<WeightSpec>().is_err());
        assert!("knn:k=0".parse::<WeightSpec>().is_err());
        assert!("cosine:r=1".parse::<WeightSpec>().is_err());
        assert!("gaussian:sigma=-1".parse::<WeightSpec>().is_err());
    }

    #[test]
    fn rescaled_weights_keep_ratios() {
        let ctx = line(&[0.0, 40.0, 41.0]);
        let spec = WeightSpec::Exponential { sigma: 1e-4 };
        let set = ctx.weights(&spec, &[40.5]).unwrap();
        // raw weights underflow, the rescaled ones do not
        assert_eq!(weight_eval(&spec, &[40.5], 1, &ctx).unwrap(), 0.0);
        assert_eq!(set.entries.len(), 2);
        assert!((set.entries[0].1 - 1.0).abs() < 1e-15);
    }
}
