use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{FitContext, WqisaModel};
use crate::cloud::PointCloud;
use crate::error::Result;

/// Global response bounds and whether every coefficient respects them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalBounds {
    pub lo: f64,
    pub hi: f64,
    pub coefficients_within: bool,
}

pub(super) fn global_bounds(model: &WqisaModel, cloud: &PointCloud) -> GlobalBounds {
    let (lo, hi) = cloud.response_range();
    GlobalBounds {
        lo,
        hi,
        coefficients_within: model.coefficients().iter().all(|&c| c >= lo && c <= hi),
    }
}

impl FitContext {
    /// Context indices of the points carrying weight for any coefficient
    /// active on `cell`.
    pub fn cell_points(&self, cell: &[usize]) -> Result<BTreeSet<usize>> {
        let mut points = BTreeSet::new();
        for flat in self.space.active_block(cell)? {
            points.extend(self.coefficient_window(flat)?.indices());
        }
        Ok(points)
    }

    /// `(alpha, beta)`: extreme responses over the points behind `cell`.
    pub fn local_bounds(&self, cell: &[usize]) -> Result<(f64, f64)> {
        let points = self.cell_points(cell)?;
        Ok(points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let y = self.responses[i];
                (lo.min(y), hi.max(y))
            }))
    }

    /// Sorted cloud indices of every point with nonzero weight for some coefficient.
    pub fn effective_points(&self) -> Result<Vec<usize>> {
        let mut used = vec![false; self.ctx.len()];
        for flat in 0..self.space.dim() {
            for i in self.coefficient_window(flat)?.indices() {
                used[i] = true;
            }
        }
        let mut out: Vec<usize> = used
            .iter()
            .enumerate()
            .filter(|(_, &u)| u)
            .map(|(i, _)| self.original[i])
            .collect();
        out.sort_unstable();
        Ok(out)
    }
}
