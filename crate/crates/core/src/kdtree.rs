//! Static k-d tree over predictor coordinates.
//!
//! Nodes split at the median of the axis with the largest spread; buckets of
//! at most [`KD_LEAF_SIZE`] points sit at the leaves. Distances are compared
//! squared and reported as true Euclidean distances.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::constants::KD_LEAF_SIZE;
use crate::error::{Result, WqisaError};

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// A query result: cloud index plus Euclidean distance to the query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    dist2: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KdTree {
    /// Builds a tree over `coords`, a flat row-major array of `dim`-vectors.
    pub fn build(coords: &[f64], dim: usize) -> Result<KdTree> {
        if dim == 0 {
            return Err(WqisaError::InvalidParameter(
                "dimension must be >= 1".into(),
            ));
        }
        if coords.is_empty() {
            return Err(WqisaError::EmptyInput);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(WqisaError::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        let n = coords.len() / dim;
        let mut tree = KdTree {
            dim,
            coords: coords.to_vec(),
            order: (0..n).collect(),
            nodes: Vec::with_capacity(2 * n / KD_LEAF_SIZE + 1),
        };
        tree.build_node(0, n);
        Ok(tree)
    }

    /// Builds from a slice of points.
    pub fn from_points(points: &[Vec<f64>]) -> Result<KdTree> {
        let dim = points.first().ok_or(WqisaError::EmptyInput)?.len();
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(WqisaError::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        KdTree::build(&flat, dim)
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { start, end });
        if end - start <= KD_LEAF_SIZE {
            return id;
        }
        let mut best_axis = 0;
        let mut best_spread = 0.0;
        for axis in 0..self.dim {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[start..end] {
                let v = self.coords[i * self.dim + axis];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > best_spread {
                best_spread = hi - lo;
                best_axis = axis;
            }
        }
        if best_spread <= 0.0 {
            // all points coincide
            return id;
        }
        let mid = start + (end - start) / 2;
        let dim = self.dim;
        let coords = &self.coords;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            coords[a * dim + best_axis]
                .total_cmp(&coords[b * dim + best_axis])
                .then(a.cmp(&b))
        });
        let value = self.coords[self.order[mid] * dim + best_axis];
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis: best_axis,
            value,
            left,
            right,
        };
        id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The `k` nearest points ordered by `(distance, index)`.
    pub fn knn(&self, u: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        if u.len() != self.dim {
            return Err(WqisaError::DimensionMismatch {
                expected: self.dim,
                found: u.len(),
            });
        }
        if k == 0 || k > self.len() {
            return Err(WqisaError::KOutOfRange { k, n: self.len() });
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_node(0, u, k, &mut heap);
        let mut found = heap.into_vec();
        found.sort();
        Ok(found
            .into_iter()
            .map(|c| Neighbor {
                index: c.index,
                distance: c.dist2.sqrt(),
            })
            .collect())
    }

    fn knn_node(&self, node: usize, u: &[f64], k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let c = Candidate {
                        dist2: dist2(self.point(i), u),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("heap holds k items") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = u[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.knn_node(near, u, k, heap);
                // ties at the worst distance must still be visited for the index tie-break
                let worst = heap.peek().map(|c| c.dist2);
                if heap.len() < k || worst.is_some_and(|w| diff * diff <= w) {
                    self.knn_node(far, u, k, heap);
                }
            }
        }
    }

    /// All points within the closed ball of radius `r` around `u`.
    pub fn radius_query(&self, u: &[f64], r: f64) -> Result<Vec<Neighbor>> {
        if u.len() != self.dim {
            return Err(WqisaError::DimensionMismatch {
                expected: self.dim,
                found: u.len(),
            });
        }
        if !(r > 0.0) {
            return Err(WqisaError::InvalidParameter(format!(
                "radius must be positive, got {r}"
            )));
        }
        let mut out = Vec::new();
        self.radius_node(0, u, r * r, &mut out);
        Ok(out)
    }

    fn radius_node(&self, node: usize, u: &[f64], r2: f64, out: &mut Vec<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = dist2(self.point(i), u);
                    if d2 <= r2 {
                        out.push(Neighbor {
                            index: i,
                            distance: d2.sqrt(),
                        });
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = u[axis] - value;
                if diff <= 0.0 || diff * diff <= r2 {
                    self.radius_node(left, u, r2, out);
                }
                if diff >= 0.0 || diff * diff <= r2 {
                    self.radius_node(right, u, r2, out);
                }
            }
        }
    }

    /// Checks the structural invariants; used by tests.
    pub fn validate(&self) -> bool {
        let mut seen = vec![false; self.len()];
        for &i in &self.order {
            if seen[i] {
                return false;
            }
            seen[i] = true;
        }
        seen.iter().all(|&s| s) && self.validate_node(0)
    }

    fn validate_node(&self, node: usize) -> bool {
        match self.nodes[node] {
            Node::Leaf { .. } => true,
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let ok_left = self
                    .subtree_points(left)
                    .iter()
                    .all(|&i| self.point(i)[axis] <= value);
                let ok_right = self
                    .subtree_points(right)
                    .iter()
                    .all(|&i| self.point(i)[axis] >= value);
                ok_left && ok_right && self.validate_node(left) && self.validate_node(right)
            }
        }
    }

    fn subtree_points(&self, node: usize) -> Vec<usize> {
        match self.nodes[node] {
            Node::Leaf { start, end } => self.order[start..end].to_vec(),
            Node::Split { left, right, .. } => {
                let mut v = self.subtree_points(left);
                v.extend(self.subtree_points(right));
                v
            }
        }
    }
}
