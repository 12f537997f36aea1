use serde::{Deserialize, Serialize};

use crate::error::{Result, WqisaError};

/// A degree plus a nondecreasing global knot sequence.
///
/// Indices are zero-based throughout: basis function `i` lives on the local
/// knots `knots[i..=i + degree + 1]`, and the spline domain is
/// `[knots[degree], knots[n]]` where `n` is the basis dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKnotVector", into = "RawKnotVector")]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawKnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl TryFrom<RawKnotVector> for KnotVector {
    type Error = WqisaError;
    fn try_from(raw: RawKnotVector) -> Result<Self> {
        KnotVector::new(raw.degree, raw.knots)
    }
}

impl From<KnotVector> for RawKnotVector {
    fn from(kv: KnotVector) -> Self {
        RawKnotVector {
            degree: kv.degree,
            knots: kv.knots,
        }
    }
}

impl KnotVector {
    /// Validates and wraps a knot sequence.
    ///
    /// Requires finite, nondecreasing knots, at least one basis function and
    /// no knot value repeated more than `degree + 1` times.
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        if knots.len() < degree + 2 {
            return Err(WqisaError::InvalidKnots(format!(
                "degree {} needs at least {} knots, got {}",
                degree,
                degree + 2,
                knots.len()
            )));
        }
        if knots.iter().any(|t| !t.is_finite()) {
            return Err(WqisaError::InvalidKnots("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(WqisaError::InvalidKnots(
                "knots must be nondecreasing".into(),
            ));
        }
        let mut run = 1;
        for w in knots.windows(2) {
            if w[1] == w[0] {
                run += 1;
                if run > degree + 1 {
                    return Err(WqisaError::InvalidKnots(format!(
                        "knot {} occurs more than {} times",
                        w[0],
                        degree + 1
                    )));
                }
            } else {
                run = 1;
            }
        }
        Ok(KnotVector { degree, knots })
    }

    /// Clamped uniform knot vector on `[a, b]` with `n` basis functions.
    pub fn uniform_regular(a: f64, b: f64, n: usize, degree: usize) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(WqisaError::InvalidDomain { a, b });
        }
        if degree < 1 {
            return Err(WqisaError::InvalidDegree(
                "regular knot vectors need degree >= 1".into(),
            ));
        }
        if n < degree + 1 {
            return Err(WqisaError::TooFewFunctions { n, degree });
        }
        let spans = n - degree;
        let mut knots = Vec::with_capacity(n + degree + 1);
        knots.extend(std::iter::repeat_n(a, degree + 1));
        for j in 1..spans {
            knots.push(a + (b - a) * (j as f64) / (spans as f64));
        }
        knots.extend(std::iter::repeat_n(b, degree + 1));
        KnotVector::new(degree, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions.
    pub fn dim(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// `(a, b)` with `a = knots[p]`, `b = knots[n]`.
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[self.degree], self.knots[self.dim()])
    }

    /// True for (p+1)-regular vectors: clamped ends and `t_j < t_{j+p+1}`.
    pub fn is_regular(&self) -> bool {
        let p = self.degree;
        let n = self.dim();
        let t = &self.knots;
        n > p && t[0] == t[p] && t[n] == t[n + p] && (0..n).all(|j| t[j] < t[j + p + 1])
    }

    pub fn multiplicity(&self, z: f64) -> usize {
        self.knots.iter().filter(|&&t| t == z).count()
    }

    /// Span index `mu` with `knots[mu] <= x < knots[mu + 1]`, `p <= mu < n`.
    ///
    /// At the right end of the domain the last nonempty span is returned so
    /// that evaluation there is the left limit.
    pub fn find_span(&self, x: f64) -> Result<usize> {
        let (a, b) = self.domain();
        if !(a < b) || !(x >= a && x <= b) {
            return Err(WqisaError::OutOfDomain { point: vec![x] });
        }
        let t = &self.knots;
        let mu = if x == b {
            t.partition_point(|&k| k < x) - 1
        } else {
            t.partition_point(|&k| k <= x) - 1
        };
        Ok(mu.clamp(self.degree, self.dim() - 1))
    }

    /// The `p + 1` basis values nonzero on span `mu` (triangular recurrence).
    pub fn basis_funs(&self, mu: usize, x: f64) -> Vec<f64> {
        let p = self.degree;
        let t = &self.knots;
        let mut values = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        values[0] = 1.0;
        for j in 1..=p {
            left[j] = x - t[mu + 1 - j];
            right[j] = t[mu + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = values[r] / (right[r + 1] + left[j - r]);
                values[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            values[j] = saved;
        }
        values
    }

    /// Value of basis function `i` at `x`, by the recursive definition on its
    /// local knots with the `0/0 = 0` convention.
    ///
    /// The degree-0 pieces are half-open `[t_j, t_{j+1})`, except at the right
    /// end `x = knots[n]` where the left limit is taken.
    pub fn eval_basis(&self, i: usize, x: f64) -> Result<f64> {
        let n = self.dim();
        if i >= n {
            return Err(WqisaError::IndexOutOfRange { index: i, n });
        }
        let p = self.degree;
        let local = &self.knots[i..=i + p + 1];
        if x < local[0] || x > local[p + 1] {
            return Ok(0.0);
        }
        let left_limit = x == self.knots[n];
        let mut table: Vec<f64> = (0..=p)
            .map(|j| {
                let inside = if left_limit {
                    local[j] < x && x <= local[j + 1]
                } else {
                    local[j] <= x && x < local[j + 1]
                };
                if inside {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        for q in 1..=p {
            for j in 0..=(p - q) {
                let d1 = local[j + q] - local[j];
                let d2 = local[j + q + 1] - local[j + 1];
                let a = if d1 > 0.0 {
                    (x - local[j]) / d1 * table[j]
                } else {
                    0.0
                };
                let b = if d2 > 0.0 {
                    (local[j + q + 1] - x) / d2 * table[j + 1]
                } else {
                    0.0
                };
                table[j] = a + b;
            }
        }
        Ok(table[0])
    }

    /// Greville abscissae: the mean of the `p` knots following `t_i`.
    ///
    /// Degree-0 vectors use interval midpoints.
    pub fn knot_averages(&self) -> Vec<f64> {
        let p = self.degree;
        let t = &self.knots;
        (0..self.dim())
            .map(|i| {
                if p == 0 {
                    return t[i] + 0.5 * (t[i + 1] - t[i]);
                }
                // offsets from the first knot keep equal runs exact
                let base = t[i + 1];
                let offset: f64 = t[i + 1..=i + p].iter().map(|&k| k - base).sum();
                base + offset / p as f64
            })
            .collect()
    }

    /// Knot vector with `z` inserted once.
    pub(crate) fn with_knot(&self, z: f64) -> Result<KnotVector> {
        let pos = self.knots.partition_point(|&k| k <= z);
        let mut knots = self.knots.clone();
        knots.insert(pos, z);
        KnotVector::new(self.degree, knots)
    }
}
