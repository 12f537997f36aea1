use serde::{Deserialize, Serialize};

use super::knots::KnotVector;
use crate::error::{Result, WqisaError};

/// Tensor-product spline space: one regular knot vector per axis.
///
/// Coefficients are stored flat in row-major order (axis 0 slowest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<KnotVector>", into = "Vec<KnotVector>")]
pub struct TensorSplineSpace {
    axes: Vec<KnotVector>,
}

impl TryFrom<Vec<KnotVector>> for TensorSplineSpace {
    type Error = WqisaError;
    fn try_from(axes: Vec<KnotVector>) -> Result<Self> {
        TensorSplineSpace::new(axes)
    }
}

impl From<TensorSplineSpace> for Vec<KnotVector> {
    fn from(s: TensorSplineSpace) -> Self {
        s.axes
    }
}

/// Nonzero basis block at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisRow {
    /// Multi-index of the first nonzero basis function on each axis.
    pub first: Vec<usize>,
    /// Block extent per axis, `p_k + 1`.
    pub shape: Vec<usize>,
    /// Tensor-product values, row-major over `shape`.
    pub values: Vec<f64>,
}

impl BasisRow {
    /// Visits `(flat coefficient index, basis value)` for every block entry.
    pub fn for_each(&self, space: &TensorSplineSpace, mut f: impl FnMut(usize, f64)) {
        let strides = space.strides();
        let d = self.shape.len();
        let mut offset = vec![0usize; d];
        for &value in &self.values {
            let flat: usize = (0..d)
                .map(|k| (self.first[k] + offset[k]) * strides[k])
                .sum();
            f(flat, value);
            advance(&mut offset, &self.shape);
        }
    }
}

/// Odometer increment over a row-major box; returns false after wrapping.
pub(crate) fn advance(index: &mut [usize], shape: &[usize]) -> bool {
    for k in (0..shape.len()).rev() {
        index[k] += 1;
        if index[k] < shape[k] {
            return true;
        }
        index[k] = 0;
    }
    false
}

impl TensorSplineSpace {
    pub fn new(axes: Vec<KnotVector>) -> Result<Self> {
        if axes.is_empty() {
            return Err(WqisaError::InvalidParameter(
                "a spline space needs at least one axis".into(),
            ));
        }
        for (k, kv) in axes.iter().enumerate() {
            if kv.degree() < 1 {
                return Err(WqisaError::InvalidDegree(format!(
                    "axis {k} has degree 0; all degrees must be >= 1"
                )));
            }
            if !kv.is_regular() {
                return Err(WqisaError::InvalidKnots(format!(
                    "axis {k} knot vector is not (p+1)-regular"
                )));
            }
        }
        Ok(TensorSplineSpace { axes })
    }

    /// Uniform clamped space over a box: `domain[k] = (a_k, b_k)`.
    pub fn uniform(domain: &[(f64, f64)], n: &[usize], degrees: &[usize]) -> Result<Self> {
        if domain.len() != n.len() || domain.len() != degrees.len() {
            return Err(WqisaError::DimensionMismatch {
                expected: domain.len(),
                found: n.len().min(degrees.len()),
            });
        }
        let axes = domain
            .iter()
            .zip(n)
            .zip(degrees)
            .map(|((&(a, b), &n), &p)| KnotVector::uniform_regular(a, b, n, p))
            .collect::<Result<Vec<_>>>()?;
        TensorSplineSpace::new(axes)
    }

    pub fn axes(&self) -> &[KnotVector] {
        &self.axes
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(KnotVector::dim).collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.axes.iter().map(KnotVector::degree).collect()
    }

    /// Product of per-axis dimensions.
    pub fn dim(&self) -> usize {
        self.axes.iter().map(KnotVector::dim).product()
    }

    pub fn domain(&self) -> Vec<(f64, f64)> {
        self.axes.iter().map(KnotVector::domain).collect()
    }

    pub fn strides(&self) -> Vec<usize> {
        let shape = self.shape();
        let mut strides = vec![1; shape.len()];
        for k in (0..shape.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * shape[k + 1];
        }
        strides
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        self.strides().iter().zip(multi).map(|(s, i)| s * i).sum()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let strides = self.strides();
        strides
            .iter()
            .map(|&s| {
                let i = flat / s;
                flat %= s;
                i
            })
            .collect()
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.ndim()
            && self.axes.iter().zip(u).all(|(kv, &x)| {
                let (a, b) = kv.domain();
                x >= a && x <= b
            })
    }

    /// Projects `u` onto the domain box.
    pub fn clamp(&self, u: &[f64]) -> Vec<f64> {
        self.axes
            .iter()
            .zip(u)
            .map(|(kv, &x)| {
                let (a, b) = kv.domain();
                x.clamp(a, b)
            })
            .collect()
    }

    /// Knot averages of every axis.
    pub fn knot_averages(&self) -> Vec<Vec<f64>> {
        self.axes.iter().map(KnotVector::knot_averages).collect()
    }

    /// Knot-average site of the coefficient with flat index `flat`.
    pub fn site(&self, flat: usize) -> Vec<f64> {
        let averages = self.knot_averages();
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(k, &i)| averages[k][i])
            .collect()
    }

    /// All coefficient sites in flat order.
    pub fn sites(&self) -> Vec<Vec<f64>> {
        let averages = self.knot_averages();
        let shape = self.shape();
        let mut index = vec![0usize; shape.len()];
        let mut out = Vec::with_capacity(self.dim());
        loop {
            out.push(
                index
                    .iter()
                    .enumerate()
                    .map(|(k, &i)| averages[k][i])
                    .collect(),
            );
            if !advance(&mut index, &shape) {
                break;
            }
        }
        out
    }

    /// Span index per axis of the knot interval containing `u`.
    pub fn cell_of(&self, u: &[f64]) -> Result<Vec<usize>> {
        self.check_point(u)?;
        self.axes
            .iter()
            .zip(u)
            .map(|(kv, &x)| kv.find_span(x))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| WqisaError::OutOfDomain { point: u.to_vec() })
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.ndim() {
            return Err(WqisaError::DimensionMismatch {
                expected: self.ndim(),
                found: u.len(),
            });
        }
        Ok(())
    }

    /// Nonzero tensor-product basis values at `u`.
    pub fn basis_row(&self, u: &[f64]) -> Result<BasisRow> {
        self.check_point(u)?;
        let mut first = Vec::with_capacity(self.ndim());
        let mut shape = Vec::with_capacity(self.ndim());
        let mut factors = Vec::with_capacity(self.ndim());
        for (kv, &x) in self.axes.iter().zip(u) {
            let mu = kv
                .find_span(x)
                .map_err(|_| WqisaError::OutOfDomain { point: u.to_vec() })?;
            let p = kv.degree();
            first.push(mu - p);
            shape.push(p + 1);
            factors.push(kv.basis_funs(mu, x));
        }
        let mut values = vec![1.0];
        for f in &factors {
            values = values
                .iter()
                .flat_map(|&v| f.iter().map(move |&b| v * b))
                .collect();
        }
        Ok(BasisRow {
            first,
            shape,
            values,
        })
    }

    /// Tensor-product basis function `multi` at `u` by direct evaluation of
    /// every univariate factor.
    pub fn eval_basis(&self, multi: &[usize], u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        let mut v = 1.0;
        for ((kv, &i), &x) in self.axes.iter().zip(multi).zip(u) {
            v *= kv.eval_basis(i, x)?;
        }
        Ok(v)
    }

    /// Coefficient multi-ranges active on cell `mu` (per axis `mu_k - p_k ..= mu_k`).
    pub fn active_block(&self, cell: &[usize]) -> Result<Vec<usize>> {
        if cell.len() != self.ndim() {
            return Err(WqisaError::DimensionMismatch {
                expected: self.ndim(),
                found: cell.len(),
            });
        }
        for (k, (kv, &mu)) in self.axes.iter().zip(cell).enumerate() {
            if mu < kv.degree() || mu >= kv.dim() {
                return Err(WqisaError::InvalidParameter(format!(
                    "cell index {mu} on axis {k} outside {}..{}",
                    kv.degree(),
                    kv.dim()
                )));
            }
        }
        let shape: Vec<usize> = self.axes.iter().map(|kv| kv.degree() + 1).collect();
        let strides = self.strides();
        let mut offset = vec![0usize; shape.len()];
        let mut out = Vec::new();
        loop {
            let flat: usize = (0..shape.len())
                .map(|k| (cell[k] - self.axes[k].degree() + offset[k]) * strides[k])
                .sum();
            out.push(flat);
            if !advance(&mut offset, &shape) {
                break;
            }
        }
        Ok(out)
    }

    /// Every cell (span multi-index) of the space.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let lo: Vec<usize> = self.axes.iter().map(KnotVector::degree).collect();
        let extent: Vec<usize> = self.axes.iter().map(|kv| kv.dim() - kv.degree()).collect();
        let mut offset = vec![0usize; extent.len()];
        let mut out = Vec::new();
        loop {
            let cell: Vec<usize> = lo.iter().zip(&offset).map(|(l, o)| l + o).collect();
            // skip empty knot intervals (interior multiplicity > 1)
            let nonempty = self
                .axes
                .iter()
                .zip(&cell)
                .all(|(kv, &mu)| kv.knots()[mu] < kv.knots()[mu + 1]);
            if nonempty {
                out.push(cell);
            }
            if !advance(&mut offset, &extent) {
                break;
            }
        }
        out
    }
}

/// A spline in a tensor-product space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineFunction {
    space: TensorSplineSpace,
    coefficients: Vec<f64>,
}

impl SplineFunction {
    pub fn new(space: TensorSplineSpace, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != space.dim() {
            return Err(WqisaError::DimensionMismatch {
                expected: space.dim(),
                found: coefficients.len(),
            });
        }
        Ok(SplineFunction {
            space,
            coefficients,
        })
    }

    pub fn space(&self) -> &TensorSplineSpace {
        &self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        let row = self.space.basis_row(u)?;
        let mut acc = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        row.for_each(&self.space, |flat, b| {
            let c = self.coefficients[flat];
            acc += c * b;
            if b > 0.0 {
                lo = lo.min(c);
                hi = hi.max(c);
            }
        });
        // a convex combination of the active coefficients; clamp away rounding
        Ok(if lo <= hi { acc.clamp(lo, hi) } else { acc })
    }

    /// Inserts knot `z` on `axis`, returning the same function in the refined space.
    pub fn insert_knot(&self, axis: usize, z: f64) -> Result<SplineFunction> {
        let d = self.space.ndim();
        if axis >= d {
            return Err(WqisaError::IndexOutOfRange { index: axis, n: d });
        }
        let kv = &self.space.axes()[axis];
        let (a, b) = kv.domain();
        if !(z > a && z < b) {
            return Err(WqisaError::KnotOutsideDomain { z, a, b });
        }
        let p = kv.degree();
        let multiplicity = kv.multiplicity(z) + 1;
        if multiplicity > p + 1 {
            return Err(WqisaError::MultiplicityOverflow {
                z,
                multiplicity,
                max: p + 1,
            });
        }
        let t = kv.knots();
        let n = kv.dim();
        let mu = kv.find_span(z)?;
        let alphas: Vec<f64> = (mu + 1 - p..=mu)
            .map(|i| (z - t[i]) / (t[i + p] - t[i]))
            .collect();

        let mut axes = self.space.axes().to_vec();
        axes[axis] = kv.with_knot(z)?;
        let refined = TensorSplineSpace::new(axes)?;

        let shape = self.space.shape();
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let mut coefficients = vec![0.0; refined.dim()];
        for o in 0..outer {
            for r in 0..inner {
                let old = |i: usize| self.coefficients[(o * n + i) * inner + r];
                for i in 0..=n {
                    let value = if i + p <= mu {
                        old(i)
                    } else if i > mu {
                        old(i - 1)
                    } else {
                        let alpha = alphas[i + p - mu - 1];
                        alpha * old(i) + (1.0 - alpha) * old(i - 1)
                    };
                    coefficients[(o * (n + 1) + i) * inner + r] = value;
                }
            }
        }
        SplineFunction::new(refined, coefficients)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{INSERTION_TOL, PARTITION_TOL};

    fn space_1d(n: usize, p: usize) -> TensorSplineSpace {
        TensorSplineSpace::uniform(&[(0.0, 1.0)], &[n], &[p]).unwrap()
    }

    #[test]
    fn univariate_left_boundary_row() {
        let row = space_1d(3, 2).basis_row(&[0.0]).unwrap();
        assert_eq!(row.first, vec![0]);
        assert_eq!(row.values, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn bivariate_corner_row() {
        let s = TensorSplineSpace::uniform(&[(0.0, 1.0), (0.0, 1.0)], &[5, 4], &[2, 2]).unwrap();
        let row = s.basis_row(&[0.0, 0.0]).unwrap();
        assert_eq!(row.first, vec![0, 0]);
        assert_eq!(row.values[0], 1.0);
        assert!(row.values[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn out_of_domain_row() {
        assert!(matches!(
            space_1d(4, 2).basis_row(&[1.5]),
            Err(WqisaError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn row_sums_to_one() {
        let s = TensorSplineSpace::uniform(&[(-1.0, 2.0), (0.0, 5.0)], &[7, 6], &[3, 1]).unwrap();
        for i in 0..50 {
            let u = [
                -1.0 + 3.0 * (i as f64) / 49.0,
                5.0 * ((i * 7) % 50) as f64 / 49.0,
            ];
            let row = s.basis_row(&u).unwrap();
            let sum: f64 = row.values.iter().sum();
            assert!((sum - 1.0).abs() <= PARTITION_TOL);
            assert!(row.values.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn constant_coefficients() {
        let s = TensorSplineSpace::uniform(&[(0.0, 1.0), (0.0, 1.0)], &[5, 4], &[2, 3]).unwrap();
        let f = SplineFunction::new(s.clone(), vec![7.0; s.dim()]).unwrap();
        for u in [[0.0, 0.0], [0.3, 0.9], [1.0, 1.0], [0.5, 0.25]] {
            assert!((f.eval(&u).unwrap() - 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_coefficient_matches_basis() {
        let s = space_1d(6, 2);
        let mut c = vec![0.0; 6];
        c[2] = 1.0;
        let f = SplineFunction::new(s.clone(), c).unwrap();
        for j in 0..=40 {
            let x = j as f64 / 40.0;
            let direct = s.axes()[0].eval_basis(2, x).unwrap();
            assert!((f.eval(&[x]).unwrap() - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn wrong_coefficient_count() {
        assert!(SplineFunction::new(space_1d(4, 2), vec![0.0; 3]).is_err());
    }

    #[test]
    fn constant_survives_insertion() {
        let s = space_1d(5, 2);
        let f = SplineFunction::new(s, vec![3.5; 5]).unwrap();
        let g = f.insert_knot(0, 0.41).unwrap();
        assert_eq!(g.coefficients().len(), 6);
        assert!(g.coefficients().iter().all(|&c| (c - 3.5).abs() < 1e-15));
    }

    #[test]
    fn insertion_errors() {
        let s = space_1d(4, 1);
        let f = SplineFunction::new(s, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            f.insert_knot(0, 1.0),
            Err(WqisaError::KnotOutsideDomain { .. })
        ));
        let interior = f.space().axes()[0].knots()[2];
        let once = f.insert_knot(0, interior).unwrap();
        assert!(matches!(
            once.insert_knot(0, interior),
            Err(WqisaError::MultiplicityOverflow { .. })
        ));
    }

    #[test]
    fn insertion_on_second_axis() {
        let s = TensorSplineSpace::uniform(&[(0.0, 1.0), (0.0, 2.0)], &[4, 5], &[2, 2]).unwrap();
        let c: Vec<f64> = (0..s.dim()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let f = SplineFunction::new(s, c).unwrap();
        let g = f.insert_knot(1, 0.77).unwrap();
        assert_eq!(g.space().shape(), vec![4, 6]);
        for i in 0..=20 {
            for j in 0..=20 {
                let u = [i as f64 / 20.0, 2.0 * j as f64 / 20.0];
                assert!((f.eval(&u).unwrap() - g.eval(&u).unwrap()).abs() <= INSERTION_TOL);
            }
        }
    }

    #[test]
    fn cells_and_active_block() {
        let s = TensorSplineSpace::uniform(&[(0.0, 1.0), (0.0, 1.0)], &[4, 3], &[2, 2]).unwrap();
        assert_eq!(s.cells().len(), 2);
        let block = s.active_block(&[3, 2]).unwrap();
        assert_eq!(block.len(), 9);
        assert_eq!(*block.last().unwrap(), s.dim() - 1);
        assert!(s.active_block(&[1, 2]).is_err());
    }
}
