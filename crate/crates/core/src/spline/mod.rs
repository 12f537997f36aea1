//! Knot vectors, B-spline bases and tensor-product splines.

mod knots;
mod tensor;

pub use knots::KnotVector;
pub use tensor::{BasisRow, SplineFunction, TensorSplineSpace};

pub(crate) use tensor::advance;
