//! Gradient estimation for black-box scalar fields in 2D and 3D.
//!
//! Directional derivatives (central difference or complex step) are taken
//! along the vectors of a uniformly distributed direction set and combined
//! into a gradient by one of four estimators: single-axis, multi-axis,
//! multi-vector, or the derivative-free Hart multisample sum for
//! inside/outside fields. [`analysis`] compares the estimates with analytic
//! gradients and benchmarks step sizes.

pub mod analysis;
pub mod cli;
pub mod deriv;
pub mod directions;
pub mod error;
pub mod estimate;
pub mod field;
pub mod vector;

pub use deriv::{central_diff, complex_step, complex_step_line_avg, directional, DerivEstimate, DerivKind};
pub use directions::{
    find_orthonormal_frames, polygon_set, polyhedron_set, random_rotation, rotate_set, validate_set, DirectionSet,
    OrthonormalFrame, Polyhedron, RotationMatrix, SetReport, SetSource, Span,
};
pub use error::{Error, Result};
pub use estimate::{
    estimate, hart_multisample, multi_axis, multi_vector, single_axis, DirectionSource, EstimatorConfig, GradientEstimate,
    Method,
};
pub use field::{corpus_field, unit_gradient, CorpusField, FnField, ScalarField};
pub use vector::{Point, UnitVector};
