//! Calibrated monotonic lattice regression.
//!
//! A model passes each raw feature through a learned one-dimensional
//! calibrator into the domain of a look-up table, then interpolates the
//! table. Monotonicity in chosen features is enforced with linear
//! inequalities between adjacent table entries, kept feasible during
//! projected stochastic gradient descent.
//!
//! ```
//! use monolattice::{evaluate, InterpolationKind, LatticeShape};
//!
//! let shape = LatticeShape::binary(2).unwrap();
//! let theta = [0.0, 1.0, 1.0, 0.0];
//! let f = evaluate(&theta, &shape, &[0.5, 0.5], InterpolationKind::Multilinear).unwrap();
//! assert!((f - 0.5).abs() < 1e-12);
//! ```

pub mod calibration;
pub mod data;
pub mod error;
pub mod interpolation;
pub mod model;
pub mod monotonicity;
pub mod regularizers;
pub mod shape;
pub mod timing;
pub mod training;

pub use calibration::{
    build_calibrator_constraints, fit_knots, init_calibrators, CategoricalCalibrator, FeatureCalibrator,
    FeatureKind, FeatureSpec, MissingPolicy, PiecewiseLinearCalibrator, Schema, Transform, UnseenPolicy,
};
pub use data::{CsvOptions, Dataset, PairDataset, PairFormat, TrainingData, Value};
pub use error::{Error, Result};
pub use interpolation::{
    evaluate, input_gradient, interpolation_weights, multilinear_weights, multilinear_weights_naive, simplex_weights,
    InterpolationKind, Interpolator, SparseWeights,
};
pub use model::{Metadata, Metrics, Model};
pub use monotonicity::{
    build_constraints, build_constraints_with_missing, check_monotonic, project_exact, project_update,
    ConstraintSet, Direction, MonotonicitySpec, Violation,
};
pub use regularizers::{regularizer_terms, RegularizerConfig, RegularizerKind, RegularizerTerms, SampleCount};
pub use shape::{CellLocation, LatticeShape};
pub use training::{init_lattice, objective, parallel_train, sgd_step, train, Loss, TrainConfig};
