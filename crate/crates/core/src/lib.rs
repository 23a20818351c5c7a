//! Frames for graded Fréchet spaces: weighted ℓ² gradings, analysis operators,
//! multi-level frame plans, subsequence selection and reconstruction from duals,
//! synthesis operators and projections.

pub mod error;
pub mod frame;
pub mod graded;
pub mod linalg;
pub mod multilevel;
pub mod reconstruction;
pub mod scenario;

pub use error::{FrameError, Result};
pub use frame::{
    analyze, bessel_bound, dense_subset_extension_check, frame_bounds_analytic,
    frame_bounds_numeric, lp_chain_demo, BoundLevels, Coefficients, FrameBounds, FrameForm,
    FrameSystem, GradedSetting, PowerLaw, Tail, Witness,
};
pub use graded::{
    dual_norm, graded_norm, lp_norm, truncation_constant, weighted_norm, DualWeighting,
    GradedVector, WeightGrading, WeightKind, Weighting,
};
pub use linalg::SparseMatrix;
