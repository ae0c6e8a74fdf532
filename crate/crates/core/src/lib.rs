//! Minimum-derivative spline trajectories with linear complexity in the number
//! of segments.
//!
//! The crate is organized bottom-up:
//!
//! * [`spline`] holds the monomial basis machinery on the normalized segment
//!   domain `rho in [-1, 1]`, interpolation pins and spline evaluation.
//! * [`fixed_time`] solves the equality-constrained QP for a fixed knot
//!   schedule with a block-tridiagonal elimination, plus a dense KKT oracle.
//! * [`variable_time`] optimizes the half-durations of the segments with the
//!   analytic gradient, and with finite-difference and random-search baselines.
//! * [`multidim`] couples several splines through a shared knot schedule.
//! * [`rrt`] is an RRT* planner whose edge cost is the snap of the spline
//!   through the root path, with a Euclidean-distance RRT* for comparison.
//!
//! Everything up to [`multidim`] is generic over the scalar type (`f32` or
//! `f64`); the planner works in `f64`.

pub mod error;
pub mod fixed_time;
pub mod multidim;
pub mod rrt;
pub mod scalar;
pub mod spline;
pub mod variable_time;

pub use error::{Error, Result};
pub use fixed_time::{
    solve_dense_oracle, solve_fixed_time, DenseKkt, FixedTimeProblem, FixedTimeSolution,
    FixedTimeSolver, SegmentBasis, SegmentBlocks,
};
pub use multidim::{
    multidim_cost_and_grad, sample_flat_outputs, solve_multidim, Dimension, FlatSamples,
    FlatTrajectory, MultiDimProblem,
};
pub use scalar::Scalar;
pub use spline::{expand_pins, Pin, PinExpansion, PinSet, Spline, TimeAllocation};
pub use variable_time::{
    solve_variable_time, Method, Mode, OptimizerConfig, OptimizerTrace, SplineObjective,
    TimeObjective, VariableTimeResult,
};

/// Double-precision spline.
pub type Spline64 = Spline<f64>;
/// Single-precision spline.
pub type Spline32 = Spline<f32>;
pub type TimeAllocation64 = TimeAllocation<f64>;
pub type PinSet64 = PinSet<f64>;
pub type FixedTimeProblem64 = FixedTimeProblem<f64>;
pub type FixedTimeSolution64 = FixedTimeSolution<f64>;
pub type OptimizerConfig64 = OptimizerConfig<f64>;
pub type MultiDimProblem64 = MultiDimProblem<f64>;
pub type FlatTrajectory64 = FlatTrajectory<f64>;
