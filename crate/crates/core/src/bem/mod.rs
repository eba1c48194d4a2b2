//! Half-space contact of a rough square patch: influence kernel, constrained
//! solvers, and the elastic correction of the resulting p(gₙ) curve.

pub mod cg;
pub mod correction;
pub mod influence;
pub mod nnls;
pub mod solver;

pub use cg::FftKernel;
pub use correction::{
    corrected_pressure, flat_punch_alpha, interpolate_curve, subtract_elastic_curve,
    CorrectedCurve, CorrectionResult, MAX_CORRECTION_ITERATIONS, TOL_CORRECTION,
};
pub use influence::{InfluenceOperator, DENSE_GRID_LIMIT};
pub use nnls::{solve_exhaustive, solve_nnls, NnlsSolution, NnlsWorkspace, TOL_KKT};
pub use solver::{MicroContactSolution, MicroSolver};
