//! Macro-scale finite elements: plane-strain bulk, zero-thickness interface
//! elements, and the displacement-controlled Newton driver.

pub mod interface;
pub mod model;
pub mod newton;
pub mod quad4;

pub use model::{
    BulkElement, Constraint, ConstitutiveResponse, GaussState, InterfaceElement, InterfaceLaw,
    MacroModel,
};
pub use newton::{newton_solve, SolveHistory, StepRecord, MAX_NEWTON_ITERATIONS, TOL_NEWTON};
