//! The complex affine Toda system: residuals, Jacobians, constant solutions
//! and a continuation Newton solver.

mod linear;
mod newton;
mod problem;
mod residual;

pub use linear::{condition_estimate, dense_jacobian, gmres, GmresOutcome, LinearSolver};
pub use newton::{newton_solve, NewtonOptions, NewtonReport, StageReport, TodaSolution};
pub use problem::{symmetry_reduce, TodaForm, TodaProblem};
pub use residual::{
    constant_start, jacobian_apply, reduced_constant_solution, residual, u_fields, u_minus_delta,
    unreduced_constant_solution,
};
