//! Bers metrics on grid charts: differentiation, the Bers Laplacian,
//! bi-complex projections and curvature checks.

mod beltrami;
mod field;
mod grid;
mod metric;

pub use beltrami::{bers_from_quadratic_perturbation, log_identity_defect, perturbation_identity_defect};
pub use field::{FieldC, OneFormC};
pub use grid::{Backend, Deriv, Grid};
pub use metric::{log_field, ComplexMetricField, MU_LIMIT, POINCARE_HALF_WIDTH};
