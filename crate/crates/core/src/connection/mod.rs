//! Flat connections built from Toda solutions, their curvature and holonomy.

mod form;
mod holonomy;

pub use form::{
    assemble_connection, assemble_raw, cartan_part, commutator_identity_defect, default_rep_kind, higgs_bar,
    marginal_connection, AlgebraField, Basepoint, ConnectionForm,
};
pub use holonomy::{
    commutator_norm, curvature, exact_abelian, holonomy, trace_invariants, GridPath, HolonomyResult, HOLONOMY_TOL,
};
