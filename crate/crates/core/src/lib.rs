//! Lie-theoretic data, complex affine Toda solver, flat connections,
//! holonomy, Goldman pairing and oper checks on periodic charts.

pub mod connection;
pub mod error;
pub mod geometry;
pub mod goldman;
pub mod io;
pub mod lie;
pub mod opers;
pub mod suite;
pub mod toda;

pub use error::{Error, Result};
pub use num_complex::Complex64;
