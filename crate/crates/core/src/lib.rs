//! Numerical Finsler geometry on a single coordinate chart.

pub mod ad;
pub mod connections;
pub mod curve;
pub mod descriptor;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod metric;
pub mod oracle;
pub mod ode;
pub mod spray;
pub mod submanifold;
pub mod sweep;
pub mod tensor;
pub mod variational;

pub use error::{FinslerError, Result};
