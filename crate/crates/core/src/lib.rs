//! Persistent homology of point clouds and finite metric spaces, together
//! with the geometric quantities that bound lifespans and extinction times
//! of homology classes: Kolmogorov widths, core displacements, spread,
//! convexity and hyperconvexity deficiencies.

pub mod complexes;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod metric;
pub mod persistence;
pub mod widths;

pub use error::{Error, Result};
