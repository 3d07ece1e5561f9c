//! Numerical laboratory for isothermic surfaces, Willmore-type conservation laws and
//! Wente-type compensated-compactness estimates.

// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Grid kernels index several arrays with the same node counters.
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod convergence;
pub mod defect;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod files;
pub mod geometry;
pub mod grid;
pub mod multivector;
pub mod par;
pub mod plot;
pub mod report;
pub mod runner;
pub mod wente;
pub mod zoo;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use geometry::{Immersion, SurfaceGeometry};
pub use grid::{Axis, Field, GridChart, Norms};
pub use multivector::Multivector;
