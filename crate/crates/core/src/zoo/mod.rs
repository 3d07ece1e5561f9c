//! Generators of conformal immersions: closed forms, surfaces of revolution, oscillating
//! profile families and concentrating function pairs.
pub mod analytic;
pub mod curve;
pub mod pair;
pub mod revolution;

pub use analytic::{analytic, analytic_on, default_chart, Params, GENERATORS};
pub use curve::{oscillating_curve, CubicSpline, FamilySpec, PlanarCurve};
pub use pair::{concentrating_pair, concentrating_pair_at, Profile};
pub use revolution::revolution;
