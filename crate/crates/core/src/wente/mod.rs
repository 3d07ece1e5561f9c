//! Compensated-compactness workbench: Jacobians, the Dirichlet problem on the unit disc,
//! extension by inversion, Newtonian potentials and the operators `d_ij Delta^-2`.
pub mod check;
pub mod grid;
pub mod poisson;
pub mod spectral;
pub mod whitney;

pub use check::{three_term, wente_check, ThreeTerm, WenteReport};
pub use grid::{jacobian, DiscField, PlaneGrid};
pub use poisson::{dirichlet_energy_norm, poisson_dirichlet, PoissonSolution};
pub use spectral::{
    newtonian_potential, riesz_second, riesz_second_report, riesz_spatial, riesz_spectral, RieszResult, Which,
};
pub use whitney::{extension_energy, whitney_extend, ExtensionEnergy};
