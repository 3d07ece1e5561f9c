//! Wente-type bounds for Jacobian Poisson problems and the three-term splitting of
//! `int psi d1 phi d2 phi` used to pass to the limit in products of potentials.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::Result;
use crate::wente::grid::{jacobian, DiscField};
use crate::wente::poisson::{dirichlet_energy_norm, poisson_dirichlet};
use crate::wente::spectral::{newtonian_potential, riesz_spatial, Which};

/// Ratios `||phi||_inf / (||grad a|| ||grad b||)` and `||grad phi||_2 / (||grad a|| ||grad b||)`
/// for `phi` solving `Delta phi = J(a, b)` with zero boundary values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WenteReport {
    pub phi_sup: f64,
    pub phi_dirichlet: f64,
    pub alpha_dirichlet: f64,
    pub beta_dirichlet: f64,
    pub ratio_sup: f64,
    pub ratio_dirichlet: f64,
    /// A Dirichlet norm of the data vanishes; the ratios are reported as 0.
    pub degenerate: bool,
    pub solver_iterations: usize,
}

pub fn wente_check(alpha: &DiscField, beta: &DiscField, tol: &Tolerances) -> Result<WenteReport> {
    let omega = jacobian(alpha, beta)?;
    let sol = poisson_dirichlet(&omega, tol)?;
    let phi_sup = sol.phi.disc_max_abs();
    let phi_dirichlet = dirichlet_energy_norm(&sol, &omega);
    let alpha_dirichlet = alpha.disc_dirichlet_norm();
    let beta_dirichlet = beta.disc_dirichlet_norm();
    let denom = alpha_dirichlet * beta_dirichlet;
    let degenerate = !(denom > 1e-300);
    let (ratio_sup, ratio_dirichlet) = if degenerate {
        log::warn!("wente_check: degenerate data, a Dirichlet norm vanishes");
        (0.0, 0.0)
    } else {
        (phi_sup / denom, phi_dirichlet / denom)
    };
    Ok(WenteReport {
        phi_sup,
        phi_dirichlet,
        alpha_dirichlet,
        beta_dirichlet,
        ratio_sup,
        ratio_dirichlet,
        degenerate,
        solver_iterations: sol.iterations,
    })
}

/// `int psi d1 phi d2 phi = -int d1 psi phi d2 phi + int [D(psi w) - psi phi] d12 phi
/// - int psi w d12 D^-2 w`, with `phi = D w`, `D` the Newtonian potential.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ThreeTerm {
    pub lhs: f64,
    pub boundary: f64,
    pub commutator: f64,
    pub biharmonic: f64,
    /// `|lhs - (boundary + commutator - biharmonic)|` relative to the largest term.
    pub residual: f64,
}

pub fn three_term(psi: &DiscField, omega: &DiscField) -> Result<ThreeTerm> {
    psi.check_same_grid(omega)?;
    let phi = newtonian_potential(omega)?;
    let (p1, p2) = phi.gradient();
    let p12 = phi.d12();
    let (psi1, _) = psi.gradient();
    let psi_omega = psi.zip_with(omega, |a, b| a * b);
    let inner = newtonian_potential(&psi_omega)?;
    let bi = riesz_spatial(omega, Which::Cross);
    let n = psi.grid.len();
    let product = |f: &dyn Fn(usize) -> f64| {
        DiscField {
            grid: psi.grid,
            values: (0..n).map(f).collect(),
        }
        .box_integral()
    };
    let lhs = product(&|i| psi.values[i] * p1.values[i] * p2.values[i]);
    let boundary = -product(&|i| psi1.values[i] * phi.values[i] * p2.values[i]);
    let commutator = product(&|i| (inner.values[i] - psi.values[i] * phi.values[i]) * p12.values[i]);
    let biharmonic = product(&|i| psi_omega.values[i] * bi.values[i]);
    let scale = [lhs, boundary, commutator, biharmonic]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = if scale > 0.0 {
        (lhs - (boundary + commutator - biharmonic)).abs() / scale
    } else {
        0.0
    };
    Ok(ThreeTerm {
        lhs,
        boundary,
        commutator,
        biharmonic,
        residual,
    })
}
