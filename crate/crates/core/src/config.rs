//! Tolerances shared by the operators. Defaults are the documented values; experiments may
//! override any of them from a configuration file.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Conformality residual certified by analytic generators at generation time.
    pub conformal_analytic: f64,
    /// Conformality residual certified by curve-driven generators.
    pub conformal_curve: f64,
    /// Coefficient `c` of the `c * h^2` allowance added to the discrete conformality gate.
    pub conformal_discretization: f64,
    /// Relative wedge norm below which the differential is considered rank deficient.
    pub rank_eps: f64,
    /// Gate on the interior maximum of |Im H0| (f = 1) for operators that need (II.4)-type hypotheses.
    pub isothermic_gate: f64,
    /// Loop-closure and isothermic pre-gate of the Christoffel dual.
    pub closure: f64,
    /// Speed tolerance for unit-speed planar curves.
    pub curve_speed: f64,
    /// Minimal distance to the rotation axis for profile curves.
    pub r_min: f64,
    /// Relative conservation residual allowed before potentials are reconstructed.
    pub integrability: f64,
    /// Relative residual of the conjugate-gradient Poisson solve.
    pub solver_rel: f64,
    /// Iteration cap of the Poisson solve.
    pub solver_max_iter: usize,
    /// Relative L2 disagreement allowed between the two kernel paths.
    pub kernel_paths: f64,
    /// Interior margin (nodes) on non-periodic axes for all residual norms.
    pub margin: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            conformal_analytic: 1e-6,
            conformal_curve: 1e-3,
            conformal_discretization: 10.0,
            rank_eps: 1e-12,
            isothermic_gate: 1e-3,
            closure: 1e-3,
            curve_speed: 1e-8,
            r_min: 1e-3,
            integrability: 5e-2,
            solver_rel: 1e-11,
            solver_max_iter: 20_000,
            kernel_paths: 1e-2,
            margin: 2,
        }
    }
}
