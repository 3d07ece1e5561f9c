//! Named surfaces: the analytic generators plus surfaces of revolution of fixed profiles.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::geometry::Immersion;
use crate::zoo::{analytic, oscillating_curve, revolution, FamilySpec, Params, PlanarCurve, GENERATORS};

/// Profile samples of the revolved surfaces.
const PROFILE_SAMPLES: usize = 4096;

/// `revolved_circle` (circle of radius 1 about distance 2), `revolved_meridian` (sphere without
/// polar caps), `revolved_line` (cylinder of radius 2) and `oscillating_torus` (the circle
/// perturbed with amplitude `a` and frequency `k`, defaults 1 and 8).
pub const REVOLVED: [&str; 4] = [
    "revolved_circle",
    "revolved_meridian",
    "revolved_line",
    "oscillating_torus",
];

pub(super) fn known(name: &str) -> bool {
    GENERATORS.contains(&name) || REVOLVED.contains(&name)
}

fn circle(tol: &Tolerances) -> Result<PlanarCurve> {
    PlanarCurve::circle(2.0, 0.0, 1.0, PROFILE_SAMPLES, tol)
}

/// Builds `name` on an `n x n` grid.
pub fn surface(name: &str, params: &Params, n: usize, tol: &Tolerances) -> Result<Immersion> {
    if REVOLVED.contains(&name) {
        let allowed: &[&str] = if name == "oscillating_torus" { &["a", "k"] } else { &[] };
        if let Some(key) = params.0.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!("{name}: unknown parameter `{key}`")));
        }
    }
    let param = |key: &str, default: f64| params.0.get(key).copied().unwrap_or(default);
    let revolved = |c: PlanarCurve| {
        let mut im = revolution(&c, n, n, tol)?;
        im.name = name.to_owned();
        Ok(im)
    };
    match name {
        "revolved_circle" => revolved(circle(tol)?),
        "revolved_meridian" => revolved(PlanarCurve::meridian(0.3, PROFILE_SAMPLES, tol)?),
        "revolved_line" => revolved(PlanarCurve::vertical_line(2.0, 4.0, PROFILE_SAMPLES, tol)?),
        "oscillating_torus" => {
            let k = param("k", 8.0);
            if !(k >= 1.0 && k.fract() == 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "oscillating_torus: k must be a positive integer, got {k}"
                )));
            }
            let spec = FamilySpec {
                amplitude: param("a", 1.0),
                k: k as u32,
            };
            revolved(oscillating_curve(&circle(tol)?, spec, tol)?)
        }
        _ => analytic(name, params, n, n, tol),
    }
}
