//! Surfaces of revolution in isothermal coordinates `(theta, t)`, `dt = ds / r`.

use std::f64::consts::PI;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::geometry::Immersion;
use crate::grid::{Field, GridChart};
use crate::zoo::curve::PlanarCurve;

/// Rotates `curve` about the vertical axis: `(theta, t) -> (r cos theta, r sin theta, z)`,
/// with `theta` periodic on `n1` nodes and `t` on `n2` nodes (periodic for closed curves).
pub fn revolution(curve: &PlanarCurve, n1: usize, n2: usize, tol: &Tolerances) -> Result<Immersion> {
    if let Some((i, r)) = curve.r.iter().enumerate().find(|(_, r)| !(**r >= tol.r_min)) {
        return Err(Error::InvalidCurve(format!("r[{i}] = {r} below r_min = {}", tol.r_min)));
    }
    let dev = curve.speed_deviation();
    if dev > tol.curve_speed {
        return Err(Error::InvalidCurve(format!(
            "not unit speed: max |speed - 1| = {dev:.3e} exceeds {:.1e}",
            tol.curve_speed
        )));
    }
    let (cum, total) = curve.conformal_coordinate();
    let chart = GridChart::new((0.0, 2.0 * PI), (0.0, total), n1, n2, true, curve.closed)?;
    let mut s_of_t = Vec::with_capacity(n2);
    for i2 in 0..n2 {
        let s = curve
            .arclength_at(&cum, chart.x2(i2))
            .ok_or_else(|| Error::Reparametrization(format!("cannot invert t = {}", chart.x2(i2))))?;
        s_of_t.push(s);
    }
    let profile: Vec<(f64, f64)> = s_of_t.iter().map(|s| curve.point(*s)).collect();
    // |Phi_theta| = r and |Phi_t| = r |gamma'|, so the speed defect is the conformality defect.
    let claim = s_of_t
        .iter()
        .map(|s| {
            let (a, b) = curve.tangent(*s);
            (a.hypot(b) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    if claim > tol.conformal_curve {
        return Err(Error::NotConformal {
            residual: claim,
            gate: tol.conformal_curve,
        });
    }
    let phi = Field::from_fn(chart, 3, |i1, i2, out| {
        let (r, z) = profile[i2];
        let th = chart.x1(i1);
        out[0] = r * th.cos();
        out[1] = r * th.sin();
        out[2] = z;
    });
    let lambda = Field::from_fn(chart, 1, |_, i2, out| out[0] = profile[i2].0.ln());
    Ok(Immersion::new("revolution", phi, claim)?.with_lambda(lambda))
}
