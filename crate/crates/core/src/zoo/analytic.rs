//! Closed-form conformal immersions.
//!
//! Each generator samples its closed form on a grid and certifies conformality by evaluating
//! the differential with a fourth-order difference of the closed form itself, so the
//! certificate is independent of the grid resolution.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::geometry::Immersion;
use crate::grid::{Field, GridChart};

pub const GENERATORS: [&str; 9] = [
    "sphere_stereographic",
    "sphere_mercator",
    "cylinder",
    "catenoid",
    "enneper",
    "torus_of_revolution",
    "flat_plane",
    "clifford_torus_r4",
    "sheared_torus",
];

/// Generator parameters by name. Unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params(pub BTreeMap<String, f64>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.0.get(key).copied().unwrap_or(default)
    }

    fn check(&self, generator: &str, allowed: &[&str]) -> Result<()> {
        for k in self.0.keys() {
            if k != "m" && !allowed.contains(&k.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "`{k}` is not a parameter of {generator} (allowed: m, {})",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }
}

type Map = Box<dyn Fn(f64, f64, &mut [f64]) + Send + Sync>;
type Scalar = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

struct ClosedForm {
    m: usize,
    map: Map,
    lambda: Option<Scalar>,
    x1: (f64, f64),
    x2: (f64, f64),
    periodic: (bool, bool),
    conformal: bool,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// Period in the conformal coordinate `t` of the torus with radii `big > small`.
pub fn torus_period(big: f64, small: f64) -> f64 {
    2.0 * PI * small / (big * big - small * small).sqrt()
}

/// Angle of the tube circle at conformal coordinate `t`.
fn torus_angle(big: f64, small: f64, t: f64) -> f64 {
    let c = t * (big * big - small * small).sqrt() / (2.0 * small);
    let k = ((big + small) / (big - small)).sqrt();
    // Continuous branch of atan(k tan c), which stays within pi/2 of c.
    let base = (k * c.sin()).atan2(c.cos());
    let psi = base + 2.0 * PI * ((c - base) / (2.0 * PI)).round();
    2.0 * psi
}

fn closed_form(name: &str, p: &Params) -> Result<ClosedForm> {
    let nonperiodic = (false, false);
    Ok(match name {
        "sphere_stereographic" => {
            p.check(name, &["extent"])?;
            let e = positive("extent", p.get("extent", 2.0))?;
            ClosedForm {
                m: 3,
                map: Box::new(|u, v, o| {
                    let d = 1.0 + u * u + v * v;
                    o[0] = 2.0 * u / d;
                    o[1] = 2.0 * v / d;
                    o[2] = (u * u + v * v - 1.0) / d;
                }),
                lambda: Some(Box::new(|u, v| (2.0 / (1.0 + u * u + v * v)).ln())),
                x1: (-e, e),
                x2: (-e, e),
                periodic: nonperiodic,
                conformal: true,
            }
        }
        "sphere_mercator" => {
            p.check(name, &["t_max"])?;
            let t = positive("t_max", p.get("t_max", 8.0))?;
            ClosedForm {
                m: 3,
                map: Box::new(|th, t, o| {
                    let s = 1.0 / t.cosh();
                    o[0] = s * th.cos();
                    o[1] = s * th.sin();
                    o[2] = t.tanh();
                }),
                lambda: Some(Box::new(|_, t| -t.cosh().ln())),
                x1: (0.0, 2.0 * PI),
                x2: (-t, t),
                periodic: (true, false),
                conformal: true,
            }
        }
        "cylinder" => {
            p.check(name, &["radius", "rotation"])?;
            let r = positive("radius", p.get("radius", 1.0))?;
            let a = p.get("rotation", 0.0);
            let (ca, sa) = (a.cos(), a.sin());
            let rotated = a != 0.0;
            ClosedForm {
                m: 3,
                map: Box::new(move |x1, x2, o| {
                    let (u, v) = (ca * x1 - sa * x2, sa * x1 + ca * x2);
                    o[0] = r * u.cos();
                    o[1] = r * u.sin();
                    o[2] = r * v;
                }),
                lambda: Some(Box::new(move |_, _| r.ln())),
                x1: if rotated { (-1.0, 1.0) } else { (0.0, 2.0 * PI) },
                x2: if rotated { (-1.0, 1.0) } else { (0.0, 1.0) },
                periodic: (!rotated, false),
                conformal: true,
            }
        }
        "catenoid" => {
            p.check(name, &["height"])?;
            let h = positive("height", p.get("height", 1.0))?;
            ClosedForm {
                m: 3,
                map: Box::new(|th, t, o| {
                    o[0] = t.cosh() * th.cos();
                    o[1] = t.cosh() * th.sin();
                    o[2] = t;
                }),
                lambda: Some(Box::new(|_, t| t.cosh().ln())),
                x1: (0.0, 2.0 * PI),
                x2: (-h, h),
                periodic: (true, false),
                conformal: true,
            }
        }
        "enneper" => {
            p.check(name, &["extent"])?;
            let e = positive("extent", p.get("extent", 1.0))?;
            ClosedForm {
                m: 3,
                map: Box::new(|u, v, o| {
                    o[0] = u - u * u * u / 3.0 + u * v * v;
                    o[1] = -v + v * v * v / 3.0 - u * u * v;
                    o[2] = u * u - v * v;
                }),
                lambda: Some(Box::new(|u, v| (1.0 + u * u + v * v).ln())),
                x1: (-e, e),
                x2: (-e, e),
                periodic: nonperiodic,
                conformal: true,
            }
        }
        "torus_of_revolution" => {
            p.check(name, &["R", "r"])?;
            let big = positive("R", p.get("R", 2.0))?;
            let small = positive("r", p.get("r", 1.0))?;
            if small >= big {
                return Err(Error::InvalidParameter(format!(
                    "torus needs r < R, got r = {small}, R = {big}"
                )));
            }
            ClosedForm {
                m: 3,
                map: Box::new(move |th, t, o| {
                    let phi = torus_angle(big, small, t);
                    let rho = big + small * phi.cos();
                    o[0] = rho * th.cos();
                    o[1] = rho * th.sin();
                    o[2] = small * phi.sin();
                }),
                lambda: Some(Box::new(move |_, t| {
                    (big + small * torus_angle(big, small, t).cos()).ln()
                })),
                x1: (0.0, 2.0 * PI),
                x2: (0.0, torus_period(big, small)),
                periodic: (true, true),
                conformal: true,
            }
        }
        "flat_plane" => {
            p.check(name, &[])?;
            ClosedForm {
                m: 3,
                map: Box::new(|u, v, o| {
                    o[0] = u;
                    o[1] = v;
                    o[2] = 0.0;
                }),
                lambda: Some(Box::new(|_, _| 0.0)),
                x1: (0.0, 1.0),
                x2: (0.0, 1.0),
                periodic: nonperiodic,
                conformal: true,
            }
        }
        "clifford_torus_r4" => {
            p.check(name, &[])?;
            ClosedForm {
                m: 4,
                map: Box::new(|a, b, o| {
                    o[0] = FRAC_1_SQRT_2 * a.cos();
                    o[1] = FRAC_1_SQRT_2 * a.sin();
                    o[2] = FRAC_1_SQRT_2 * b.cos();
                    o[3] = FRAC_1_SQRT_2 * b.sin();
                }),
                lambda: Some(Box::new(|_, _| FRAC_1_SQRT_2.ln())),
                x1: (0.0, 2.0 * PI),
                x2: (0.0, 2.0 * PI),
                periodic: (true, true),
                conformal: true,
            }
        }
        "sheared_torus" => {
            p.check(name, &["R", "r", "shear"])?;
            let big = positive("R", p.get("R", 2.0))?;
            let small = positive("r", p.get("r", 1.0))?;
            let shear = p.get("shear", 1.0);
            if shear.fract() != 0.0 {
                return Err(Error::InvalidParameter(
                    "shear must be an integer to stay periodic".into(),
                ));
            }
            ClosedForm {
                m: 3,
                map: Box::new(move |u, v, o| {
                    let rho = big + small * v.cos();
                    o[0] = rho * (u + shear * v).cos();
                    o[1] = rho * (u + shear * v).sin();
                    o[2] = small * v.sin();
                }),
                lambda: None,
                x1: (0.0, 2.0 * PI),
                x2: (0.0, 2.0 * PI),
                periodic: (true, true),
                conformal: false,
            }
        }
        other => return Err(Error::UnknownGenerator(other.to_string())),
    })
}

/// Default chart of a generator at the given resolution.
pub fn default_chart(name: &str, params: &Params, n1: usize, n2: usize) -> Result<GridChart> {
    let cf = closed_form(name, params)?;
    GridChart::new(cf.x1, cf.x2, n1, n2, cf.periodic.0, cf.periodic.1)
}

/// Samples a named generator on its default chart.
pub fn analytic(name: &str, params: &Params, n1: usize, n2: usize, tol: &Tolerances) -> Result<Immersion> {
    let chart = default_chart(name, params, n1, n2)?;
    analytic_on(name, params, chart, tol)
}

/// Samples a named generator on a caller-supplied chart.
pub fn analytic_on(name: &str, params: &Params, chart: GridChart, tol: &Tolerances) -> Result<Immersion> {
    let cf = closed_form(name, params)?;
    chart.validate()?;
    let m_target = params.0.get("m").map_or(cf.m, |v| *v as usize);
    if m_target < cf.m || m_target > 6 || params.0.get("m").is_some_and(|v| v.fract() != 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} lives in R^{}; cannot embed into m = {m_target}",
            cf.m
        )));
    }
    let m = cf.m;
    let phi = Field::from_fn(chart, m, |i1, i2, out| (cf.map)(chart.x1(i1), chart.x2(i2), out));
    let claim = if cf.conformal {
        let r = certify(&cf, &chart);
        if r > tol.conformal_analytic {
            return Err(Error::NotConformal {
                residual: r,
                gate: tol.conformal_analytic,
            });
        }
        tol.conformal_analytic
    } else {
        0.0
    };
    let mut im = Immersion::new(name, phi, claim)?;
    if let Some(l) = &cf.lambda {
        im = im.with_lambda(Field::from_fn(chart, 1, |i1, i2, o| {
            o[0] = l(chart.x1(i1), chart.x2(i2))
        }));
    }
    if m_target > m {
        im = im.embed(m_target)?;
    }
    Ok(im)
}

/// Largest conformality defect of the closed form at the chart nodes, with derivatives from a
/// fourth-order central difference of step 1e-3.
fn certify(cf: &ClosedForm, chart: &GridChart) -> f64 {
    const STEP: f64 = 1e-3;
    let m = cf.m;
    let deriv = |x: f64, y: f64, dx: f64, dy: f64, out: &mut [f64]| {
        let mut buf = [[0.0; 6]; 4];
        for (s, b) in [-2.0, -1.0, 1.0, 2.0].iter().zip(buf.iter_mut()) {
            (cf.map)(x + s * dx, y + s * dy, &mut b[..m]);
        }
        for k in 0..m {
            out[k] = (buf[0][k] - 8.0 * buf[1][k] + 8.0 * buf[2][k] - buf[3][k]) / (12.0 * STEP);
        }
    };
    crate::par::max(chart.n1, |i1| {
        (0..chart.n2).fold(0.0, |acc: f64, i2| {
            let (x, y) = (chart.x1(i1), chart.x2(i2));
            let (mut a, mut b) = ([0.0; 6], [0.0; 6]);
            deriv(x, y, STEP, 0.0, &mut a);
            deriv(x, y, 0.0, STEP, &mut b);
            let aa: f64 = a.iter().map(|v| v * v).sum();
            let bb: f64 = b.iter().map(|v| v * v).sum();
            let ab: f64 = a.iter().zip(&b).map(|(u, v)| u * v).sum();
            let len = (aa.sqrt() - bb.sqrt()).abs() / aa.sqrt();
            acc.max(len).max(ab.abs() / aa)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn every_conformal_generator_certifies() {
        for name in GENERATORS.iter().filter(|n| **n != "sheared_torus") {
            let im = analytic(name, &Params::new(), 16, 16, &tol()).unwrap();
            assert_eq!(im.conformal_claim, tol().conformal_analytic, "{name}");
        }
        assert!(analytic("sphere_mercator", &Params::new().with("m", 5.0), 16, 16, &tol()).is_ok_and(|im| im.m == 5));
    }

    #[test]
    fn rejects_unknown_names_and_parameters() {
        assert!(matches!(
            analytic("helicoid", &Params::new(), 16, 16, &tol()),
            Err(Error::UnknownGenerator(_))
        ));
        assert!(analytic("cylinder", &Params::new().with("R", 2.0), 16, 16, &tol()).is_err());
        assert!(analytic("torus_of_revolution", &Params::new().with("r", 3.0), 16, 16, &tol()).is_err());
    }

    #[test]
    fn torus_angle_covers_one_turn_per_period() {
        let (big, small) = (2.0, 1.0);
        let t = torus_period(big, small);
        assert!(torus_angle(big, small, 0.0).abs() < 1e-15);
        assert!((torus_angle(big, small, t) - 2.0 * PI).abs() < 1e-12);
        assert!((torus_angle(big, small, 0.5 * t) - PI).abs() < 1e-12);
        // d phi / dt = rho / r makes the chart isothermal.
        let t0 = 0.3;
        let d = 1e-5;
        let slope = (torus_angle(big, small, t0 + d) - torus_angle(big, small, t0 - d)) / (2.0 * d);
        let rho = big + small * torus_angle(big, small, t0).cos();
        assert!((slope - rho / small).abs() < 1e-8);
    }
}
