//! `generate`, `residuals` and `dual`.

use std::f64::consts::PI;

use crate::convergence::observed_orders;
use crate::files;
use crate::geometry::{conformal_factor, sphere_fit, QuadraticDifferential, SurfaceGeometry};
use crate::plot;
use crate::report::Check;
use crate::zoo::{Params, GENERATORS};

use super::catalog::{surface, REVOLVED};
use super::Run;

/// Relative L2 agreement of the two Weingarten formulas.
const WEINGARTEN_AGREEMENT: f64 = 1e-3;
/// Interior maximum of `|Im H0|` for curvature-line charts.
const ISOTHERMIC_RESIDUAL: f64 = 1e-3;
/// Relative error of the cylinder patch Willmore energy.
const CYLINDER_WILLMORE: f64 = 5e-3;
/// Observed order of `|W - 4 pi|` on the sphere.
const SPHERE_WILLMORE_ORDER: f64 = 1.5;
/// Both Christoffel residuals.
const DUAL_RESIDUAL: f64 = 1e-3;
/// Relative radius spread of the catenoid's dual.
const DUAL_SPHERICITY: f64 = 1e-2;

fn params(run: &Run) -> Params {
    Params(run.cfg.params.clone())
}

/// Surfaces of a run: the configured generator, or `defaults`.
fn surfaces(run: &Run, defaults: &[&str]) -> Vec<String> {
    match &run.cfg.generator {
        Some(g) => vec![g.clone()],
        None => defaults.iter().map(|s| s.to_string()).collect(),
    }
}

/// Generator parameters for `name`: the configured ones when it is the configured generator,
/// otherwise the stored per-surface defaults of the experiment.
fn params_for(run: &Run, name: &str) -> Params {
    if run.cfg.generator.is_some() {
        return params(run);
    }
    // The divergence formula of the Weingarten form differentiates O(cosh t) fields near the
    // ends of the long Mercator chart; a shorter chart keeps the comparison meaningful.
    if name == "sphere_mercator" && run.cfg.command == super::Command::Residuals {
        return Params::new().with("t_max", 3.0);
    }
    Params::new()
}

pub(super) fn generate(run: &mut Run) {
    let name = run.cfg.generator.clone().unwrap_or_else(|| "catenoid".into());
    let n = run.grid_or(128);
    let tol = run.tol();
    let Some(im) = run.attempt(&name, surface(&name, &params(run), n, tol)) else {
        return;
    };
    let claim_gate = if REVOLVED.contains(&name.as_str()) {
        tol.conformal_curve
    } else {
        tol.conformal_analytic
    };
    run.check(Check::at_most(
        format!("{name}: certified conformality"),
        im.conformal_claim,
        claim_gate,
    ));
    if let Some(cf) = run.attempt(&format!("{name}: discrete conformality"), conformal_factor(&im, tol)) {
        run.check(Check::at_most(
            format!("{name}: discrete conformality"),
            cf.residual,
            cf.gate,
        ));
    }
    let text = files::surface_to_string(&im);
    if let Some(back) = run.attempt(&format!("{name}: round trip"), files::surface_from_str(&text)) {
        let same = back
            .phi
            .data
            .iter()
            .zip(&im.phi.data)
            .all(|(a, b)| a.to_bits() == b.to_bits());
        run.check(Check::equals(
            format!("{name}: bitwise round trip"),
            same as u8 as f64,
            1.0,
        ));
    }
    run.report
        .record("surface", serde_json::json!({ "name": name, "n": n, "m": im.m }));
    run.artifact(format!("{name}.surface"), text);
}

pub(super) fn residuals(run: &mut Run) {
    if run.wants("weingarten") {
        weingarten(run);
    }
    if run.wants("isothermic") {
        isothermic(run);
    }
    if run.wants("willmore") {
        willmore(run);
    }
}

/// Every analytic generator that claims conformality.
fn conformal_generators() -> Vec<&'static str> {
    GENERATORS.iter().copied().filter(|g| *g != "sheared_torus").collect()
}

fn weingarten(run: &mut Run) {
    let n = run.grid_or(256);
    let mut rows = Vec::new();
    for name in surfaces(run, &conformal_generators()) {
        let label = format!("weingarten {name} {n}^2");
        let Some(im) = run.attempt(&label, surface(&name, &params_for(run, &name), n, run.tol())) else {
            continue;
        };
        let Some(g) = run.attempt(&label, SurfaceGeometry::new(&im, run.tol())) else {
            continue;
        };
        let w = g.weingarten();
        run.check(Check::below(
            format!("{label}: formula discrepancy"),
            w.discrepancy,
            WEINGARTEN_AGREEMENT,
        ));
        rows.push(serde_json::json!({
            "surface": name,
            "discrepancy": w.discrepancy,
            "normality_residual": w.normality_residual,
        }));
    }
    run.report.record("weingarten", rows);
}

fn isothermic(run: &mut Run) {
    let n = run.grid_or(256);
    let defaults = [
        "cylinder",
        "catenoid",
        "sphere_stereographic",
        "sphere_mercator",
        "torus_of_revolution",
    ];
    let defaults: Vec<&str> = defaults.into_iter().chain(REVOLVED).collect();
    let mut rows = Vec::new();
    for name in surfaces(run, &defaults) {
        let label = format!("isothermic {name} {n}^2");
        let Some(im) = run.attempt(&label, surface(&name, &params_for(run, &name), n, run.tol())) else {
            continue;
        };
        let Some(g) = run.attempt(&label, SurfaceGeometry::new(&im, run.tol())) else {
            continue;
        };
        let Some(r) = run.attempt(&label, g.isothermic_residual(&QuadraticDifferential::one(g.chart()))) else {
            continue;
        };
        run.check(Check::below(
            format!("{label}: max |Im H0|"),
            r.max,
            ISOTHERMIC_RESIDUAL,
        ));
        rows.push(serde_json::json!({
            "surface": name,
            "max": r.max,
            "identity_discrepancy": r.identity_discrepancy,
        }));
    }
    run.report.record("isothermic", rows);
}

fn willmore(run: &mut Run) {
    let tol = run.tol();
    let n = run.grid_or(256);
    let label = format!("willmore cylinder {n}^2");
    let cyl =
        surface("cylinder", &Params::new(), n, tol).and_then(|im| Ok(SurfaceGeometry::new(&im, tol)?.mean_curvature()));
    if let Some(w) = run.attempt(&label, cyl) {
        run.check(Check::relative(
            format!("{label}: W"),
            w.willmore_energy,
            PI / 2.0,
            CYLINDER_WILLMORE,
        ));
    }

    let ladder = run.ladder_or(&[64, 128, 256]);
    let mut h = Vec::new();
    let mut e = Vec::new();
    for &m in &ladder {
        let label = format!("willmore sphere_mercator {m}^2");
        let r = surface("sphere_mercator", &Params::new(), m, tol).and_then(|im| {
            let hmax = im.phi.chart.h_max();
            Ok((hmax, SurfaceGeometry::new(&im, tol)?.mean_curvature().willmore_energy))
        });
        let Some((hm, w)) = run.attempt(&label, r) else {
            return;
        };
        h.push(hm);
        e.push((w - 4.0 * PI).abs());
    }
    let label = "willmore sphere_mercator |W - 4 pi|";
    if let Some(row) = run.attempt(label, observed_orders(label, &h, &e)) {
        run.check(Check::at_least(
            format!("{label}: observed order"),
            row.order().unwrap_or(f64::NAN),
            SPHERE_WILLMORE_ORDER,
        ));
        let points = h.iter().copied().zip(e.iter().copied()).collect();
        run.artifact(
            "willmore_sphere.svg",
            plot::log_log(
                "Willmore energy error, Mercator sphere",
                "h",
                "|W - 4 pi|",
                &[(label.into(), points)],
            ),
        );
        run.report.record("willmore_sphere", row);
    }
}

pub(super) fn dual(run: &mut Run) {
    let n = run.grid_or(256);
    let mut rows = Vec::new();
    for name in surfaces(run, &["cylinder", "catenoid"]) {
        let label = format!("dual {name} {n}^2");
        let tol = run.tol();
        let r = surface(&name, &params_for(run, &name), n, tol)
            .and_then(|im| SurfaceGeometry::new(&im, tol)?.christoffel_dual());
        let Some(d) = run.attempt(&label, r) else {
            continue;
        };
        run.check(Check::below(
            format!("{label}: dot residual"),
            d.dot_residual,
            DUAL_RESIDUAL,
        ));
        run.check(Check::below(
            format!("{label}: wedge residual"),
            d.wedge_residual,
            DUAL_RESIDUAL,
        ));
        let mut row = serde_json::json!({
            "surface": name,
            "closure": d.closure,
            "dot_residual": d.dot_residual,
            "wedge_residual": d.wedge_residual,
        });
        if name == "catenoid" {
            let points: Vec<Vec<f64>> = d.dual.phi.data.chunks(d.dual.m).map(<[f64]>::to_vec).collect();
            if let Some((_, spread)) = run.attempt(&format!("{label}: sphere fit"), sphere_fit(&points)) {
                run.check(Check::below(format!("{label}: radius spread"), spread, DUAL_SPHERICITY));
                row["radius_spread"] = spread.into();
            }
        }
        rows.push(row);
        run.artifact(format!("{name}_dual.surface"), files::surface_to_string(&d.dual));
    }
    run.report.record("dual", rows);
}
