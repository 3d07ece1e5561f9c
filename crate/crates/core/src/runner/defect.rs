//! `defect`: the atom of the concentrating Jacobians and the transported curve defect.

use std::f64::consts::PI;

use crate::defect::{atomic_detect, defect_estimate, product_structure_test, AtomSettings, MeasureGrid};
use crate::experiments::{curve_family, jacobian_family, jacobian_oracle_weight, surface_family, SurfaceSampling};
use crate::files;
use crate::plot;
use crate::report::Check;
use crate::wente::PlaneGrid;
use crate::zoo::{PlanarCurve, Profile};

use super::Run;

/// Relative error of the atom weight against the `k = 1` total.
const ATOM_WEIGHT: f64 = 0.1;
/// Relative deviation of the curve defect density from its oracle.
const CURVE_DEFECT: f64 = 5e-2;
/// Relative residual of the additive fit and relative spread along theta.
const PRODUCT_RESIDUAL: f64 = 5e-2;
const THETA_VARIATION: f64 = 5e-2;
/// Samples of the base circle and theta nodes of the rotated surfaces.
const CIRCLE_SAMPLES: usize = 2048;
const THETA_NODES: usize = 32;

pub(super) fn defect(run: &mut Run) {
    if run.wants("atom") {
        atom(run);
    }
    if run.wants("transport") {
        transport(run);
    }
}

fn save_measure(run: &mut Run, name: &str, title: &str, m: &MeasureGrid) {
    run.artifact(format!("{name}.measure"), files::measure_to_string(m));
    run.artifact(format!("{name}.svg"), plot::heatmap(title, m.b1, m.b2, &m.mass));
}

fn atom(run: &mut Run) {
    let n = run.grid_or(512);
    let ks = run.ks_or(&[1, 2, 4, 8]);
    let boxes = run.boxes_or(31);
    let (a, b) = (Profile::default_a(), Profile::default_b());
    let label = format!("defect atom {n}^2 k = {ks:?}");
    let Some(grid) = run.attempt(&label, PlaneGrid::unit(n)) else {
        return;
    };
    let Some(oracle) = run.attempt(&format!("{label}: k = 1 oracle"), jacobian_oracle_weight(&a, &b, grid)) else {
        return;
    };
    let Some(family) = run.attempt(&label, jacobian_family(&ks, &a, &b, grid, [0.0, 0.0], boxes)) else {
        return;
    };
    let Some(r) = run.attempt(&label, atomic_detect(&family, &AtomSettings::default())) else {
        return;
    };
    run.check(Check::equals(format!("{label}: atom count"), r.atoms.len() as f64, 1.0));
    if let [atom] = r.atoms[..] {
        let last = family.last().expect("non-empty family");
        let half_box = 0.5 * last.width1().max(last.width2());
        let distance = atom.location.0.hypot(atom.location.1);
        run.check(Check::at_most(
            format!("{label}: distance to the origin"),
            distance,
            half_box,
        ));
        run.check(Check::relative(
            format!("{label}: weight"),
            atom.weight,
            oracle,
            ATOM_WEIGHT,
        ));
    }
    run.report
        .record("atoms", serde_json::json!({ "oracle": oracle, "detected": r }));
    if let Some(last) = family.last() {
        save_measure(run, "atom_last_member", "d1 phi d2 phi, last member", last);
    }
}

fn transport(run: &mut Run) {
    let tol = run.tol();
    let ks = run.ks_or(&[8, 16, 32]);
    let bins = run.boxes_or(8);
    let amplitude = run.cfg.amplitude.unwrap_or(1.0);
    let Some(circle) = run.attempt("defect circle", PlanarCurve::circle(2.0, 0.0, 1.0, CIRCLE_SAMPLES, tol)) else {
        return;
    };
    // Curvature perturbation a (2 pi / L)^2 sin(...), whose square averages to half its peak.
    let oracle = 0.5 * (amplitude * (2.0 * PI / circle.length).powi(2)).powi(2);
    let label = format!("defect curve a = {amplitude} k = {ks:?}");
    let curve = curve_family(&circle, amplitude, &ks, bins, tol).and_then(|(f, l)| defect_estimate(&f, &l));
    if let Some(r) = run.attempt(&label, curve) {
        let density = r.defect.density();
        let worst = density.iter().map(|d| (d - oracle).abs() / oracle).fold(0.0, f64::max);
        run.check(Check::below(
            format!("{label}: density deviation from {oracle:.4}"),
            worst,
            CURVE_DEFECT,
        ));
        run.report.record(
            "curve_defect",
            serde_json::json!({ "oracle": oracle, "density": density, "monotone": r.monotone }),
        );
        save_measure(run, "curve_defect", "curve defect", &r.defect);
    }

    let s = SurfaceSampling {
        n_theta: THETA_NODES,
        n_t: run.grid_or(512),
        boxes_theta: bins,
        boxes_t: 2 * bins,
    };
    let label = format!("defect rotated surfaces {}x{} k = {ks:?}", s.n_theta, s.n_t);
    let surface = surface_family(&circle, amplitude, &ks, s, tol).and_then(|(f, l)| {
        let r = defect_estimate(&f, &l)?;
        let fit = product_structure_test(&r.defect)?;
        Ok((r, fit))
    });
    if let Some((r, fit)) = run.attempt(&label, surface) {
        run.check(Check::below(
            format!("{label}: product residual"),
            fit.relative,
            PRODUCT_RESIDUAL,
        ));
        run.check(Check::below(
            format!("{label}: theta variation"),
            fit.x1_variation,
            THETA_VARIATION,
        ));
        run.report.record(
            "surface_defect",
            serde_json::json!({ "fit": fit, "monotone": r.monotone }),
        );
        save_measure(
            run,
            "surface_defect",
            "rotated-surface defect (theta rows, t columns)",
            &r.defect,
        );
    }
}
