//! `wente` and `riesz`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::experiments::{battery_summary, random_jacobian, wente_battery};
use crate::files;
use crate::plot;
use crate::report::Check;
use crate::wente::{jacobian, riesz_second_report, wente_check, DiscField, PlaneGrid, Which};
use crate::zoo::Profile;

use super::Run;

/// Relative error of the coordinate-pair ratio against `1 / (4 pi)`.
const ANALYTIC_RATIO: f64 = 2e-2;
/// Relative change of the battery bound and spread under refinement.
const BATTERY_DRIFT: f64 = 5e-2;
/// Relative L2 disagreement of the two kernel paths after the fit.
const KERNEL_AGREEMENT: f64 = 1e-2;
/// Relative change of the fitted constant between inputs.
const CONSTANT_STABILITY: f64 = 1e-2;

pub(super) fn wente(run: &mut Run) {
    let n = run.grid_or(256);
    let tol = run.tol();
    let label = format!("wente coordinates {n}^2");
    let coordinates = PlaneGrid::unit(n)
        .and_then(|g| wente_check(&DiscField::from_fn(g, |x, _| x), &DiscField::from_fn(g, |_, y| y), tol));
    if let Some(r) = run.attempt(&label, coordinates) {
        run.check(Check::relative(
            format!("{label}: sup ratio"),
            r.ratio_sup,
            1.0 / (4.0 * PI),
            ANALYTIC_RATIO,
        ));
        run.report.record("coordinates", r);
    }

    let seed = run.cfg.seed;
    let mut summaries = Vec::new();
    let mut listing = String::from("# grid pair ratio_sup ratio_dirichlet\n");
    for m in [n, 2 * n] {
        let label = format!("wente battery {m}^2");
        let Some(entries) = run.attempt(&label, PlaneGrid::unit(m).and_then(|g| wente_battery(g, seed, tol))) else {
            return;
        };
        for e in &entries {
            let _ = writeln!(
                listing,
                "{m} {} {} {}",
                e.name, e.report.ratio_sup, e.report.ratio_dirichlet
            );
        }
        let degenerate = entries.iter().filter(|e| e.report.degenerate).count();
        run.check(Check::equals(
            format!("{label}: degenerate pairs"),
            degenerate as f64,
            0.0,
        ));
        let Some(s) = battery_summary(&entries) else {
            return;
        };
        run.report.record(
            &format!("battery_{m}"),
            serde_json::json!({ "pairs": entries, "summary": s }),
        );
        summaries.push(s);
    }
    let (coarse, fine) = (summaries[0], summaries[1]);
    let drift = |a: f64, b: f64| (b / a - 1.0).abs();
    run.check(Check::below(
        format!("wente battery {n}^2 -> {}^2: drift of the ratio bound", 2 * n),
        drift(coarse.max, fine.max),
        BATTERY_DRIFT,
    ));
    run.check(Check::below(
        format!("wente battery {n}^2 -> {}^2: drift of the max/min spread", 2 * n),
        drift(coarse.spread, fine.spread),
        BATTERY_DRIFT,
    ));
    run.artifact("wente_battery.txt", listing);
}

pub(super) fn riesz(run: &mut Run) {
    let n = run.grid_or(256);
    let seed = run.cfg.seed;
    let Some(grid) = run.attempt("riesz grid", PlaneGrid::new(n, 2.0)) else {
        return;
    };
    let (a, b) = (Profile::default_a(), Profile::default_b());
    let profiles = jacobian(
        &DiscField::from_fn(grid, |x, y| a.eval(x, y)),
        &DiscField::from_fn(grid, |x, y| b.eval(x, y)),
    );
    let inputs = [
        ("profiles".to_owned(), profiles),
        (format!("random_seed{seed}"), random_jacobian(grid, seed)),
    ];
    let mut constants = Vec::new();
    let mut rows = Vec::new();
    for (name, omega) in inputs {
        let Some(omega) = run.attempt(&format!("riesz {name}"), omega) else {
            return;
        };
        let mut fitted = Vec::new();
        for which in [Which::Cross, Which::Diff] {
            let label = format!("riesz {which:?} {name} {n}^2").to_lowercase();
            let Some(r) = run.attempt(&label, riesz_second_report(&omega, which)) else {
                return;
            };
            run.check(Check::below(
                format!("{label}: path disagreement"),
                r.disagreement,
                KERNEL_AGREEMENT,
            ));
            rows.push(serde_json::json!({
                "input": name,
                "which": which,
                "c0": r.c0,
                "c0_times_4pi": r.c0 * 4.0 * PI,
                "disagreement": r.disagreement,
            }));
            if which == Which::Cross {
                let paths = crate::geometry::stack(&r.spectral.to_field(), &r.spatial.map(|v| v * r.c0).to_field());
                run.artifact(format!("riesz_cross_{name}.field"), files::field_to_string(&paths));
                run.artifact(
                    format!("riesz_cross_{name}.svg"),
                    plot::heatmap(&format!("cross path, {name}"), n, n, &r.spectral.values),
                );
            }
            fitted.push(r.c0);
        }
        constants.push(fitted);
    }
    for (k, which) in ["cross", "diff"].iter().enumerate() {
        let change = (constants[1][k] / constants[0][k] - 1.0).abs();
        run.check(Check::below(
            format!("riesz {which}: fitted constant change between inputs"),
            change,
            CONSTANT_STABILITY,
        ));
    }
    run.report.record("riesz", rows);
}
