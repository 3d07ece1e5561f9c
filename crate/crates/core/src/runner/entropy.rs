//! `entropy` and `convergence`.

use std::f64::consts::PI;

use crate::config::Tolerances;
use crate::convergence::{observed_orders, table, OrderRow, OrderStatus, EXACT_FLOOR};
use crate::entropy::entropy_fields;
use crate::error::Result;
use crate::experiments::poisson_constant_error;
use crate::files;
use crate::geometry::{stack, SurfaceGeometry};
use crate::plot;
use crate::report::Check;
use crate::wente::PlaneGrid;
use crate::zoo::Params;

use super::catalog::surface;
use super::Run;

/// Observed order of the conservation residuals on curved surfaces.
const ENTROPY_ORDER: f64 = 1.5;
/// Observed order of the disc Poisson solve.
const POISSON_ORDER: f64 = 1.8;
/// Observed order of the remaining geometric residuals.
const GEOMETRY_ORDER: f64 = 1.5;

/// Runs `f` over the ladder and checks the observed order. Returns the table row.
fn study(
    run: &mut Run,
    name: &str,
    ladder: &[usize],
    min_order: f64,
    f: impl Fn(usize) -> Result<(f64, f64)>,
) -> Option<OrderRow> {
    let mut h = Vec::new();
    let mut e = Vec::new();
    for &n in ladder {
        let (hn, en) = run.attempt(&format!("{name} {n}^2"), f(n))?;
        h.push(hn);
        e.push(en);
    }
    let row = run.attempt(name, observed_orders(name, &h, &e))?;
    match row.status {
        OrderStatus::Exact => {
            let worst = e.iter().copied().fold(0.0, f64::max);
            run.check(Check::at_most(format!("{name}: residual (exact)"), worst, EXACT_FLOOR));
        }
        _ => {
            let worst = row.orders.iter().copied().fold(f64::INFINITY, f64::min);
            let value = if row.status == OrderStatus::NonDecreasing {
                f64::NAN
            } else {
                worst
            };
            run.check(Check::at_least(format!("{name}: observed order"), value, min_order));
        }
    }
    Some(row)
}

fn plot_rows(title: &str, y: &str, rows: &[OrderRow]) -> String {
    let series: Vec<(String, Vec<(f64, f64)>)> = rows
        .iter()
        .map(|r| {
            (
                r.name.clone(),
                r.h.iter().copied().zip(r.residuals.iter().copied()).collect(),
            )
        })
        .collect();
    plot::log_log(title, "h", y, &series)
}

fn entropy_residual(name: &str, params: &Params, n: usize, tol: &Tolerances) -> Result<(f64, f64)> {
    let im = surface(name, params, n, tol)?;
    let ef = entropy_fields(&im, tol)?;
    Ok((im.phi.chart.h_max(), ef.norms1.l1 + ef.norms2.l1))
}

fn generator_params(run: &Run) -> Params {
    Params(run.cfg.params.clone())
}

pub(super) fn entropy(run: &mut Run) {
    let surfaces: Vec<String> = match &run.cfg.generator {
        Some(g) => vec![g.clone()],
        None => ["cylinder", "torus_of_revolution", "catenoid"]
            .map(String::from)
            .to_vec(),
    };
    let ladder = run.ladder_or(&[64, 128, 256]);
    let params = generator_params(run);
    let mut rows = Vec::new();
    for name in &surfaces {
        let label = format!("entropy {name} L1 residual");
        let tol = run.tol();
        let row = study(run, &label, &ladder, ENTROPY_ORDER, |n| {
            entropy_residual(name, &params, n, tol)
        });
        let Some(row) = row else {
            continue;
        };
        rows.push(row);
        let finest = *ladder.last().expect("validated ladder");
        let fields = surface(name, &params, finest, run.tol()).and_then(|im| entropy_fields(&im, run.tol()));
        if let Some(ef) = run.attempt(&format!("entropy {name} {finest}^2"), fields) {
            let densities = stack(&stack(&ef.d1, &ef.d2), &ef.f);
            run.artifact(
                format!("entropy_{name}_densities.field"),
                files::field_to_string(&densities),
            );
            run.artifact(
                format!("entropy_{name}_residuals.field"),
                files::field_to_string(&stack(&ef.residual1, &ef.residual2)),
            );
            run.report.record(
                &format!("entropy_{name}"),
                serde_json::json!({
                    "n": finest,
                    "norms1": ef.norms1,
                    "norms2": ef.norms2,
                    "relative": ef.relative,
                    "isothermic_defect": ef.isothermic_defect,
                }),
            );
        }
    }
    run.artifact(
        "entropy_residuals.svg",
        plot_rows("Conservation residuals", "interior L1", &rows),
    );
    run.artifact("entropy_orders.txt", table(&rows));
    run.report.record("orders", &rows);
}

pub(super) fn convergence(run: &mut Run) {
    let ladder = run.ladder_or(&[64, 128, 256]);
    let generator = run
        .cfg
        .generator
        .clone()
        .unwrap_or_else(|| "torus_of_revolution".into());
    let params = generator_params(run);
    let mut rows = Vec::new();
    if run.wants("poisson") {
        let tol = run.tol();
        let row = study(run, "poisson constant source max error", &ladder, POISSON_ORDER, |n| {
            Ok((PlaneGrid::unit(n)?.h(), poisson_constant_error(n, tol)?))
        });
        rows.extend(row);
    }
    if run.wants("entropy") {
        let label = format!("entropy {generator} L1 residual");
        let tol = run.tol();
        let row = study(run, &label, &ladder, ENTROPY_ORDER, |n| {
            entropy_residual(&generator, &params, n, tol)
        });
        rows.extend(row);
    }
    if run.wants("willmore") {
        let tol = run.tol();
        let row = study(
            run,
            "willmore sphere_mercator |W - 4 pi|",
            &ladder,
            GEOMETRY_ORDER,
            |n| {
                let im = surface("sphere_mercator", &Params::new(), n, tol)?;
                let w = SurfaceGeometry::new(&im, tol)?.mean_curvature().willmore_energy;
                Ok((im.phi.chart.h_max(), (w - 4.0 * PI).abs()))
            },
        );
        rows.extend(row);
    }
    if run.wants("codazzi") {
        let tol = run.tol();
        let label = format!("codazzi {generator} L1 residual");
        let row = study(run, &label, &ladder, GEOMETRY_ORDER, |n| {
            let im = surface(&generator, &params, n, tol)?;
            Ok((
                im.phi.chart.h_max(),
                SurfaceGeometry::new(&im, tol)?.codazzi_residual().norms.l1,
            ))
        });
        rows.extend(row);
    }
    run.artifact(
        "convergence.svg",
        plot_rows("Residual against grid spacing", "residual", &rows),
    );
    run.artifact("convergence.txt", table(&rows));
    run.report.record("orders", &rows);
}
