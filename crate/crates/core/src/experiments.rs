//! Measure families for the weak-convergence experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Tolerances;
use crate::defect::{curve_energy_measure, energy_measure, MeasureGrid};
use crate::error::Result;
use crate::par;
use crate::wente::{jacobian, newtonian_potential, poisson_dirichlet, wente_check, DiscField, PlaneGrid, WenteReport};
use crate::zoo::{concentrating_pair_at, oscillating_curve, revolution, FamilySpec, PlanarCurve, Profile};

/// `d1 phi_k d2 phi_k` for the full-plane potential `phi_k` of `J(alpha_k, beta_k)`.
pub fn jacobian_density(k: u32, a: &Profile, b: &Profile, grid: PlaneGrid, center: [f64; 2]) -> Result<DiscField> {
    let (alpha, beta) = concentrating_pair_at(k, a, b, grid, center)?;
    let phi = newtonian_potential(&jacobian(&alpha, &beta)?)?;
    let (p1, p2) = phi.gradient();
    Ok(p1.zip_with(&p2, |x, y| x * y))
}

/// Box measures of [`jacobian_density`] over the whole grid box, one per `k`.
pub fn jacobian_family(
    ks: &[u32],
    a: &Profile,
    b: &Profile,
    grid: PlaneGrid,
    center: [f64; 2],
    boxes: usize,
) -> Result<Vec<MeasureGrid>> {
    par::map_collect(ks.len(), |i| {
        let d = jacobian_density(ks[i], a, b, grid, center)?;
        MeasureGrid::from_density(&d.to_field(), boxes, boxes)
    })
    .into_iter()
    .collect()
}

/// Total mass of the `k = 1` density: by scale invariance the weight of the limit atom.
pub fn jacobian_oracle_weight(a: &Profile, b: &Profile, grid: PlaneGrid) -> Result<f64> {
    Ok(jacobian_density(1, a, b, grid, [0.0, 0.0])?.box_integral())
}

/// Binned curve energies of `oscillating_curve(base, a, k)` for each `k`, and of `base`.
pub fn curve_family(
    base: &PlanarCurve,
    amplitude: f64,
    ks: &[u32],
    bins: usize,
    tol: &Tolerances,
) -> Result<(Vec<MeasureGrid>, MeasureGrid)> {
    let family = par::map_collect(ks.len(), |i| {
        let c = oscillating_curve(base, FamilySpec { amplitude, k: ks[i] }, tol)?;
        curve_energy_measure(&c, bins, tol)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok((family, curve_energy_measure(base, bins, tol)?))
}

/// Surface grid and box counts of a rotated family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceSampling {
    pub n_theta: usize,
    pub n_t: usize,
    pub boxes_theta: usize,
    pub boxes_t: usize,
}

/// Energy measures of the surfaces of revolution of `oscillating_curve(base, a, k)` for each
/// `k`, and of the revolved `base`.
pub fn surface_family(
    base: &PlanarCurve,
    amplitude: f64,
    ks: &[u32],
    s: SurfaceSampling,
    tol: &Tolerances,
) -> Result<(Vec<MeasureGrid>, MeasureGrid)> {
    let measure = |c: &PlanarCurve| {
        let im = revolution(c, s.n_theta, s.n_t, tol)?;
        energy_measure(&im, s.boxes_theta, s.boxes_t, tol)
    };
    let family = par::map_collect(ks.len(), |i| {
        measure(&oscillating_curve(base, FamilySpec { amplitude, k: ks[i] }, tol)?)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok((family, measure(base)?))
}

/// Maximum nodal error over the disc of the Dirichlet solve of `Delta phi = 1`, whose exact
/// solution is `(|x|^2 - 1) / 4`.
pub fn poisson_constant_error(n: usize, tol: &Tolerances) -> Result<f64> {
    let g = PlaneGrid::unit(n)?;
    let sol = poisson_dirichlet(&DiscField::from_fn(g, |_, _| 1.0), tol)?;
    let exact = DiscField::from_fn(g, |x, y| (x * x + y * y - 1.0) / 4.0);
    Ok(sol.phi.zip_with(&exact, |a, b| a - b).disc_max_abs())
}

/// One data pair of the Wente battery.
#[derive(Clone, Debug, Serialize)]
pub struct BatteryEntry {
    pub name: String,
    pub report: WenteReport,
}

/// Ratio range over the non-degenerate battery entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BatterySummary {
    pub max: f64,
    pub min: f64,
    /// `max / min`.
    pub spread: f64,
}

/// Ten pairs: four smooth closed forms, the concentrating family at `k = 1, 2, 4, 8`, an
/// off-centre bump pair and a trigonometric pair with coefficients drawn from `seed`.
pub fn wente_battery(grid: PlaneGrid, seed: u64, tol: &Tolerances) -> Result<Vec<BatteryEntry>> {
    use std::f64::consts::PI;
    type Pair = (String, DiscField, DiscField);
    let f = |g: fn(f64, f64) -> f64| DiscField::from_fn(grid, g);
    let mut pairs: Vec<Pair> = vec![
        ("coordinates".into(), f(|x, _| x), f(|_, y| y)),
        ("quadratic".into(), f(|x, y| x * x - y * y), f(|x, y| 2.0 * x * y)),
        (
            "trigonometric".into(),
            f(|x, _| (PI * x).sin()),
            f(|_, y| (PI * y).cos()),
        ),
        ("exponential".into(), f(|x, y| x.exp() * y.cos()), f(|x, y| x * y)),
    ];
    let (a, b) = (Profile::default_a(), Profile::default_b());
    for k in [1u32, 2, 4, 8] {
        let (alpha, beta) = concentrating_pair_at(k, &a, &b, grid, [0.0, 0.0])?;
        pairs.push((format!("concentrating_k{k}"), alpha, beta));
    }
    let (p, q) = (
        Profile::bump([0.3, -0.2], 0.6, 3),
        Profile::bump([0.25, -0.1], 0.5, 2).with_affine([1.0, 0.0, 1.0]),
    );
    pairs.push((
        "off_centre_bumps".into(),
        DiscField::from_fn(grid, |x, y| p.eval(x, y)),
        DiscField::from_fn(grid, |x, y| q.eval(x, y)),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = [[0.0; 4]; 2];
    for c in coeffs.iter_mut().flatten() {
        *c = rng.random_range(-1.0..1.0);
    }
    let trig = |c: [f64; 4]| {
        DiscField::from_fn(grid, move |x, y| {
            c[0] * (PI * x).sin()
                + c[1] * (PI * y).cos()
                + c[2] * (PI * (x + y)).sin()
                + c[3] * (2.0 * PI * x * y).cos()
        })
    };
    pairs.push((
        format!("random_trigonometric_seed{seed}"),
        trig(coeffs[0]),
        trig(coeffs[1]),
    ));
    par::map_collect(pairs.len(), |i| {
        let (name, alpha, beta) = &pairs[i];
        Ok(BatteryEntry {
            name: name.clone(),
            report: wente_check(alpha, beta, tol)?,
        })
    })
    .into_iter()
    .collect()
}

pub fn battery_summary(entries: &[BatteryEntry]) -> Option<BatterySummary> {
    let ratios: Vec<f64> = entries
        .iter()
        .filter(|e| !e.report.degenerate)
        .map(|e| e.report.ratio_sup)
        .collect();
    if ratios.is_empty() {
        return None;
    }
    let max = ratios.iter().copied().fold(f64::MIN, f64::max);
    let min = ratios.iter().copied().fold(f64::MAX, f64::min);
    Some(BatterySummary {
        max,
        min,
        spread: max / min,
    })
}

/// `J(A, B)` for two bump profiles with centres, radii and tilts drawn from `seed`; supported
/// in the unit disc.
pub fn random_jacobian(grid: PlaneGrid, seed: u64) -> Result<DiscField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profile = |power: i32| {
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let offset = rng.random_range(0.0..0.3);
        let radius = rng.random_range(0.4..0.65);
        let tilt = [1.0, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        Profile::bump([offset * angle.cos(), offset * angle.sin()], radius, power).with_affine(tilt)
    };
    let (a, b) = (profile(2), profile(3));
    jacobian(
        &DiscField::from_fn(grid, |x, y| a.eval(x, y)),
        &DiscField::from_fn(grid, |x, y| b.eval(x, y)),
    )
}
