use std::f64::consts::PI;

use isolab::defect::{
    atomic_detect, curve_energy_measure, defect_estimate, energy_measure, product_structure_test, AtomSettings,
    MeasureGrid,
};
use isolab::experiments::{curve_family, jacobian_family, jacobian_oracle_weight, surface_family, SurfaceSampling};
use isolab::geometry::gauss_map;
use isolab::wente::PlaneGrid;
use isolab::zoo::{analytic, Params, PlanarCurve, Profile};
use isolab::{Error, Field, Immersion, Tolerances};
use nalgebra::{DMatrix, DVector};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn surface(name: &str, p: Params, n: usize) -> Immersion {
    analytic(name, &p, n, n, &tol()).unwrap()
}

fn grid_of(b1: usize, b2: usize, f: impl Fn(usize, usize) -> f64) -> MeasureGrid {
    let mut m = MeasureGrid::zeros((0.0, 1.0), (0.0, 2.0), b1, b2).unwrap();
    for i in 0..b1 {
        for j in 0..b2 {
            m.mass[i * b2 + j] = f(i, j);
        }
    }
    m
}

#[test]
fn energy_measure_examples() {
    let plane = energy_measure(&surface("flat_plane", Params::new(), 64), 4, 4, &tol()).unwrap();
    assert!(plane.total_variation() < 1e-20);

    let im = surface("cylinder", Params::new(), 128);
    let cyl = energy_measure(&im, 8, 4, &tol()).unwrap();
    assert!((cyl.total() - 2.0 * PI).abs() < 2e-3 * 2.0 * PI, "{}", cyl.total());
    assert!(cyl.mass.iter().all(|m| *m >= 0.0));

    // |grad n|^2 = 2 e^{2 lambda} = 2 sech^2 t on the Mercator sphere.
    let t = 6.0;
    let im = surface("sphere_mercator", Params::new().with("t_max", t), 256);
    let total = energy_measure(&im, 8, 8, &tol()).unwrap().total();
    let exact = 8.0 * PI * t.tanh();
    assert!((total - exact).abs() < 1e-3 * exact, "{total} vs {exact}");
}

#[test]
fn energy_measure_boxes_add_up_to_the_global_quadrature() {
    let im = surface("catenoid", Params::new(), 96);
    let frame = gauss_map(&im, &tol()).unwrap();
    let (n1, n2) = (frame.n.d1(), frame.n.d2());
    let density = Field::from_fn(im.phi.chart, 1, |i1, i2, o| {
        o[0] = n1.at(i1, i2).iter().chain(n2.at(i1, i2)).map(|v| v * v).sum()
    });
    let global = density.integral();
    for (b1, b2) in [(1, 1), (7, 5), (12, 9)] {
        let m = energy_measure(&im, b1, b2, &tol()).unwrap();
        assert!((m.total() - global).abs() < 1e-12 * global, "{b1}x{b2}");
    }
}

#[test]
fn curve_measure_examples() {
    let circle = PlanarCurve::circle(2.0, 0.0, 1.0, 2048, &tol()).unwrap();
    let m = curve_energy_measure(&circle, 8, &tol()).unwrap();
    assert!((m.total() - 2.0 * PI).abs() < 1e-6, "{}", m.total());

    let line = PlanarCurve::vertical_line(1.0, 3.0, 64, &tol()).unwrap();
    assert!(curve_energy_measure(&line, 4, &tol()).unwrap().total().abs() < 1e-20);

    let (family, _) = curve_family(&circle, 1.0, &[32], 8, &tol()).unwrap();
    for d in family[0].density() {
        assert!((d - 1.5).abs() < 0.05 * 1.5, "{d}");
    }
}

#[test]
fn curve_measure_rejects_non_unit_speed() {
    let circle = PlanarCurve::circle(2.0, 0.0, 1.0, 512, &tol()).unwrap();
    let strict = Tolerances {
        curve_speed: 0.0,
        ..tol()
    };
    assert!(matches!(
        curve_energy_measure(&circle, 4, &strict),
        Err(Error::InvalidCurve(_))
    ));
}

#[test]
fn oscillating_circles_carry_half_a_unit_of_defect() {
    let circle = PlanarCurve::circle(2.0, 0.0, 1.0, 2048, &tol()).unwrap();
    let (family, limit) = curve_family(&circle, 1.0, &[8, 16, 32], 8, &tol()).unwrap();
    let r = defect_estimate(&family, &limit).unwrap();
    for d in r.defect.density() {
        assert!((d - 0.5).abs() < 0.05 * 0.5, "{d}");
    }
    assert!(r.error_bar.mass.iter().all(|e| e.abs() < 0.05 * r.defect.width1()));
}

#[test]
fn constant_family_has_no_defect() {
    let m = grid_of(4, 3, |i, j| (i + 2 * j) as f64);
    let r = defect_estimate(&[m.clone(), m.clone(), m.clone()], &m).unwrap();
    assert!(r.defect.mass.iter().all(|x| *x == 0.0));
    assert!(r.monotone);
    assert!(defect_estimate(&[m.clone(), m.clone()], &m).is_err());
}

#[test]
fn product_structure_examples() {
    let additive = grid_of(10, 12, |i, j| (i as f64).sin() + (j as f64 * 0.3).cos());
    let fit = product_structure_test(&additive).unwrap();
    assert!(fit.relative < 1e-14, "{}", fit.relative);
    let recon = |i: usize, j: usize| fit.u[i] * additive.width2() + fit.v[j] * additive.width1();
    assert!((recon(3, 4) - additive.at(3, 4)).abs() < 1e-13);

    // Least-squares oracle on the design matrix of the additive model.
    let (b1, b2) = (9, 11);
    let f = |i: usize| 1.0 + (i as f64 * 0.7).sin();
    let g = |j: usize| 2.0 + (j as f64 * 0.4).cos();
    let product = grid_of(b1, b2, |i, j| f(i) * g(j));
    let a = DMatrix::from_fn(b1 * b2, b1 + b2, |r, c| {
        let (i, j) = (r / b2, r % b2);
        if c == i || c == b1 + j {
            1.0
        } else {
            0.0
        }
    });
    let y = DVector::from_vec(product.mass.clone());
    let x = a.clone().svd(true, true).solve(&y, 1e-12).unwrap();
    let oracle = (&a * x - &y).norm();
    let fit = product_structure_test(&product).unwrap();
    assert!(
        (fit.residual - oracle).abs() < 1e-10 * oracle,
        "{} vs {oracle}",
        fit.residual
    );
    assert!(fit.relative > 1e-3);

    assert!(product_structure_test(&grid_of(4, 12, |_, _| 1.0)).is_err());
}

#[test]
fn rotated_family_defect_is_theta_invariant_and_additive() {
    let circle = PlanarCurve::circle(2.0, 0.0, 1.0, 2048, &tol()).unwrap();
    let s = SurfaceSampling {
        n_theta: 32,
        n_t: 512,
        boxes_theta: 8,
        boxes_t: 16,
    };
    let (family, limit) = surface_family(&circle, 1.0, &[8, 16, 32], s, &tol()).unwrap();
    let r = defect_estimate(&family, &limit).unwrap();
    let fit = product_structure_test(&r.defect).unwrap();
    assert!(fit.relative < 0.05, "{}", fit.relative);
    assert!(fit.x1_variation < 0.05, "{}", fit.x1_variation);
    assert!(r.defect.total() > 0.0);
}

#[test]
fn smooth_fixed_family_has_no_atoms() {
    let g = PlaneGrid::unit(129).unwrap();
    let d = isolab::wente::DiscField::from_fn(g, |x, y| (1.0 - x * x) * (1.0 - y * y) * (1.0 + x));
    let m = MeasureGrid::from_density(&d.to_field(), 31, 31).unwrap();
    let r = atomic_detect(&[m.clone(), m.clone(), m], &AtomSettings::default()).unwrap();
    assert!(r.atoms.is_empty() && r.unresolved.is_empty(), "{r:?}");
}

#[test]
fn concentrating_jacobians_produce_one_atom() {
    let (a, b) = (Profile::default_a(), Profile::default_b());
    let g = PlaneGrid::unit(512).unwrap();
    let oracle = jacobian_oracle_weight(&a, &b, g).unwrap();
    let family = jacobian_family(&[1, 2, 4, 8], &a, &b, g, [0.0, 0.0], 31).unwrap();
    let r = atomic_detect(&family, &AtomSettings::default()).unwrap();
    assert_eq!(r.atoms.len(), 1, "{r:?}");
    let atom = r.atoms[0];
    assert!(atom.location.0.hypot(atom.location.1) < 1e-12, "{r:?}");
    assert!(
        (atom.weight - oracle).abs() < 0.1 * oracle.abs(),
        "{} vs {oracle}",
        atom.weight
    );
}

#[test]
fn atom_follows_a_translation() {
    let (a, b) = (Profile::default_a(), Profile::default_b());
    let g = PlaneGrid::unit(384).unwrap();
    let c = [0.4, -0.25];
    let family = jacobian_family(&[2, 4, 8], &a, &b, g, c, 31).unwrap();
    let r = atomic_detect(&family, &AtomSettings::default()).unwrap();
    assert_eq!(r.atoms.len(), 1, "{r:?}");
    let p = r.atoms[0].location;
    assert!((p.0 - c[0]).hypot(p.1 - c[1]) < 2.0 / 31.0, "{p:?}");
}

mod invariants {
    use super::*;
    use proptest::prelude::*;

    fn grid_from(v: &[f64]) -> MeasureGrid {
        grid_of(8, 9, |i, j| v[i * 9 + j])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn defect_estimate_is_linear(
            fam in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 72), 3),
            lim in proptest::collection::vec(-5.0f64..5.0, 72),
            fixed in proptest::collection::vec(-5.0f64..5.0, 72),
            c in -3.0f64..3.0,
        ) {
            let family: Vec<_> = fam.iter().map(|v| grid_from(v)).collect();
            let (limit, fixed) = (grid_from(&lim), grid_from(&fixed));
            let shifted: Vec<_> = family.iter().map(|m| m.add_scaled(&fixed, c).unwrap()).collect();
            let a = defect_estimate(&family, &limit).unwrap();
            let b = defect_estimate(&shifted, &limit.add_scaled(&fixed, c).unwrap()).unwrap();
            for (x, y) in a.defect.mass.iter().zip(&b.defect.mass) {
                prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn product_residual_ignores_added_products(
            d in proptest::collection::vec(-5.0f64..5.0, 72),
            u in proptest::collection::vec(-5.0f64..5.0, 8),
            v in proptest::collection::vec(-5.0f64..5.0, 9),
        ) {
            let base = grid_from(&d);
            let extra = grid_of(8, 9, |i, j| u[i] + v[j]);
            let a = product_structure_test(&base).unwrap();
            let b = product_structure_test(&base.add_scaled(&extra, 1.0).unwrap()).unwrap();
            prop_assert!((a.residual - b.residual).abs() < 1e-10 * (1.0 + a.residual));
        }
    }
}
