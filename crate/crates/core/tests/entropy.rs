use isolab::entropy::{entropy_fields, orthogonality_checks, orthogonality_report, reconstruct_potentials};
use isolab::zoo::{analytic, Params};
use isolab::{Error, Field, GridChart, Immersion, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn surface(name: &str, n: usize) -> Immersion {
    analytic(name, &Params::new(), n, n, &tol()).unwrap()
}

fn order(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}

/// Second-order decay, or already at rounding level.
fn second_order(coarse: f64, fine: f64) -> bool {
    fine <= (coarse / 2.8).max(1e-9)
}

fn transpose(f: &Field) -> Field {
    let c = f.chart;
    let t = GridChart::new(c.x2_range, c.x1_range, c.n2, c.n1, c.periodic2, c.periodic1).unwrap();
    Field::from_fn(t, f.comps, |i1, i2, out| out.copy_from_slice(f.at(i2, i1)))
}

#[test]
fn cylinder_densities_are_constant() {
    let im = surface("cylinder", 128);
    let ef = entropy_fields(&im, &tol()).unwrap();
    let h = im.phi.chart.h_max();
    assert!(ef.d1.max_abs() < 1e-12);
    assert!(ef.d2.data.iter().all(|v| (v - 1.0).abs() < h * h));
    assert!(ef.f.max_abs() < 1e-12);
    assert!(ef.norms1.linf < 1e-10 && ef.norms2.linf < 1e-10);
}

#[test]
fn conservation_residuals_converge_on_torus_and_catenoid() {
    for name in ["torus_of_revolution", "catenoid"] {
        let e: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&n| {
                let ef = entropy_fields(&surface(name, n), &tol()).unwrap();
                ef.norms1.l1 + ef.norms2.l1
            })
            .collect();
        for w in e.windows(2) {
            assert!(order(w[0], w[1]) >= 1.5, "{name}: {e:?}");
        }
    }
}

#[test]
fn residuals_swap_with_the_coordinates() {
    let im = surface("catenoid", 96);
    let swapped = Immersion::new("catenoid_swapped", transpose(&im.phi), im.conformal_claim)
        .unwrap()
        .with_lambda(transpose(im.lambda_exact.as_ref().unwrap()));
    let a = entropy_fields(&im, &tol()).unwrap();
    let b = entropy_fields(&swapped, &tol()).unwrap();
    let size = a.norms1.l1 + a.norms2.l1;
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * size;
    assert!(close(a.norms1.l1, b.norms2.l1), "{} {}", a.norms1.l1, b.norms2.l1);
    assert!(close(a.norms2.l1, b.norms1.l1), "{} {}", a.norms2.l1, b.norms1.l1);
    assert!((a.norms2.linf - b.norms1.linf).abs() <= 1e-9 * a.norms2.linf);
    let d = transpose(&b.d1).sub(&a.d2).max_abs();
    assert!(d < 1e-9 * a.d2.max_abs(), "{d}");
}

#[test]
fn non_isothermic_charts_are_refused() {
    let im = surface("sheared_torus", 64);
    assert!(matches!(
        entropy_fields(&im, &tol()),
        Err(Error::NotConformal { .. } | Error::NotIsothermic { .. })
    ));
}

#[test]
fn orthogonality_holds_on_isothermic_charts() {
    let cyl = orthogonality_checks(&surface("cylinder", 64), &tol()).unwrap();
    assert!(cyl.normal_mixed < 1e-10 && cyl.d1n_phi2 < 1e-10 && cyl.d2n_phi1 < 1e-10);
    assert!(cyl.gradient_identity < 1e-12);
    let r: Vec<_> = [64, 128, 256]
        .iter()
        .map(|&n| orthogonality_checks(&surface("catenoid", n), &tol()).unwrap())
        .collect();
    for w in r.windows(2) {
        assert!(second_order(w[0].normal_mixed, w[1].normal_mixed), "{r:?}");
        assert!(second_order(w[0].d1n_phi2, w[1].d1n_phi2), "{r:?}");
        assert!(second_order(w[0].d2n_phi1, w[1].d2n_phi1), "{r:?}");
        assert!(second_order(w[0].gradient_identity, w[1].gradient_identity), "{r:?}");
    }
}

#[test]
fn sheared_torus_keeps_a_mixed_normal_component() {
    let fine = orthogonality_report(&surface("sheared_torus", 256), &tol())
        .unwrap()
        .normal_mixed;
    assert!(fine > 0.1, "{fine}");
    for n in [64, 128] {
        let v = orthogonality_report(&surface("sheared_torus", n), &tol())
            .unwrap()
            .normal_mixed;
        assert!((v - fine).abs() < 0.05 * fine, "{n}: {v} vs {fine}");
    }
}

#[test]
fn cylinder_potentials() {
    let im = surface("cylinder", 128);
    let ef = entropy_fields(&im, &tol()).unwrap();
    let p = reconstruct_potentials(&ef, &tol()).unwrap();
    let c = p.a.chart;
    assert!(p.a.max_abs() < 1e-12);
    let exact_b = Field::from_fn(c, 1, |i1, _, o| o[0] = c.x1(i1));
    let exact_alpha = Field::from_fn(c, 1, |i1, _, o| o[0] = 0.5 * c.x1(i1).powi(2));
    let (mb, ma) = (exact_b.mean(), exact_alpha.mean());
    let eb = exact_b.map(1, |v, o| o[0] = v[0] - mb).sub(&p.b).max_abs();
    let ea = exact_alpha.map(1, |v, o| o[0] = v[0] - ma).sub(&p.alpha).max_abs();
    assert!(eb < 1e-2, "{eb}");
    assert!(ea < 2e-2, "{ea} {eb}");
    assert!(p.a.mean().abs() < 1e-12 && p.b.mean().abs() < 1e-12 && p.alpha.mean().abs() < 1e-12);
}

#[test]
fn flat_plane_potentials_vanish() {
    let ef = entropy_fields(&surface("flat_plane", 64), &tol()).unwrap();
    let p = reconstruct_potentials(&ef, &tol()).unwrap();
    assert!(p.a.max_abs() < 1e-12 && p.b.max_abs() < 1e-12 && p.alpha.max_abs() < 1e-12);
}

#[test]
fn torus_potentials_round_trip_at_second_order() {
    let p: Vec<_> = [64, 128, 256]
        .iter()
        .map(|&n| {
            let ef = entropy_fields(&surface("torus_of_revolution", n), &tol()).unwrap();
            reconstruct_potentials(&ef, &tol()).unwrap()
        })
        .collect();
    for w in p.windows(2) {
        assert!(
            second_order(w[0].curl.ab.linf, w[1].curl.ab.linf),
            "{:?}",
            (w[0].curl, w[1].curl)
        );
        for k in 0..3 {
            assert!(
                second_order(w[0].identities[k].l1, w[1].identities[k].l1),
                "identity {k}: {:?} {:?}",
                w[0].identities[k],
                w[1].identities[k]
            );
        }
    }
}

#[test]
fn potentials_refuse_failing_conservation() {
    let mut ef = entropy_fields(&surface("catenoid", 64), &tol()).unwrap();
    ef.relative = 0.5;
    assert!(matches!(
        reconstruct_potentials(&ef, &tol()),
        Err(Error::Integrability { .. })
    ));
}

mod invariants {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn torus_laws_are_swap_symmetric(big in 1.5f64..4.0, frac in 0.2f64..0.8) {
            let p = Params::new().with("R", big).with("r", frac * big);
            let im = analytic("torus_of_revolution", &p, 48, 48, &tol()).unwrap();
            let swapped = Immersion::new("swapped", transpose(&im.phi), im.conformal_claim).unwrap();
            let a = entropy_fields(&im, &tol()).unwrap();
            let b = entropy_fields(&swapped, &tol()).unwrap();
            prop_assert!(a.relative <= tol().integrability);
            let size = a.norms1.l1 + a.norms2.l1;
            prop_assert!((a.norms1.l1 - b.norms2.l1).abs() <= 1e-9 * size);
            prop_assert!((a.norms2.l1 - b.norms1.l1).abs() <= 1e-9 * size);
        }
    }
}

#[test]
fn alpha_potentials_stay_bounded_along_an_oscillating_family() {
    use isolab::zoo::{oscillating_curve, revolution, FamilySpec, PlanarCurve};
    let circle = PlanarCurve::circle(2.0, 0.0, 1.0, 2048, &tol()).unwrap();
    let norms: Vec<f64> = [8u32, 16, 32]
        .iter()
        .map(|&k| {
            let c = oscillating_curve(&circle, FamilySpec { amplitude: 1.0, k }, &tol()).unwrap();
            let im = revolution(&c, 16, 1024, &tol()).unwrap();
            let ef = entropy_fields(&im, &tol()).unwrap();
            let p = reconstruct_potentials(&ef, &tol()).unwrap();
            let sq = |f: &Field| f.map(1, |v, o| o[0] = v[0] * v[0]).integral();
            (sq(&p.alpha) + sq(&p.a) + sq(&p.b)).sqrt()
        })
        .collect();
    let (lo, hi) = norms
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(hi < 1.5 * lo, "{norms:?}");
}
