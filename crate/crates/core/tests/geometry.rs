use std::f64::consts::PI;

use isolab::geometry::{self, QuadraticDifferential, SurfaceGeometry};
use isolab::zoo::{analytic, Params};
use isolab::{Error, Field, GridChart, Immersion, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn surface(name: &str, n: usize) -> Immersion {
    analytic(name, &Params::new(), n, n, &tol()).unwrap()
}

fn surface_with(name: &str, p: Params, n: usize) -> Immersion {
    analytic(name, &p, n, n, &tol()).unwrap()
}

/// Observed order from errors on grids n and 2n.
fn order(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}

#[test]
fn cylinder_conformal_factor_is_log_radius() {
    let im = surface_with("cylinder", Params::new().with("radius", 3.0), 128);
    let cf = geometry::conformal_factor(&im, &tol()).unwrap();
    assert!(cf.lambda.data.iter().all(|l| (l - 3f64.ln()).abs() < 1e-3));
    assert!(cf.passes());
}

#[test]
fn stereographic_factor_at_origin_is_log_two() {
    let im = surface("sphere_stereographic", 257);
    let cf = geometry::conformal_factor(&im, &tol()).unwrap();
    assert!((cf.lambda.value(128, 128) - 2f64.ln()).abs() < 1e-3);
    let exact = im.lambda_exact.as_ref().unwrap();
    let err = cf.lambda.sub(exact).interior_norms(2).linf;
    assert!(err < 1e-3, "{err}");
}

#[test]
fn non_conformal_map_is_flagged() {
    let chart = GridChart::new((0.0, 1.0), (0.0, 1.0), 16, 16, false, false).unwrap();
    let phi = Field::from_fn(chart, 3, |i1, i2, o| {
        o.copy_from_slice(&[chart.x1(i1), 2.0 * chart.x2(i2), 0.0])
    });
    let im = Immersion::new("stretched", phi, 1e-6).unwrap();
    let cf = geometry::conformal_factor(&im, &tol()).unwrap();
    assert!((cf.residual - 1.0).abs() < 1e-12);
    assert!(!cf.passes());
    assert!(matches!(
        geometry::weingarten(&im, &tol()),
        Err(Error::NotConformal { .. })
    ));
}

#[test]
fn rank_deficiency_names_the_node() {
    let chart = GridChart::new((0.0, 1.0), (0.0, 1.0), 16, 16, false, false).unwrap();
    let phi = Field::from_fn(chart, 3, |i1, _, o| o.copy_from_slice(&[chart.x1(i1), 0.0, 0.0]));
    let im = Immersion::new("line", phi, 1e-6).unwrap();
    match geometry::conformal_factor(&im, &tol()) {
        Err(Error::RankDeficient { i1, i2, .. }) => assert_eq!((i1, i2), (0, 0)),
        other => panic!("expected rank failure, got {other:?}"),
    }
}

#[test]
fn gauss_map_of_cylinder_and_plane() {
    let im = surface("cylinder", 32);
    let fr = geometry::gauss_map(&im, &tol()).unwrap();
    let c = *im.chart();
    for i1 in 0..c.n1 {
        let x = c.x1(i1);
        let n = fr.n.at(i1, 5);
        assert!((n[0] - x.cos()).abs() < 1e-12 && (n[1] - x.sin()).abs() < 1e-12 && n[2].abs() < 1e-12);
    }
    let plane = surface("flat_plane", 16);
    let fr = geometry::gauss_map(&plane, &tol()).unwrap();
    assert!(fr.n.data.chunks(3).all(|n| n == [0.0, 0.0, 1.0]));
}

#[test]
fn catenoid_normal_is_orthogonal_to_second_order() {
    let err = |n: usize| {
        let im = surface("catenoid", n);
        let fr = geometry::gauss_map(&im, &tol()).unwrap();
        let d1 = im.phi.d1();
        let d2 = im.phi.d2();
        let mut e: f64 = 0.0;
        for i1 in 0..n {
            for i2 in 2..n - 2 {
                let nv = fr.n.at(i1, i2);
                let len: f64 = nv.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((len - 1.0).abs() < 1e-12);
                // Compare against the exact tangents.
                let (x1, x2) = (im.chart().x1(i1), im.chart().x2(i2));
                let t1 = [-x2.cosh() * x1.sin(), x2.cosh() * x1.cos(), 0.0];
                let t2 = [x2.sinh() * x1.cos(), x2.sinh() * x1.sin(), 1.0];
                let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                e = e.max(dot(nv, &t1).abs()).max(dot(nv, &t2).abs());
                let _ = (d1.at(i1, i2), d2.at(i1, i2));
            }
        }
        e
    };
    let (a, b) = (err(32), err(64));
    assert!(order(a, b) > 1.8, "{a} {b}");
}

#[test]
fn weingarten_examples() {
    // Umbilic sphere: H0 vanishes to discretization error.
    let g_im = surface("sphere_stereographic", 128);
    let w = geometry::weingarten(&g_im, &tol()).unwrap();
    assert!(w.re.interior_norms(2).linf < 5e-3 && w.im.interior_norms(2).linf < 5e-3);

    // Unit cylinder: H0 = -n/2, real.
    let im = surface("cylinder", 128);
    let g = SurfaceGeometry::new(&im, &tol()).unwrap();
    let w = g.weingarten();
    for i in 0..im.chart().len() {
        let (i1, i2) = im.chart().node(i);
        let n = g.frame.n.at(i1, i2);
        for (k, nk) in n.iter().enumerate() {
            assert!((w.re.at(i1, i2)[k] + 0.5 * nk).abs() < 2e-3);
            assert!(w.im.at(i1, i2)[k].abs() < 1e-12);
        }
    }

    // Catenoid: real with |H0| = sech^2 x2.
    let im = surface("catenoid", 128);
    let w = geometry::weingarten(&im, &tol()).unwrap();
    let c = *im.chart();
    let mut err: f64 = 0.0;
    for i1 in 0..c.n1 {
        for i2 in 2..c.n2 - 2 {
            let v = w.re.at(i1, i2);
            let mag = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            err = err.max((mag - 1.0 / c.x2(i2).cosh().powi(2)).abs());
            assert!(w.im.at(i1, i2).iter().all(|x| x.abs() < 1e-10));
        }
    }
    assert!(err < 1e-3, "{err}");
}

#[test]
fn weingarten_formulas_agree_and_h0_is_normal() {
    // The Mercator sphere is checked on a short chart: near |t| = 8 the divergence formula
    // differentiates fields of size cosh t whose sum vanishes.
    for name in isolab::zoo::GENERATORS.iter().filter(|n| **n != "sheared_torus") {
        let p = if *name == "sphere_mercator" {
            Params::new().with("t_max", 3.0)
        } else {
            Params::new()
        };
        let im = surface_with(name, p, 256);
        let w = geometry::weingarten(&im, &tol()).unwrap();
        assert!(w.discrepancy < 1e-3, "{name}: {}", w.discrepancy);
        assert!(w.normality_residual < 1e-2, "{name}: {}", w.normality_residual);
    }
}

#[test]
fn imaginary_weingarten_matches_isothermic_vector() {
    // A chart that is conformal but not curvature-line: the rotated cylinder.
    let im = surface_with("cylinder", Params::new().with("rotation", 0.7), 128);
    let r = geometry::isothermic_residual(&im, &QuadraticDifferential::one(*im.chart()), &tol()).unwrap();
    assert!(r.max > 0.1);
    assert!(r.identity_discrepancy.unwrap() < 1e-3, "{:?}", r.identity_discrepancy);
}

#[test]
fn isothermic_examples() {
    for name in [
        "catenoid",
        "cylinder",
        "sphere_stereographic",
        "sphere_mercator",
        "torus_of_revolution",
    ] {
        let im = surface(name, 128);
        let r = geometry::isothermic_residual(&im, &QuadraticDifferential::one(*im.chart()), &tol()).unwrap();
        assert!(r.max < 1e-3, "{name}: {}", r.max);
    }
    // Any holomorphic f on the sphere.
    let im = surface("sphere_stereographic", 128);
    let q = QuadraticDifferential::new(*im.chart(), 2, |x, y| (x * x - y * y + 1.0, 2.0 * x * y));
    assert!(q.cr_residual < 1e-10);
    let r = geometry::isothermic_residual(&im, &q, &tol()).unwrap();
    assert!(r.max < 5e-2, "{}", r.max);
    assert!(r.vector.is_none());
}

#[test]
fn willmore_energy_examples() {
    // The periodic difference of cos x1 shrinks |Phi1| by sin(h)/h, so W carries an O(h^2) bias.
    let im = surface("cylinder", 256);
    let w = geometry::mean_curvature(&im, &tol()).unwrap();
    assert!(
        (w.willmore_energy - PI / 2.0).abs() < 2e-4 * PI,
        "{}",
        w.willmore_energy
    );

    let err = |n: usize| {
        let im = surface("sphere_mercator", n);
        (geometry::mean_curvature(&im, &tol()).unwrap().willmore_energy - 4.0 * PI).abs()
    };
    let (a, b, c) = (err(64), err(128), err(256));
    assert!(order(a, b) >= 1.5 && order(b, c) >= 1.5, "{a} {b} {c}");

    let im = surface("catenoid", 128);
    let w = geometry::mean_curvature(&im, &tol()).unwrap();
    assert!(w.willmore_energy < 1e-4, "{}", w.willmore_energy);
}

#[test]
fn willmore_residual_examples() {
    let err = |name: &str, n: usize| {
        geometry::willmore_residual(&surface(name, n), &tol())
            .unwrap()
            .norms
            .linf
    };
    for name in ["catenoid", "sphere_stereographic"] {
        let (a, b) = (err(name, 64), err(name, 128));
        assert!(order(a, b) > 1.5, "{name}: {a} {b}");
    }
    // Enneper's surface is a cubic polynomial: the differences are exact up to rounding.
    assert!(err("enneper", 64) < 1e-8);
    // The torus with radii ratio sqrt(2) is Willmore; the ratio-2 torus is not.
    let willmore_torus = |n| {
        let p = Params::new().with("R", 2f64.sqrt()).with("r", 1.0);
        geometry::willmore_residual(&surface_with("torus_of_revolution", p, n), &tol())
            .unwrap()
            .norms
            .linf
    };
    let (a, b) = (willmore_torus(64), willmore_torus(128));
    assert!(order(a, b) > 1.8, "{a} {b}");
    assert!(err("torus_of_revolution", 128) > 1.0);
    // The round cylinder is not Willmore: the residual is n/2.
    let (a, b) = (err("cylinder", 64), err("cylinder", 128));
    assert!((a - 0.5).abs() < 1e-2 && (b - 0.5).abs() < 1e-2, "{a} {b}");
}

#[test]
fn constrained_willmore_on_cylinder_and_minimal_surfaces() {
    let im = surface("cylinder", 128);
    let cw = geometry::constrained_willmore_residual(&im, 0.0, &tol()).unwrap();
    let c = *im.chart();
    for i1 in 0..c.n1 {
        for i2 in 2..c.n2 - 2 {
            assert!((cw.f.re.value(i1, i2) - 0.25).abs() < 1e-3 && cw.f.im.value(i1, i2).abs() < 1e-12);
        }
    }
    assert!(cw.f.cr_residual < 1e-3);
    assert!(cw.chain.norms.linf < 1e-3, "{}", cw.chain.norms.linf);

    // Q scan on the rotated chart, where the constraint term is active.
    let rot = surface_with("cylinder", Params::new().with("rotation", PI / 4.0), 128);
    let g = SurfaceGeometry::new(&rot, &tol()).unwrap();
    let (best, _) = (0..=40)
        .map(|k| k as f64 * 0.025)
        .map(|q| (q, g.constrained_willmore(q).residual.norms.l2))
        .fold((f64::NAN, f64::MAX), |acc, (q, r)| if r < acc.1 { (q, r) } else { acc });
    assert!((best - 0.5).abs() < 1e-9, "{best}");
    assert!(g.constrained_willmore(0.5).residual.norms.linf < 1e-2);

    let cat = surface("catenoid", 128);
    assert!(
        geometry::constrained_willmore_residual(&cat, 0.0, &tol())
            .unwrap()
            .residual
            .norms
            .linf
            < 1e-2
    );
    let sph = surface("sphere_stereographic", 128);
    for q in [0.0, 1.0, 3.0] {
        let r = geometry::constrained_willmore_residual(&sph, q, &tol())
            .unwrap()
            .residual
            .norms
            .linf;
        assert!(r < 5e-2, "{q}: {r}");
    }
    assert!(geometry::constrained_willmore_residual(&sph, -1.0, &tol()).is_err());
}

#[test]
fn codazzi_examples() {
    let err = |name: &str, n: usize| geometry::codazzi_residual(&surface(name, n), &tol()).unwrap().norms.l1;
    let (a, b) = (err("sphere_stereographic", 64), err("sphere_stereographic", 128));
    assert!(order(a, b) > 1.8, "{a} {b}");
    assert!(err("catenoid", 128) < 1e-3);
    let (a, b, c) = (
        err("torus_of_revolution", 64),
        err("torus_of_revolution", 128),
        err("torus_of_revolution", 256),
    );
    assert!(order(a, b) >= 1.5 && order(b, c) >= 1.5, "{a} {b} {c}");
}

#[test]
fn liouville_examples() {
    assert!(
        geometry::liouville_check(&surface("flat_plane", 16), &tol())
            .unwrap()
            .norms
            .linf
            == 0.0
    );
    assert!(
        geometry::liouville_check(&surface("cylinder", 64), &tol())
            .unwrap()
            .norms
            .linf
            < 1e-10
    );
    let err = |n| {
        geometry::liouville_check(&surface("sphere_stereographic", n), &tol())
            .unwrap()
            .norms
            .linf
    };
    let (a, b) = (err(64), err(128));
    assert!(order(a, b) > 1.8, "{a} {b}");
}

#[test]
fn cylinder_dual_is_cylinder_of_inverse_radius() {
    let im = surface_with("cylinder", Params::new().with("radius", 2.0), 128);
    let d = geometry::christoffel_dual(&im, &tol()).unwrap();
    assert!(d.closure < 1e-12);
    let c = *im.chart();
    // Distance to the x3 axis through the centroid of each x1-loop is 1/R.
    for i2 in [3, 60, 120] {
        let (mut cx, mut cy) = (0.0, 0.0);
        for i1 in 0..c.n1 {
            cx += d.dual.phi.at(i1, i2)[0] / c.n1 as f64;
            cy += d.dual.phi.at(i1, i2)[1] / c.n1 as f64;
        }
        for i1 in 0..c.n1 {
            let p = d.dual.phi.at(i1, i2);
            let r = ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt();
            assert!((r - 0.5).abs() < 1e-3, "{r}");
        }
    }
    assert!(d.dot_residual < 1e-3 && d.wedge_residual < 1e-3);

    // Dual of the dual is the original up to translation.
    let dd = geometry::christoffel_dual(&d.dual, &tol()).unwrap();
    let shift: Vec<f64> = (0..3).map(|k| im.phi.at(0, 0)[k] - dd.dual.phi.at(0, 0)[k]).collect();
    let err = (0..c.len())
        .map(|i| {
            let (i1, i2) = c.node(i);
            (0..3)
                .map(|k| (dd.dual.phi.at(i1, i2)[k] + shift[k] - im.phi.at(i1, i2)[k]).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    // Two trapezoid integrations and two rounds of differences, each O(h^2).
    assert!(err < 2.0 * c.h_max().powi(2), "{err}");
}

#[test]
fn catenoid_dual_is_spherical() {
    let im = surface("catenoid", 128);
    let d = geometry::christoffel_dual(&im, &tol()).unwrap();
    let pts: Vec<Vec<f64>> = d.dual.phi.data.chunks(3).map(|p| p.to_vec()).collect();
    let (_, spread) = geometry::sphere_fit(&pts).unwrap();
    assert!(spread < 1e-2, "{spread}");
    assert!(d.dot_residual < 1e-3 && d.wedge_residual < 1e-3);
}

#[test]
fn sphere_dual_residuals_decrease() {
    let res = |n| {
        let d = geometry::christoffel_dual(&surface("sphere_stereographic", n), &tol()).unwrap();
        d.dot_residual.max(d.wedge_residual)
    };
    let (a, b) = (res(128), res(256));
    assert!(order(a, b) > 1.8, "{a} {b}");
}

#[test]
fn dual_refuses_non_isothermic_charts() {
    let im = surface_with("cylinder", Params::new().with("rotation", 0.4), 64);
    assert!(matches!(
        geometry::christoffel_dual(&im, &tol()),
        Err(Error::NotIsothermic { .. })
    ));
}

#[test]
fn clifford_torus_has_parallel_mean_curvature() {
    let res = |n| {
        let im = surface("clifford_torus_r4", n);
        let g = SurfaceGeometry::new(&im, &tol()).unwrap();
        let h = g.mean_curvature().h;
        let (a, b) = (g.normal_part(&h.d1()), g.normal_part(&h.d2()));
        a.max_abs().max(b.max_abs())
    };
    // Every coordinate is a trigonometric polynomial of one variable, so the normal part of
    // dH vanishes to rounding at any resolution.
    assert!(res(16) < 1e-10 && res(64) < 1e-10);
}

mod equivariance {
    use super::*;
    use proptest::prelude::*;

    fn rotation(a: f64, b: f64, c: f64) -> Vec<f64> {
        let (ca, sa, cb, sb, cc, sc) = (a.cos(), a.sin(), b.cos(), b.sin(), c.cos(), c.sin());
        let rz = [[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]];
        let ry = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
        let rx = [[1.0, 0.0, 0.0], [0.0, cc, -sc], [0.0, sc, cc]];
        let mul = |p: [[f64; 3]; 3], q: [[f64; 3]; 3]| {
            let mut r = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    r[i][j] = (0..3).map(|k| p[i][k] * q[k][j]).sum();
                }
            }
            r
        };
        mul(mul(rz, ry), rx).iter().flatten().copied().collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn residual_norms_are_invariant_under_rigid_motions(
            a in 0.0..6.3f64, b in 0.0..6.3f64, c in 0.0..6.3f64,
            shift in proptest::array::uniform3(-5.0..5.0f64),
            which in 0usize..3,
        ) {
            let name = ["catenoid", "torus_of_revolution", "enneper"][which];
            let im = surface(name, 32);
            let moved = im.rigid_motion(&rotation(a, b, c), &shift).unwrap();
            let (g0, g1) = (SurfaceGeometry::new(&im, &tol()).unwrap(), SurfaceGeometry::new(&moved, &tol()).unwrap());
            let pairs = [
                (g0.willmore_residual().norms.l2, g1.willmore_residual().norms.l2),
                (g0.codazzi_residual().norms.l2, g1.codazzi_residual().norms.l2),
                (g0.liouville().norms.l2, g1.liouville().norms.l2),
                (g0.mean_curvature().willmore_energy, g1.mean_curvature().willmore_energy),
                (g0.weingarten().discrepancy, g1.weingarten().discrepancy),
                (g0.isothermic_defect(), g1.isothermic_defect()),
            ];
            for (x, y) in pairs {
                prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()), "{} vs {}", x, y);
            }
        }
    }
}
