use std::f64::consts::PI;

use isolab::defect::energy_measure;
use isolab::files::{
    curve_from_str, field_from_str, field_to_string, measure_from_str, measure_to_string, surface_from_str,
    surface_to_string,
};
use isolab::geometry::gauss_map;
use isolab::zoo::{analytic, Params};
use isolab::{Error, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn surface_round_trip_is_bitwise() {
    for name in ["cylinder", "enneper", "clifford_torus_r4"] {
        let im = analytic(name, &Params::new(), 24, 20, &tol()).unwrap();
        let back = surface_from_str(&surface_to_string(&im)).unwrap();
        assert_eq!(back.phi, im.phi, "{name}");
        assert_eq!(back.m, im.m);
        assert_eq!(back.name, im.name);
        assert_eq!(back.conformal_claim.to_bits(), im.conformal_claim.to_bits());
        assert_eq!(surface_to_string(&back), surface_to_string(&im));
    }
}

#[test]
fn truncated_surface_names_what_is_missing() {
    let text = surface_to_string(&analytic("cylinder", &Params::new(), 16, 16, &tol()).unwrap());
    let head: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
    match surface_from_str(&head) {
        Err(Error::Schema { path, .. }) => assert!(["n2", "x1_range", "data"].contains(&path.as_str()), "{path}"),
        other => panic!("{other:?}"),
    }
    let cut = &text[..text.len() / 2];
    let cut = &cut[..cut.rfind('\n').unwrap() + 1];
    match surface_from_str(cut) {
        Err(Error::Schema { path, msg }) => assert!(path.starts_with("data[") && msg.contains("256"), "{path}: {msg}"),
        other => panic!("{other:?}"),
    }
    let bad = text.replace("format isolab-surface", "format isolab-field");
    assert!(matches!(surface_from_str(&bad), Err(Error::Schema { path, .. }) if path == "format"));
}

#[test]
fn older_minor_version_is_accepted() {
    let text = surface_to_string(&analytic("cylinder", &Params::new(), 16, 16, &tol()).unwrap());
    let old: String = text
        .lines()
        .filter(|l| !l.starts_with("name") && !l.starts_with("conformal_claim"))
        .map(|l| {
            if l.starts_with("version") {
                "version 1.0".to_owned()
            } else {
                l.to_owned()
            }
        })
        .map(|l| l + "\n")
        .collect();
    let im = surface_from_str(&old).unwrap();
    assert_eq!(im.phi.chart.n1, 16);
    let newer = text.replace("version 1.1", "version 2.0");
    assert!(matches!(surface_from_str(&newer), Err(Error::Schema { path, .. }) if path == "version"));
}

#[test]
fn field_and_measure_round_trip() {
    let im = analytic("catenoid", &Params::new(), 20, 18, &tol()).unwrap();
    let n = gauss_map(&im, &tol()).unwrap().n;
    assert_eq!(field_from_str(&field_to_string(&n)).unwrap(), n);
    let m = energy_measure(&im, 5, 3, &tol()).unwrap();
    assert_eq!(measure_from_str(&measure_to_string(&m)).unwrap(), m);
    let first_row = field_to_string(&n)
        .lines()
        .find(|l| l.starts_with("0 "))
        .unwrap()
        .to_owned();
    assert_eq!(first_row.split_whitespace().count(), 3 + n.comps);
}

#[test]
fn two_column_curves() {
    let n = 400;
    let text: String = (0..n)
        .map(|i| {
            let s = 2.0 * PI * i as f64 / n as f64;
            format!("{} {}\n", 2.0 + s.cos(), s.sin())
        })
        .collect();
    let c = curve_from_str(&format!("# r z\n{text}"), true, None, &tol()).unwrap();
    assert!((c.length - 2.0 * PI).abs() < 1e-8);
    let ellipse: String = (0..4 * n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / (4 * n) as f64;
            format!("{} {}\n", 2.0 + t.cos(), 0.5 * t.sin())
        })
        .collect();
    assert!(curve_from_str(&ellipse, true, None, &tol()).is_err());
    curve_from_str(&ellipse, true, Some(1024), &tol()).unwrap();
    assert!(
        matches!(curve_from_str("1 2\n3\n", false, None, &tol()), Err(Error::Schema { path, .. }) if path == "line 2")
    );
}
