use std::path::Path;
use std::process::{Command, Output};

fn isolab(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_isolab"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t.to_string());
    }
    cmd.output().expect("binary runs")
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn entropy_config_on_cylinder_passes_with_zero_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cylinder.toml");
    std::fs::write(
        &config,
        "command = \"entropy\"\ngenerator = \"cylinder\"\nladder = [32, 64, 128]\n",
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = isolab(
        &[
            "entropy",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stdout(&o));
    let r = report(&out);
    let orders = r["results"]["orders"].as_array().unwrap();
    assert_eq!(orders.len(), 1);
    assert_eq!(orders[0]["status"], "exact");
    assert!(orders[0]["residuals"]
        .as_array()
        .unwrap()
        .iter()
        .all(|e| e.as_f64().unwrap() < 1e-13));
    for name in [
        "entropy_cylinder_densities.field",
        "entropy_cylinder_residuals.field",
        "entropy_residuals.svg",
    ] {
        assert!(out.join(name).exists(), "{name}");
    }
    // The echoed configuration reproduces the run.
    let echoed = dir.path().join("echo.toml");
    std::fs::write(&echoed, r["config"].as_str().unwrap()).unwrap();
    let again = dir.path().join("again");
    let o = isolab(
        &[
            "entropy",
            "--config",
            echoed.to_str().unwrap(),
            "--out",
            again.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success());
    let a = report(&again);
    assert_eq!(a["results"], r["results"]);
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let dirs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    let out = |k: usize| dirs[k].path().join("out");
    let outs: Vec<String> = [(0, 1), (1, 4)]
        .iter()
        .map(|&(k, threads)| {
            let o = isolab(
                &[
                    "convergence",
                    "poisson",
                    "--ladder",
                    "32,64,128",
                    "--out",
                    out(k).to_str().unwrap(),
                ],
                Some(threads),
            );
            assert!(o.status.success(), "{}", stdout(&o));
            std::fs::read_to_string(out(k).join("report.json")).unwrap()
        })
        .collect();
    // Only the output directory differs between the two configurations.
    let strip = |s: &str, k: usize| s.replace(out(k).to_str().unwrap(), "OUT");
    assert_eq!(strip(&outs[0], 0), strip(&outs[1], 1));
}

#[test]
fn wente_run_lists_the_battery_and_the_coordinate_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let o = isolab(
        &[
            "wente",
            "--grid",
            "128",
            "--seed",
            "7",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    let text = stdout(&o);
    assert!(text.contains("sup ratio"), "{text}");
    let r = report(dir.path());
    let ratio = r["results"]["coordinates"]["ratio_sup"].as_f64().unwrap();
    assert!((ratio * 4.0 * std::f64::consts::PI - 1.0).abs() < 0.02, "{ratio}");
    let table = std::fs::read_to_string(dir.path().join("wente_battery.txt")).unwrap();
    assert_eq!(table.lines().filter(|l| l.starts_with("128 ")).count(), 10);
    assert!(table.contains("random_trigonometric_seed7"));
}

#[test]
fn defect_transport_reports_half_unit_density() {
    let dir = tempfile::tempdir().unwrap();
    let o = isolab(&["defect", "transport", "--out", dir.path().to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stdout(&o));
    let r = report(dir.path());
    for d in r["results"]["curve_defect"]["density"].as_array().unwrap() {
        assert!((d.as_f64().unwrap() - 0.5).abs() < 0.025);
    }
    assert!(dir.path().join("surface_defect.measure").exists());
}

#[test]
fn generate_writes_a_loadable_surface() {
    let dir = tempfile::tempdir().unwrap();
    let o = isolab(
        &[
            "generate",
            "--generator",
            "torus_of_revolution",
            "--param",
            "R=3",
            "--grid",
            "48",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stdout(&o));
    let text = std::fs::read_to_string(dir.path().join("torus_of_revolution.surface")).unwrap();
    let im = isolab::files::surface_from_str(&text).unwrap();
    assert_eq!(im.phi.chart.n1, 48);
}

#[test]
fn failed_checks_and_bad_input_set_the_exit_status() {
    // The sheared chart is not conformal: the check fails and names the module.
    let o = isolab(
        &[
            "residuals",
            "isothermic",
            "--generator",
            "sheared_torus",
            "--grid",
            "32",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).contains("FAIL") && stdout(&o).contains("geometry:"),
        "{}",
        stdout(&o)
    );

    for args in [
        &["entropy", "--ladder", "64,64,128"][..],
        &["entropy", "--ladder", "64,128"],
        &["entropy", "--tol", "no_such_tolerance=1"],
        &["entropy", "--tol", "integrability=-1"],
        &["defect", "everything"],
        &["generate", "--generator", "klein_bottle"],
    ] {
        let o = isolab(args, None);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"), "{args:?}");
    }
}
