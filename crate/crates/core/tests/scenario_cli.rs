use std::path::{Path, PathBuf};
use std::process::Command;

use igac::catalog::formulas::ratio_trivariate_strong;
use igac::catalog::CATALOG;
use igac::scenario::{parse_scenario, run, run_path, OUT_ENV};
use proptest::prelude::*;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn igac() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_igac"));
    c.env_remove(OUT_ENV);
    c
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn shipped_scenarios_pass_and_are_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, workers) in [(&a, 1), (&b, 4)] {
        for (file, result) in run_path(&scenarios(), Some(dir.path()), workers).unwrap() {
            let report = result.unwrap_or_else(|e| panic!("{}: {e}", file.display()));
            assert!(report.passed(), "{}: {:?}", report.id, report.assertions);
        }
    }
    let (fa, fb) = (read_all(a.path()), read_all(b.path()));
    assert!(fa.len() > 20);
    // fit.json carries no timings, so everything must match byte for byte
    assert_eq!(fa, fb);
}

#[test]
fn trace_and_path_headers() {
    let dir = tempfile::tempdir().unwrap();
    let r = igac::scenario::run_file(&scenarios().join("spin_integrable_log.toml"), Some(dir.path())).unwrap();
    let text = |suffix: &str| std::fs::read_to_string(dir.path().join(format!("{}_{suffix}", r.id))).unwrap();
    assert!(text("trace.csv").starts_with("tau,volume,igc,ige\n"));
    assert!(text("path.csv").starts_with("tau,theta_1,theta_2,v_1,v_2\n"));
    let report = text("fit.txt");
    assert!(report.contains("ige: regime=logarithmic coefficient=2.0000"), "{report}");
    assert!(report.contains("comparison igc:"));
    assert_eq!(report.lines().filter(|l| l.starts_with("tau=")).count(), 151);
}

#[test]
fn ratio_tables_hold_exact_closed_form_values() {
    let dir = tempfile::tempdir().unwrap();
    igac::scenario::run_file(&scenarios().join("ratios.toml"), Some(dir.path())).unwrap();
    let text = std::fs::read_to_string(dir.path().join("ratios_ratio_trivariate_strong.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rho,value"));
    let mut n = 0;
    for line in lines {
        let (rho, value) = line.split_once(',').unwrap();
        let (rho, value): (f64, f64) = (rho.parse().unwrap(), value.parse().unwrap());
        assert_eq!(value, ratio_trivariate_strong(rho).unwrap());
        n += 1;
    }
    assert_eq!(n, 15);
}

#[test]
fn failing_expectation_sets_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("wrong.toml");
    let text = std::fs::read_to_string(scenarios().join("spin_integrable_log.toml"))
        .unwrap()
        .replace("regime = \"logarithmic\"", "regime = \"exponential\"");
    std::fs::write(&scenario, text).unwrap();
    let out = igac().arg("run").arg(&scenario).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("FAIL wrong"), "{stdout}");
    assert!(stdout.contains("want exponential"), "{stdout}");
}

#[test]
fn env_var_picks_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = igac()
        .env(OUT_ENV, dir.path())
        .arg("run")
        .arg(scenarios().join("radial_geodesic.toml"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("radial_geodesic_path.csv").exists());

    // --out wins over the environment
    let other = tempfile::tempdir().unwrap();
    let out = igac()
        .env(OUT_ENV, dir.path())
        .args(["run", "--out"])
        .arg(other.path())
        .arg(scenarios().join("spin_bvp.toml"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(other.path().join("spin_bvp_path.csv").exists());
    assert!(!dir.path().join("spin_bvp_path.csv").exists());
}

#[test]
fn invalid_scenario_is_reported_not_run() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.toml");
    std::fs::write(&scenario, "kind = \"geodesic_ivp\"\n[model]\nname = \"trivariate_case2\"\nrho = 0.8\n").unwrap();
    let out = igac().arg("run").arg(&scenario).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("sqrt(2)/2"), "{stdout}");
    assert!(stdout.contains("v0"), "{stdout}");
}

#[test]
fn catalog_list_names_every_model() {
    let out = igac().args(["catalog", "list"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for e in CATALOG {
        assert!(stdout.lines().any(|l| l.starts_with(&format!("{}\t", e.name))), "{}", e.name);
    }
}

#[test]
fn metric_command_prints_the_tensor() {
    let out = igac()
        .args(["metric", "--model", "gauss_2du", "--params", "Sigma=2", "--theta", "0.5,2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<Vec<f64>> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows, vec![vec![0.25, 0.0], vec![0.0, 1.0]]);

    let out = igac()
        .args(["metric", "--model", "bivariate_corr", "--params", "rho=2", "--theta", "0,1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(-1, 1)"));
}

#[test]
fn ratios_command_prints_csv() {
    let out = igac()
        .args(["ratios", "--family", "bivariate_strong", "--rho-grid", "0:0.44:0.11"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let last = stdout.lines().last().unwrap();
    assert_eq!(stdout.lines().count(), 6);
    let value: f64 = last.split_once(',').unwrap().1.parse().unwrap();
    assert!((value - 1.2).abs() < 1e-15, "{last}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ratio_scenarios_are_deterministic(start in 0.0f64..0.4, step in 0.01f64..0.2) {
        let text = format!(
            "kind = \"ratio_table\"\n[ratios]\nfamilies = [\"f_micro\", \"scattering_ige_shift\"]\ngrid = \"{start}:0.9:{step}\"\n"
        );
        let s = parse_scenario(&text, "det").unwrap();
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run(&s, a.path()).unwrap();
        run(&s, b.path()).unwrap();
        prop_assert_eq!(read_all(a.path()), read_all(b.path()));
    }
}
