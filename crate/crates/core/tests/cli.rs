use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use smm_decoherence::scenarios::fig2_config;

fn tool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smm-decoherence"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn fig2_matches_equivalent_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let figs = dir.path().join("figs");
    let runs = dir.path().join("run");
    let o = tool(&["fig", "fig2", "--out", figs.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "fig2.json", &fig2_config(0.1).to_json());
    let o = tool(&["run", "--config", &cfg, "--out", runs.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let a = fs::read(figs.join("fig2_detuning_0.1.csv")).unwrap();
    let b = fs::read(runs.join("trajectory.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = tool(&["fig", "fig3", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for r in ["0.1", "0.4", "0.7", "0.9"] {
        let name = format!("fig3_ratio_{r}.csv");
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
}

#[test]
fn csv_schema_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = tool(&["fig", "fig2", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("fig2_detuning_10.csv")).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "lambda_t");
    assert!(header.contains(&"R_z_ode") && header.contains(&"R_z_analytic"));
    let mut rows = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), header.len());
        for c in cells {
            c.parse::<f64>().unwrap();
            let digits = c.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(digits.len(), 17, "{c}");
        }
        rows += 1;
    }
    assert_eq!(rows, 1001);

    let m: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("fig2_detuning_10.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(m["csv"], "fig2_detuning_10.csv");
    assert!(m["deviation"].is_object());
    assert!(m["invariants"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn unknown_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"system": {"omega_s": 100, "delta_so_over_omega_s": 0.4, "drive": 500},
            "bath": {"detuning": 0.1, "temprature": 1}}"#,
    );
    let out = dir.path().join("out");
    let o = tool(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("temprature"), "{}", stderr(&o));
    let left = fs::read_dir(&out).map(|d| d.count()).unwrap_or(0);
    assert_eq!(left, 0);
}

#[test]
fn unknown_figure_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = tool(&["fig", "fig9", "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("fig9"));
}

#[test]
fn closed_system_keeps_unit_norm() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "closed.json",
        r#"{"system": {"omega_s": 100, "delta_so_over_omega_s": 0.4, "drive": 500},
            "bath": {"detuning": 0.1, "u2": 0},
            "run": {"t_max": 1, "points": 101, "theta": 1.5707963267948966}}"#,
    );
    let o = tool(&[
        "run", "--config", &cfg, "--out", dir.path().to_str().unwrap(),
        "--path", "both", "--tolerance", "1e-13",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        for r in [&v[1..4], &v[4..7]] {
            let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            assert!((n - 1.0).abs() < 1e-10, "{n}");
        }
    }
}

#[test]
fn strong_coupling_warns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "strong.json",
        r#"{"system": {"omega_s": 100, "delta_so_over_omega_s": 0.4, "drive": 500},
            "bath": {"detuning": 0.1, "u2": 20},
            "run": {"t_max": 0.1, "points": 11}}"#,
    );
    let o = tool(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("weak-coupling"));
    let m = fs::read_to_string(dir.path().join("trajectory.manifest.json")).unwrap();
    assert!(m.contains("weak-coupling"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "short.json",
        r#"{"system": {"omega_s": 100, "delta_so_over_omega_s": 0.4, "drive": 500},
            "bath": {"detuning": 10, "temperature": 1},
            "run": {"t_max": 1, "points": 101}}"#,
    );
    let o = tool(&[
        "run", "--config", &cfg, "--out", dir.path().to_str().unwrap(),
        "--path", "both", "--strategy", "quadrature", "--tolerance", "1e-9",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(text.lines().next().unwrap().contains("R_x_analytic"));
    let m: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("trajectory.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(m["parameters"]["config"]["run"]["path"], "both");
    assert_eq!(m["tolerances"]["rtol"], 1e-9);
}

#[test]
fn verify_suites_exit_zero() {
    for suite in ["kernels", "jc", "paths"] {
        let o = tool(&["verify", "--suite", suite]);
        assert!(o.status.success(), "{suite}: {}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
    }
    let o = tool(&["verify", "--suite", "nonsense"]);
    assert!(!o.status.success());
}
