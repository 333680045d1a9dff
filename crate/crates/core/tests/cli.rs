use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn radyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radyn")).args(args).output().unwrap()
}

fn run(cmd: &str, file: &str, extra: &[&str]) -> Output {
    let path = scenario(file);
    let mut args = vec![cmd, "--scenario", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    radyn(&args)
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn collapse_ratio() {
    let out = run("collapse", "gravity_sphere_uniform_classical.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let ratio = v["ratio"].as_f64().unwrap();
    assert!((ratio - (3.0 * std::f64::consts::PI / 8.0).sqrt()).abs() < 1e-14);
    assert!((ratio - 1.0854).abs() < 1e-4);
}

#[test]
fn log_normal_caustic_is_delayed_by_relativity() {
    let t_c = |regime: &str| {
        let out = run("shock", "em_sphere_lognormal.json", &["--regime", regime]);
        assert_eq!(out.status.code(), Some(0));
        let v = json(&out);
        assert_eq!(v["kind"]["type"], "caustic");
        v["kind"]["t_c"].as_f64().unwrap()
    };
    assert!(t_c("rel") > t_c("classical"));
}

#[test]
fn density_past_shock_exits_3_with_report() {
    let out = run("density", "em_sphere_lognormal.json", &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("\"caustic\""));
    // rows before the breakdown are still written
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("t,r0,R,rho,jac,near_caustic\n"));
    assert!(csv.lines().count() > 1);
}

#[test]
fn invalid_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"scenario": {"interaction": "em", "symmetry": "sphere", "regime": "rel", "c": -1},
            "profile": {"type": "uniform", "rho0": 1, "r_max": 1}}"#,
    )
    .unwrap();
    let out = radyn(&["shock", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = radyn(&["shock", "--scenario", "/nonexistent.json"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run("collapse", "em_sphere_uniform.json", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(radyn(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn verify_passes_on_all_kinds() {
    let out = run("verify", "verify_all_kinds.json", &["--all-kinds"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    let kinds = v["kinds"].as_array().unwrap();
    assert_eq!(kinds.len(), 8);
    for k in kinds {
        assert!(k["max_ode_error"].as_f64().unwrap() <= 1e-6);
    }
}

#[test]
fn verify_fails_when_a_tolerance_is_exceeded() {
    let dir = tempfile::tempdir().unwrap();
    let strict = dir.path().join("strict.json");
    std::fs::write(
        &strict,
        r#"{"scenario": {"interaction": "em", "symmetry": "sphere", "regime": "rel"},
            "profile": {"type": "uniform", "rho0": 1, "r_max": 1},
            "run": {"t_max": 3, "n_layers": 3, "tolerances": {"ode": 1e-4, "verify_ode": 1e-15}}}"#,
    )
    .unwrap();
    let out = radyn(&["verify", "--scenario", strict.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn csv_outputs_have_headers_and_fixed_precision() {
    let headers = [
        ("characteristics", "t,r0,R,beta"),
        ("velocity", "t,r0,beta,beta_inf"),
        ("density", "t,r0,R,rho,jac,near_caustic"),
    ];
    for (cmd, header) in headers {
        let out = run(cmd, "em_sphere_uniform.json", &["--layers", "4", "--samples", "3"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}");
        let csv = String::from_utf8(out.stdout).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(header));
        assert_eq!(lines.count(), 12);
        let first_value = csv.lines().nth(2).unwrap().split(',').next().unwrap();
        assert_eq!(first_value, "0.0000000000000000e0");
    }
}

#[test]
fn out_flag_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.csv");
    let out = run(
        "analyze",
        "gravity_sphere_uniform_classical.json",
        &["--out", q.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let q_csv = std::fs::read_to_string(&q).unwrap();
    assert!(q_csv.starts_with("R,Q,low_confidence\n"));
    let b_csv = std::fs::read_to_string(dir.path().join("q_b.csv")).unwrap();
    assert!(b_csv.starts_with("t,b,b_dot,stiffness\n"));
}

#[test]
fn schema_is_json() {
    let out = radyn(&["schema"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v.to_string().contains("r_grid"));
}
