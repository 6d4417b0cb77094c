use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ensemblectl"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn demo1d_residual_reaches_zero() {
    let out = run(&["demo1d", "--kmax", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(r[0], ["K", "residual"]);
    assert_eq!(r.len(), 6);
    let r1: f64 = r[2][1].parse().unwrap();
    assert!(r1 < 1e-10);
}

#[test]
fn demo2d_column_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("res.csv");
    let out = run(&["demo2d", "--kmax", "5", "--grid-r", "16", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let exact = (std::f64::consts::PI / 2.0).sqrt();
    for row in rows(&text).iter().skip(1) {
        let v: f64 = row[1].parse().unwrap();
        assert!((v - exact).abs() < 1e-8);
    }
}

#[test]
fn witness_on_normal_forms() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let out = run(&["witness", "--input", data("normal_form_sigma_bar.json").to_str().unwrap(), "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let cert: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(cert["R1"], 0.7);
    assert!(cert["f0_norm"].as_f64().unwrap() > 0.0);
}

#[test]
fn reduce_full_chain_writes_siblings() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["reduce", "--input", data("diagonal_2x2.json").to_str().unwrap(), "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rep["route"], "normal_form");
    assert_eq!(rep["verified"], true);
    let nf = dir.path().join("report.normal_form.json");
    assert!(dir.path().join("report.certificate.json").exists());

    // the emitted normal form is valid witness input
    let again = run(&["witness", "--input", nf.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
}

#[test]
fn reduce_slice_routes() {
    for file in ["real_part.json", "diagonal_real.json"] {
        let out = run(&["reduce", "--input", data(file).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{file}: {}", String::from_utf8_lossy(&out.stderr));
        let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(rep["route"], "slice_witness");
    }
}

#[test]
fn crossing_names_the_stage() {
    let out = run(&["reduce", "--input", data("crossing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("eigen_branch"), "{err}");
}

#[test]
fn analyze_with_targets_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let st = run(&["witness", "--input", data("normal_form_one.json").to_str().unwrap(), "--out", cert.to_str().unwrap()]);
    assert_eq!(st.status.code(), Some(0));
    let out_path = dir.path().join("res.csv");
    let out = run(&[
        "analyze",
        "--input",
        data("disk_scalar.json").to_str().unwrap(),
        "--kmax",
        "3",
        "--target",
        r#"[[0, 1, [1.0, 0.0]]]"#,
        "--target",
        r#"[[2, 0, [1.0, 0.0]]]"#,
        "--certificate",
        cert.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let first = rows(&std::fs::read_to_string(dir.path().join("res_t0.csv")).unwrap());
    let second = rows(&std::fs::read_to_string(dir.path().join("res_t1.csv")).unwrap());
    assert_eq!(first[0].len(), 3);
    let last: f64 = second.last().unwrap()[1].parse().unwrap();
    assert!(last < 1e-10);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["witness", "--input", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["reduce", "--input", "/nonexistent/x.json"]).status.code(), Some(1));
    assert_eq!(run(&["demo1d", "--tol=-1"]).status.code(), Some(1));
    assert_ne!(run(&["frobnicate"]).status.code(), Some(0));
}

#[test]
fn thread_count_from_environment() {
    let out = bin().args(["demo1d", "--kmax", "2"]).env("ENSEMBLECTL_THREADS", "2").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let bad = bin().args(["demo1d"]).env("ENSEMBLECTL_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
