//! End-to-end checks of the command-line interface: artifacts, exit codes
//! and byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spotmin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spotmin"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL_SPEC: &str = r#"
seed = 11
[sim]
n = 600
iterations = 6
[estimator]
nh = [10]
k_n = [12]
[psi]
nh = [10]
iterations = 300
grid_points = 4
[coverage]
q = [0.1, 0.25]
iterations = 6
"#;

#[test]
fn simulate_writes_csv_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "small.spec", SMALL_SPEC);
    let out = spotmin(&["simulate", "--spec", &spec, "--out", "a"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = fs::read(tmp.path().join("a/observations.csv")).unwrap();
    let text = String::from_utf8(a.clone()).unwrap();
    assert!(text.starts_with("i,t,x,spot_var,y\n"));
    assert_eq!(text.lines().count(), 602);

    let out = spotmin(&["simulate", "--spec", &spec, "--out", "b"], tmp.path());
    assert!(out.status.success());
    let b = fs::read(tmp.path().join("b/observations.csv")).unwrap();
    assert_eq!(a, b, "same spec and seed must give identical bytes");

    // different seed, different bytes
    let out = spotmin(
        &["simulate", "--spec", &spec, "--out", "c", "--seed", "12"],
        tmp.path(),
    );
    assert!(out.status.success());
    let c = fs::read(tmp.path().join("c/observations.csv")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn estimate_runs_on_simulated_data() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "small.spec", SMALL_SPEC);
    let out = spotmin(&["simulate", "--spec", &spec, "--out", "sim"], tmp.path());
    assert!(out.status.success());
    let out = spotmin(
        &[
            "estimate",
            "--input",
            "sim/observations.csv",
            "--spec",
            &spec,
            "--out",
            "est",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let curve = fs::read_to_string(tmp.path().join("est/curve.csv")).unwrap();
    assert!(curve.starts_with("k,t_center,raw,corrected,quarticity,ci_lower,ci_upper,true_spot_var\n"));
    assert_eq!(curve.lines().count(), 61); // 60 blocks + header
    let minima = fs::read_to_string(tmp.path().join("est/minima.csv")).unwrap();
    assert!(minima.starts_with("k,block_start_t,m_k,diff_k\n"));
    let noise_line = String::from_utf8_lossy(&out.stdout);
    assert!(noise_line.contains("estimated noise level"));
}

#[test]
fn table_pipeline_and_missing_artifact_error() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "small.spec", SMALL_SPEC);

    // table2 without table1 artifact: runtime error, exit 1, helpful text
    let out = spotmin(&["table2", "--spec", &spec, "--out", "t"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("table1"), "stderr: {err}");

    let out = spotmin(&["table1", "--spec", &spec, "--out", "t"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t1 = fs::read_to_string(tmp.path().join("t/table1.csv")).unwrap();
    assert!(t1.starts_with("nh,inv_h,h_times_n_two_thirds,slope\n"));
    assert_eq!(t1.lines().count(), 2);

    let out = spotmin(&["table2", "--spec", &spec, "--out", "t"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t2 = fs::read_to_string(tmp.path().join("t/table2.csv")).unwrap();
    assert!(t2.starts_with("nh,k_n,msd_x1e6,mab_x1e6,mabc_x1e6\n"));
    assert_eq!(t2.lines().count(), 2);

    // byte-determinism of the full pipeline
    let out = spotmin(&["table2", "--spec", &spec, "--out", "u"], tmp.path());
    assert_eq!(out.status.code(), Some(1), "u/ has no table1 artifact");
    let out = spotmin(
        &["table2", "--spec", &spec, "--out", "u", "--slopes", "t/table1.csv"],
        tmp.path(),
    );
    assert!(out.status.success());
    assert_eq!(
        fs::read(tmp.path().join("t/table2.csv")).unwrap(),
        fs::read(tmp.path().join("u/table2.csv")).unwrap()
    );
}

#[test]
fn curve_bands_depend_on_iterations() {
    let tmp = tempfile::tempdir().unwrap();
    let single = SMALL_SPEC.replace("iterations = 6", "iterations = 1");
    let spec1 = write_spec(tmp.path(), "one.spec", &single);
    let out = spotmin(&["curve", "--spec", &spec1, "--out", "one"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("one/curve.csv").exists());
    assert!(!tmp.path().join("one/bands.csv").exists(), "no bands for one iteration");

    let spec = write_spec(tmp.path(), "small.spec", SMALL_SPEC);
    let out = spotmin(&["curve", "--spec", &spec, "--out", "many"], tmp.path());
    assert!(out.status.success());
    let bands = fs::read_to_string(tmp.path().join("many/bands.csv")).unwrap();
    assert!(bands.starts_with("k,t_center,clt_lower,clt_upper,emp_lower,emp_upper\n"));
}

#[test]
fn coverage_csv_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "small.spec", SMALL_SPEC);
    let out = spotmin(&["coverage", "--spec", &spec, "--out", "cov"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cov = fs::read_to_string(tmp.path().join("cov/coverage.csv")).unwrap();
    let lines: Vec<&str> = cov.lines().collect();
    assert_eq!(lines[0], "q,nominal,empirical,iterations");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.1,0.8,"));
    assert!(lines[2].starts_with("0.25,0.5,"));
}

#[test]
fn calibrate_psi_writes_table_and_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "small.spec", SMALL_SPEC);
    let out = spotmin(&["calibrate-psi", "--spec", &spec, "--out", "psi"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(tmp.path().join("psi/psi_table.csv")).unwrap();
    assert!(table.starts_with("sigma_sq,psi_hat,stderr,psi_isotonic\n"));
    assert_eq!(table.lines().count(), 5);
    let meta = fs::read_to_string(tmp.path().join("psi/psi_table.meta.csv")).unwrap();
    assert!(meta.starts_with("n,nh,eta,family,iterations,seed,fitted_slope\n"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fitted slope"));
}

#[test]
fn invalid_spec_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "bad.spec", "scenario = \"bogus\"");
    let out = spotmin(&["simulate", "--spec", &spec], tmp.path());
    assert_eq!(out.status.code(), Some(2));

    let spec = write_spec(tmp.path(), "bad2.spec", "[model]\nleverage_corr = 3.0");
    let out = spotmin(&["simulate", "--spec", &spec], tmp.path());
    assert_eq!(out.status.code(), Some(2));

    let spec = write_spec(tmp.path(), "bad3.spec", "unknown_key = 1");
    let out = spotmin(&["simulate", "--spec", &spec], tmp.path());
    assert_eq!(out.status.code(), Some(2));

    // scenario mismatch
    let spec = write_spec(tmp.path(), "mismatch.spec", "scenario = \"coverage\"");
    let out = spotmin(&["table1", "--spec", &spec], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rate_condition_warning_on_small_blocks() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(
        tmp.path(),
        "warn.spec",
        "[sim]\nn = 23400\n[psi]\nnh = [15]\niterations = 20\ngrid_points = 2",
    );
    let out = spotmin(&["table1", "--spec", &spec, "--out", "w"], tmp.path());
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warning"), "expected rate warning, got: {err}");
    assert!(err.contains("0.524"), "diagnostic value in message: {err}");
}

#[test]
fn shipped_benchmark_spec_parses() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let text = fs::read_to_string(root.join("benchmark.spec")).unwrap();
    let spec = spotmin_cli::specfile::ExperimentSpec::from_toml(&text).unwrap();
    assert_eq!(spec.n, 23_400);
    assert_eq!(spec.noise.level_eta, 10_000.0);
    assert_eq!(spec.psi.nh_list, vec![10, 15, 25, 39, 78, 234]);
}
