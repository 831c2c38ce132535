use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qmlab(args: &[&str]) -> Output {
    qmlab_env(args, &[])
}

fn qmlab_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qmlab"));
    cmd.args(args).env("RUST_LOG", "off").env_remove("QMLAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn qmlab")
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value(csv: &str, quantity: &str) -> f64 {
    csv.lines()
        .find(|l| l.split(',').nth(6) == Some(quantity))
        .and_then(|l| l.split(',').nth(7))
        .unwrap_or_else(|| panic!("no {quantity} row"))
        .parse()
        .unwrap()
}

#[test]
fn algebra_path_reports_the_benchmark_triple() {
    let out = qmlab(&["slh", "--e11", "2", "--e10", "1", "--e01", "1", "--e00", "0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = stdout(&out);
    assert!(csv.starts_with("experiment,k,n_grid,m_trunc,d_sys,t,quantity,value,meta\n"));
    for (q, want) in [("s_re", 0.0), ("s_im", -1.0), ("l_re", -0.5), ("l_im", -0.5), ("h_re", -0.25), ("h_im", 0.0)] {
        assert!((value(&csv, q) - want).abs() < 1e-12, "{q}");
    }
}

#[test]
fn algebra_path_accepts_complex_literals() {
    let out = qmlab(&["slh", "--e11", "1", "--e10", "0.5-1i", "--e01", "0.5+1i", "--e00", "-0.25"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(value(&stdout(&out), "isometry_residual") <= 1e-12);
}

#[test]
fn non_hermitian_model_is_a_config_error() {
    assert_eq!(code(&qmlab(&["slh", "--e11", "1", "--e10", "1", "--e01", "2", "--e00", "0"])), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&qmlab(&[])), 2);
    assert_eq!(code(&qmlab(&["bogus", "--config", &config("slh")])), 2);
    assert_eq!(code(&qmlab(&["graph-rate"])), 2);
    assert_eq!(code(&qmlab(&["slh", "--config", &config("slh"), "--format", "xml"])), 2);
    assert_eq!(code(&qmlab(&["cocycle", "--config", &config("slh")])), 2);
    assert_eq!(code(&qmlab(&["graph-rate", "--e11", "2", "--e10", "1"])), 2);
}

#[test]
fn schema_violations_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"schema_version":1,"experiment":"graph-rate","k":[]}"#,
        r#"{"schema_version":1,"experiment":"slh","colour":"blue"}"#,
        r#"{"schema_version":2,"experiment":"slh"}"#,
        r#"{"schema_version":1,"experiment":"graph-rate","tolerance":1e-8}"#,
        r#"{"schema_version":1,"experiment":"graph-rate","grid":{"half_length":2.0,"n":7}}"#,
        r#"{"schema_version":1,"experiment":"graph-rate","k":[0.4,1,2]}"#,
        r#"{"schema_version":1,"experiment":"slh" "#,
    ];
    for (i, body) in cases.iter().enumerate() {
        let path = write_config(dir.path(), &format!("c{i}.json"), body);
        let id = if body.contains("graph-rate") { "graph-rate" } else { "slh" };
        assert_eq!(code(&qmlab(&[id, "--config", &path])), 2, "case {body}");
    }
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let out = qmlab_env(&["slh", "--config", &config("slh")], &[("QMLAB_THREADS", "many")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn thread_count_does_not_change_the_bytes() {
    let one = qmlab_env(&["fock-identities", "--config", &config("fock-identities")], &[("QMLAB_THREADS", "1")]);
    let auto = qmlab_env(&["fock-identities", "--config", &config("fock-identities")], &[("QMLAB_THREADS", "0")]);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, auto.stdout);
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "tight.json",
        r#"{"schema_version":1,"experiment":"cocycle","tolerance":1e-300}"#,
    );
    assert_eq!(code(&qmlab(&["cocycle", "--config", &path])), 3);
}

#[test]
fn io_failures_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json").display().to_string();
    assert_eq!(code(&qmlab(&["slh", "--config", &missing])), 4);
    let unwritable = dir.path().join("no/such/dir/out.csv").display().to_string();
    assert_eq!(code(&qmlab(&["slh", "--config", &config("slh"), "--out", &unwritable])), 4);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("slh.csv");
    let printed = qmlab(&["slh", "--config", &config("slh")]);
    let written = qmlab(&["slh", "--config", &config("slh"), "--out", &out.display().to_string()]);
    assert_eq!(code(&written), 0);
    assert!(written.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), printed.stdout);
}

#[test]
fn seed_flag_overrides_the_config() {
    let csv = stdout(&qmlab(&["slh", "--config", &config("slh"), "--seed", "17"]));
    assert!(csv.lines().any(|l| l.ends_with("random_count,100,seed=17")), "{csv}");
}

#[test]
fn svg_is_written_for_fitted_sweeps_only() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("graph.svg");
    let out = qmlab(&["graph-rate", "--config", &config("graph-rate"), "--svg", &svg.display().to_string()]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("graph: slope -1.04"), "{text}");
    let none = dir.path().join("slh.svg");
    assert_eq!(code(&qmlab(&["slh", "--config", &config("slh"), "--svg", &none.display().to_string()])), 2);
}

#[test]
fn every_row_uses_the_documented_vocabulary() {
    for name in ["slh", "lemma7-rate", "graph-rate", "fock-identities", "pseudo-rate"] {
        let csv = stdout(&qmlab(&[name, "--config", &config(name)]));
        let id = qmlab::harness::ExperimentId::parse(name).unwrap();
        let vocab = qmlab::harness::report::vocabulary(id);
        for line in csv.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields[0], name);
            let q = fields[6];
            assert!(
                vocab.contains(&q) || qmlab::harness::report::FIT_QUANTITIES.contains(&q),
                "{name}: {q}"
            );
        }
    }
}
