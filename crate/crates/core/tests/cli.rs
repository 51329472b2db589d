use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sl-transmission")).args(args).output().expect("binary runs")
}

fn run_spec(cmd: &str, spec: &str, extra: &[&str]) -> Output {
    let path = fixture(spec);
    let mut args = vec![cmd, "--spec", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// `(x, columns...)` rows per side of a blank-line separated CSV.
fn sides(text: &str) -> Vec<Vec<Vec<f64>>> {
    text.lines()
        .skip(1)
        .collect::<Vec<_>>()
        .split(|l| l.is_empty())
        .map(|rows| rows.iter().map(|r| r.split(',').map(|v| v.parse().unwrap()).collect()).collect())
        .collect()
}

fn temp_file(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("sl-transmission-{}-{name}", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn eigenvalues_table() {
    let o = run_spec("eigenvalues", "spec_a.json", &["--lmin", "0", "--lmax", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "index,lambda,abs_omega,bracket_lo,bracket_hi");
    assert_eq!(rows.len(), 5);
    for (row, want) in rows[1..].iter().zip([0.25, 1.0, 2.25, 4.0]) {
        let lambda: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((lambda - want).abs() < 1e-9);
    }
}

#[test]
fn empty_range_exits_two() {
    let o = run_spec("eigenvalues", "spec_a.json", &["--lmin", "0.3", "--lmax", "0.9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no eigenvalues found"));
    assert_eq!(stdout(&o), "index,lambda,abs_omega,bracket_lo,bracket_hi\n");
}

#[test]
fn malformed_spec_exits_one_with_location() {
    let path = temp_file("bad.json", "{\n  \"alpha\": 0,\n  \"beta\": oops\n}");
    let o = run(&["eigenvalues", "--spec", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn eigenfunction_ground_state() {
    let o = run_spec("eigenfunction", "spec_a.json", &["--index", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let data = sides(&stdout(&o));
    assert_eq!(data.len(), 2);
    for row in data.iter().flatten() {
        let want = ((row[0] + PI) / 2.0).sin() / PI.sqrt();
        assert!((row[1] - want).abs() < 1e-7);
    }
}

#[test]
fn eigenfunction_jump_ratio() {
    let o = run_spec("eigenfunction", "spec_b.json", &["--index", "1", "--grid", "101"]);
    let data = sides(&stdout(&o));
    let (ym, yp) = (data[0].last().unwrap()[1], data[1][0][1]);
    assert!((yp / ym - 2.0).abs() < 1e-6);
}

#[test]
fn eigenfunction_index_out_of_range() {
    let o = run_spec("eigenfunction", "spec_a.json", &["--index", "40"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("out of range"));
}

#[test]
fn green_matrix() {
    let o = run_spec("green", "spec_a.json", &["--lambda", "0", "--nx", "11", "--nxi", "11"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let xi: Vec<f64> = lines.next().unwrap().split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    assert_eq!(xi.len(), 22);
    let j = xi.iter().position(|v| (v + PI / 2.0).abs() < 1e-12).unwrap();
    let row = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .find(|r| (r[0] - PI / 2.0).abs() < 1e-12)
        .unwrap();
    assert!((row[j + 1] + PI / 8.0).abs() < 1e-7);
}

#[test]
fn green_errors() {
    let o = run_spec("green", "spec_a.json", &["--lambda", "0.25"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run_spec("green", "spec_a.json", &["--lambda", "0", "--nx", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad grid"));
}

#[test]
fn solve_constant_load() {
    let o = run_spec("solve", "spec_a.json", &["--lambda", "0", "--f-left", "1", "--f-right", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let data = sides(&stdout(&o));
    let row = data[1].iter().find(|r| (r[0] - PI / 2.0).abs() < 1e-12).unwrap();
    assert!((row[1] + 3.0 * PI * PI / 8.0).abs() < 1e-6);
}

#[test]
fn solve_zero_load_and_singular() {
    let o = run_spec("solve", "spec_c.json", &["--lambda", "2", "--f-left", "0", "--f-right", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(sides(&stdout(&o)).iter().flatten().all(|r| r[1] == 0.0));
    let o = run_spec("solve", "spec_a.json", &["--lambda", "0.25", "--f-left", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_is_deterministic_and_passes() {
    let a = run_spec("verify", "spec_b.json", &[]);
    let b = run_spec("verify", "spec_b.json", &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["all_pass"], true);
}

#[test]
fn verify_rejects_negative_minor() {
    let path = temp_file(
        "neg.json",
        r#"{"alpha": 0, "beta": 0, "transmission": [[0, 1, 0, 1], [1, 0, -1, 0]], "potential": {"left": [0], "right": [0]}}"#,
    );
    let o = run(&["verify", "--spec", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn underflow_is_a_numerical_failure() {
    let o = run_spec("eigenvalues", "spec_a.json", &["--lmax", "1", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn json_output_and_out_file() {
    let out = std::env::temp_dir().join(format!("sl-transmission-{}-ev.json", std::process::id()));
    let o = run_spec("eigenvalues", "spec_a.json", &["--lmax", "3", "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
    assert_eq!(rows[0]["index"], 1);
}
