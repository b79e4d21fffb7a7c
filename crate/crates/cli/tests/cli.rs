use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lightning_cli::eval_points_flag;
use lightning::geometry::Point;
use serde_json::Value;

const LSHAPE: &str = r#"{
  "type": "laplace",
  "vertices": [[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]],
  "boundary_data": "x^2",
  "tolerance": 1e-10,
  "max_dof": 1200
}"#;

const SQUARE_K50: &str = r#"{
  "type": "helmholtz",
  "vertices": [[-1, -1], [1, -1], [1, 1], [-1, 1]],
  "incident": {"kind": "plane_wave", "angle_degrees": 30},
  "k": 50,
  "tolerance": 1e-3,
  "max_dof": 1500
}"#;

fn solve(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("problem.json");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_lightning-solve"))
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir)
        .args(extra)
        .output()
        .unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// convergence.csv without the wall-clock column.
fn without_seconds(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect()
}

#[test]
fn lshape_challenge_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve(dir.path(), LSHAPE, &["--eval", "0.99,0.99", "--grid", "40", "40"]);
    let solution = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let row = solution.lines().nth(1).unwrap();
    assert!(row.starts_with("0.99,0.99,1.0267919261"), "{row}");

    let cert = read_json(&dir.path().join("certificate.json"));
    let residual = cert["boundary_sup_residual"].as_f64().unwrap();
    let value: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((value - 1.026_791_926_10).abs() <= residual);
    assert!(cert["N_final"].as_u64().unwrap() <= 1200);
    assert!(cert["statement"].as_str().unwrap().contains("interior"));
    // tolerance 1e-10 lies beyond what N <= 1200 reaches
    assert_eq!(out.status.code(), Some(if cert["converged"].as_bool().unwrap() { 0 } else { 2 }));

    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "step,N,fit_residual,validation_residual,seconds");

    let pgm = fs::read_to_string(dir.path().join("field.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n"));
    let side = read_json(&dir.path().join("field.json"));
    assert_eq!(side["nx"], 40);
    assert!(side["outside_count"].as_u64().unwrap() > 0);
    assert!(side["min"].as_f64().unwrap() >= -1e-8 && side["max"].as_f64().unwrap() <= 4.0 + 1e-8);
}

#[test]
fn negative_tolerance_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = LSHAPE.replace("1e-10", "-1");
    let out = solve(dir.path(), &config, &[]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("tolerance"), "{stderr}");

    let out = solve(dir.path(), LSHAPE, &["--tol", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerance"));
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for (config, key) in [
        ("{", "JSON"),
        (r#"{"type": "laplace", "vertices": [[0,0],[1,0]], "boundary_data": "x", "tolerance": 1e-6, "max_dof": 100}"#, "vertices"),
        (r#"{"type": "laplace", "vertices": [[0,0],[1,0],[0,1]], "tolerance": 1e-6, "max_dof": 100}"#, "boundary_data"),
        (r#"{"type": "laplace", "vertices": [[0,0],[1,0],[0,1]], "boundary_data": "x +", "tolerance": 1e-6, "max_dof": 100}"#, "boundary_data"),
    ] {
        let out = solve(dir.path(), config, &[]);
        assert_eq!(out.status.code(), Some(1), "{config}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(key), "{config}");
    }
    let out = solve(dir.path(), LSHAPE, &["--eval", "0.99;0.99"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_keys_only_warn() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"type": "laplace", "vertices": [[0,0],[1,0],[1,1],[0,1]], "boundary_data": "3",
                     "tolerance": 1e-8, "max_dof": 200, "colour": "blue"}"#;
    let out = solve(dir.path(), config, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn dumped_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = LSHAPE.replace("1e-10", "1e-6");
    let out = solve(dir.path(), &config, &["--dump-config", "--max-dof", "800"]);
    assert_eq!(out.status.code(), Some(0));
    let first = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let dumped = fs::read_to_string(dir.path().join("config.json")).unwrap();
    assert_eq!(read_json(&dir.path().join("config.json"))["max_dof"], 800);

    let again = tempfile::tempdir().unwrap();
    let out = solve(again.path(), &dumped, &[]);
    assert_eq!(out.status.code(), Some(0));
    let second = fs::read_to_string(again.path().join("convergence.csv")).unwrap();
    assert_eq!(without_seconds(&first), without_seconds(&second));
    assert_eq!(
        fs::read_to_string(dir.path().join("certificate.json")).unwrap(),
        fs::read_to_string(again.path().join("certificate.json")).unwrap()
    );
}

#[test]
fn helmholtz_square_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve(dir.path(), SQUARE_K50, &["--eval", "2,0;0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let cert = read_json(&dir.path().join("certificate.json"));
    assert!(cert["boundary_sup_residual"].as_f64().unwrap() <= 1e-3);
    assert_eq!(cert["converged"], true);
    let solution = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let mut lines = solution.lines();
    assert_eq!(lines.next(), Some("x,y,value,value_imag"));
    let outside: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(outside[2].is_finite() && outside[3].is_finite());
    // (0, 0) lies inside the scatterer, where the field is not defined
    assert_eq!(lines.next(), Some("0,0,NaN,NaN"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside the solution domain"));
}

#[test]
fn eval_points_parse() {
    assert_eq!(eval_points_flag("0.99,0.99").unwrap(), vec![Point::new(0.99, 0.99)]);
    assert_eq!(
        eval_points_flag("0,0;1,2").unwrap(),
        vec![Point::new(0.0, 0.0), Point::new(1.0, 2.0)]
    );
    assert!(eval_points_flag("0.99;0.99").is_err());
}
