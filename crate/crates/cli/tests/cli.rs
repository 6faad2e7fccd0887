use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use zchaos_core::ChaosVector;

fn zchaos(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zchaos"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn manifest(out: &Path, command: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(format!("{command}.json"))).unwrap())
        .unwrap()
}

#[test]
fn bounds_reports_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = zchaos(dir.path(), &["bounds", "--nmax", "128", "--radius", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(dir.path(), "bounds");
    assert_eq!(m["results"]["grid_points"], 441);
    assert_eq!(m["results"]["violations"]["zeta"], 0);
    assert_eq!(m["results"]["violations"]["zeta_prime"], 0);
    assert_eq!(m["config"]["nmax"], 128);
    let csv = std::fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 441 * 128);
}

#[test]
fn every_manifest_has_the_required_fields() {
    for command in [
        "spaces",
        "process",
        "integrate",
        "ito",
        "mehler",
        "diverge",
        "simulate",
    ] {
        let dir = tempfile::tempdir().unwrap();
        let o = zchaos(dir.path(), &[command]);
        assert!(
            o.status.success(),
            "{command}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let m = manifest(dir.path(), command);
        for key in [
            "command", "config", "seed", "versions", "results", "failures",
        ] {
            assert!(m.get(key).is_some(), "{command} manifest lacks {key}");
        }
        assert_eq!(m["command"], command);
        assert_eq!(m["failures"], Value::Array(vec![]));
        for artifact in m["artifacts"].as_array().unwrap() {
            assert!(dir.path().join(artifact.as_str().unwrap()).exists());
        }
    }
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--seed",
        "7",
        "--samples",
        "500",
        "--nmax",
        "64",
    ];
    assert!(zchaos(a.path(), &args).status.success());
    assert!(zchaos(b.path(), &args).status.success());
    let csv_a = std::fs::read(a.path().join("simulate.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(b.path().join("simulate.csv")).unwrap());
    assert!(csv_a.starts_with(b"re_z,im_z,sample_id,re_B,im_B\n"));
    let (ma, mb) = (
        manifest(a.path(), "simulate"),
        manifest(b.path(), "simulate"),
    );
    assert_eq!(ma["results"], mb["results"]);
    assert_eq!(ma["seed"], 7);
}

#[test]
fn diverge_column_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    assert!(zchaos(dir.path(), &["diverge", "--T", "1"])
        .status
        .success());
    let mut reader = csv::Reader::from_path(dir.path().join("diverge.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "partial_sum").unwrap();
    let s: Vec<f64> = reader
        .records()
        .map(|r| r.unwrap()[col].parse().unwrap())
        .collect();
    assert_eq!(s.len(), 10);
    assert!(s.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn config_file_is_merged_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    std::fs::write(&cfg, "# spaces run\nseed = 3\nsamples = 50\np = 5\n").unwrap();
    let o = zchaos(
        dir.path(),
        &["spaces", "--config", cfg.to_str().unwrap(), "--seed", "9"],
    );
    assert!(o.status.success());
    let m = manifest(dir.path(), "spaces");
    assert_eq!(m["config"]["seed"], 9);
    assert_eq!(m["config"]["samples"], 50);
    assert_eq!(m["results"]["p"], 5);
    assert_eq!(m["results"]["q"], 3);
}

#[test]
fn integrate_writes_a_loadable_vector() {
    let dir = tempfile::tempdir().unwrap();
    let o = zchaos(
        dir.path(),
        &[
            "integrate",
            "--contour",
            "polyline:0,0.3,0.3+0.3i",
            "--integrand",
            "one",
            "--nmax",
            "8",
            "--tol",
            "1e-9",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(dir.path(), "integrate");
    assert_eq!(m["results"]["contour_id"], "polyline:0,0.3,0.3+0.3i");
    assert_eq!(m["results"]["N"], 8);
    let residuals = m["results"]["residuals"].as_array().unwrap();
    assert!(residuals.last().unwrap().as_f64().unwrap() <= 1e-9);
    let file = m["results"]["final_vector"].as_str().unwrap();
    let v =
        ChaosVector::from_json(&std::fs::read_to_string(dir.path().join(file)).unwrap()).unwrap();
    assert_eq!(v.max_order(), 1);
}

#[test]
fn failed_check_exits_nonzero_with_failure_list() {
    let dir = tempfile::tempdir().unwrap();
    let o = zchaos(dir.path(), &["mehler", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["failures"][0]["check"], "mehler_deviation");
    let m = manifest(dir.path(), "mehler");
    assert_eq!(m["passed"], false);
}

#[test]
fn invalid_input_exits_with_error_list() {
    let dir = tempfile::tempdir().unwrap();
    let o = zchaos(dir.path(), &["integrate", "--contour", "spiral:0,1"]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["failures"][0]["check"], "error");
    let o = zchaos(dir.path(), &["ito", "--eps", "0.9"]);
    assert_eq!(o.status.code(), Some(2));
}
