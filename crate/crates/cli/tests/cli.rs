use std::process::{Command, Output};

use serde_json::Value as Json;

fn xychain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xychain"))
        .args(args)
        .env_remove("XYCHAIN_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let head = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (head, rows)
}

fn col(head: &[String], name: &str) -> usize {
    head.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn partition_sweep_has_one_row_per_grid_point() {
    let out = stdout(&xychain(&[
        "partition", "--L", "50", "--g", "0.2:2:10", "--beta", "0.1:20:6", "--log-beta",
    ]));
    let (head, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 60);
    for c in ["log_z_exact", "ratio_ppa", "ratio_two_level", "cancellation_flag"] {
        col(&head, c);
    }
    let ratio = col(&head, "ratio_ppa");
    for r in &rows {
        let x: f64 = r[ratio].parse().unwrap();
        assert!(x > 0.0 && x <= 1.0 + 1e-12, "{x}");
    }
}

#[test]
fn csv_output_is_byte_stable() {
    let args = ["partition", "--L", "20", "--g", "0.5:1.5:3", "--beta", "1:5:3"];
    let a = xychain(&args).stdout;
    let b = xychain(&["--threads", "1", "partition", "--L", "20", "--g", "0.5:1.5:3", "--beta", "1:5:3"]).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn file_output_and_json_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    let out = xychain(&[
        "distribution", "--L", "6", "--g", "1", "--beta", "1", "--format", "json",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc: Json = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["meta"]["command"], "distribution");
    assert!(doc["meta"]["normalization_residual"].as_f64().unwrap() < 1e-12);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 7);
    let total: f64 = rows.iter().map(|r| r["probability"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    for r in rows {
        if r["value"].as_i64().unwrap() % 2 != 0 {
            assert!(r["probability"].as_f64().unwrap() < 1e-10);
        }
    }
}

#[test]
fn infinite_temperature_kink_cumulants() {
    let out = stdout(&xychain(&["cumulants", "--L", "8", "--g", "0.7", "--beta", "0", "--variant", "exact"]));
    let (head, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    let want = [4.0, 2.0, 0.0, -1.0];
    for (i, w) in want.iter().enumerate() {
        let k: f64 = rows[0][col(&head, &format!("kappa{}", i + 1))].parse().unwrap();
        assert!((k - w).abs() < 1e-9, "kappa{} = {k}", i + 1);
    }
}

#[test]
fn ground_state_magnetization_variance() {
    let out = stdout(&xychain(&[
        "cumulants", "--L", "8", "--g", "0.5", "--beta", "1", "--observable", "magnetization",
        "--variant", "ground-state",
    ]));
    let (head, rows) = csv_rows(&out);
    let k2: f64 = rows[0][col(&head, "kappa2")].parse().unwrap();
    let want = 8.0 * (1.0 + 0.5f64.powi(6)) / (1.0 + 0.5f64.powi(8));
    assert!((k2 - want).abs() < 1e-9 * want);
}

#[test]
fn default_cumulant_variants_report_relative_errors() {
    let out = stdout(&xychain(&["cumulants", "--L", "12", "--g", "2", "--beta", "5"]));
    let (head, rows) = csv_rows(&out);
    let v = col(&head, "variant");
    assert_eq!(rows.iter().map(|r| r[v].as_str()).collect::<Vec<_>>(), ["exact", "ppa"]);
    assert!(rows[0][col(&head, "rel_err_kappa1")].is_empty());
    let e: f64 = rows[1][col(&head, "rel_err_kappa1")].parse().unwrap();
    assert!(e < 1e-3, "{e}");
}

#[test]
fn exit_codes() {
    assert_eq!(xychain(&["partition", "--L", "3", "--g", "1", "--beta", "1"]).status.code(), Some(1));
    assert_eq!(xychain(&["partition", "--L", "4", "--g", "1"]).status.code(), Some(1));
    assert_eq!(
        xychain(&[
            "distribution", "--L", "8", "--g", "1", "--beta", "1", "--observable", "magnetization",
            "--variant", "coarse-grained-ppa",
        ])
        .status
        .code(),
        Some(1)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("out.csv");
    assert_eq!(
        xychain(&["partition", "--L", "4", "--g", "1", "--beta", "1", "--out", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let ok = xychain(&["oracle-check", "--L", "4"]);
    assert_eq!(ok.status.code(), Some(0));
    let broken = xychain(&["oracle-check", "--L", "4", "--inject-fault", "boundary-sign"]);
    assert_eq!(broken.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&broken.stderr).contains("partition"));
}

#[test]
fn oracle_check_is_seed_deterministic() {
    let a = stdout(&xychain(&["oracle-check", "--L", "4", "--seed", "11"]));
    let b = stdout(&xychain(&["oracle-check", "--L", "4", "--seed", "11"]));
    assert_eq!(a, b);
    assert!(a.contains("characteristic_function"));
}
