//! CLI-level acceptance: determinism of the audit pipeline (criterion 9)
//! plus exit-code and serialization contracts.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_incompat"))
}

fn write_mub_pair(dir: &Path, dim: usize) -> (std::path::PathBuf, std::path::PathBuf) {
    let status = bin()
        .args([
            "mub",
            "--dim",
            &dim.to_string(),
            "--bases",
            "2",
            "--emit-bases",
        ])
        .arg(dir)
        .arg("--out")
        .arg(dir.join("record.json"))
        .status()
        .unwrap();
    assert!(status.success());
    (dir.join("basis_0.json"), dir.join("basis_1.json"))
}

#[test]
fn criterion_9_audit_is_byte_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |out: &Path| {
        let status = bin()
            .args(["audit", "--corpus", "random", "--seed", "42", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success(), "audit run failed");
    };
    let (p1, p2) = (tmp.path().join("run1.json"), tmp.path().join("run2.json"));
    run(&p1);
    run(&p2);
    let b1 = std::fs::read(&p1).unwrap();
    let b2 = std::fs::read(&p2).unwrap();
    assert_eq!(b1, b2, "outputs differ between identical runs");
    println!(
        "acceptance 9: PASS — two audit runs with seed 42 produced byte-identical output ({} bytes)",
        b1.len()
    );
}

#[test]
fn qubit_record_values() {
    let out = bin()
        .args(["qubit", "--cos-delta", "0.6"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["q"], 0.1);
    assert_eq!(v["q_f"], 0.16);
    // out-of-range angle is a usage error
    let out = bin().args(["qubit", "--cos-delta", "1.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn measure_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let (b0, b1) = write_mub_pair(tmp.path(), 3);

    let out = bin()
        .args(["measure", "--measure", "qf"])
        .args([&b0, &b1])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = v["value"].as_f64().unwrap();
    assert!((value - 1.0 / 3.0).abs() < 1e-9);

    // a single observable is a usage error (exit 3)
    let out = bin()
        .args(["measure", "--measure", "qf"])
        .arg(&b0)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    // malformed JSON is a parse error (exit 2)
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let out = bin()
        .args(["measure", "--measure", "qf"])
        .args([&bad, &b1])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // mixed dimensions is exit 3
    let tmp2 = tempfile::tempdir().unwrap();
    let (c0, _) = write_mub_pair(tmp2.path(), 2);
    let out = bin()
        .args(["measure", "--measure", "qf"])
        .args([&c0, &b1])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn figure_tables_are_monotone_and_roundtrip() {
    let out = bin()
        .args(["figure", "--name", "fig1", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,q,q_f");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 101);
    for w in rows.windows(2) {
        assert!(w[1][1] <= w[0][1] + 1e-15, "q must be non-increasing");
        assert!(w[1][2] <= w[0][2] + 1e-15, "q_f must be non-increasing");
    }
    assert_eq!(rows[0][1], 0.25);
    assert_eq!(rows[100][1], 0.0);

    // CSV numbers round-trip bit-exactly against the JSON output
    let out = bin().args(["figure", "--name", "fig1"]).output().unwrap();
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for (row, jrow) in rows.iter().zip(json.as_array().unwrap()) {
        for (col, key) in [(0usize, "x"), (1, "q"), (2, "q_f")] {
            let csv_bits = row[col].to_bits();
            let json_bits = jrow[key].as_f64().unwrap().to_bits();
            assert_eq!(csv_bits, json_bits, "lossy serialization at {key}");
        }
    }

    let out = bin()
        .args(["figure", "--name", "fig2", "--format", "csv"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let last = text.lines().last().unwrap();
    assert_eq!(last, "19,0.0,0.0");
    let first = text.lines().nth(1).unwrap();
    assert_eq!(first, "0,0.475,0.475");
}

#[test]
fn qkd_command_runs_strategies() {
    let tmp = tempfile::tempdir().unwrap();
    let (b0, b1) = write_mub_pair(tmp.path(), 2);
    let ens = tmp.path().join("ensemble.json");
    let o0: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&b0).unwrap()).unwrap();
    let o1: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&b1).unwrap()).unwrap();
    std::fs::write(
        &ens,
        serde_json::to_string(&serde_json::json!({"observables": [o0, o1]})).unwrap(),
    )
    .unwrap();

    let out = bin()
        .args(["qkd", "--strategy", "optimal", "--trials", "20000", "--ensemble"])
        .arg(&ens)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let analytic = v["analytic_error"].as_f64().unwrap();
    assert!((analytic - 0.25).abs() < 1e-6, "analytic {analytic}");
    let empirical = v["empirical_error"].as_f64().unwrap();
    assert!((empirical - 0.25).abs() < 0.02);

    let out = bin()
        .args(["qkd", "--strategy", "none", "--trials", "1000", "--ensemble"])
        .arg(&ens)
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["empirical_error"].as_f64().unwrap(), 0.0);
}

#[test]
fn eur_and_bound_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let (b0, b1) = write_mub_pair(tmp.path(), 3);

    let out = bin()
        .args(["eur", "--kind", "t2"])
        .args([&b0, &b1])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["method"], "closed_form");

    let out = bin()
        .args(["eur", "--kind", "t2succ"])
        .args([&b0, &b1])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["avg"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);

    let out = bin()
        .args(["bound", "--kind", "qp", "--variant", "as_stated"])
        .args([&b0, &b1])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let report = &v["reports"][0];
    assert_eq!(report["verdict"], "consistent");
    assert!((report["bound"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-9);

    let out = bin()
        .args(["bound", "--kind", "sdp"])
        .args([&b0, &b1])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["verdict"], "consistent");
}
