//! End-to-end checks of the command-line driver: exit codes, file formats,
//! report determinism.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_affsym"))
}

#[test]
fn verify_theorem1_passes_with_exit_zero() {
    let out = bin()
        .args(["verify", "theorem1", "--n", "2..3"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("symmetry dimension"));
    assert!(text.contains("0 failed"));
}

#[test]
fn verify_with_failing_check_exits_one() {
    // the printed (3,3) normal-form piece differs from the computed one,
    // so the section6 suite carries a failing check by construction
    let out = bin()
        .args(["verify", "section6", "--n", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL"));
    assert!(text.contains("F33"));
}

#[test]
fn config_errors_exit_two() {
    let out = bin()
        .args(["verify", "theorem2", "--n", "x..y"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["analyze", "--family", "t9.9", "--n", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["analyze", "--surface", "/nonexistent/surface.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_family_reports_invariants() {
    let out = bin()
        .args([
            "analyze", "--family", "t2.4", "--n", "4", "--format", "json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("analyze emits valid json");
    let inv = &report["config"]["invariants"];
    assert_eq!(inv["signature"], serde_json::json!([3, 1]));
    assert_eq!(inv["orbit"], "NullTimesQuadric");
    assert_eq!(inv["alphas"], serde_json::json!(["1", "1"]));
    assert_eq!(inv["tube"], serde_json::json!(true));
    assert_eq!(inv["isotropy_dim"], 2);
    assert_eq!(inv["symmetry_dim"], 6);
    assert_eq!(inv["l1_norm_sq"], "0");
    assert_eq!(report["schema_version"], "1");
}

#[test]
fn analyze_surface_file_and_validation_error() {
    let dir = std::env::temp_dir();
    let good = dir.join("affsym_cli_good_surface.json");
    std::fs::write(
        &good,
        r#"{ "n": 2, "F": "x3 - x1^2 - x2^2", "constraint": null, "point": ["0", "0", "0"] }"#,
    )
    .unwrap();
    let out = bin()
        .args([
            "analyze",
            "--surface",
            good.to_str().unwrap(),
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        report["config"]["invariants"]["signature"],
        serde_json::json!([2, 0])
    );
    assert_eq!(report["config"]["invariants"]["symmetry_dim"], 4);

    // a zero polynomial is rejected as a validation error
    let bad = dir.join("affsym_cli_bad_surface.json");
    std::fs::write(&bad, r#"{ "n": 2, "F": "0", "point": ["0", "0", "0"] }"#).unwrap();
    let out = bin()
        .args(["analyze", "--surface", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_modulo_timing() {
    let run = |jobs: &str| -> serde_json::Value {
        let out = bin()
            .args([
                "verify", "theorem2", "--n", "4", "--format", "json", "--jobs", jobs,
            ])
            .output()
            .unwrap();
        let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        // normalize wall-clock readings and the echoed jobs count
        for c in v["checks"].as_array_mut().unwrap() {
            c["wall_ms"] = serde_json::json!(0);
        }
        v["config"]["jobs"] = serde_json::json!(0);
        v
    };
    let a = run("1");
    let b = run("1");
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap(),
        "same config must give byte-identical normalized reports"
    );
    // worker-pool fan-out merges in a fixed order
    let c = run("4");
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&c).unwrap()
    );
}

#[test]
fn afh_jobs_env_overrides_flag() {
    let out = bin()
        .args(["verify", "theorem2", "--n", "4", "--format", "json"])
        .env("AFH_JOBS", "3")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["jobs"], serde_json::json!(3));
}

#[test]
fn report_subcommand_rerenders() {
    let dir = std::env::temp_dir();
    let path = dir.join("affsym_cli_saved_report.json");
    let out = bin()
        .args([
            "verify",
            "theorem1",
            "--n",
            "2",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = bin()
        .args([
            "report",
            "--input",
            path.to_str().unwrap(),
            "--format",
            "text",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("verify theorem1"));
    assert!(text.contains("PASS"));
}

#[test]
fn catalog_list_names() {
    let out = bin().args(["catalog", "list"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["t1", "t2.1", "t2.7", "sec6"] {
        assert!(text.contains(name), "missing family {name}");
    }
}
