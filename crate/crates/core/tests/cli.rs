//! End-to-end tests of the command-line interface and its exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn relufit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relufit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|_| {
        panic!(
            "stdout is not JSON: {:?} (stderr {:?})",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn gen_solve_round_trip_recovers_planted_vector() {
    let dir = TempDir::new().unwrap();
    let out = relufit(
        &[
            "gen", "--d", "60", "--sparsity", "5", "--n", "400", "--seed", "3", "--out",
            "data.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("data.json").exists());

    let out = relufit(
        &[
            "solve",
            "--data",
            "data.json",
            "--constraint",
            "l1",
            "--radius",
            "auto",
            "--iters",
            "200",
            "--trace-out",
            "trace.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert!(summary["final_rel_err"].as_f64().unwrap() <= 1e-9);

    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("tau,rel_err,loss,contraction\n"));
    let first_row = trace.lines().nth(1).unwrap();
    assert!(first_row.starts_with("0,1,"));
}

#[test]
fn solve_with_auto_radius_requires_w_star() {
    let dir = TempDir::new().unwrap();
    // Handcrafted dataset without w_star.
    fs::write(
        dir.path().join("data.json"),
        r#"{"d":2,"n":2,"seed":0,"features":[[1.0,0.0],[0.0,1.0]],"labels":[1.0,1.0]}"#,
    )
    .unwrap();
    let out = relufit(
        &[
            "solve",
            "--data",
            "data.json",
            "--constraint",
            "l1",
            "--radius",
            "auto",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_rejects_invalid_sparsity_with_config_exit_code() {
    let dir = TempDir::new().unwrap();
    let out = relufit(
        &[
            "gen", "--d", "4", "--sparsity", "9", "--n", "10", "--seed", "0", "--out", "x.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_divergence_exits_with_code_3() {
    let dir = TempDir::new().unwrap();
    let out = relufit(
        &[
            "gen", "--d", "20", "--sparsity", "3", "--n", "60", "--seed", "1", "--out",
            "data.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    // A huge step size blows the unconstrained iteration up to non-finite.
    let out = relufit(
        &[
            "solve",
            "--data",
            "data.json",
            "--constraint",
            "none",
            "--step",
            "50.0",
            "--iters",
            "4000",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn width_reports_the_l1_value() {
    let dir = TempDir::new().unwrap();
    let out = relufit(
        &[
            "width",
            "--d",
            "200",
            "--sparsity",
            "10",
            "--kind",
            "l1",
            "--samples",
            "2000",
            "--seed",
            "5",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let v = stdout_json(&out);
    let n0 = v["n0"].as_f64().unwrap();
    assert!((n0 - 40.78).abs() <= 0.01, "n0 = {n0}");
    assert!(v["omega_sq_mc"].as_f64().is_some());
    assert!(v["stderr"].as_f64().unwrap() > 0.0);
    assert_eq!(v["num_samples"].as_u64(), Some(2000));
}

#[test]
fn width_subspace_matches_dimension() {
    let dir = TempDir::new().unwrap();
    let out = relufit(
        &[
            "width",
            "--d",
            "100",
            "--sparsity",
            "20",
            "--kind",
            "subspace",
            "--samples",
            "5000",
            "--seed",
            "2",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["n0"].as_f64(), Some(20.0));
    let mc = v["omega_sq_mc"].as_f64().unwrap();
    assert!((mc - 20.0).abs() <= 1.0);
}

#[test]
fn sweep_is_byte_reproducible_and_ordered() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{
            "d": 24,
            "structure": {"sparse": 3},
            "constraint": {"kind": "sparsity", "k": 3},
            "n_grid": ["x2", "x8"],
            "seeds": [0, 1, 2, 3],
            "max_iters": 60
        }"#,
    )
    .unwrap();
    let out = relufit(
        &["sweep", "--config", "cfg.json", "--out", "a.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));
    let out = relufit(
        &["sweep", "--config", "cfg.json", "--out", "b.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b, "sweep output must be byte-for-byte reproducible");
    assert!(dir.path().join("a.json").exists(), "JSON mirror exists");

    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with(
        "seed,d,s,n,n0,constraint,iters_run,final_rel_err,success,contraction_max\n"
    ));
    // 2 grid points x 4 seeds data rows, emitted in (n, seed) order.
    assert_eq!(text.lines().count(), 1 + 8);
}

#[test]
fn sweep_rejects_unknown_config_fields() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("bad.json"),
        r#"{"d": 8, "structure": "dense", "constraint": {"kind": "none"},
            "n_grid": [20], "seeds": [0], "plot": true}"#,
    )
    .unwrap();
    let out = relufit(
        &["sweep", "--config", "bad.json", "--out", "x.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("plot"));
}

#[test]
fn rate_emits_per_iteration_table() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{
            "d": 24,
            "structure": {"sparse": 3},
            "constraint": {"kind": "sparsity", "k": 3},
            "n_grid": ["x8"],
            "seeds": [0, 1, 2],
            "max_iters": 30
        }"#,
    )
    .unwrap();
    let out = relufit(
        &["rate", "--config", "cfg.json", "--out", "rate.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("rate.csv")).unwrap();
    assert!(table.starts_with("tau,mean_rel_err,p95_rel_err\n"));
    assert!(table.lines().nth(1).unwrap().starts_with("0,1,1"));
    assert_eq!(table.lines().count(), 1 + 31);
}

#[test]
fn verify_writes_report_and_gates_exit_code() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("ri.json"),
        r#"{"kind": "subspace", "d": 6, "k": 2, "n": 120, "delta": 0.8,
            "trials": 5, "seed": 1}"#,
    )
    .unwrap();
    let out = relufit(
        &[
            "verify", "--check", "ri", "--config", "ri.json", "--out", "report.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["check_name"], "restricted_isometry");
    assert_eq!(report["trials"], 5);
    assert!(report["note"].as_str().unwrap().contains("sampled-direction"));

    // Below the sampling condition: configuration error.
    fs::write(
        dir.path().join("bad.json"),
        r#"{"kind": "subspace", "d": 6, "k": 2, "n": 5, "delta": 0.5,
            "trials": 5, "seed": 1}"#,
    )
    .unwrap();
    let out = relufit(
        &[
            "verify", "--check", "ri", "--config", "bad.json", "--out", "r.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_key_inequality_smoke() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("ki.json"),
        r#"{"d": 30, "s": 3, "n": 400, "trials": 5, "seed": 4}"#,
    )
    .unwrap();
    let out = relufit(
        &[
            "verify",
            "--check",
            "key-ineq",
            "--config",
            "ki.json",
            "--out",
            "ki_report.json",
        ],
        dir.path(),
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("ki_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["check_name"], "key_inequality");
    assert_eq!(report["gated"], true);
    // Exit code reflects the gated pass/fail outcome.
    let expected = if report["pass"].as_bool().unwrap() { 0 } else { 1 };
    assert_eq!(out.status.code(), Some(expected));
}

#[test]
fn dataset_file_round_trips_bitwise_through_the_cli() {
    let dir = TempDir::new().unwrap();
    relufit(
        &[
            "gen", "--d", "12", "--sparsity", "4", "--n", "30", "--seed", "9", "--out", "a.json",
        ],
        dir.path(),
    );
    relufit(
        &[
            "gen", "--d", "12", "--sparsity", "4", "--n", "30", "--seed", "9", "--out", "b.json",
        ],
        dir.path(),
    );
    let a = fs::read(dir.path().join("a.json")).unwrap();
    let b = fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
    let parsed: serde_json::Value = serde_json::from_slice(&a).unwrap();
    for key in ["d", "n", "seed", "w_star", "features", "labels"] {
        assert!(parsed.get(key).is_some(), "missing field {key}");
    }
}
