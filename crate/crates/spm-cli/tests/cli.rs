//! End-to-end checks of the binary: outputs, determinism, exit codes.

use std::process::{Command, Output};

fn spm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spm"))
        .args(args)
        .env_remove("SPM_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = spm(args);
    assert!(
        out.status.success(),
        "spm {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

#[test]
fn count_methods_agree() {
    assert_eq!(
        stdout(&["count", "--n", "7", "--method", "bfs"]).trim(),
        "9"
    );
    for method in ["bfs", "p-rec", "tree"] {
        assert_eq!(
            stdout(&["count", "--n", "15", "--method", method]).trim(),
            stdout(&["count", "--n", "15", "--method", "bfs"]).trim(),
            "method {method}"
        );
    }
    assert_eq!(
        stdout(&[
            "count",
            "--n",
            "4",
            "--method",
            "tree",
            "--variant",
            "printed-c"
        ])
        .trim(),
        "7"
    );
}

#[test]
fn query_outputs() {
    assert_eq!(stdout(&["query", "inf", "4,2", "3,3"]).trim(), "3,3");
    assert_eq!(stdout(&["query", "sup", "4,1,1", "3,3"]).trim(), "4,2");
    assert_eq!(stdout(&["query", "leq", "3,1", "2,2"]).trim(), "above");
    assert_eq!(
        stdout(&["query", "leq", "4,1,1", "3,3"]).trim(),
        "incomparable"
    );
    assert_eq!(stdout(&["query", "inf", "~,4", "~,2,1"]).trim(), "~,3,1");
    assert_eq!(stdout(&["query", "sup", "~,4", "~,2,1"]).trim(), "~,3");
}

#[test]
fn exports_are_deterministic() {
    let a = stdout(&["build", "--n", "6", "--format", "json"]);
    let b = stdout(&[
        "build",
        "--n",
        "6",
        "--method",
        "incremental",
        "--format",
        "json",
    ]);
    assert_eq!(a, b, "both construction methods export identically");
    assert_eq!(
        a,
        stdout(&["export", "single", "--n", "6", "--format", "json"])
    );
    let dot = stdout(&[
        "build-upto",
        "--n",
        "3",
        "--coords",
        "infinite",
        "--format",
        "dot",
    ]);
    assert!(dot.contains("p_0 [label=\"~\"];"));
    assert_eq!(
        dot,
        stdout(&[
            "build-upto",
            "--n",
            "3",
            "--coords",
            "infinite",
            "--format",
            "dot"
        ])
    );
    let finite = stdout(&[
        "build-upto",
        "--n",
        "3",
        "--coords",
        "finite",
        "--format",
        "json",
    ]);
    assert!(finite.contains("\"coords\":\"finite\""));
    assert!(
        finite.contains("[0,0,1]"),
        "grain edges carry label 0 in finite coordinates"
    );
}

#[test]
fn verify_small_passes() {
    let out = spm(&["verify", "--n", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().count() >= 15);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn reconcile_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("report.csv");
    let out = spm(&[
        "reconcile",
        "--max-n",
        "8",
        "--max-l",
        "5",
        "--max-k",
        "3",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "mismatch findings are not failures");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# "));
    assert!(text.contains("formula,variant,args,formula_value,oracle_value,status"));
    assert!(text.contains("c,printed,l=3;k=2,4,3,mismatch"));

    let json = dir.path().join("report.json");
    let out = spm(&[
        "reconcile",
        "--max-n",
        "6",
        "--max-l",
        "4",
        "--max-k",
        "2",
        "--format",
        "json",
        "--out",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&json).unwrap();
    assert!(text.contains("\"formula\""));
}

#[test]
fn tree_commands() {
    let chain = stdout(&["tree", "chain", "--depth", "7"]);
    let lines: Vec<&str> = chain.lines().collect();
    assert_eq!(lines[0], "level,node,attachment");
    assert_eq!(lines[1], "0,\"\",-");
    assert_eq!(lines[4], "3,\"2,1\",X2");
    assert_eq!(lines[7], "6,\"3,2,1\",X3");

    let classify = stdout(&["tree", "classify", "2,2"]);
    assert!(classify.contains("n_root: N2"));
    assert!(classify.contains("successor_labels: 1,3"));

    let build = stdout(&["tree", "build", "--depth", "7"]);
    assert!(build.lines().any(|l| l == "7,9"));
}

#[test]
fn bench_has_stable_counts() {
    let a = stdout(&["bench", "--max-n", "6"]);
    let b = stdout(&["bench", "--max-n", "6"]);
    let counts = |s: &str| -> Vec<(String, String, String)> {
        s.lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0].to_string(), f[1].to_string(), f[2].to_string())
            })
            .collect()
    };
    assert_eq!(counts(&a), counts(&b), "only timing columns may vary");
}

#[test]
fn exit_codes() {
    // Usage errors: malformed pile, mismatched grains, bad variant.
    assert_eq!(spm(&["query", "inf", "2,3", "3,2"]).status.code(), Some(2));
    assert_eq!(
        spm(&["query", "inf", "4,2", "3,3,1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        spm(&[
            "count",
            "--n",
            "4",
            "--method",
            "tree",
            "--variant",
            "corrected"
        ])
        .status
        .code(),
        Some(2)
    );
    // Unknown flags are rejected by the parser.
    assert_eq!(
        spm(&["count", "--n", "4", "--bogus"]).status.code(),
        Some(2)
    );
    // Budget exhaustion.
    let out = Command::new(env!("CARGO_BIN_EXE_spm"))
        .args(["build", "--n", "30"])
        .env("SPM_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // Invalid budget value.
    let out = Command::new(env!("CARGO_BIN_EXE_spm"))
        .args(["count", "--n", "4", "--method", "bfs"])
        .env("SPM_BUDGET", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
