use std::path::Path;
use std::process::{Command, Output};

fn bmcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bmcm"))
        .arg("--quiet")
        .args(args)
        .output()
        .expect("spawn bmcm")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn complete_graph_text(n: usize) -> String {
    let mut s = format!("bmcm {n} {}\n", n * n);
    for u in 0..n {
        for v in 0..n {
            s.push_str(&format!("{u} {v}\n"));
        }
    }
    s
}

#[test]
fn bad_parameters_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.txt");
    let out = out.to_str().unwrap();
    assert_eq!(bmcm(&["generate", "--n", "8", "--p", "1.5", "--out", out]).status.code(), Some(2));
    assert_eq!(bmcm(&["bench", "--n", "64", "--p-rule", "clogn:1.5"]).status.code(), Some(2));
    assert_eq!(bmcm(&["bench", "--n", "64"]).status.code(), Some(2));
}

#[test]
fn malformed_input_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "bmcm 2 2\n0 0\n0 7\n");
    for cmd in ["solve", "verify"] {
        let out = bmcm(&[cmd, &bad]);
        assert_eq!(out.status.code(), Some(3), "{cmd}");
        assert!(!out.stderr.is_empty());
    }
    let missing = dir.path().join("nope.txt");
    assert_eq!(bmcm(&["solve", missing.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn generate_complete_graph() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k8.txt");
    let out = bmcm(&["generate", "--n", "8", "--p", "1.0", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let g = bmcm_core::graph::read_graph(&path).unwrap();
    assert_eq!(g.edge_count(), 64);
}

#[test]
fn solve_complete_and_empty() {
    let dir = tempfile::tempdir().unwrap();
    let k4 = write(dir.path(), "k4.txt", &complete_graph_text(4));
    let v = stdout_json(&bmcm(&["solve", &k4]));
    assert_eq!(v["cardinality"], 4);
    assert_eq!(v["termination"], "Perfect");
    assert_eq!(v["T"], 4);

    let empty = write(dir.path(), "e.txt", "bmcm 5 0\n");
    let v = stdout_json(&bmcm(&["solve", &empty]));
    assert_eq!(v["cardinality"], 0);
    assert_eq!(v["T"], 0);
}

#[test]
fn parallel_output_matches_sequential() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let path = path.to_str().unwrap();
    assert!(bmcm(&["--seed", "11", "generate", "--n", "300", "--p", "0.05", "--out", path])
        .status
        .success());
    let seq = bmcm(&["solve", path]);
    for q in ["2", "4"] {
        let par = bmcm(&["solve", path, "--algorithm", "parallel", "--q", q]);
        assert_eq!(par.stdout, seq.stdout, "q {q}");
    }
}

#[test]
fn bench_writes_one_row_per_instance() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let out = bmcm(&[
        "bench", "--n", "256,512", "--p-rule", "clogn:3", "--seeds", "5", "--oracle",
        "--out", csv.to_str().unwrap(),
    ]);
    stdout_json(&out);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,p,seed,T,wall_ns,cardinality,oracle_cardinality,termination,bound")
    );
    assert_eq!(lines.count(), 10);
}

#[test]
fn sparsified_bench_rows_are_flagged() {
    let out = bmcm(&["bench", "--n", "128", "--p", "0.5", "--seeds", "2", "--algorithm", "sparsified:3", "--no-timing"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(!rows.is_empty());
    for row in rows {
        let label = row.split(',').nth(7).unwrap();
        assert!(label.starts_with("sparsified/") || label.starts_with("dense-fallback/"), "{row}");
    }
}

#[test]
fn verify_passes_on_random_graph() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let path = path.to_str().unwrap();
    assert!(bmcm(&["--seed", "1", "generate", "--n", "64", "--p", "0.2", "--out", path])
        .status
        .success());
    let out = bmcm(&["verify", path]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn trace_has_one_line_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let k3 = write(dir.path(), "k3.txt", &complete_graph_text(3));
    let trace = dir.path().join("t.jsonl");
    let v = stdout_json(&bmcm(&["--trace", trace.to_str().unwrap(), "solve", &k3]));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().count() as u64, v["T"].as_u64().unwrap());
    for line in text.lines() {
        let step: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(step.get("u").is_some() && step.get("h_j").is_some());
    }
}

#[test]
fn assign_reads_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "r.csv", "1,5\n4,1\n");
    let v = stdout_json(&bmcm(&["assign", &csv]));
    assert_eq!(v["total_reward"], 9.0);
}
