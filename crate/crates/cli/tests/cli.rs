//! CLI contract tests: file formats, exit codes, and the experiment
//! runner's row accounting.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spantree"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spantree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn gen_writes_exact_headers() {
    let out = tmp("empty10.txt");
    let status = bin()
        .args(["gen", "gnp", "--n", "10", "--p", "0", "--seed", "1"])
        .args(["--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let body = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        body,
        "# genspec: {\"kind\":{\"gnp\":{\"n\":10,\"p\":0.0}},\"seed\":1}\n10 0\n"
    );

    let out = tmp("k4.txt");
    bin()
        .args(["gen", "complete", "--n", "4", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    let body = std::fs::read_to_string(&out).unwrap();
    assert_eq!(body.lines().filter(|l| !l.starts_with('#')).count(), 7); // header + 6 edges
}

#[test]
fn embed_error_paths() {
    let host = tmp("c5.txt");
    std::fs::write(&host, "5 5\n0 1\n0 4\n1 2\n2 3\n3 4\n").unwrap();
    let star = tmp("star5.txt");
    std::fs::write(&star, "5 0 0 0 0\n").unwrap();
    let small = tmp("p4.txt");
    std::fs::write(&small, "4 0 1 2\n").unwrap();

    // degree obstruction: failure report, exit 1
    let out = bin()
        .args(["embed", "--graph", host.to_str().unwrap(), "--tree", star.to_str().unwrap()])
        .args(["--delta", "4", "--d", "1", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(parsed["embedding"].is_null());
    assert_eq!(parsed["report"]["fallback"], "exact");

    // size mismatch: input error, exit 2
    let out = bin()
        .args(["embed", "--graph", host.to_str().unwrap(), "--tree", small.to_str().unwrap()])
        .args(["--delta", "4", "--d", "1", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn embed_accepts_pruefer_tree_files() {
    let host = tmp("k7.txt");
    bin().args(["gen", "complete", "--n", "7", "--out", host.to_str().unwrap()]).status().unwrap();
    let tree = tmp("t7.txt");
    std::fs::write(&tree, "# a star\n7 : 0 0 0 0 0\n").unwrap();
    let out = bin()
        .args(["embed", "--graph", host.to_str().unwrap(), "--tree", tree.to_str().unwrap()])
        .args(["--delta", "6", "--d", "1", "--seed", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["embedding"].as_array().unwrap().len(), 7);
    assert_eq!(parsed["report"]["validated"], true);
}

#[test]
fn experiment_enumerate_all_counts_cayley() {
    let out_prefix = tmp("enum6");
    let config = tmp("enum6.json");
    std::fs::write(
        &config,
        format!(
            r#"{{
  "name": "enumerate",
  "gen": {{ "kind": {{ "complete": {{ "n": 6 }} }}, "seed": 0 }},
  "d": 1.0,
  "delta": 5.0,
  "tree_source": "enumerate_all",
  "trials": 1,
  "seed": 9,
  "out": "{}"
}}"#,
            out_prefix.display()
        ),
    )
    .unwrap();
    let status = bin().args(["experiment", "--config", config.to_str().unwrap()]).status().unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(format!("{}.csv", out_prefix.display())).unwrap();
    // header plus 6^4 = 1296 rows, all validated
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1296);
    assert!(rows.iter().all(|r| r.split(',').nth(6) == Some("1")));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{}.json", out_prefix.display())).unwrap())
            .unwrap();
    assert_eq!(summary["rows"], 1296);
    assert_eq!(summary["successes"], 1296);
    assert_eq!(summary["config"]["seed"], 9);
}

#[test]
fn check_reads_json_graphs_and_versions_output() {
    let g = tmp("k6.json");
    std::fs::write(&g, r#"{"n":6,"edges":[[0,1],[0,2],[0,3],[0,4],[0,5],[1,2],[1,3],[1,4],[1,5],[2,3],[2,4],[2,5],[3,4],[3,5],[4,5]]}"#).unwrap();
    let out = bin()
        .args(["check", "--graph", g.to_str().unwrap(), "--d", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["schema_version"], 1);
    assert_eq!(parsed["status"], "pass");
    assert_eq!(parsed["m"], 2);
}

#[test]
fn gen_doubled_from_file() {
    let base = tmp("base.txt");
    bin()
        .args(["gen", "gnp", "--n", "10", "--p", "0.5", "--seed", "4"])
        .args(["--out", base.to_str().unwrap()])
        .status()
        .unwrap();
    let out = tmp("doubled.txt");
    let status = bin()
        .args(["gen", "doubled", "--base", base.to_str().unwrap(), "--seed", "5"])
        .args(["--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let body = std::fs::read_to_string(&out).unwrap();
    assert!(body.starts_with("# genspec: {\"kind\":{\"doubled_file\""));
    let header = body.lines().nth(1).unwrap();
    assert!(header.starts_with("20 "));
}

#[test]
fn tailcheck_rejects_out_of_range_eps() {
    for eps in ["0", "1.6", "-1"] {
        let out = bin()
            .args(["tailcheck", "--dist", "binomial", "--n", "10", "--p", "0.5"])
            .args(["--eps", eps, "--samples", "10", "--seed", "1"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(2), "eps = {eps} must be rejected");
    }
}

#[test]
fn game_report_parses_and_counts() {
    let host = tmp("k8.txt");
    bin().args(["gen", "complete", "--n", "8", "--out", host.to_str().unwrap()]).status().unwrap();
    let out = bin()
        .args(["game", "--graph", host.to_str().unwrap(), "--d", "1", "--b", "1"])
        .args(["--breaker", "random", "--trials", "5", "--trees", "3", "--delta", "4"])
        .args(["--seed", "17"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["trials"], 5);
    assert_eq!(parsed["per_trial"].as_array().unwrap().len(), 5);
    assert_eq!(parsed["trees_attempted"], 15);
    let passes = parsed["expander_passes"].as_u64().unwrap();
    assert!(passes <= 5);
}
