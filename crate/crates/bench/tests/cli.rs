use std::fs;
use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dynmedian-bench"))
}

#[test]
fn dataset_run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("points.txt");
    let rows: String = (0..60).map(|i| format!("{},{}\n", i % 7, (i * 3) % 11)).collect();
    fs::write(&data, rows).unwrap();
    let out = dir.path().join("metrics.csv");
    let status = bench()
        .args([
            "--dataset",
            data.to_str().unwrap(),
            "--limit",
            "40",
            "--window",
            "10",
            "--k",
            "2",
        ])
        .args([
            "--phi",
            "4",
            "--queries",
            "4",
            "--offset",
            "inv-n",
            "--baseline",
            "static:20",
        ])
        .args(["--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("update_index,op,wall_nanos,distance_evals_delta,t,n,solution_cost,centers")
    );
    assert_eq!(csv.lines().filter(|l| l.contains(",insert,")).count(), 40);
    assert_eq!(csv.lines().filter(|l| l.contains(",query,")).count(), 4);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["updates"], 80);
    assert_eq!(summary["points"], 40);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1,2\n3\n").unwrap();
    let ingest = bench()
        .args(["--dataset", bad.to_str().unwrap(), "--window", "1", "--k", "1"])
        .output()
        .unwrap();
    assert_eq!(ingest.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&ingest.stderr).contains(":2:"));

    let missing = bench()
        .args(["--dataset", "/nonexistent/points", "--window", "1", "--k", "1"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    for args in [
        vec!["--synthetic", "g:2:2:20", "--window", "0", "--k", "1"],
        vec![
            "--synthetic",
            "g:2:2:20",
            "--window",
            "5",
            "--k",
            "1",
            "--offset",
            "sqrt",
        ],
        vec!["--synthetic", "g:2:2", "--window", "5", "--k", "1"],
        vec!["--synthetic", "g:2:2:20", "--window", "5", "--k", "1", "--limit", "3"],
        vec!["--window", "5", "--k", "1"],
    ] {
        let out = bench().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn stdout_mode() {
    let out = bench()
        .args([
            "--synthetic",
            "g:2:2:30",
            "--window",
            "10",
            "--k",
            "2",
            "--phi",
            "5",
            "--queries",
            "0",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 61);
    assert!(String::from_utf8(out.stderr).unwrap().contains("\"updates\": 60"));
}
