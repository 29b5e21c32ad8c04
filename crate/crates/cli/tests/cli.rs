use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn groupmds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_groupmds")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn table(doc: &Value) -> Vec<(String, u64)> {
    doc["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["sign"] != "zero")
        .map(|e| (e["eigenvalue"].as_str().unwrap().to_string(), e["multiplicity"].as_u64().unwrap()))
        .collect()
}

fn pairs(v: &[(&str, u64)]) -> Vec<(String, u64)> {
    v.iter().map(|(s, m)| (s.to_string(), *m)).collect()
}

#[test]
fn spectrum_s4() {
    let out = groupmds(&["spectrum", "--group", "sn", "--n", "4", "--metric", "hamming"]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(table(&doc), pairs(&[("20/1", 9), ("-4/1", 9), ("-6/1", 4)]));
    assert_eq!(doc["trivial_discarded"], true);
    assert_eq!(doc["metric"], "hamming-permutation");
}

#[test]
fn spectrum_closed_form_c2_10() {
    let out = groupmds(&["spectrum", "--group", "c2k", "--k", "10", "--metric", "hamming", "--closed-form"]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(table(&doc), pairs(&[("2560/1", 10), ("-256/1", 45)]));
}

#[test]
fn spectrum_verify_s5() {
    let out = groupmds(&["spectrum", "--group", "sn", "--n", "5", "--metric", "hamming", "--verify"]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["verification"]["max_rel_deviation"].as_f64().unwrap() < 1e-8);
    assert_eq!(doc["verification"]["multiplicities_match"], true);
}

#[test]
fn spectrum_errors() {
    assert_eq!(code(&groupmds(&["spectrum", "--group", "cyclic", "--n", "6", "--metric", "hamming"])), 2);
    assert_eq!(code(&groupmds(&["spectrum", "--group", "sn", "--metric", "hamming"])), 2);
    assert_eq!(code(&groupmds(&["spectrum", "--group", "sn", "--n", "3", "--closed-form"])), 2);
    assert_eq!(code(&groupmds(&["spectrum", "--group", "bogus", "--n", "3"])), 2);
    let out = groupmds(&["spectrum", "--group", "sn", "--n", "7", "--verify"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("720"));
}

#[test]
fn chartable_examples() {
    let out = groupmds(&["chartable", "--group", "c2k", "--k", "2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows[0], ["irrep", "00|1", "01|1", "10|1", "11|1"]);
    assert_eq!(rows[1][1..], ["1", "1", "1", "1"]);
    assert_eq!(rows[2][1..], ["1", "-1", "1", "-1"]);
    assert_eq!(rows[3][1..], ["1", "1", "-1", "-1"]);
    assert_eq!(rows[4][1..], ["1", "-1", "-1", "1"]);

    let out = groupmds(&["chartable", "--group", "sn", "--n", "3", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "irrep,\"[1,1,1]|1\",\"[2,1]|3\",[3]|2\n[3],1,1,1\n\"[2,1]\",2,0,-1\n\"[1,1,1]\",1,-1,1\n");

    assert_eq!(code(&groupmds(&["chartable", "--group", "sn", "--n", "9"])), 0);
    assert_eq!(code(&groupmds(&["chartable", "--group", "sn", "--n", "30"])), 3);
}

#[test]
fn verify_examples() {
    for args in [["--group", "sn", "--n", "4"], ["--group", "c2k", "--k", "5"], ["--group", "cyclic", "--n", "12"]] {
        let mut full = vec!["verify"];
        full.extend(args);
        let out = groupmds(&full);
        assert_eq!(code(&out), 0, "{}", stdout(&out));
        assert!(stdout(&out).contains("all checks passed"));
        assert!(!stdout(&out).contains("FAIL"));
    }
    assert_eq!(code(&groupmds(&["verify", "--group", "sn", "--n", "7"])), 3);
}

fn synth(dir: &Path, n: &str, rows: &str, seed: &str) -> std::path::PathBuf {
    let path = dir.join(format!("r{n}_{rows}_{seed}.txt"));
    let out = groupmds(&["synthesize", "--n", n, "--rows", rows, "--seed", seed, "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    path
}

#[test]
fn embed_and_plot_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path(), "5", "5738", "7");
    let csv = dir.path().join("e.csv");
    let out = groupmds(&["embed", "--input", input.to_str().unwrap(), "--dims", "3", "--mode", "dense", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "id,label,weight,x1(+),x2(+),x3(+)");
    assert!(lines.len() - 1 <= 120);
    let total: u64 = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 5738);

    let svg_a = dir.path().join("a.svg");
    let svg_b = dir.path().join("b.svg");
    for svg in [&svg_a, &svg_b] {
        assert_eq!(code(&groupmds(&["plot", "--input", csv.to_str().unwrap(), "--out", svg.to_str().unwrap()])), 0);
    }
    let a = fs::read(&svg_a).unwrap();
    assert_eq!(a, fs::read(&svg_b).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().matches("<circle").count(), lines.len() - 1);
    let colored = groupmds(&["plot", "--input", csv.to_str().unwrap(), "--color-col", "1"]);
    assert_eq!(code(&colored), 0);
    assert_eq!(code(&groupmds(&["plot", "--input", csv.to_str().unwrap(), "--color-col", "9"])), 2);
}

#[test]
fn embed_standard_sushi_scale() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path(), "10", "5000", "1");
    let out = groupmds(&["embed", "--input", input.to_str().unwrap(), "--dims", "3", "--mode", "standard"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    let distinct = fs::read_to_string(&input).unwrap().lines().skip(1).collect::<std::collections::BTreeSet<_>>().len();
    assert_eq!(rows.len(), distinct);
    assert!(rows.len() > 4900);
    assert!(rows.iter().all(|r| r.split(',').skip(3).all(|v| v.parse::<f64>().unwrap().is_finite())));
    assert_eq!(code(&groupmds(&["embed", "--input", input.to_str().unwrap(), "--mode", "dense"])), 3);
}

#[test]
fn embed_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path(), "4", "10", "3");
    assert_eq!(code(&groupmds(&["embed", "--input", input.to_str().unwrap(), "--dims", "0"])), 2);
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "A,B,C\n1,2,3\n1,1,3\n").unwrap();
    let out = groupmds(&["embed", "--input", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:"));
    assert_eq!(code(&groupmds(&["embed", "--input", dir.path().join("missing").to_str().unwrap()])), 2);
    let short = dir.path().join("short.csv");
    fs::write(&short, "id,label,weight,x1(+)\n1,a,1,0.5\n").unwrap();
    assert_eq!(code(&groupmds(&["plot", "--input", short.to_str().unwrap()])), 2);
}

#[test]
fn synthesize_is_deterministic() {
    let a = groupmds(&["synthesize", "--n", "5", "--rows", "5738", "--seed", "7"]);
    let b = groupmds(&["synthesize", "--n", "5", "--rows", "5738", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stderr).contains("seed: 7"));
    let two = stdout(&groupmds(&["synthesize", "--n", "2", "--rows", "10"]));
    assert!(two.lines().skip(1).all(|l| l == "1,2" || l == "2,1"));
}

#[test]
fn distances_csv() {
    let out = groupmds(&["distances", "--group", "c2k", "--k", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().next().unwrap(), "label,00,01,10,11");
    assert_eq!(stdout(&out).lines().nth(1).unwrap(), "00,0,1,1,2");
    let a = groupmds(&["distances", "--group", "cyclic", "--n", "5"]);
    assert_eq!(stdout(&a).lines().nth(1).unwrap(), "0,0,1,2,2,1");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for args in [
        vec!["spectrum", "--group", "cyclic", "--n", "12"],
        vec!["chartable", "--group", "cyclic", "--n", "6"],
        vec!["verify", "--group", "c2k", "--k", "3"],
    ] {
        assert_eq!(groupmds(&args).stdout, groupmds(&args).stdout);
    }
}
