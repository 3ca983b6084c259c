// Copyright contributors to the qmaxwell project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qmaxwell"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn toric(dir: &Path, size: usize) -> PathBuf {
    write(dir, &format!("toric{size}.json"), &format!("{{\"family\": \"toric\", \"size\": {size}}}"))
}

/// Three-variable instance where a guess is reimbursed by a restrictive check.
fn fixture(dir: &Path) -> PathBuf {
    write(dir, "hz.txt", "110\n101\n111\n");
    write(dir, "hx.txt", "000\n");
    write(
        dir,
        "fixture.json",
        r#"{"family": "css_files", "hx": "hx.txt", "hz": "hz.txt", "name": "fixture"}"#,
    )
}

#[test]
fn validate_reports_parameters() {
    let dir = TempDir::new().unwrap();
    let bb = write(
        dir.path(),
        "bb.json",
        r#"{"family": "bb", "l": 6, "m": 6, "a": [[3,0],[0,1],[0,2]], "b": [[0,3],[1,0],[2,0]]}"#,
    );
    let o = run(&["validate", "--code", s(&bb)]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("ok, n=72, k=12\n"));
}

#[test]
fn validate_rejects_bad_pairs_and_missing_files() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "hx.txt", "11\n");
    write(dir.path(), "hz.txt", "10\n");
    let cfg = write(dir.path(), "bad.json", r#"{"family": "css_files", "hx": "hx.txt", "hz": "hz.txt"}"#);
    let o = run(&["validate", "--code", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 0"));

    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["validate", "--code", s(&missing)]).status.code(), Some(1));
    let dangling = write(dir.path(), "dangling.json", r#"{"family": "css_files", "hx": "x.txt", "hz": "hz.txt"}"#);
    assert_eq!(run(&["validate", "--code", s(&dangling)]).status.code(), Some(1));
}

#[test]
fn decode_empty_erasure() {
    let dir = TempDir::new().unwrap();
    let code = toric(dir.path(), 3);
    let syn = write(dir.path(), "syn.txt", "indices 9\n");
    let era = write(dir.path(), "era.txt", "indices 18\n");
    let o = run(&["decode", "--code", s(&code), "--sector", "x", "--syndrome", s(&syn), "--erasure", s(&era)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains(&format!("correction: {}\n", "0".repeat(18))));
}

#[test]
fn decode_reimbursement_fixture() {
    let dir = TempDir::new().unwrap();
    let code = fixture(dir.path());
    let syn = write(dir.path(), "syn.txt", "bits 3\n1 0 0\n");
    let era = write(dir.path(), "era.txt", "bits 3\n111\n");
    let trace = dir.path().join("trace.jsonl");
    let o = run(&[
        "decode", "--code", s(&code), "--sector", "x", "--syndrome", s(&syn), "--erasure", s(&era),
        "--gmax", "1", "--trace", s(&trace),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    for line in ["guesses: 1", "reimbursements: 1", "surviving_pivots: 0", "unique_mod_stabilizer: true", "correction: 101"] {
        assert!(out.contains(line), "{line} missing from\n{out}");
    }
    let events = fs::read_to_string(trace).unwrap();
    assert!(events.lines().any(|l| l.contains("\"event\":\"demote\"")));
}

#[test]
fn decode_budget_exhaustion_exit_code() {
    let dir = TempDir::new().unwrap();
    let code = toric(dir.path(), 2);
    // a plaquette support is a stopping set for the Z sector check matrix
    let syn = write(dir.path(), "syn.txt", "indices 4\n");
    let era = write(dir.path(), "era.txt", "indices 8\n0 2 4 5\n");
    let args = ["decode", "--code", s(&code), "--sector", "z", "--syndrome", s(&syn), "--erasure", s(&era)];
    let o = run(&[&args[..], &["--gmax", "0"]].concat());
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("budget exhausted"));
    let o = run(&[&args[..], &["--gmax", "0", "--prune", "1"]].concat());
    assert!(o.status.success());
    let bad = write(dir.path(), "bad.txt", "bits 2\n1\n");
    let o = run(&["decode", "--code", s(&code), "--sector", "z", "--syndrome", s(&bad), "--erasure", s(&era)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_reports_and_refuses() {
    let dir = TempDir::new().unwrap();
    let code = toric(dir.path(), 2);
    let o = run(&["analyze", "--code", s(&code), "--t", "4"]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["t"], 4);
    assert!(report["gamma"].is_u64());
    assert_eq!(report["sectors"][0]["A_SS"].as_array().unwrap().len(), 5);

    let steane = write(dir.path(), "steane.json", r#"{"family": "steane"}"#);
    let out = dir.path().join("steane_report.json");
    let o = run(&["analyze", "--code", s(&steane), "--t", "7", "--out", s(&out)]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["sectors"][0]["A_NTLO"][3], 7);
    assert!(dir.path().join("steane_report.json.manifest.json").exists());

    let big = toric(dir.path(), 8);
    let o = run(&["analyze", "--code", s(&big), "--t", "10"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let code = toric(dir.path(), 4);
    let sim = |out: &Path, workers: &str| {
        let o = run(&[
            "simulate", "--code", s(&code), "--decoder", "maxwell", "--gmax", "1,2,3,4,5,6", "--strategy", "random",
            "--eps", "0,0.3", "--max-trials", "2000", "--max-failures", "30", "--seed", "12", "--workers", workers,
            "--out", s(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    sim(&a, "1");
    sim(&b, "3");
    let csvs: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    assert_eq!(csvs.len(), 6);
    for name in &csvs {
        let x = fs::read(a.join(name)).unwrap();
        assert_eq!(x, fs::read(b.join(name)).unwrap(), "{name}");
        let text = String::from_utf8(x).unwrap();
        let zero = text.lines().nth(1).unwrap();
        assert!(zero.contains(",0,2000,0,0,0,12"), "{zero}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 12);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn bench_tables() {
    let o = run(&["bench", "--trials", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 1);
    let o = run(&["bench", "--sizes", "6", "--trials", "20", "--gmax", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("6\t72\t20\t"));
}
