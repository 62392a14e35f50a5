//! Runs every acceptance criterion and prints one PASS/FAIL line for each.
//!
//! Criteria 1 to 9 come from `ce selftest`; criterion 10 runs the self-test
//! and a full explain/compare pipeline on the bundled credit data twice,
//! single-threaded, and requires byte-identical primary outputs.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;
use tempfile::TempDir;

const SEED: &str = "7";
const LIMIT: Duration = Duration::from_secs(300);

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn ce(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ce"))
        .current_dir(dir)
        .env("CE_THREADS", "1")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("ce {} exited with {}: {}", args.join(" "), out.status, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

/// Primary outputs of one pipeline run, by file name.
fn pipeline(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let data = root().join("data/synthetic_credit.csv").display().to_string();
    let model = root().join("data/synthetic_credit_model.json").display().to_string();
    let mut outputs = vec![("selftest.stdout".to_string(), ce(dir, &["selftest", "--seed", SEED, "--out", "selftest.json"])?)];
    for (score, extra) in [("resp", &[][..]), ("counter", &[]), ("shap", &[]), ("kernelshap", &["--samples", "64", "--seed", SEED])] {
        let out = format!("{score}.json");
        let args = [&["explain", "--data", &data, "--model", &model, "--score", score, "--out", &out][..], extra].concat();
        ce(dir, &args)?;
    }
    ce(dir, &["compare", "resp.json", "shap.json", "--k", "4", "--out", "resp_vs_shap.json", "--plot-data", "plots"])?;
    ce(dir, &["compare", "resp.json", "kernelshap.json", "--k", "4", "--out", "resp_vs_kernelshap.json"])?;
    let mut names: Vec<String> = ["selftest.json", "resp_vs_shap.json", "resp_vs_shap.csv", "resp_vs_kernelshap.json"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for score in ["resp", "counter", "shap", "kernelshap"] {
        names.push(format!("{score}.json"));
        names.push(format!("{score}.summary.json"));
    }
    for plot in ["intersection.dat", "top1_a.dat", "top1_b.dat"] {
        names.push(format!("plots/{plot}"));
    }
    for name in names {
        let bytes = std::fs::read(dir.join(&name)).map_err(|e| format!("{name}: {e}"))?;
        outputs.push((name, bytes));
    }
    Ok(outputs)
}

fn dataset_shape() -> (usize, usize) {
    let text = std::fs::read_to_string(root().join("data/synthetic_credit.csv")).unwrap();
    let mut lines = text.lines();
    let features = lines.next().map_or(0, |h| h.split(',').count());
    (lines.filter(|l| !l.trim().is_empty()).count(), features)
}

fn determinism() -> (bool, String, Option<Vec<u8>>) {
    let (rows, features) = dataset_shape();
    if rows < 500 || features < 8 {
        return (false, format!("bundled dataset has {rows} rows and {features} features"), None);
    }
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = TempDir::new().unwrap();
        let started = Instant::now();
        match pipeline(dir.path()) {
            Ok(outputs) => runs.push((outputs, started.elapsed())),
            Err(e) => return (false, e, None),
        }
    }
    let (a, ta) = &runs[0];
    let (b, tb) = &runs[1];
    let differing: Vec<&str> = a.iter().zip(b).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    let slow = *ta > LIMIT || *tb > LIMIT;
    let detail = format!(
        "{rows} rows x {features} features; {} outputs compared, {} differ{}; runs took {:.1}s and {:.1}s",
        a.len(),
        differing.len(),
        if differing.is_empty() { String::new() } else { format!(" ({})", differing.join(", ")) },
        ta.as_secs_f64(),
        tb.as_secs_f64()
    );
    let report = a.iter().find(|(n, _)| n == "selftest.json").map(|(_, bytes)| bytes.clone());
    (differing.is_empty() && !slow && a.len() == b.len(), detail, report)
}

#[test]
fn acceptance_criteria() {
    let (passed10, detail10, report) = determinism();
    let mut lines = Vec::new();
    let mut all = passed10;
    let reports: Vec<Value> = report.map(|r| serde_json::from_slice(&r).unwrap()).unwrap_or_default();
    for id in 1..=9u64 {
        match reports.iter().find(|r| r["id"] == id) {
            Some(r) => {
                let passed = r["passed"] == true;
                all &= passed;
                let verdict = if passed { "PASS" } else { "FAIL" };
                lines.push(format!("{verdict} criterion {id} ({}): {}", r["name"].as_str().unwrap(), r["detail"].as_str().unwrap()));
            }
            None => {
                all = false;
                lines.push(format!("FAIL criterion {id}: no self-test report"));
            }
        }
    }
    let verdict = if passed10 { "PASS" } else { "FAIL" };
    lines.push(format!("{verdict} criterion 10 (end-to-end determinism): {detail10}"));
    for line in &lines {
        println!("{line}");
    }
    assert!(all, "acceptance failures:\n{}", lines.join("\n"));
}
