use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn ce(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ce")).current_dir(dir).args(args).output().expect("run ce")
}

fn data() -> String {
    root().join("data/synthetic_credit.csv").display().to_string()
}

fn model() -> String {
    root().join("data/synthetic_credit_model.json").display().to_string()
}

fn fixture(name: &str) -> String {
    root().join("crates/core/fixtures").join(name).display().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn fico_fixture_top_three() {
    let dir = TempDir::new().unwrap();
    let out = ce(
        dir.path(),
        &["explain", "--data", &fixture("fico_entity.csv"), "--model", &fixture("fico_fixture.json"), "--score", "fico", "--row", "0", "--top", "3", "--out", "fico.json"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let x = &json(&dir.path().join("fico.json"))["explanations"][0];
    assert_eq!(x["ranking"], serde_json::json!(["MaxDelq2PublicRecLast12M", "PercentTradesNeverDelq", "ExternalRiskEstimate"]));
    assert_eq!(x["subscale_ranking"][0]["subscale"], "Delinquency");
    assert!((x["global_risk"].as_f64().unwrap() - 0.6146).abs() < 5e-4);
}

#[test]
fn shap_outside_dataset_needs_add_entity() {
    let dir = TempDir::new().unwrap();
    let header = "ExternalRiskEstimate,MSinceMostRecentInqexcl7days,NumInqLast6M,PercentTradesNeverDelq,MaxDelq2PublicRecLast12M,NetFractionRevolvingBurden,NumRevolvingTradesWBalance,AverageMInFile";
    let file = write(dir.path(), "new.csv", &format!("{header}\n66,1,2,75,4,10,3,70\n"));
    let base = ["explain", "--data", &data(), "--model", &model(), "--score", "shap", "--entity-file", &file];
    let out = ce(dir.path(), &base);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero-probability"));
    let out = ce(dir.path(), &[&base[..], &["--add-entity"]].concat());
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["explanations"].as_array().unwrap().len(), 1);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    for (threads, name) in [("1", "a.json"), ("4", "b.json")] {
        let out = ce(
            dir.path(),
            &["explain", "--data", &data(), "--model", &model(), "--score", "kernelshap", "--samples", "40", "--seed", "9", "--threads", threads, "--out", name],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.json")).unwrap());
    assert_eq!(
        std::fs::read(dir.path().join("a.summary.json")).unwrap(),
        std::fs::read(dir.path().join("b.summary.json")).unwrap()
    );
    assert!(json(&dir.path().join("a.timing.json"))["elapsed_ms"].is_u64());
}

#[test]
fn compare_self_and_disjoint() {
    let dir = TempDir::new().unwrap();
    let out = ce(dir.path(), &["explain", "--data", &data(), "--model", &model(), "--score", "resp", "--out", "resp.json"]);
    assert!(out.status.success());
    let out = ce(dir.path(), &["compare", "resp.json", "resp.json", "--k", "4", "--out", "self.json", "--plot-data", "plots"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("self.json"));
    assert_eq!(report["jaccard"]["mean"], 1.0);
    assert!(dir.path().join("self.csv").exists());
    assert!(dir.path().join("plots/intersection.dat").exists());

    let run = |ranking: &str| {
        format!(
            r#"{{"kind":"resp","partial":false,"explanations":[{{"entity":[1],"label":1,"kind":"resp","scores":[{{"feature":"{ranking}","value":0.5}}],"ranking":["{ranking}"],"no_explanation":false}}]}}"#
        )
    };
    write(dir.path(), "x.json", &run("A"));
    write(dir.path(), "y.json", &run("B"));
    let out = ce(dir.path(), &["compare", "x.json", "y.json"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["jaccard"]["mean"], 0.0);
    assert_eq!(report["intersection"], serde_json::json!([1, 0, 0, 0, 0]));
}

#[test]
fn misaligned_compare_fails() {
    let dir = TempDir::new().unwrap();
    let out = ce(dir.path(), &["explain", "--data", &data(), "--model", &model(), "--score", "resp", "--out", "a.json"]);
    assert!(out.status.success());
    let out = ce(dir.path(), &["explain", "--data", &data(), "--model", &model(), "--score", "shap", "--row", "0", "--out", "b.json"]);
    assert!(out.status.success());
    assert_eq!(ce(dir.path(), &["compare", "a.json", "b.json"]).status.code(), Some(2));
}

#[test]
fn timeout_marks_partial_output() {
    let dir = TempDir::new().unwrap();
    let out = ce(dir.path(), &["explain", "--data", &data(), "--model", &model(), "--score", "resp", "--timeout-ms", "0", "--out", "p.json"]);
    assert_eq!(out.status.code(), Some(4));
    let v = json(&dir.path().join("p.json"));
    assert_eq!(v["partial"], true);
    assert!(v["explanations"].as_array().unwrap().iter().any(Value::is_null));
    assert_eq!(ce(dir.path(), &["compare", "p.json", "p.json"]).status.code(), Some(2));
}

#[test]
fn external_oracle_and_failures() {
    let dir = TempDir::new().unwrap();
    let script = "tail -n +2 | while IFS=, read a rest; do if [ \"$a\" -lt 70 ]; then echo 1; else echo 0; fi; done";
    let out = ce(
        dir.path(),
        &["explain", "--data", &data(), "--oracle-cmd", "sh", "--oracle-arg", "-c", "--oracle-arg", script, "--score", "counter", "--out", "o.json"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("o.summary.json"));
    assert_eq!(summary["top1"]["ExternalRiskEstimate"], summary["entities"]);

    let out = ce(dir.path(), &["explain", "--data", &data(), "--oracle-cmd", "false", "--score", "resp"]);
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_ce"))
        .current_dir(dir.path())
        .env("CE_ORACLE_TIMEOUT_MS", "50")
        .args(["explain", "--data", &data(), "--oracle-cmd", "sleep", "--oracle-arg", "5", "--score", "resp"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(ce(dir.path(), &["explain", "--data", &data(), "--score", "resp"]).status.code(), Some(2));
}

#[test]
fn bucketize_examples() {
    let dir = TempDir::new().unwrap();
    let data = write(dir.path(), "d.csv", "ExternalRiskEstimate,x\n61,1\n62,2\n70,3\n-7,4\n90,5\n95,6\n");
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"ExternalRiskEstimate":{"ranges":[[0,63],[64,70],[71,75],[76,80],[81,"inf"]],"specials":[-7,-8,-9]},"x":{"equidepth":2}}"#,
    );
    let out = ce(dir.path(), &["bucketize", "--data", &data, "--spec", &spec, "--out", "b.csv", "--mapping", "m.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    // rows that land in the same buckets merge
    assert_eq!(lines, ["ExternalRiskEstimate,x,C", "61.5,2,2", "70,2,1", "-7,5,1", "92.5,5,2"]);
    let mapping = json(&dir.path().join("m.json"));
    assert_eq!(mapping["ExternalRiskEstimate"][0]["representative"], 61.5);
    assert_eq!(mapping["x"][0]["representative"], 2.0);
    assert_eq!(mapping["x"][1]["representative"], 5.0);

    let spec = write(dir.path(), "one.json", r#"{"x":{"equidepth":1}}"#);
    assert!(ce(dir.path(), &["bucketize", "--data", &data, "--spec", &spec, "--out", "c.csv"]).status.success());
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",3.5")));

    let bad = write(dir.path(), "bad.json", r#"{"ExternalRiskEstimate":{"ranges":[[0,63]],"specials":[]}}"#);
    let out = ce(dir.path(), &["bucketize", "--data", &data, "--spec", &bad, "--out", "e.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ExternalRiskEstimate"));
}

#[test]
fn sensitivity_reports_each_k() {
    let dir = TempDir::new().unwrap();
    let out = ce(dir.path(), &["sensitivity", "--data", &data(), "--model", &model(), "--score", "shap", "--ks", "1,3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["distribution"]["⊥"], v["entities"]);
}
