//! Runs the binary against the cricket fixture and a small synthetic set.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_entity-profile"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/cricket").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn cricket_args<'a>(schema: &'a str, records: &'a str) -> Vec<&'a str> {
    vec!["--schema", schema, "--records", records]
}

#[test]
fn validate_accepts_fixture_and_rejects_bad_rows() {
    let (schema, records, queries, truth) = (
        fixture("schema.txt"),
        fixture("records.csv"),
        fixture("queries.csv"),
        fixture("truth.csv"),
    );
    let mut args = vec!["validate"];
    args.extend(cricket_args(path(&schema), path(&records)));
    args.extend(["--queries", path(&queries), "--truth", path(&truth)]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("10 records, 4 sources, 3 queries"));

    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("records.csv");
    fs::write(&bad, "record_id,source,entity_id,Name,Matches,Runs,Highest\nr1,s1,c1,X,many,1,2\n").unwrap();
    let out = run(&["validate", "--schema", path(&schema), "--records", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_file_is_exit_two() {
    let out = run(&["validate", "--schema", "/nonexistent/schema.txt", "--records", "/nonexistent/r.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simmatrix_has_unit_diagonal() {
    let dir = TempDir::new().unwrap();
    let (schema, records, emb) = (fixture("schema.txt"), fixture("records.csv"), fixture("embeddings.txt"));
    let out = run(&[
        "simmatrix", "--schema", path(&schema), "--records", path(&records),
        "--embeddings", path(&emb), "--out", path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("matrix.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 5);
        assert_eq!(row[i + 1].parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn rate_picks_most_trustworthy_source() {
    let dir = TempDir::new().unwrap();
    let matrix = fixture("matrix.csv");
    let out = run(&[
        "rate", "--matrix", path(&matrix), "--biased-source", "s2", "--bias-value", "2",
        "--out", path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("most trustworthy source: s4"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("ratings.json")).unwrap()).unwrap();
    assert_eq!(json["ratings"]["ratings"][1].as_f64(), Some(2.0));

    let out = run(&["rate", "--matrix", path(&matrix), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2), "no rating mode given");
}

#[test]
fn oracle_profile_reproduces_ground_truth() {
    let dir = TempDir::new().unwrap();
    let files = ["schema.txt", "records.csv", "queries.csv", "embeddings.txt", "matrix.csv"].map(fixture);
    let out = run(&[
        "profile", "--schema", path(&files[0]), "--records", path(&files[1]),
        "--queries", path(&files[2]), "--embeddings", path(&files[3]), "--matrix", path(&files[4]),
        "--oracle", "--biased-source", "s2", "--bias-value", "2", "--out", path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let profiles = fs::read_to_string(dir.path().join("profiles.csv")).unwrap();
    let truth = fs::read_to_string(fixture("truth.csv")).unwrap();
    for (p, t) in profiles.lines().skip(1).zip(truth.lines().skip(1)) {
        assert_eq!(p, format!("{t},true"));
    }
    assert!(dir.path().join("traces.json").exists());
}

#[test]
fn synthetic_train_profile_evaluate_ttest() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("data");
    let out = run(&[
        "corrupt", "--synthetic", "30", "--sources", "3", "--error-rate", "0.1",
        "--ambiguity-rate", "0.3", "--filled", "4", "--seed", "9", "--out", path(&data),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let f = |n: &str| data.join(n);
    let (schema, records, queries, truth) = (f("schema.txt"), f("records.csv"), f("queries.csv"), f("truth.csv"));
    let base = [
        "--schema", path(&schema), "--records", path(&records),
        "--queries", path(&queries), "--truth", path(&truth),
    ];

    let model_dir = dir.path().join("model");
    let mut args = vec!["train"];
    args.extend(base);
    args.extend(["--classifier", "tree", "--seed", "1", "--out", path(&model_dir)]);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let model = model_dir.join("model.json");
    assert!(model.exists() && model_dir.join("metrics.json").exists());

    let select_dir = dir.path().join("select");
    let mut args = vec!["select-model"];
    args.extend(base);
    args.extend(["--seed", "1", "--out", path(&select_dir)]);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("best: "));

    let prof_dir = dir.path().join("profiles");
    let mut args = vec!["profile"];
    args.extend(base);
    args.extend(["--model", path(&model), "--uniform-ratings", "--out", path(&prof_dir)]);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let profiles = fs::read_to_string(prof_dir.join("profiles.csv")).unwrap();
    assert_eq!(profiles.lines().count(), 31);

    let mut reports = Vec::new();
    for (name, ratings) in [("biased", &["--biased-source", "s1", "--bias-value", "2"][..]), ("uniform", &["--uniform-ratings"][..])] {
        let out_dir = dir.path().join(name);
        let mut args = vec!["evaluate"];
        args.extend(base);
        args.extend(ratings);
        args.extend(["--seed", "2", "--out", path(&out_dir)]);
        let out = run(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        reports.push(out_dir.join("report.json"));
    }

    let tt = dir.path().join("ttest.json");
    let out = run(&["ttest", path(&reports[0]), path(&reports[1]), "--out", path(&tt)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(&tt).unwrap()).unwrap();
    assert_eq!(rows.as_array().map(Vec::len), Some(3));
}

#[test]
fn corrupt_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let (schema, records) = (fixture("schema.txt"), fixture("records.csv"));
    let mut outputs = Vec::new();
    for run_id in ["a", "b"] {
        let out_dir = dir.path().join(run_id);
        let out = run(&[
            "corrupt", "--schema", path(&schema), "--records", path(&records),
            "--error-rate", "0.3", "--ambiguity-rate", "0.5", "--seed", "4", "--out", path(&out_dir),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(fs::read(out_dir.join("records.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_ne!(outputs[0], fs::read(&records).unwrap());

    let out = run(&["corrupt", "--synthetic", "5", "--error-rate", "1.5", "--seed", "1", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}
