use std::path::Path;
use std::process::{Command, Output};

fn dirquant(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirquant"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn blobs_csv() -> String {
    let mut s = String::from("a,b,label\n");
    for i in 0..15 {
        let t = i as f64 * 0.07;
        s.push_str(&format!("{},{},1\n", t, 1.0 - t));
        s.push_str(&format!("{},{},2\n", 8.0 + t, 9.0 - t));
    }
    s
}

fn labels_of(csv: &str) -> Vec<String> {
    csv.lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_string())
        .collect()
}

#[test]
fn train_then_predict_recovers_training_labels() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blobs.csv"), blobs_csv()).unwrap();
    for classifier in ["dqc", "centroid", "median", "cqc"] {
        let out = dirquant(
            &["train", "--data", "blobs.csv", "--classifier", classifier, "--seed", "3", "--out", "model.json"],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let out = dirquant(
            &["predict", "--model", "model.json", "--data", "blobs.csv", "--out", "pred.csv"],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let pred = std::fs::read_to_string(dir.path().join("pred.csv")).unwrap();
        assert!(pred.starts_with("label\n"));
        assert_eq!(pred.lines().skip(1).collect::<Vec<_>>(), labels_of(&blobs_csv()));
    }
}

#[test]
fn simulate_is_byte_identical_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let out = dirquant(
            &["simulate", "--scenario", "1", "--n", "40", "--p", "5", "--seed", "11", "--out", name],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["train.csv", "test.csv"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("# scenario=1 n=40 p=5"));
        assert!(text.contains("seed=11"));
        assert_eq!(text.lines().count(), 2 + 40);
    }
}

#[test]
fn malformed_inputs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "a,label\n1.0,1\nx,2\n").unwrap();
    std::fs::write(dir.path().join("nolabel.csv"), "a,b\n1,2\n3,4\n").unwrap();
    let out = dirquant(&["train", "--data", "bad.csv", "--out", "m.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-numeric"));
    let out = dirquant(&["train", "--data", "nolabel.csv", "--out", "m.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing label column"));
    assert!(!dir.path().join("m.json").exists());
    let out = dirquant(&["benchmark", "--scenario", "7"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = dirquant(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn predict_with_wrong_dimension_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blobs.csv"), blobs_csv()).unwrap();
    std::fs::write(dir.path().join("wide.csv"), "a,b,c\n1,2,3\n").unwrap();
    let out = dirquant(
        &["train", "--data", "blobs.csv", "--classifier", "centroid", "--out", "model.json"],
        dir.path(),
    );
    assert!(out.status.success());
    let out = dirquant(
        &["predict", "--model", "model.json", "--data", "wide.csv", "--out", "pred.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension mismatch"));
    assert!(!dir.path().join("pred.csv").exists());
}

#[test]
fn theory_curve_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dirquant(
        &["theory-curve", "--dist-a", "uniform:0,1", "--dist-b", "uniform:0.5,1.5", "--grid-size", "9", "--out", "psi.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("psi.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta,psi");
    assert_eq!(lines.len(), 10);
    assert!(String::from_utf8_lossy(&out.stderr).contains("psi = 0.75"));
}

#[test]
fn augment_and_loo() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blobs.csv"), blobs_csv()).unwrap();
    let out = dirquant(
        &["augment", "--data", "blobs.csv", "--extra", "45", "--seed", "2", "--out", "wide.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let wide = std::fs::read_to_string(dir.path().join("wide.csv")).unwrap();
    let header = wide.lines().nth(1).unwrap();
    assert_eq!(header.split(',').count(), 48);
    assert!(header.ends_with(",label"));
    assert_eq!(labels_of(&wide)[1..], labels_of(&blobs_csv())[..]);

    let out = dirquant(
        &["loo", "--data", "blobs.csv", "--classifiers", "centroid,median"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("centroid,0\n"));
    assert!(text.contains("median,0\n"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "scenario = 0\nn = 20\np = \"3\"\nreps = 2\nseed = 4\nclassifiers = \"centroid,median\"\n",
    )
    .unwrap();
    let out = dirquant(&["benchmark", "--config", "run.toml", "--out", "r.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(report.starts_with("# scenario=0 n=20 p=3"));
    assert!(report.contains("seed=4"));
    assert!(report.contains("centroid,1,0,ok"));

    let out = dirquant(
        &["benchmark", "--config", "run.toml", "--seed", "9", "--out", "r.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let report = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(report.contains("seed=9"));
}
