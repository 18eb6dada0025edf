//! Drives the `skelhar` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn skelhar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skelhar"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_dataset(dir: &Path) -> PathBuf {
    let path = dir.join("data.csv");
    let out = skelhar(&[
        "synth",
        "--participants",
        "5",
        "--frames",
        "53",
        "--seed",
        "4",
        "-o",
        s(&path),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

#[test]
fn synth_requires_output_and_is_deterministic() {
    assert_eq!(
        skelhar(&["synth", "--participants", "2"]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let out = skelhar(&[
            "synth",
            "--noise",
            "0",
            "--participants",
            "16",
            "--frames",
            "60",
            "--seed",
            "42",
            "-o",
            s(p),
        ]);
        assert!(out.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    // header + 16 participants × 9 activities × 60 frames
    assert_eq!(text.lines().count(), 1 + 16 * 9 * 60);
}

#[test]
fn extract_row_and_column_counts() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_dataset(dir.path());
    let out_path = dir.path().join("features.csv");
    for (modality, rows) in [("coordinates", 5 * 9 * 51), ("velocity", 5 * 9 * 50)] {
        let out = skelhar(&[
            "extract",
            s(&data),
            "--modality",
            modality,
            "-o",
            s(&out_path),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let text = std::fs::read_to_string(&out_path).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), 82);
        assert_eq!((header[0], header[80], header[81]), ("f0", "f80", "label"));
        assert_eq!(lines.count(), rows);
    }
}

#[test]
fn bad_arguments_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_dataset(dir.path());
    let out = skelhar(&[
        "extract",
        s(&data),
        "--joints",
        "c10",
        "-o",
        s(&dir.path().join("f.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("{c9, c18, c28}"), "{err}");

    assert_eq!(
        skelhar(&["evaluate", s(&data), "--frobnicate", "-o", "x"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        skelhar(&[
            "evaluate",
            s(&data),
            "--classifier",
            "tree",
            "--k",
            "3",
            "-o",
            "x"
        ])
        .status
        .code(),
        Some(2)
    );
    let help = String::from_utf8_lossy(&skelhar(&["evaluate", "--help"]).stdout).into_owned();
    for flag in [
        "--modality",
        "--joints",
        "--dims",
        "--pca",
        "--pca-var",
        "--classifier",
        "--hidden",
        "--split",
        "--folds",
        "--stratify",
        "--seed",
        "--jobs",
        "--config",
        "--output",
    ] {
        assert!(help.contains(flag), "help lacks {flag}");
    }
}

#[test]
fn missing_dataset_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = skelhar(&[
        "evaluate",
        s(&dir.path().join("nope.csv")),
        "-o",
        s(&dir.path().join("b")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn evaluate_writes_bundle_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_dataset(dir.path());
    let cfg_file = dir.path().join("run.cfg");
    std::fs::write(
        &cfg_file,
        "classifier = mlp\nepochs = 3\nhidden = 20\njoints = c9\n",
    )
    .unwrap();
    let bundle = dir.path().join("bundle");
    let out = skelhar(&[
        "evaluate",
        s(&data),
        "--config",
        s(&cfg_file),
        "--hidden",
        "175",
        "--jobs",
        "2",
        "-o",
        s(&bundle),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let config: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(bundle.join("config.json")).unwrap())
            .unwrap();
    assert_eq!(config["classifier"]["model"]["family"], "mlp");
    assert_eq!(config["classifier"]["model"]["hidden_width"], 175);
    assert_eq!(config["classifier"]["model"]["epochs"], 3);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(bundle.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["feature_dim"], 24);
    assert!(
        report["cross_validation"]["fold_accuracies"]
            .as_array()
            .unwrap()
            .len()
            == 5
    );
    assert_eq!(report["validation"]["protocol"], "held-out validation");
    let confusion = std::fs::read_to_string(bundle.join("confusion.csv")).unwrap();
    assert_eq!(confusion.lines().count(), 10);
    assert!(bundle.join("model.json").is_file());
}

#[test]
fn default_knn_evaluation_is_accurate() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_dataset(dir.path());
    let bundle = dir.path().join("b");
    assert!(skelhar(&["evaluate", s(&data), "-o", s(&bundle)])
        .status
        .success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(bundle.join("report.json")).unwrap())
            .unwrap();
    assert!(report["validation"]["overall_accuracy"].as_f64().unwrap() >= 0.9);
}

#[test]
fn grid_tables_follow_declaration_order() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_dataset(dir.path());
    let table = dir.path().join("grid.csv");

    let out = skelhar(&[
        "grid",
        s(&data),
        "--modality",
        "coordinates,velocity,acceleration",
        "--classifier",
        "knn,tree",
        "--jobs",
        "3",
        "-o",
        s(&table),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&table).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 6);
    let keys: Vec<(&str, &str)> = rows.iter().map(|r| (r[0], r[4])).collect();
    assert_eq!(
        keys,
        [
            ("coordinates", "knn"),
            ("coordinates", "tree"),
            ("velocity", "knn"),
            ("velocity", "tree"),
            ("acceleration", "knn"),
            ("acceleration", "tree")
        ]
    );

    let out = skelhar(&[
        "grid",
        s(&data),
        "--joints",
        "c9,c18,c28",
        "--dims",
        "3,2",
        "--pca",
        "off,on",
        "--classifier",
        "knn",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().skip(1).collect();
    assert_eq!(lines.len(), 12);
    assert!(lines[0].starts_with("coordinates,\"c9\",3,off,knn,24,24,"));
    assert!(lines[11].starts_with("coordinates,\"c28\",2,on,knn,54,"));

    assert_eq!(
        skelhar(&["grid", s(&data), "--modality", ""]).status.code(),
        Some(2)
    );
    assert_eq!(
        skelhar(&["grid", s(&data), "--classifier", ",,"])
            .status
            .code(),
        Some(2)
    );
}
