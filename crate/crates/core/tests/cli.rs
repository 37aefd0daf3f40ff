use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn bundled_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join("mock.json")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(path: &Path) -> usize {
    let text = std::fs::read_to_string(path).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    rdr.records().count()
}

#[test]
fn bundled_config_produces_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = forge(&["run", bundled_config().to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in [
        "stats.json",
        "queries.csv",
        "queries.json",
        "generation.json",
        "labels.csv",
        "labels.json",
        "plans.csv",
        "run.log",
        "reports/diversity.json",
        "reports/diversity.txt",
        "reports/selectivity.json",
        "reports/timing.json",
    ] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    assert_eq!(data_rows(&dir.path().join("queries.csv")), 100);
    assert_eq!(data_rows(&dir.path().join("labels.csv")), 100);
    let head = std::fs::read_to_string(dir.path().join("plans.csv")).unwrap();
    assert!(head.starts_with("# seed=42\n"));
}

#[test]
fn reruns_with_the_same_seed_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = forge(&["run", bundled_config().to_str().unwrap(), "--out", d.path().to_str().unwrap(), "--seed", "9"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for f in ["queries.csv", "labels.csv", "plans.csv", "label_failures.csv", "plan_failures.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}

#[test]
fn stages_compose_to_the_full_run() {
    let full = tempfile::tempdir().unwrap();
    let staged = tempfile::tempdir().unwrap();
    let cfg = bundled_config();
    let cfg = cfg.to_str().unwrap();
    let o = forge(&["run", cfg, "--out", full.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for stage in ["stats", "generate", "label", "plans", "report"] {
        let o = forge(&[stage, "--config", cfg, "--out", staged.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{stage}: {}", stderr(&o));
    }
    for f in ["queries.csv", "labels.csv", "plans.csv"] {
        assert!(
            std::fs::read(full.path().join(f)).unwrap() == std::fs::read(staged.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn missing_data_dir_is_named_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"data_dir": "no_such_data", "requests": [{"intent": "schema_aware", "n": 5}]}"#).unwrap();
    let o = forge(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no_such_data"), "{}", stderr(&o));
}

#[test]
fn malformed_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"data_dir": "#).unwrap();
    let o = forge(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("config error"));
}

#[test]
fn report_without_labels_names_the_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(forge(&["stats", "--out", out]).status.code(), Some(0));
    assert_eq!(forge(&["generate", "--n", "10", "--out", out]).status.code(), Some(0));
    let o = forge(&["report", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing upstream artifact"));
    assert!(stderr(&o).contains("labels.json"));
}

#[test]
fn generate_without_stats_names_the_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = forge(&["generate", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stats.json"));
}

#[test]
fn generate_n_produces_that_many_queries() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(forge(&["stats", "--out", out]).status.code(), Some(0));
    let o = forge(&["generate", "--n", "100", "--provider", "mock", "--out", out, "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(data_rows(&dir.path().join("queries.csv")), 100);
}

#[test]
fn label_reads_a_hand_written_query_file() {
    let dir = tempfile::tempdir().unwrap();
    let sql = dir.path().join("mine.sql");
    std::fs::write(
        &sql,
        "SELECT * FROM kind_type;\nSELECT * FROM title t, kind_type k WHERE t.kind_id = k.id AND k.id = 1;\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = forge(&["label", "--queries", sql.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("labels.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    // Full scan of a table: selectivity exactly 1.
    assert_eq!(&rows[0][5], "1.0");
}

#[test]
fn failing_queries_give_a_partial_exit() {
    let dir = tempfile::tempdir().unwrap();
    let sql = dir.path().join("mixed.sql");
    // The second query names a column the data does not have.
    std::fs::write(&sql, "SELECT * FROM kind_type;\nSELECT * FROM kind_type WHERE nope = 1;\n").unwrap();
    let out = dir.path().join("out");
    let o = forge(&["label", "--queries", sql.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert_eq!(data_rows(&out.join("labels.csv")), 1);
    assert_eq!(data_rows(&out.join("label_failures.csv")), 1);
}
