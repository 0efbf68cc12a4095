use std::path::Path;
use std::process::{Command, Output};

fn slangchoice(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slangchoice"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn missing_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&slangchoice(dir.path(), &["ingest"])), 1);
    assert_eq!(code(&slangchoice(dir.path(), &["--synthetic", "nonsense"])), 1);
    assert_eq!(code(&slangchoice(dir.path(), &["--help"])), 0);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.ini"), "seed = 1\n[model]\nkernel_width = 2\n").unwrap();
    let o = slangchoice(dir.path(), &["--config", "bad.ini", "ingest"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("kernel_width"));
}

#[test]
fn missing_artifact_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = slangchoice(dir.path(), &["--synthetic", "-o", "out", "eval"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn baseline_models_run_without_an_encoder() {
    let dir = tempfile::tempdir().unwrap();
    let o = slangchoice(dir.path(), &["--synthetic", "-o", "gen", "ingest"]);
    assert_eq!(code(&o), 0);
    let cfg = "seed = 3\n\
        [paths]\n\
        slang = gen/synthetic/slang.jsonl\n\
        conventional = gen/synthetic/conventional.jsonl\n\
        vectors = gen/synthetic/vectors.txt\n\
        lm_scores = gen/synthetic/lm_scores.tsv\n\
        output = out\n\
        [model]\n\
        models = prior@lcp, baseline:proto+cf\n";
    std::fs::write(dir.path().join("baseline.ini"), cfg).unwrap();
    let o = slangchoice(dir.path(), &["--config", "baseline.ini", "all"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    assert!(!out.join("encoder.txt").exists());
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(results.starts_with("# slangchoice "));
    assert!(results.contains("# config sha256:"));
    let rows: Vec<&str> = results.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3, "{results}");
    assert!(rows[0].starts_with("model,"));

    // an encoder-based analysis needs the missing encoder
    let o = slangchoice(dir.path(), &["--config", "baseline.ini", "analyze", "distance"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn config_hash_ignores_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        assert_eq!(code(&slangchoice(dir.path(), &["--synthetic", "-o", out, "ingest"])), 0);
    }
    let read = |d: &str| std::fs::read_to_string(dir.path().join(d).join("lexicon.jsonl")).unwrap();
    assert_eq!(read("a"), read("b"));
}
