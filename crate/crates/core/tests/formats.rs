//! Files in the layout written by the embedding exporter.

use std::path::Path;

use slangchoice::embedding::{norm, sentence_embedding, EmbeddingStore, SenseTable};
use slangchoice::lexicon::{default_stopwords, ingest, read_raw_records};
use slangchoice::priors::LmScoreTable;

const SLANG: &str = r#"{"id": "s1", "word": "salty", "definition": "bitter or upset after losing", "pos": "adjective", "decade": 2000}
{"id": "s2", "word": "ghost", "definition": "abruptly stop replying to someone", "pos": "verb"}
{"id": "s3", "word": "lamp", "definition": "relax lazily at home", "pos": "verb"}
"#;

const CONVENTIONAL: &str = r#"{"id": "c1", "word": "salty", "definition": "containing salt", "pos": "adjective"}
{"id": "c2", "word": "ghost", "definition": "spirit of a dead person", "pos": "noun"}
{"id": "c3", "word": "lamp", "definition": "device giving light", "pos": "noun"}
"#;

const VECTORS: &str = "# exported sentence vectors\n# encoder example-encoder\ndim 3 count 9\n\
s1\t0.1 0.2 0.3\n\
s2\t-0.5 0.1 0.0\n\
s3\t0.2 0.2 0.2\n\
c1\t0.9 0.1 -0.2\n\
c2\t0.0 1.0 0.5\n\
c3\t0.3 -0.3 0.8\n\
salty\t1 0 0\n\
ghost\t0 1 0\n\
lamp\t0 0 2\n";

const LM: &str = "# masked language model scores\nalpha 0.001\n\
s1\tsalty\t0.02\n\
s1\tlamp\t0.001\n\
s2\tghost\t0.015\n";

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn exporter_files_load_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let (slang, bad_s) = read_raw_records(&write(dir.path(), "slang.jsonl", SLANG)).unwrap();
    let (conv, bad_c) = read_raw_records(&write(dir.path(), "conv.jsonl", CONVENTIONAL)).unwrap();
    assert!(bad_s.is_empty() && bad_c.is_empty());
    let ingested = ingest(&slang, &conv, &Default::default()).unwrap();
    assert!(ingested.rejections.is_empty(), "{:?}", ingested.rejections);
    let lex = ingested.lexicon;

    let store = EmbeddingStore::read(&write(dir.path(), "vectors.txt", VECTORS)).unwrap();
    assert_eq!((store.dim(), store.len()), (3, 9));
    let table = SenseTable::build(&lex, &store, &default_stopwords());
    assert!(table.excluded.is_empty(), "{:?}", table.excluded);
    assert_eq!(table.get("s2").unwrap(), &[-0.5, 0.1, 0.0]);

    let lm = LmScoreTable::read(&write(dir.path(), "lm.tsv", LM)).unwrap();
    assert_eq!(lm.len(), 3);
    assert_eq!(lm.validate(&lex), Vec::<String>::new());
}

#[test]
fn mismatched_vector_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = VECTORS.replace("count 9", "count 10");
    assert!(EmbeddingStore::read(&write(dir.path(), "v.txt", &text)).is_err());
    let text = VECTORS.replace("s1\t0.1 0.2 0.3", "s1\t0.1 0.2");
    assert!(EmbeddingStore::read(&write(dir.path(), "v.txt", &text)).is_err());
}

#[test]
fn one_word_definition_pools_to_normalized_word_vector() {
    let dir = tempfile::tempdir().unwrap();
    let store = EmbeddingStore::read(&write(dir.path(), "vectors.txt", VECTORS)).unwrap();
    let v = sentence_embedding("lamp", &store, &default_stopwords()).unwrap();
    let raw = store.get("lamp").unwrap();
    let n = norm(raw);
    let expected: Vec<f64> = raw.iter().map(|x| x / n).collect();
    assert_eq!(v.vector, expected);
    assert!(!v.degenerate);
}

#[test]
fn lm_table_round_trips_and_flags_unknown_rows() {
    let dir = tempfile::tempdir().unwrap();
    let lm = LmScoreTable::read(&write(dir.path(), "lm.tsv", LM)).unwrap();
    let out = dir.path().join("copy.tsv");
    lm.write(&out, "# copy\n").unwrap();
    let again = LmScoreTable::read(&out).unwrap();
    assert_eq!(again.score("s1", "salty"), lm.score("s1", "salty"));
    assert_eq!(again.len(), lm.len());

    let (slang, _) = read_raw_records(&write(dir.path(), "slang.jsonl", SLANG)).unwrap();
    let (conv, _) = read_raw_records(&write(dir.path(), "conv.jsonl", CONVENTIONAL)).unwrap();
    let lex = ingest(&slang, &conv, &Default::default()).unwrap().lexicon;
    let extra = LmScoreTable::read(&write(dir.path(), "lm2.tsv", &format!("{LM}s9\tlamp\t0.1\ns1\tzebra\t0.1\n")))
        .unwrap();
    assert_eq!(extra.validate(&lex).len(), 2);
}
