use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use slangchoice_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = sc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

/// A finished baseline run in `dir/out`, driven through the CLI entry point.
fn finished_run(dir: &Path) -> CString {
    let cfg = dir.join("run.ini");
    std::fs::write(
        &cfg,
        "seed = 4\n[paths]\n\
         slang = out/synthetic/slang.jsonl\n\
         conventional = out/synthetic/conventional.jsonl\n\
         vectors = out/synthetic/vectors.txt\n\
         lm_scores = out/synthetic/lm_scores.tsv\n\
         output = out\n\
         [model]\nmodels = prior@lcp, baseline:proto+cf\n\
         [synthetic]\nwords = 20\n",
    )
    .unwrap();
    let path = cfg.to_str().unwrap();
    let code = slangchoice::cli::main_with_args(["slangchoice", "--config", path, "--synthetic", "all"]);
    assert_eq!(code, 0);
    cstr(path)
}

#[test]
fn lexicon_and_model_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = finished_run(dir.path());
    unsafe {
        let mut lex: *mut ScLexicon = ptr::null_mut();
        let path = cstr(dir.path().join("out/lexicon.jsonl").to_str().unwrap());
        assert_eq!(sc_lexicon_read(path.as_ptr(), &mut lex), ScStatus::Ok);
        let mut v = 0usize;
        assert_eq!(sc_lexicon_vocabulary_len(lex, &mut v), ScStatus::Ok);
        assert_eq!(v, 20);
        let mut n_slang = 0usize;
        assert_eq!(sc_lexicon_slang_len(lex, &mut n_slang), ScStatus::Ok);
        assert!(n_slang > 0);

        let mut needed = 0usize;
        let mut tiny = [0 as c_char; 1];
        assert_eq!(
            sc_lexicon_slang_id(lex, 0, tiny.as_mut_ptr(), 1, &mut needed),
            ScStatus::BufferTooSmall
        );
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(sc_lexicon_slang_id(lex, 0, buf.as_mut_ptr(), needed, ptr::null_mut()), ScStatus::Ok);
        let sense_id = CStr::from_ptr(buf.as_ptr()).to_owned();
        assert_eq!(sc_lexicon_word(lex, v, buf.as_mut_ptr(), needed, ptr::null_mut()), ScStatus::OutOfRange);

        let mut model: *mut ScModel = ptr::null_mut();
        let spec = cstr("baseline:proto+cf");
        let status = sc_model_open(cfg.as_ptr(), ptr::null(), spec.as_ptr(), &mut model);
        assert_eq!(status, ScStatus::Ok, "{}", last_error());
        let (mut h_s, mut h_cf) = (0.0, 0.0);
        assert_eq!(sc_model_kernels(model, &mut h_s, &mut h_cf), ScStatus::Ok);
        assert!(h_s > 0.0 && h_cf > 0.0);
        let mut probs = vec![0.0; v];
        assert_eq!(
            sc_model_posterior(model, sense_id.as_ptr(), probs.as_mut_ptr(), v - 1),
            ScStatus::BufferTooSmall
        );
        assert_eq!(sc_model_posterior(model, sense_id.as_ptr(), probs.as_mut_ptr(), v), ScStatus::Ok);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let unknown = cstr("no-such-sense");
        assert_eq!(sc_model_posterior(model, unknown.as_ptr(), probs.as_mut_ptr(), v), ScStatus::Data);

        let missing = cstr("cse:1nn");
        let mut other: *mut ScModel = ptr::null_mut();
        assert_ne!(sc_model_open(cfg.as_ptr(), ptr::null(), missing.as_ptr(), &mut other), ScStatus::Ok);
        assert!(other.is_null());
        let bad = cstr("cse:softmax");
        assert_eq!(sc_model_open(cfg.as_ptr(), ptr::null(), bad.as_ptr(), &mut other), ScStatus::Config);

        sc_model_free(model);
        sc_lexicon_free(lex);
    }
}

#[test]
fn store_reads_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.txt");
    std::fs::write(&path, "dim 2 count 2\na\t1 2\nb\t3 4\n").unwrap();
    let path = cstr(path.to_str().unwrap());
    unsafe {
        let mut store: *mut ScStore = ptr::null_mut();
        assert_eq!(sc_store_read(path.as_ptr(), &mut store), ScStatus::Ok);
        let (mut dim, mut len) = (0, 0);
        assert_eq!(sc_store_shape(store, &mut dim, &mut len), ScStatus::Ok);
        assert_eq!((dim, len), (2, 2));
        let mut out = [0.0; 2];
        let b = cstr("b");
        assert_eq!(sc_store_get(store, b.as_ptr(), out.as_mut_ptr(), 2), ScStatus::Ok);
        assert_eq!(out, [3.0, 4.0]);
        let z = cstr("z");
        assert_eq!(sc_store_get(store, z.as_ptr(), out.as_mut_ptr(), 2), ScStatus::Data);
        assert!(last_error().contains('z'));
        sc_store_free(store);
    }
}

#[test]
fn null_arguments_are_reported() {
    unsafe {
        let mut lex: *mut ScLexicon = ptr::null_mut();
        assert_eq!(sc_lexicon_read(ptr::null(), &mut lex), ScStatus::NullPointer);
        assert!(last_error().contains("path"));
        let mut v = 0;
        assert_eq!(sc_lexicon_vocabulary_len(ptr::null(), &mut v), ScStatus::NullPointer);
        let mut auc = 0.0;
        assert_eq!(sc_auc(ptr::null(), 0, 3, &mut auc), ScStatus::NullPointer);
        let ranks = [1usize, 4];
        assert_eq!(sc_auc(ranks.as_ptr(), 2, 3, &mut auc), ScStatus::Data);
        sc_lexicon_free(ptr::null_mut());
        sc_model_free(ptr::null_mut());
        sc_store_free(ptr::null_mut());
    }
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(manifest.join("include/slangchoice.h")).unwrap();
    for f in ["sc_last_error", "sc_model_open", "sc_model_posterior", "sc_store_get", "sc_auc"] {
        assert!(header.contains(f), "{f} missing from header");
    }
    let exe_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = exe_dir.join("libslangchoice_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let out = std::process::Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = std::process::Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), env!("CARGO_PKG_VERSION"));
}
