//! C interface. Objects are opaque handles created by `sc_*_read` or
//! `sc_*_open` and released with the matching `sc_*_free`. Every fallible
//! call returns an [`ScStatus`]; on failure [`sc_last_error`] describes it.
//!
//! Strings are copied into caller buffers with a terminating NUL. When the
//! buffer is too small the call returns `SC_STATUS_BUFFER_TOO_SMALL` and
//! stores the required size, NUL included, in `needed`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use slangchoice::cli::{open_model, SYNTHETIC_CONFIG};
use slangchoice::config::ExperimentConfig;
use slangchoice::embedding::EmbeddingStore;
use slangchoice::lexicon::{read_lexicon, Lexicon};
use slangchoice::pipeline::{FittedModel, ModelSpec, Resources};
use slangchoice::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Data = 4,
    Io = 5,
    Numerical = 6,
    BufferTooSmall = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// A filtered lexicon read from `lexicon.jsonl`.
pub struct ScLexicon(Lexicon);

/// Vectors in the `dim <d> count <n>` text format.
pub struct ScStore(EmbeddingStore);

/// A fitted model together with the resources it scores against.
pub struct ScModel {
    res: Resources,
    model: FittedModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(ScStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Config { .. } => ScStatus::Config,
            Error::Numerical(_) => ScStatus::Numerical,
            Error::Io { .. } => ScStatus::Io,
            _ => ScStatus::Data,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: ScStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Runs `f`, recording its error and catching panics.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ScStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ScStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ScStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(ScStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(ScStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(ScStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(ScStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn copy_str(s: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> Result<(), Failure> {
    let n = s.len() + 1;
    if !needed.is_null() {
        *needed = n;
    }
    if cap < n {
        return Err(fail(ScStatus::BufferTooSmall, format!("buffer needs {n} bytes, got {cap}")));
    }
    if buf.is_null() {
        return Err(fail(ScStatus::NullPointer, "`buf` is null"));
    }
    std::ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

fn indexed<T>(items: &[T], i: usize) -> Result<&T, Failure> {
    items
        .get(i)
        .ok_or_else(|| fail(ScStatus::OutOfRange, format!("index {i} out of range 0..{}", items.len())))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_lexicon_read(path: *const c_char, out: *mut *mut ScLexicon) -> ScStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_ptr(out, "out")?;
        let lex = read_lexicon(Path::new(path))?;
        *out = Box::into_raw(Box::new(ScLexicon(lex)));
        Ok(())
    })
}

/// # Safety
/// `lex` must come from [`sc_lexicon_read`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sc_lexicon_free(lex: *mut ScLexicon) {
    if !lex.is_null() {
        drop(Box::from_raw(lex));
    }
}

/// Number of candidate words.
///
/// # Safety
/// `lex` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_lexicon_vocabulary_len(lex: *const ScLexicon, out: *mut usize) -> ScStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(lex, "lex")?.0.vocabulary().len();
        Ok(())
    })
}

/// Number of slang senses.
///
/// # Safety
/// `lex` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_lexicon_slang_len(lex: *const ScLexicon, out: *mut usize) -> ScStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(lex, "lex")?.0.slang().len();
        Ok(())
    })
}

/// Copies candidate word `i` into `buf`.
///
/// # Safety
/// `lex` must be a live handle; `buf` must hold `cap` bytes; `needed` may
/// be null.
#[no_mangle]
pub unsafe extern "C" fn sc_lexicon_word(
    lex: *const ScLexicon,
    i: usize,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> ScStatus {
    guard(|| {
        let lex = handle(lex, "lex")?;
        copy_str(indexed(lex.0.vocabulary(), i)?, buf, cap, needed)
    })
}

/// Copies the id of slang sense `i` into `buf`.
///
/// # Safety
/// As for [`sc_lexicon_word`].
#[no_mangle]
pub unsafe extern "C" fn sc_lexicon_slang_id(
    lex: *const ScLexicon,
    i: usize,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> ScStatus {
    guard(|| {
        let lex = handle(lex, "lex")?;
        copy_str(&indexed(lex.0.slang(), i)?.id, buf, cap, needed)
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_store_read(path: *const c_char, out: *mut *mut ScStore) -> ScStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_ptr(out, "out")?;
        let store = EmbeddingStore::read(Path::new(path))?;
        *out = Box::into_raw(Box::new(ScStore(store)));
        Ok(())
    })
}

/// # Safety
/// `store` must come from [`sc_store_read`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sc_store_free(store: *mut ScStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Vector dimension and number of rows.
///
/// # Safety
/// `store` must be a live handle; `dim` and `len` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sc_store_shape(store: *const ScStore, dim: *mut usize, len: *mut usize) -> ScStatus {
    guard(|| {
        let store = handle(store, "store")?;
        *out_ptr(dim, "dim")? = store.0.dim();
        *out_ptr(len, "len")? = store.0.len();
        Ok(())
    })
}

/// Copies the vector stored under `id` into `out`, which must hold
/// `cap >= dim` values.
///
/// # Safety
/// `store` must be a live handle, `id` NUL-terminated, `out` valid for
/// `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn sc_store_get(
    store: *const ScStore,
    id: *const c_char,
    out: *mut f64,
    cap: usize,
) -> ScStatus {
    guard(|| {
        let store = handle(store, "store")?;
        let id = str_arg(id, "id")?;
        let v = store
            .0
            .get(id)
            .ok_or_else(|| fail(ScStatus::Data, format!("`{id}` is not in the store")))?;
        if cap < v.len() {
            return Err(fail(ScStatus::BufferTooSmall, format!("need {} values", v.len())));
        }
        out_ptr(out, "out")?;
        std::ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
        Ok(())
    })
}

/// Opens model `spec` (for example `cse:proto+cf@ssp`) from a finished
/// run. `config_path` null selects the built-in synthetic configuration;
/// `output_dir`, when not null, overrides the configured output directory.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sc_model_open(
    config_path: *const c_char,
    output_dir: *const c_char,
    spec: *const c_char,
    out: *mut *mut ScModel,
) -> ScStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let synthetic = config_path.is_null();
        let mut cfg = if synthetic {
            ExperimentConfig::parse_str(SYNTHETIC_CONFIG, Path::new("."))?
        } else {
            ExperimentConfig::load(Path::new(str_arg(config_path, "config_path")?))?
        };
        if !output_dir.is_null() {
            cfg.paths.output = str_arg(output_dir, "output_dir")?.into();
        }
        let spec: ModelSpec = str_arg(spec, "spec")?.parse()?;
        let (res, model) = open_model(cfg, spec, synthetic)?;
        *out = Box::into_raw(Box::new(ScModel { res, model }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`sc_model_open`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sc_model_free(model: *mut ScModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of candidate words, which is the length of every posterior.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_model_vocabulary_len(model: *const ScModel, out: *mut usize) -> ScStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(model, "model")?.res.lex.vocabulary().len();
        Ok(())
    })
}

/// Copies candidate word `i` into `buf`.
///
/// # Safety
/// As for [`sc_lexicon_word`].
#[no_mangle]
pub unsafe extern "C" fn sc_model_word(
    model: *const ScModel,
    i: usize,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> ScStatus {
    guard(|| {
        let model = handle(model, "model")?;
        copy_str(indexed(model.res.lex.vocabulary(), i)?, buf, cap, needed)
    })
}

/// Fitted kernel widths.
///
/// # Safety
/// `model` must be a live handle; `h_s` and `h_cf` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sc_model_kernels(model: *const ScModel, h_s: *mut f64, h_cf: *mut f64) -> ScStatus {
    guard(|| {
        let k = handle(model, "model")?.model.kernels;
        *out_ptr(h_s, "h_s")? = k.h_s;
        *out_ptr(h_cf, "h_cf")? = k.h_cf;
        Ok(())
    })
}

/// Posterior over the candidate words for slang sense `sense_id`, written
/// in vocabulary order into `probs`, which must hold the vocabulary size.
///
/// # Safety
/// `model` must be a live handle, `sense_id` NUL-terminated and `probs`
/// valid for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn sc_model_posterior(
    model: *const ScModel,
    sense_id: *const c_char,
    probs: *mut f64,
    cap: usize,
) -> ScStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let id = str_arg(sense_id, "sense_id")?;
        let v = m.res.lex.vocabulary().len();
        if cap < v {
            return Err(fail(ScStatus::BufferTooSmall, format!("need {v} values")));
        }
        out_ptr(probs, "probs")?;
        let post = m.model.posterior(&m.res, id)?;
        std::ptr::copy_nonoverlapping(post.probs.as_ptr(), probs, v);
        Ok(())
    })
}

/// AUC in percent of `n` one-based ranks over a vocabulary of `vocab_size`.
///
/// # Safety
/// `ranks` must be valid for `n` values and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_auc(ranks: *const usize, n: usize, vocab_size: usize, out: *mut f64) -> ScStatus {
    guard(|| {
        if ranks.is_null() {
            return Err(fail(ScStatus::NullPointer, "`ranks` is null"));
        }
        let ranks = std::slice::from_raw_parts(ranks, n);
        *out_ptr(out, "out")? = slangchoice::eval::auc(ranks, vocab_size)?;
        Ok(())
    })
}
