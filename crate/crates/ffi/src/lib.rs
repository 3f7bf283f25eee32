//! C interface to statute generation, the ground-truth oracle, BLEU and the
//! accuracy statistics.
//!
//! Functions return an [`SbStatus`]; on failure [`sb_last_error`] describes
//! what went wrong on the calling thread. Strings handed out by the library
//! must be released with [`sb_string_free`], trees with [`sb_tree_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use statute_bench::oracle::{applies, render, sample_batch, Rendering, Target};
use statute_bench::statute::{generate_tree_seeded, parse_citation, DefTree, StatuteSpec, TermMode};
use statute_bench::stats::{wald_ci_half_width, welch_one_sided_p};
use statute_bench::usc::bleu::unpenalized_bleu;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    UnknownTerm = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbTermMode {
    Nonce = 0,
    Ids = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbRendering {
    Statute = 0,
    Sentences = 1,
}

/// Opaque statute tree.
pub struct SbTree(DefTree);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(SbStatus, String);

type FfiResult<T> = Result<T, Fail>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> SbStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SbStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SbStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(SbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(SbStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|_| Fail(SbStatus::InvalidArgument, "string contains NUL".into()))?;
    out.write(c.into_raw());
    Ok(())
}

unsafe fn tree_ref<'a>(tree: *const SbTree) -> FfiResult<&'a DefTree> {
    tree.as_ref().map(|t| &t.0).ok_or_else(|| null("tree"))
}

// Enums cross the boundary as plain integers so that out-of-range values are rejected rather than undefined.
fn term_mode(mode: u32) -> FfiResult<TermMode> {
    match mode {
        m if m == SbTermMode::Nonce as u32 => Ok(TermMode::Nonce),
        m if m == SbTermMode::Ids as u32 => Ok(TermMode::Ids),
        m => Err(invalid(format!("unknown term mode {m}"))),
    }
}

fn rendering(r: u32) -> FfiResult<Rendering> {
    match r {
        x if x == SbRendering::Statute as u32 => Ok(Rendering::Statute),
        x if x == SbRendering::Sentences as u32 => Ok(Rendering::Sentence),
        x => Err(invalid(format!("unknown rendering {x}"))),
    }
}

fn invalid(e: impl std::fmt::Display) -> Fail {
    Fail(SbStatus::InvalidArgument, e.to_string())
}

/// Message for the last failed call on this thread, or NULL. Owned by the
/// library and valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Generates the balanced tree for (`width`, `depth`, `mode`, `seed`); `mode` is an [`SbTermMode`].
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn sb_tree_generate(width: u32, depth: u32, mode: u32, seed: u64, out: *mut *mut SbTree) -> SbStatus {
    guard(|| {
        let spec = StatuteSpec::new(width as usize, depth as usize, term_mode(mode)?, seed).map_err(invalid)?;
        let tree = generate_tree_seeded(&spec).map_err(invalid)?;
        write_out(out, Box::into_raw(Box::new(SbTree(tree))), "out")
    })
}

/// Parses a tree from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sb_tree_from_json(json: *const c_char, out: *mut *mut SbTree) -> SbStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let tree: DefTree = serde_json::from_str(text).map_err(|e| Fail(SbStatus::Parse, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(SbTree(tree))), "out")
    })
}

/// # Safety
/// `tree` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn sb_tree_free(tree: *mut SbTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// # Safety
/// `tree` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sb_tree_to_json(tree: *const SbTree, out: *mut *mut c_char) -> SbStatus {
    guard(|| write_string(out, tree_ref(tree)?.to_json()))
}

/// # Safety
/// `tree` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sb_tree_render_statute(tree: *const SbTree, out: *mut *mut c_char) -> SbStatus {
    guard(|| write_string(out, render(tree_ref(tree)?, Rendering::Statute)))
}

/// # Safety
/// `tree` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sb_tree_render_sentences(tree: *const SbTree, out: *mut *mut c_char) -> SbStatus {
    guard(|| write_string(out, render(tree_ref(tree)?, Rendering::Sentence)))
}

/// Whether the provision `target` ("section 1001(c)(2)" or "sentence 3")
/// applies to someone who is a `fact_term`.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sb_tree_applies(
    tree: *const SbTree,
    target: *const c_char,
    fact_term: *const c_char,
    out: *mut bool,
) -> SbStatus {
    guard(|| {
        let tree = tree_ref(tree)?;
        let target = read_str(target, "target")?.trim();
        let fact = read_str(fact_term, "fact_term")?;
        let parsed = match target.strip_prefix("sentence ") {
            Some(k) => Target::Sentence(k.trim().parse().map_err(|_| Fail(SbStatus::Parse, format!("bad sentence index `{k}`")))?),
            None => Target::Provision(parse_citation(target).map_err(|e| Fail(SbStatus::Parse, e.to_string()))?),
        };
        let truth = applies(tree, &parsed, fact).map_err(|e| match e {
            statute_bench::oracle::OracleError::UnknownTerm(_) => Fail(SbStatus::UnknownTerm, e.to_string()),
            other => invalid(other),
        })?;
        write_out(out, truth.applicable, "out")
    })
}

/// A balanced batch of `count` test items, one JSON object per line. `mode`
/// is an [`SbTermMode`], `render_as` an [`SbRendering`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sb_sample_batch_jsonl(
    width: u32,
    depth: u32,
    mode: u32,
    seed: u64,
    count: usize,
    render_as: u32,
    out: *mut *mut c_char,
) -> SbStatus {
    guard(|| {
        let spec = StatuteSpec::new(width as usize, depth as usize, term_mode(mode)?, seed).map_err(invalid)?;
        let items = sample_batch(&spec, count, rendering(render_as)?).map_err(invalid)?;
        let mut text = String::new();
        for item in &items {
            text.push_str(&serde_json::to_string(item).map_err(invalid)?);
            text.push('\n');
        }
        write_string(out, text)
    })
}

/// BLEU without brevity penalty, 0 to 100.
///
/// # Safety
/// Strings must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sb_unpenalized_bleu(candidate: *const c_char, reference: *const c_char, out: *mut f64) -> SbStatus {
    guard(|| {
        let c = read_str(candidate, "candidate")?;
        let r = read_str(reference, "reference")?;
        write_out(out, unpenalized_bleu(c, r), "out")
    })
}

/// Wald half-width in percentage points.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sb_wald_ci_half_width(correct: u64, total: u64, confidence: f64, out: *mut f64) -> SbStatus {
    guard(|| write_out(out, wald_ci_half_width(correct, total, confidence).map_err(invalid)?, "out"))
}

/// One-sided Welch p-value that sample 1 beats sample 2.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sb_welch_one_sided_p(c1: u64, n1: u64, c2: u64, n2: u64, out: *mut f64) -> SbStatus {
    guard(|| write_out(out, welch_one_sided_p(c1, n1, c2, n2).map_err(invalid)?, "out"))
}

/// # Safety
/// `s` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn sb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
