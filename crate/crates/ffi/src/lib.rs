//! C ABI over `colorank`: opaque handles built from the text formats,
//! status codes, and a per-thread last-error message.
//!
//! Every function returns a [`ColorankStatus`]; results come back through
//! out-pointers. Strings handed out must be released with
//! [`colorank_string_free`], handles with their own `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use colorank::approx::ApproxConfig;
use colorank::geometry::{defect_sweep, realize, Scene};
use colorank::model::{rank_theta_model, FiniteModel, RankedModelOracle};
use colorank::tree::{rank_all, validate_tree, ColoringTree};
use colorank::{io, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColorankStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Precondition = 4,
    Budget = 5,
    Bounds = 6,
    NotFound = 7,
    Internal = 8,
    Io = 9,
    Panic = 10,
}

/// A parsed coloring tree.
pub struct ColorankTree(ColoringTree);

/// A parsed finite model.
pub struct ColorankModel(FiniteModel);

/// A realized scene of rational points.
pub struct ColorankScene(Scene);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ColorankStatus {
    match e {
        Error::Parse { .. } => ColorankStatus::Parse,
        Error::Budget { .. } => ColorankStatus::Budget,
        Error::Precondition(_) => ColorankStatus::Precondition,
        Error::Bounds(_) => ColorankStatus::Bounds,
        Error::NotFound { .. } => ColorankStatus::NotFound,
        Error::Internal(_) => ColorankStatus::Internal,
        Error::Io(_) => ColorankStatus::Io,
    }
}

/// Internal failure: a status plus the message stored for the caller.
struct Failure(ColorankStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> ColorankStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ColorankStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside colorank".into());
            ColorankStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(ColorankStatus::NullArgument, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(ColorankStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` must be null or valid for writes.
unsafe fn put<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

/// # Safety
/// `h` must be null or a live handle of the right type.
unsafe fn handle<'a, T>(h: *const T, what: &str) -> Result<&'a T, Failure> {
    h.as_ref().ok_or_else(|| null(what))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

fn cfg(cap: usize, budget: usize) -> ApproxConfig {
    ApproxConfig { cap, budget }
}

/// Message of the last failure on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn colorank_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn colorank_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn colorank_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a tree file; on success `*out` owns a new handle.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn colorank_tree_parse(src: *const c_char, out: *mut *mut ColorankTree) -> ColorankStatus {
    guard(|| {
        let t = io::parse_tree(text(src, "src")?)?;
        put(out, Box::into_raw(Box::new(ColorankTree(t))), "out")
    })
}

/// # Safety
/// `t` must be null or a handle from [`colorank_tree_parse`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn colorank_tree_free(t: *mut ColorankTree) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of extension violations in the tree.
///
/// # Safety
/// `t` must be a live handle and `violations` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn colorank_tree_validate(t: *const ColorankTree, violations: *mut usize) -> ColorankStatus {
    guard(|| {
        let t = handle(t, "tree")?;
        put(violations, validate_tree(&t.0).len(), "violations")
    })
}

/// Tree rank of the truncation: one more than the largest approximation value.
///
/// # Safety
/// `t` must be a live handle and `rank` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn colorank_tree_rank(
    t: *const ColorankTree,
    cap: usize,
    budget: usize,
    rank: *mut u32,
) -> ColorankStatus {
    guard(|| {
        let t = handle(t, "tree")?;
        let report = rank_all(&t.0, &cfg(cap, budget))?;
        put(rank, report.tree_rank, "rank")
    })
}

/// Full rank listing in the text format; free with [`colorank_string_free`].
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn colorank_tree_rank_listing(
    t: *const ColorankTree,
    cap: usize,
    budget: usize,
    out: *mut *mut c_char,
) -> ColorankStatus {
    guard(|| {
        let t = handle(t, "tree")?;
        let report = rank_all(&t.0, &cfg(cap, budget))?;
        put(out, owned_string(io::write_rank_listing(&io::RankListing::from_report(&report))), "out")
    })
}

/// # Safety
/// `src` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn colorank_model_parse(src: *const c_char, out: *mut *mut ColorankModel) -> ColorankStatus {
    guard(|| {
        let m = io::parse_model(text(src, "src")?)?;
        put(out, Box::into_raw(Box::new(ColorankModel(m))), "out")
    })
}

/// # Safety
/// `m` must be null or a handle from [`colorank_model_parse`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn colorank_model_free(m: *mut ColorankModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// θ-rank of the whole model.
///
/// # Safety
/// `m` must be a live handle and `rank` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn colorank_model_rank(m: *const ColorankModel, theta: usize, rank: *mut u32) -> ColorankStatus {
    guard(|| {
        let m = handle(m, "model")?;
        put(rank, rank_theta_model(&m.0, theta)?, "rank")
    })
}

/// Oracle dump of ranks, critical elements and types; free with
/// [`colorank_string_free`].
///
/// # Safety
/// `m` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn colorank_model_oracle(
    m: *const ColorankModel,
    theta: usize,
    out: *mut *mut c_char,
) -> ColorankStatus {
    guard(|| {
        let m = handle(m, "model")?;
        let o = RankedModelOracle::from_model(&m.0, theta)?;
        put(out, owned_string(io::write_oracle(&o)), "out")
    })
}

/// Realizes a coloring file with at most `max_classes` classes.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn colorank_scene_realize(
    src: *const c_char,
    max_classes: usize,
    out: *mut *mut ColorankScene,
) -> ColorankStatus {
    guard(|| {
        let coloring = io::parse_coloring(text(src, "src")?)?;
        let first = coloring
            .iter()
            .flatten()
            .next()
            .ok_or_else(|| Failure(ColorankStatus::Precondition, "coloring has no members".into()))?;
        let (scene, _) = realize(&coloring, first.len(), first[0].len(), max_classes)?;
        put(out, Box::into_raw(Box::new(ColorankScene(scene))), "out")
    })
}

/// # Safety
/// `s` must be null or a handle from [`colorank_scene_realize`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn colorank_scene_free(s: *mut ColorankScene) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of subsets whose defect disagrees with the coloring.
///
/// # Safety
/// `s` must be a live handle and `mismatches` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn colorank_scene_sweep(
    s: *const ColorankScene,
    budget: usize,
    mismatches: *mut usize,
) -> ColorankStatus {
    guard(|| {
        let s = handle(s, "scene")?;
        put(mismatches, defect_sweep(&s.0, budget)?.len(), "mismatches")
    })
}

/// Scene dump in the text format; free with [`colorank_string_free`].
///
/// # Safety
/// `s` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn colorank_scene_dump(s: *const ColorankScene, out: *mut *mut c_char) -> ColorankStatus {
    guard(|| {
        let s = handle(s, "scene")?;
        put(out, owned_string(io::write_scene(&s.0)), "out")
    })
}
