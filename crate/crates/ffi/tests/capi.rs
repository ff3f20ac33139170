use std::ffi::{c_char, CStr, CString};
use std::ptr;

use colorank_ffi::*;

const B4_TREE: &str = include_str!("../../core/fixtures/b4.tree");
const PATH_MODEL: &str = include_str!("../../core/fixtures/path4.model");
const PAIRS: &str = include_str!("../../core/fixtures/pairs.cm");

fn last_error() -> String {
    let p = colorank_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { colorank_string_free(p) };
    s
}

fn parse_tree(src: &str) -> (ColorankStatus, *mut ColorankTree) {
    let c = CString::new(src).unwrap();
    let mut t = ptr::null_mut();
    let status = unsafe { colorank_tree_parse(c.as_ptr(), &mut t) };
    (status, t)
}

#[test]
fn tree_handle_ranks_the_binary_fixture() {
    let (status, t) = parse_tree(B4_TREE);
    assert_eq!(status, ColorankStatus::Ok);
    assert!(colorank_last_error().is_null());
    let mut violations = usize::MAX;
    assert_eq!(unsafe { colorank_tree_validate(t, &mut violations) }, ColorankStatus::Ok);
    assert_eq!(violations, 0);
    let mut rank = 0;
    assert_eq!(unsafe { colorank_tree_rank(t, 6, 1_000_000, &mut rank) }, ColorankStatus::Ok);
    assert_eq!(rank, 3);
    let mut listing = ptr::null_mut();
    assert_eq!(
        unsafe { colorank_tree_rank_listing(t, 6, 1_000_000, &mut listing) },
        ColorankStatus::Ok
    );
    let listing = take_string(listing);
    assert!(listing.starts_with("rktree 3\n"));
    assert!(listing.contains("value [0,1|0;1:0] 2 "));
    unsafe { colorank_tree_free(t) };
}

#[test]
fn parse_errors_report_the_line() {
    let (status, t) = parse_tree("tree N=2 H=3\ngnode 1 t=0 v=0\n");
    assert_eq!(status, ColorankStatus::Parse);
    assert!(t.is_null());
    assert!(last_error().contains("line 2"), "{}", last_error());
}

#[test]
fn tiny_budget_is_a_budget_error() {
    let (_, t) = parse_tree(B4_TREE);
    let mut rank = 0;
    assert_eq!(unsafe { colorank_tree_rank(t, 6, 3, &mut rank) }, ColorankStatus::Budget);
    assert!(last_error().contains("budget"));
    unsafe { colorank_tree_free(t) };
}

#[test]
fn null_arguments_are_rejected() {
    let mut t = ptr::null_mut();
    assert_eq!(
        unsafe { colorank_tree_parse(ptr::null(), &mut t) },
        ColorankStatus::NullArgument
    );
    let mut rank = 0;
    assert_eq!(
        unsafe { colorank_tree_rank(ptr::null(), 6, 10, &mut rank) },
        ColorankStatus::NullArgument
    );
    let (_, t) = parse_tree(B4_TREE);
    assert_eq!(
        unsafe { colorank_tree_rank(t, 6, 1_000_000, ptr::null_mut()) },
        ColorankStatus::NullArgument
    );
    unsafe {
        colorank_tree_free(t);
        colorank_tree_free(ptr::null_mut());
        colorank_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_utf8_is_rejected() {
    let bad = [0xffu8 as c_char, 0];
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { colorank_model_parse(bad.as_ptr(), &mut m) }, ColorankStatus::InvalidUtf8);
}

#[test]
fn model_handle_ranks_and_dumps_the_oracle() {
    let src = CString::new(PATH_MODEL).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { colorank_model_parse(src.as_ptr(), &mut m) }, ColorankStatus::Ok);
    let mut rank = 0;
    assert_eq!(unsafe { colorank_model_rank(m, 2, &mut rank) }, ColorankStatus::Ok);
    assert_eq!(rank, 2);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { colorank_model_oracle(m, 2, &mut out) }, ColorankStatus::Ok);
    let dump = take_string(out);
    assert!(dump.starts_with("oracle m=4\n"));
    assert_eq!(dump.lines().filter(|l| l.starts_with("mrank ")).count(), 5);
    unsafe { colorank_model_free(m) };
}

#[test]
fn scene_handle_realizes_and_sweeps() {
    let src = CString::new(PAIRS).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { colorank_scene_realize(src.as_ptr(), 4, &mut s) }, ColorankStatus::Ok);
    let mut mismatches = usize::MAX;
    assert_eq!(unsafe { colorank_scene_sweep(s, 1000, &mut mismatches) }, ColorankStatus::Ok);
    assert_eq!(mismatches, 0);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { colorank_scene_dump(s, &mut out) }, ColorankStatus::Ok);
    assert!(take_string(out).starts_with("scene N=2 H=3\n"));
    unsafe { colorank_scene_free(s) };

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { colorank_scene_realize(src.as_ptr(), 1, &mut s) }, ColorankStatus::Bounds);
    assert!(s.is_null());
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/colorank.h");
    for name in [
        "colorank_last_error",
        "colorank_version",
        "colorank_string_free",
        "colorank_tree_parse",
        "colorank_tree_free",
        "colorank_tree_validate",
        "colorank_tree_rank",
        "colorank_tree_rank_listing",
        "colorank_model_parse",
        "colorank_model_free",
        "colorank_model_rank",
        "colorank_model_oracle",
        "colorank_scene_realize",
        "colorank_scene_free",
        "colorank_scene_sweep",
        "colorank_scene_dump",
        "COLORANK_STATUS_BUDGET",
        "typedef struct ColorankTree ColorankTree;",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let version = unsafe { CStr::from_ptr(colorank_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
