use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use statute_bench::statute::examples;
use statute_bench_ffi::*;

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    sb_string_free(s);
    out
}

fn last_error() -> String {
    let p = sb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn tree_round_trip_and_oracle() {
    unsafe {
        let example = examples::bowlery();
        let fig = CString::new(example.to_json()).unwrap();
        let mut tree = ptr::null_mut();
        assert_eq!(sb_tree_from_json(fig.as_ptr(), &mut tree), SbStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(sb_tree_to_json(tree, &mut s), SbStatus::Ok);
        assert_eq!(take(s), example.to_json());
        assert_eq!(sb_tree_render_statute(tree, &mut s), SbStatus::Ok);
        let statute = take(s);
        assert!(statute.starts_with("Section 1001."));
        assert_eq!(sb_tree_render_sentences(tree, &mut s), SbStatus::Ok);
        assert!(!take(s).is_empty());

        let def = &example.definitions()[5];
        let target = CString::new(def.citation.to_string()).unwrap();
        let mut applies = false;
        for term in &def.rhs_terms {
            let t = CString::new(term.as_str()).unwrap();
            assert_eq!(sb_tree_applies(tree, target.as_ptr(), t.as_ptr(), &mut applies), SbStatus::Ok);
            assert!(applies);
        }
        let root = CString::new(example.root_term()).unwrap();
        assert_eq!(sb_tree_applies(tree, target.as_ptr(), root.as_ptr(), &mut applies), SbStatus::Ok);
        assert!(!applies);

        let missing = CString::new("zzzz").unwrap();
        assert_eq!(sb_tree_applies(tree, target.as_ptr(), missing.as_ptr(), &mut applies), SbStatus::UnknownTerm);
        assert!(last_error().contains("zzzz"));
        let bad = CString::new("sektion 4").unwrap();
        assert_eq!(sb_tree_applies(tree, bad.as_ptr(), root.as_ptr(), &mut applies), SbStatus::Parse);
        let sentence = CString::new("sentence 1").unwrap();
        assert_eq!(sb_tree_applies(tree, sentence.as_ptr(), root.as_ptr(), &mut applies), SbStatus::Ok);
        assert!(sb_last_error().is_null());
        sb_tree_free(tree);
    }
}

#[test]
fn generation_is_deterministic() {
    unsafe {
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(sb_tree_generate(3, 2, SbTermMode::Ids as u32, 11, &mut a), SbStatus::Ok);
        assert_eq!(sb_tree_generate(3, 2, SbTermMode::Ids as u32, 11, &mut b), SbStatus::Ok);
        let (mut sa, mut sb) = (ptr::null_mut(), ptr::null_mut());
        sb_tree_to_json(a, &mut sa);
        sb_tree_to_json(b, &mut sb);
        assert_eq!(take(sa), take(sb));
        sb_tree_free(a);
        sb_tree_free(b);
        let mut t = ptr::null_mut();
        assert_eq!(sb_tree_generate(5, 2, 0, 1, &mut t), SbStatus::InvalidArgument);
        assert!(t.is_null());
        assert_eq!(sb_tree_generate(2, 2, 9, 1, &mut t), SbStatus::InvalidArgument);
        assert!(last_error().contains("term mode"));
    }
}

#[test]
fn batches_are_balanced() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(sb_sample_batch_jsonl(2, 2, 0, 7, 10, SbRendering::Statute as u32, &mut s), SbStatus::Ok);
        let text = take(s);
        let labels: Vec<bool> = text
            .lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["label"]["applicable"].as_bool().unwrap())
            .collect();
        assert_eq!(labels.len(), 10);
        assert_eq!(labels.iter().filter(|x| **x).count(), 5);
        assert_eq!(sb_sample_batch_jsonl(2, 2, 0, 7, 3, 0, &mut s), SbStatus::InvalidArgument);
        assert_eq!(sb_sample_batch_jsonl(2, 2, 0, 7, 2, 5, &mut s), SbStatus::InvalidArgument);
    }
}

#[test]
fn numeric_functions() {
    unsafe {
        let mut x = 0.0;
        assert_eq!(sb_wald_ci_half_width(43, 72, 0.9, &mut x), SbStatus::Ok);
        assert!((x - 9.51).abs() < 0.01);
        assert_eq!(sb_wald_ci_half_width(3, 2, 0.9, &mut x), SbStatus::InvalidArgument);
        assert_eq!(sb_welch_one_sided_p(71, 100, 50, 100, &mut x), SbStatus::Ok);
        assert!((x - 0.0011).abs() < 0.0003);
        let c = CString::new("the cat sat").unwrap();
        assert_eq!(sb_unpenalized_bleu(c.as_ptr(), c.as_ptr(), &mut x), SbStatus::Ok);
        assert_eq!(x, 100.0);
        assert_eq!(sb_unpenalized_bleu(ptr::null(), c.as_ptr(), &mut x), SbStatus::NullPointer);
        assert_eq!(sb_wald_ci_half_width(1, 2, 0.9, ptr::null_mut()), SbStatus::NullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(sb_unpenalized_bleu(bad.as_ptr().cast(), c.as_ptr(), &mut x), SbStatus::InvalidUtf8);
        sb_string_free(ptr::null_mut());
        sb_tree_free(ptr::null_mut());
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// The directory holding this crate's build artifacts (target/<profile>).
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_compiles_as_c() {
    let header = crate_dir().join("include");
    let status = Command::new("cc")
        .args(["-std=c11", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&header)
        .arg(crate_dir().join("tests/c_header.c"))
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
}

#[test]
fn c_program_links_and_runs() {
    let lib = artifact_dir().join("libstatute_bench_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("c_header");
    let status = Command::new("cc")
        .args(["-std=c11", "-I"])
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c_header.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
