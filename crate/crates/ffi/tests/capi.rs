use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use addlab_ffi::*;

fn last_error() -> String {
    let p = addlab_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn group(factors: &[usize]) -> *mut AddlabGroup {
    let mut g = ptr::null_mut();
    assert_eq!(addlab_group_new(factors.as_ptr(), factors.len(), &mut g), AddlabStatus::Ok);
    g
}

unsafe fn set(g: *const AddlabGroup, ranks: &[usize]) -> *mut AddlabSet {
    let mut s = ptr::null_mut();
    assert_eq!(addlab_set_from_ranks(g, ranks.as_ptr(), ranks.len(), &mut s), AddlabStatus::Ok);
    s
}

#[test]
fn subgroup_energies() {
    unsafe {
        let g = group(&[12]);
        let h = set(g, &[0, 3, 6, 9]);
        let mut v = 0u64;
        assert_eq!(addlab_energy(h, h, &mut v), AddlabStatus::Ok);
        assert_eq!(v, 64);
        assert_eq!(addlab_t_energy(h, 3, &mut v), AddlabStatus::Ok);
        assert_eq!(v, 4u64.pow(5));
        let mut order = 0;
        assert_eq!(addlab_group_order(g, &mut order), AddlabStatus::Ok);
        assert_eq!(order, 12);
        addlab_set_free(h);
        addlab_group_free(g);
    }
}

#[test]
fn dimension_and_dissociation() {
    unsafe {
        let g = group(&[101]);
        let a = set(g, &[1, 10, 11, 12]);
        let (mut value, mut exact) = (0usize, false);
        assert_eq!(addlab_dimension(a, 24, &mut value, &mut exact), AddlabStatus::Ok);
        assert_eq!((value, exact), (3, true));
        let mut diss = true;
        assert_eq!(addlab_is_dissociated(a, &mut diss), AddlabStatus::Ok);
        assert!(!diss);
        addlab_set_free(a);
        addlab_group_free(g);
    }
}

#[test]
fn json_round_trip_and_ranks() {
    unsafe {
        let doc = CString::new(r#"{"group": [4, 6], "elements": [[0, 5], [3, 1], [0, 0]]}"#).unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(addlab_set_from_json(doc.as_ptr(), &mut s), AddlabStatus::Ok);
        let mut len = 0;
        let mut ranks = [0usize; 8];
        assert_eq!(addlab_set_ranks(s, ranks.as_mut_ptr(), ranks.len(), &mut len), AddlabStatus::Ok);
        assert_eq!(&ranks[..len], &[0, 5, 19]);
        let mut text = ptr::null_mut();
        assert_eq!(addlab_set_to_json(s, &mut text), AddlabStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(addlab_set_from_json(text, &mut back), AddlabStatus::Ok);
        let mut ranks2 = [0usize; 8];
        assert_eq!(addlab_set_ranks(back, ranks2.as_mut_ptr(), ranks2.len(), &mut len), AddlabStatus::Ok);
        assert_eq!(ranks, ranks2);
        addlab_string_free(text);
        addlab_set_free(s);
        addlab_set_free(back);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut g = ptr::null_mut();
        let bad = [1usize];
        assert_eq!(addlab_group_new(bad.as_ptr(), 1, &mut g), AddlabStatus::InvalidInput);
        assert!(last_error().contains("below 2"));
        let huge = [1usize << 20, 1 << 20];
        assert_eq!(addlab_group_new(huge.as_ptr(), 2, &mut g), AddlabStatus::CapExceeded);
        assert_eq!(addlab_group_new(ptr::null(), 1, &mut g), AddlabStatus::NullPointer);
        assert!(g.is_null());

        let g = group(&[10]);
        let mut s = ptr::null_mut();
        let out_of_range = [12usize];
        assert_eq!(addlab_set_from_ranks(g, out_of_range.as_ptr(), 1, &mut s), AddlabStatus::InvalidInput);
        let doc = CString::new(r#"{"group": [5], "elements": [[7]]}"#).unwrap();
        assert_eq!(addlab_set_from_json(doc.as_ptr(), &mut s), AddlabStatus::InvalidInput);
        assert!(last_error().contains("elements[0][0]"));

        let a = set(g, &[1, 2]);
        let mut v = 0u64;
        assert_eq!(addlab_energy(a, ptr::null(), &mut v), AddlabStatus::NullPointer);
        assert_eq!(addlab_energy(a, a, &mut v), AddlabStatus::Ok);
        assert!(addlab_last_error_message().is_null());
        addlab_set_free(a);
        addlab_group_free(g);
    }
}

#[test]
fn extraction_and_analysis() {
    unsafe {
        let g = group(&[2, 2, 2, 2, 2]);
        let h = set(g, &[0, 1, 2, 3, 4, 5, 6, 7]);
        let (mut b, mut ok) = (ptr::null_mut(), false);
        assert_eq!(addlab_extract_energy_subset(h, h, 1.0, &mut b, &mut ok), AddlabStatus::Ok);
        assert!(ok);
        let mut len = 0;
        assert_eq!(addlab_set_len(b, &mut len), AddlabStatus::Ok);
        assert_eq!(len, 8);
        assert_eq!(addlab_extract_energy_subset(h, h, 0.0, &mut b, &mut ok), AddlabStatus::InvalidInput);
        let mut json = ptr::null_mut();
        assert_eq!(addlab_analyze_json(h, &mut json), AddlabStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.contains("\"schema_version\"") && text.contains("\"dimension\""));
        addlab_string_free(json);
        addlab_set_free(b);
        addlab_set_free(h);
        addlab_group_free(g);
    }
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(addlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/addlab.h")
}

#[test]
fn header_declares_the_interface() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "addlab_group_new",
        "addlab_set_from_json",
        "addlab_energy",
        "addlab_dimension",
        "addlab_extract_energy_subset",
        "addlab_last_error_message",
        "ADDLAB_STATUS_CAP_EXCEEDED",
        "typedef struct AddlabSet AddlabSet",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "addlab.h"
int main(void) {
    size_t factors[1] = {12};
    size_t ranks[4] = {0, 3, 6, 9};
    AddlabGroup *g = NULL;
    AddlabSet *h = NULL;
    uint64_t e = 0;
    if (addlab_group_new(factors, 1, &g) != ADDLAB_STATUS_OK) return 1;
    if (addlab_set_from_ranks(g, ranks, 4, &h) != ADDLAB_STATUS_OK) return 2;
    if (addlab_energy(h, h, &e) != ADDLAB_STATUS_OK || e != 64) return 3;
    if (addlab_group_new(NULL, 1, &g) != ADDLAB_STATUS_NULL_POINTER) return 4;
    if (addlab_last_error_message() == NULL) return 5;
    addlab_set_free(h);
    addlab_group_free(g);
    printf("ok\n");
    return 0;
}
"#;

/// Compiles and runs a C client against the static library when a C compiler
/// and the archive are available; otherwise checks the header alone.
#[test]
fn c_client_links() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; header compile check skipped");
        return;
    }
    let dir = tempfile_dir();
    let src = dir.join("client.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = header().parent().unwrap().to_path_buf();
    let syntax = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"]).arg(&include).arg(&src).status().unwrap();
    assert!(syntax.success());
    // target/<profile>/deps/<test binary> -> target/<profile>/libaddlab_ffi.a
    let exe = std::env::current_exe().unwrap();
    let archive = exe.parent().and_then(Path::parent).map(|p| p.join("libaddlab_ffi.a"));
    let Some(archive) = archive.filter(|a| a.exists()) else {
        eprintln!("static library not found next to the test binary; link step skipped");
        return;
    };
    let bin = dir.join("client");
    let built = Command::new("cc")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(built.success());
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "C client exited with {:?}", run.status);
    assert_eq!(String::from_utf8_lossy(&run.stdout), "ok\n");
    std::fs::remove_dir_all(dir).ok();
}

fn tempfile_dir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("addlab-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
