use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use spectra_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(spectra_last_error()) }.to_str().unwrap().to_owned()
}

fn family(json: &str) -> *mut SpectraFamily {
    let spec = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { spectra_family_from_json(spec.as_ptr(), 0, &mut out) };
    assert_eq!(status, SpectraStatus::Ok, "{}", last_error());
    assert!(!out.is_null());
    out
}

#[test]
fn family_round_trip() {
    let f = family(r#"{"kind":"crossing_lines","params":{"slopes":[1,-1]}}"#);
    let (mut n, mut d) = (0usize, 0usize);
    unsafe {
        assert_eq!(spectra_family_dims(f, &mut n, &mut d), SpectraStatus::Ok);
        assert_eq!((n, d), (2, 1));
        let mut values = [0.0; 2];
        assert_eq!(spectra_family_eigenvalues(f, 0.5, values.as_mut_ptr(), 2), SpectraStatus::Ok);
        assert_eq!(values, [-0.5, 0.5]);
        assert_eq!(spectra_family_eigenvalues(f, 0.5, values.as_mut_ptr(), 1), SpectraStatus::BufferTooSmall);
        assert_eq!(spectra_family_eigenvalues(f, 3.0, values.as_mut_ptr(), 2), SpectraStatus::BadInput);
        assert!(last_error().contains("domain"));
        spectra_family_free(f);
    }
}

#[test]
fn bad_spec_sets_message() {
    let spec = CString::new(r#"{"kind":"nope"}"#).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { spectra_family_from_json(spec.as_ptr(), 0, &mut out) };
    assert_eq!(status, SpectraStatus::BadInput);
    assert!(out.is_null());
    assert!(last_error().contains("kind"), "{}", last_error());
}

#[test]
fn null_pointers_rejected() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(spectra_family_from_json(ptr::null(), 0, &mut out), SpectraStatus::NullPointer);
        assert_eq!(spectra_family_dims(ptr::null(), ptr::null_mut(), ptr::null_mut()), SpectraStatus::NullPointer);
        assert_eq!(spectra_branch_len(ptr::null()), 0);
        spectra_family_free(ptr::null_mut());
        spectra_branch_free(ptr::null_mut());
    }
}

#[test]
fn weyl_check_real_and_complex() {
    let a = [2.0, 1.0, 1.0, 0.0];
    let b = [2.0, 0.0, 0.0, 0.0];
    let (mut gap, mut bound, mut holds) = (0.0, 0.0, false);
    unsafe {
        let s = spectra_weyl_check(a.as_ptr(), ptr::null(), b.as_ptr(), ptr::null(), 2, &mut gap, &mut bound, &mut holds);
        assert_eq!(s, SpectraStatus::Ok);
    }
    assert!(holds);
    assert!((bound - 1.0).abs() < 1e-12);
    assert!(gap <= bound);

    let im = [0.0, 1.0, -1.0, 0.0];
    let zero = [0.0; 4];
    unsafe {
        let s = spectra_weyl_check(zero.as_ptr(), im.as_ptr(), zero.as_ptr(), zero.as_ptr(), 2, &mut gap, &mut bound, &mut holds);
        assert_eq!(s, SpectraStatus::Ok);
    }
    assert!((gap - 1.0).abs() < 1e-12 && (bound - 1.0).abs() < 1e-12 && holds);

    // i on the diagonal is not Hermitian
    let im = [1.0, 0.0, 0.0, 0.0];
    let s = unsafe { spectra_weyl_check(zero.as_ptr(), im.as_ptr(), zero.as_ptr(), ptr::null(), 2, &mut gap, &mut bound, &mut holds) };
    assert_eq!(s, SpectraStatus::BadInput);
}

#[test]
fn track_and_certify() {
    let f = family(r#"{"kind":"crossing_lines","params":{"slopes":[1,-1]}}"#);
    let grid: Vec<f64> = (0..=100).map(|k| -1.0 + 0.02 * k as f64).collect();
    let mut branch = ptr::null_mut();
    unsafe {
        let s = spectra_track(f, grid.as_ptr(), grid.len(), 0, SPECTRA_STRATEGY_SECANT, 0.0, &mut branch);
        assert_eq!(s, SpectraStatus::Ok, "{}", last_error());
        assert_eq!(spectra_branch_len(branch), 101);
        assert_eq!(spectra_branch_switches(branch), 1);
        let mut values = vec![0.0; 101];
        assert_eq!(spectra_branch_data(branch, ptr::null_mut(), values.as_mut_ptr(), 101), SpectraStatus::Ok);
        // the secant selection follows the line t
        for (t, v) in grid.iter().zip(&values) {
            assert!((t - v).abs() < 1e-12);
        }
        let (mut c, mut w) = (0.0, [0.0; 2]);
        assert_eq!(spectra_holder_constant(branch, 1.0, SPECTRA_PAIRS_ALL, &mut c, w.as_mut_ptr()), SpectraStatus::Ok);
        assert!((c - 1.0).abs() < 1e-12);
        assert_eq!(spectra_holder_constant(branch, 1.0, 99, &mut c, ptr::null_mut()), SpectraStatus::BadInput);
        assert_eq!(spectra_holder_constant(branch, 0.0, SPECTRA_PAIRS_ALL, &mut c, ptr::null_mut()), SpectraStatus::BadInput);
        spectra_branch_free(branch);

        let s = spectra_track(f, grid.as_ptr(), grid.len(), 0, 7, 0.0, &mut branch);
        assert_eq!(s, SpectraStatus::BadInput);
        assert!(branch.is_null());
        let bad = [0.0, 0.0, 1.0];
        assert_eq!(spectra_track(f, bad.as_ptr(), 3, 0, 0, 0.0, &mut branch), SpectraStatus::BadInput);
        spectra_family_free(f);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(spectra_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "spectra.h"

int main(void) {
    SpectraFamily *f = NULL;
    if (spectra_family_from_json("{\"kind\":\"rough_coupling\",\"alpha\":0.5}", 0, &f) != SPECTRA_STATUS_OK) {
        fprintf(stderr, "%s\n", spectra_last_error());
        return 1;
    }
    double grid[5] = {-1.0, -0.25, 0.0, 0.25, 1.0};
    SpectraBranch *b = NULL;
    if (spectra_track(f, grid, 5, 1, SPECTRA_STRATEGY_ORDERED, 0.0, &b) != SPECTRA_STATUS_OK) return 2;
    double c = 0.0;
    if (spectra_holder_constant(b, 0.5, SPECTRA_PAIRS_ALL, &c, NULL) != SPECTRA_STATUS_OK) return 3;
    printf("%zu %.12f\n", spectra_branch_len(b), c);
    if (spectra_family_from_json("{", 0, &f) != SPECTRA_STATUS_BAD_INPUT) return 4;
    spectra_branch_free(b);
    return 0;
}
"#;

/// Builds a C program against the generated header and the cdylib.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("spectra.h").exists());
    // target/<profile>/deps/c_abi-* -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    assert!(lib_dir.join("libspectra_ffi.so").exists(), "cdylib missing in {}", lib_dir.display());

    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("main.c");
    let bin = work.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .args(["-std=c11", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg(format!("-I{}", header_dir.display()))
        .arg(format!("-L{}", lib_dir.display()))
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-lspectra_ffi")
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // the upper ordered branch is |t|^½, whose constant is 1
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "5 1.000000000000");
}
