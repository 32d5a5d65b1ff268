use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use forchheimer_ffi::*;

fn last_error() -> String {
    let p = fm_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(spec: &str) -> *mut FmLaw {
    let spec = CString::new(spec).unwrap();
    let mut law = ptr::null_mut();
    assert_eq!(unsafe { fm_law_parse(spec.as_ptr(), &mut law) }, FmStatus::Ok);
    law
}

#[test]
fn law_round_trip() {
    let law = parse("1:0,1:1");
    let mut v = 0.0;
    unsafe {
        assert_eq!(fm_law_g(law, 2.0, &mut v), FmStatus::Ok);
        assert_eq!(v, 3.0);
        assert_eq!(fm_law_solve_s(law, 2.0, &mut v), FmStatus::Ok);
        assert!((v - 1.0).abs() < 1e-14);
        assert_eq!(fm_law_conductivity(law, 2.0, &mut v), FmStatus::Ok);
        assert!((v - 0.5).abs() < 1e-14);
        assert_eq!(fm_law_energy_density(law, 0.0, &mut v), FmStatus::Ok);
        assert_eq!(v, 0.0);
        let (mut a, mut beta) = (0.0, 0.0);
        assert_eq!(fm_law_degeneracy(law, &mut a, &mut beta), FmStatus::Ok);
        assert_eq!((a, beta), (0.5, 1.5));
        assert!(fm_last_error_message().is_null());
        fm_law_free(law);
    }
}

#[test]
fn law_from_arrays_matches_parsed_law() {
    let c = [1.0, 2.0, 0.5];
    let e = [0.0, 1.0, 2.0];
    let mut law = ptr::null_mut();
    unsafe {
        assert_eq!(fm_law_new(c.as_ptr(), e.as_ptr(), 3, &mut law), FmStatus::Ok);
        let parsed = parse("1:0,2:1,0.5:2");
        let (mut x, mut y) = (0.0, 0.0);
        fm_law_conductivity(law, 3.7, &mut x);
        fm_law_conductivity(parsed, 3.7, &mut y);
        assert_eq!(x, y);
        fm_law_free(parsed);
        fm_law_free(law);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let bad = CString::new("1:0,x").unwrap();
    let mut law = ptr::null_mut();
    unsafe {
        assert_eq!(fm_law_parse(bad.as_ptr(), &mut law), FmStatus::InvalidArgument);
        assert!(law.is_null());
        assert!(last_error().contains("law"), "{}", last_error());

        assert_eq!(fm_law_parse(ptr::null(), &mut law), FmStatus::NullPointer);
        let good = parse("1:0,1:1");
        let mut v = 0.0;
        assert_eq!(fm_law_g(good, -1.0, &mut v), FmStatus::Domain);
        assert_eq!(fm_law_g(good, 1.0, ptr::null_mut()), FmStatus::NullPointer);
        assert_eq!(fm_law_g(ptr::null(), 1.0, &mut v), FmStatus::NullPointer);
        fm_law_free(good);
        fm_law_free(ptr::null_mut());
        fm_report_free(ptr::null_mut());
        fm_string_free(ptr::null_mut());
        assert_eq!(fm_report_num_rows(ptr::null()), 0);
    }
}

#[test]
fn study_through_the_c_interface() {
    let law = parse("1:0,1:1");
    let meshes = [2usize, 4];
    let mut cfg = fm_study_config_default();
    assert_eq!(cfg.dt, 0.0);
    assert_eq!(cfg.dt_cap, 1e-2);
    cfg.t_final = 0.1;
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(fm_study_run(law, meshes.as_ptr(), 2, &cfg, &mut report), FmStatus::Ok);
        assert_eq!(fm_report_num_rows(report), 2);
        let mut row = FmReportRow::default();
        assert_eq!(fm_report_row(report, 0, &mut row), FmStatus::Ok);
        assert_eq!(row.n, 2);
        assert!(row.rate_p.is_nan());
        assert_eq!(fm_report_row(report, 1, &mut row), FmStatus::Ok);
        assert_eq!(row.n, 4);
        assert!(row.rate_p.is_finite() && row.err_p > 0.0);
        assert_eq!(row.steps, 10);
        assert_eq!(fm_report_row(report, 2, &mut row), FmStatus::InvalidArgument);

        // the C path reproduces the Rust report exactly
        let exact = forchheimer::ManufacturedSolution::new(forchheimer::ForchheimerLaw::two_term(1.0, 1.0).unwrap());
        let rust_cfg = forchheimer::StudyConfig {
            t_final: 0.1,
            ..Default::default()
        };
        let expected = forchheimer::convergence_study(&exact, &meshes, &rust_cfg).unwrap().to_csv();
        let mut csv = ptr::null_mut();
        assert_eq!(fm_report_to_csv(report, &mut csv), FmStatus::Ok);
        assert_eq!(CStr::from_ptr(csv).to_str().unwrap(), expected);
        fm_string_free(csv);

        let mut md = ptr::null_mut();
        assert_eq!(fm_report_to_markdown(report, &mut md), FmStatus::Ok);
        assert!(CStr::from_ptr(md).to_str().unwrap().starts_with("| N |"));
        fm_string_free(md);
        fm_report_free(report);

        cfg.picard_max = 1;
        let mut failed = ptr::null_mut();
        assert_eq!(fm_study_run(law, meshes.as_ptr(), 2, &cfg, &mut failed), FmStatus::Numerical);
        assert!(failed.is_null());
        assert!(last_error().contains("residual"));

        let unsorted = [4usize, 2];
        assert_eq!(fm_study_run(law, unsorted.as_ptr(), 2, ptr::null(), &mut failed), FmStatus::Domain);
        fm_law_free(law);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/forchheimer.h")).unwrap();
    for name in [
        "fm_last_error_message",
        "fm_string_free",
        "fm_law_parse",
        "fm_law_new",
        "fm_law_free",
        "fm_law_g",
        "fm_law_solve_s",
        "fm_law_conductivity",
        "fm_law_energy_density",
        "fm_law_degeneracy",
        "fm_study_config_default",
        "fm_study_run",
        "fm_report_free",
        "fm_report_num_rows",
        "fm_report_row",
        "fm_report_to_csv",
        "fm_report_to_markdown",
        "FM_STATUS_NUMERICAL",
        "typedef struct FmLaw FmLaw;",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "forchheimer.h"

int main(void) {
    FmLaw *law = NULL;
    if (fm_law_parse("1:0,1:1", &law) != FM_STATUS_OK) return 1;
    double k = 0.0;
    if (fm_law_conductivity(law, 2.0, &k) != FM_STATUS_OK || fabs(k - 0.5) > 1e-14) return 2;
    if (fm_law_g(law, -1.0, &k) != FM_STATUS_DOMAIN) return 3;
    if (fm_last_error_message() == NULL) return 4;
    size_t meshes[] = {2, 4};
    FmStudyConfig cfg = fm_study_config_default();
    cfg.t_final = 0.05;
    FmReport *report = NULL;
    if (fm_study_run(law, meshes, 2, &cfg, &report) != FM_STATUS_OK) return 5;
    FmReportRow row;
    if (fm_report_row(report, 1, &row) != FM_STATUS_OK || row.n != 4) return 6;
    char *csv = NULL;
    if (fm_report_to_csv(report, &csv) != FM_STATUS_OK) return 7;
    printf("%s", csv);
    fm_string_free(csv);
    fm_report_free(report);
    fm_law_free(law);
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // tests run from target/<profile>/deps
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libforchheimer_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or {} not built", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,h,dt,err_p"));
    assert_eq!(text.lines().count(), 3);
}
