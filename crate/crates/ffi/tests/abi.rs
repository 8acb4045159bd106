use std::ffi::{c_char, CStr};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use sov_xxx_ffi::*;

fn c(re: f64) -> SovComplex {
    SovComplex { re, im: 0.0 }
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe { sov_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn fixture_through_handles() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(sov_params_new(c(1.0), [c(0.0)].as_ptr(), 1, 1.0, &mut p), SovStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(sov_spectrum_new(p, 1, &mut s), SovStatus::Ok);
        let mut len = 0;
        assert_eq!(sov_spectrum_len(s, &mut len), SovStatus::Ok);
        assert_eq!(len, 2);
        let (mut minus, mut plus) = (0, 0);
        for i in 0..len {
            let mut d = 0;
            assert_eq!(sov_spectrum_degree(s, i, &mut d), SovStatus::Ok);
            if d == 0 {
                minus = i
            } else {
                plus = i
            }
        }
        let mut v = SovComplex::default();
        for (op, want) in [(SovOperator::SigmaMinus, -0.5), (SovOperator::SigmaPlus, 0.5), (SovOperator::SigmaZ, 1.0)] {
            assert_eq!(sov_form_factor(s, minus, plus, 1, op, &mut v), SovStatus::Ok);
            assert!((v.re - want).abs() < 1e-10 && v.im.abs() < 1e-10);
            assert_eq!(sov_form_factor_dense(s, minus, plus, 1, op, &mut v), SovStatus::Ok);
            assert!((v.re - want).abs() < 1e-10);
        }
        let mut tau = SovComplex::default();
        assert_eq!(sov_spectrum_tau(s, plus, c(0.37), &mut tau), SovStatus::Ok);
        assert!((tau.re - 1.0).abs() < 1e-12);
        let mut roots = [SovComplex::default(); 1];
        let mut nr = 0;
        assert_eq!(sov_spectrum_roots(s, plus, roots.as_mut_ptr(), 1, &mut nr), SovStatus::Ok);
        assert_eq!(nr, 1);
        assert!((roots[0].re + 0.5).abs() < 1e-12);
        assert_eq!(sov_spectrum_roots(s, plus, roots.as_mut_ptr(), 0, &mut nr), SovStatus::BufferTooSmall);
        assert_eq!(nr, 1);
        assert_eq!(sov_gaudin_norm(s, minus, &mut v), SovStatus::Ok);
        assert!((v.re - 2.0).abs() < 1e-12);
        sov_spectrum_free(s);
        sov_params_free(p);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(sov_params_sample(0, 1, 0.3, &mut p), SovStatus::InvalidArgument);
        assert!(p.is_null());
        assert!(last_error().contains("n_sites"));
        assert_eq!(sov_params_new(c(1.0), ptr::null(), 1, 1.0, &mut p), SovStatus::NullPointer);
        assert_eq!(sov_params_sample(3, 1, 0.3, ptr::null_mut()), SovStatus::NullPointer);
        assert_eq!(sov_params_sample(3, 1, 0.3, &mut p), SovStatus::Ok);
        let mut n = 0;
        assert_eq!(sov_params_n_sites(p, &mut n), SovStatus::Ok);
        assert_eq!(n, 3);
        let mut xi = [SovComplex::default(); 2];
        assert_eq!(sov_params_xi(p, xi.as_mut_ptr(), 2), SovStatus::BufferTooSmall);
        let mut s = ptr::null_mut();
        assert_eq!(sov_spectrum_new(p, 1, &mut s), SovStatus::Ok);
        let mut v = SovComplex::default();
        assert_eq!(sov_form_factor(s, 0, 99, 1, SovOperator::SigmaZ, &mut v), SovStatus::OutOfRange);
        assert_eq!(sov_form_factor(s, 0, 1, 9, SovOperator::SigmaZ, &mut v), SovStatus::InvalidArgument);
        sov_spectrum_free(s);
        sov_params_free(p);
        // free on null is a no-op
        sov_params_free(ptr::null_mut());
        sov_spectrum_free(ptr::null_mut());
        let st = CStr::from_ptr(sov_status_str(SovStatus::OutOfRange));
        assert_eq!(st.to_str().unwrap(), "index out of range");
    }
}

#[test]
fn report_string() {
    unsafe {
        let mut text = ptr::null_mut();
        let mut pass = false;
        assert_eq!(sov_run_all(1, 3, 0.3, SovFormat::Json, &mut text, &mut pass), SovStatus::Ok);
        assert!(pass);
        let s = CStr::from_ptr(text).to_str().unwrap().to_owned();
        sov_string_free(text);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["pass"], true);
        assert_eq!(sov_run_all(12, 3, 0.3, SovFormat::Csv, &mut text, &mut pass), SovStatus::InvalidArgument);
        assert!(text.is_null());
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/sov_xxx.h")).unwrap();
    for f in ["sov_params_new", "sov_spectrum_new", "sov_form_factor", "sov_run_all", "sov_last_error", "typedef struct SovSpectrum SovSpectrum"] {
        assert!(h.contains(f), "{f}");
    }
}

/// Compile the C smoke program against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler; skipped");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libsov_xxx_ffi.a");
    assert!(lib.exists(), "{}", lib.display());
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let bin = std::env::temp_dir().join(format!("sov_xxx_smoke_{}", std::process::id()));
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    let _ = std::fs::remove_file(&bin);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
