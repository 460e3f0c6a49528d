use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use bec_teleport_ffi::*;

fn last_error() -> String {
    let p = bt_last_error_message();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { bt_string_free(p) };
    s
}

#[test]
fn channel_handle_round_trip() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(bt_channel_generate(2.0, 0.0, 2.0, 0.0, 1.0, 1.0, 24, &mut s), BtStatus::Ok);
        let (mut modes, mut n_max, mut dim) = (0, 0, 0);
        assert_eq!(bt_state_shape(s, &mut modes, &mut n_max, &mut dim), BtStatus::Ok);
        assert_eq!((modes, n_max, dim), (2, 24, 625));

        let mut buf = vec![0.0; 2 * dim];
        assert_eq!(bt_state_amplitudes(s, buf.as_mut_ptr(), 10), BtStatus::BufferTooSmall);
        assert_eq!(bt_state_amplitudes(s, buf.as_mut_ptr(), buf.len()), BtStatus::Ok);
        let norm: f64 = buf.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-9);

        let mut f = 0.0;
        assert_eq!(bt_state_fidelity(s, s, &mut f), BtStatus::Ok);
        assert!((f - 1.0).abs() < 1e-12);

        let mut json = ptr::null_mut();
        assert_eq!(bt_state_to_json(s, &mut json), BtStatus::Ok);
        assert!(CStr::from_ptr(json).to_str().unwrap().contains("\"n_max\":24"));
        bt_string_free(json);
        bt_state_free(s);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(bt_channel_generate(2.0, 0.0, 2.0, 0.0, 1.5, 1.0, 24, &mut s), BtStatus::Precondition);
        assert!(last_error().contains("frequency"));
        assert_eq!(bt_channel_generate(2.0, 0.0, 2.0, 0.0, 1.0, 1.0, 24, ptr::null_mut()), BtStatus::NullPointer);
        assert_eq!(bt_state_fidelity(ptr::null(), ptr::null(), ptr::null_mut()), BtStatus::NullPointer);

        let mut p = ptr::null_mut();
        let bad = CString::new(r#"{"trails": 3}"#).unwrap();
        assert_eq!(bt_protocol_from_json(bad.as_ptr(), &mut p), BtStatus::Config);
        let bad = CString::new(r#"{"p_d": 2.0}"#).unwrap();
        assert_eq!(bt_protocol_from_json(bad.as_ptr(), &mut p), BtStatus::Config);
        assert!(p.is_null());
    }
    assert_eq!(unsafe { bt_total_efficiency(1.0, 1.0, &mut 0.0) }, BtStatus::Ok);
    let kind = CString::new("telepathy").unwrap();
    assert_eq!(unsafe { bt_p_even(kind.as_ptr(), 1.0, &mut 0.0) }, BtStatus::Config);
}

#[test]
fn scalar_functions() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(bt_total_efficiency(0.0, 0.0, &mut x), BtStatus::Ok);
        assert_eq!(x, 0.25);
        let kind = CString::new("coherent").unwrap();
        assert_eq!(bt_p_even(kind.as_ptr(), 1.0, &mut x), BtStatus::Ok);
        assert!((x - (1.0 + (-2.0f64).exp()) / 2.0).abs() < 1e-15);
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(bt_lattice_bands(1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, &mut lo, &mut hi), BtStatus::Ok);
        assert!((lo + 8.0 / 3.0).abs() < 1e-12 && (hi - lo).abs() < 1e-12);
    }
}

#[test]
fn protocol_run_matches_library() {
    let json = CString::new(r#"{"trials": 300, "seed": 2, "p_d": 0.5}"#).unwrap();
    let mut p = ptr::null_mut();
    let mut sum = BtSummary::default();
    unsafe {
        assert_eq!(bt_protocol_from_json(json.as_ptr(), &mut p), BtStatus::Ok);
        assert_eq!(bt_protocol_run(p, &mut sum), BtStatus::Ok);
        bt_protocol_free(p);
    }
    let cfg = bec_teleport::protocol::ProtocolConfig { trials: 300, seed: 2, p_d: 0.5, ..Default::default() };
    let (_, s) = bec_teleport::protocol::run_protocol(&cfg).unwrap();
    assert_eq!(sum.success_rate, s.success_rate);
    assert_eq!(sum.branch_histogram, s.branch_histogram.map(|n| n as u64));
}

#[test]
fn c_program_links_against_static_library() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // tests run from <target>/<profile>/deps
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libbec_teleport_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with(env!("CARGO_PKG_VERSION")));
}
