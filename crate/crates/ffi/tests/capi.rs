use std::ffi::{CStr, CString, c_char};
use std::ptr;

use nuclab_ffi::*;

fn last_error() -> String {
    let p = nuclab_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn build(json: &str) -> Result<*mut NuclabConstruction, (NuclabStatus, String)> {
    let s = CString::new(json).unwrap();
    let mut h = ptr::null_mut();
    match unsafe { nuclab_construction_new(s.as_ptr(), &mut h) } {
        NuclabStatus::Ok => Ok(h),
        code => {
            assert!(h.is_null());
            Err((code, last_error()))
        }
    }
}

#[test]
fn lens21_energy_through_the_c_api() {
    let c = build(r#"{"family": "lens21", "lambda": 0.5, "L": 2, "H": 4}"#).unwrap();
    let mut e = NuclabEnergy::default();
    assert_eq!(unsafe { nuclab_construction_energy(c, 1.0, &mut e) }, NuclabStatus::Ok);
    assert!(nuclab_last_error_message().is_null());
    assert!((e.elastic - 0.25).abs() < 1e-12);
    assert!((e.total - e.elastic - e.surface).abs() < 1e-12);
    let (mut n, mut v, mut cells) = (0u32, 0.0, 0usize);
    assert_eq!(unsafe { nuclab_construction_info(c, &mut n, &mut v, &mut cells) }, NuclabStatus::Ok);
    assert_eq!((n, v), (2, 4.0));
    assert!(cells > 0);

    let mut s: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { nuclab_construction_json(c, &mut s) }, NuclabStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { nuclab_string_free(s) };
    assert!(text.contains("\"lens21\""));
    unsafe { nuclab_construction_free(c) };
}

#[test]
fn field_round_trip_and_diagnostics() {
    let c = build(r#"{"family": "lens21", "lambda": 0.5, "L": 2, "H": 4}"#).unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { nuclab_construction_rasterize(c, 64, 2.0, &mut f) }, NuclabStatus::Ok);
    unsafe { nuclab_construction_free(c) };

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("f.nucf").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { nuclab_field_write(f, path.as_ptr()) }, NuclabStatus::Ok);
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { nuclab_field_read(path.as_ptr(), &mut g) }, NuclabStatus::Ok);

    let (mut n, mut res, mut side) = (0, 0, 0.0);
    assert_eq!(unsafe { nuclab_field_dims(g, &mut n, &mut res, &mut side) }, NuclabStatus::Ok);
    assert_eq!((n, res, side), (2, 64, 8.0));
    let (mut a, mut la, mut b, mut lb) = (ptr::null(), 0, ptr::null(), 0);
    unsafe {
        assert_eq!(nuclab_field_component(f, 0, &mut a, &mut la), NuclabStatus::Ok);
        assert_eq!(nuclab_field_component(g, 0, &mut b, &mut lb), NuclabStatus::Ok);
        assert_eq!(std::slice::from_raw_parts(a, la), std::slice::from_raw_parts(b, lb));
        assert_eq!(nuclab_field_component(g, 5, &mut b, &mut lb), NuclabStatus::Parameter);
    }

    let (mut el, mut k0) = (0.0, 0.0);
    assert_eq!(unsafe { nuclab_spectral_elastic(g, &mut el, &mut k0) }, NuclabStatus::Ok);
    assert!(el > 0.0 && el <= 0.25 * 1.1);
    let mut r = 0.0;
    assert_eq!(unsafe { nuclab_cone_residual(g, 0, 0.3, 1.0, 0, &mut r) }, NuclabStatus::Ok);
    assert!(r >= 0.0);
    let (mut m, mut bound) = (0.0, 0.0);
    assert_eq!(unsafe { nuclab_low_frequency_mass(g, 0, 0.5, 2.0, &mut m, &mut bound) }, NuclabStatus::Ok);
    assert!(m <= bound);
    assert_eq!(unsafe { nuclab_cone_residual(g, 0, 2.0, 1.0, 0, &mut r) }, NuclabStatus::Parameter);
    assert!(last_error().contains("mu"));
    unsafe {
        nuclab_field_free(f);
        nuclab_field_free(g);
    }
}

#[test]
fn error_codes() {
    let (code, msg) = build(r#"{"family": "nope"}"#).unwrap_err();
    assert_eq!(code, NuclabStatus::Format);
    assert!(msg.contains("nope"));
    let (code, msg) = build(r#"{"family": "lens21", "lambda": 1.5, "L": 2, "H": 4}"#).unwrap_err();
    assert_eq!(code, NuclabStatus::Parameter);
    assert!(msg.contains("lambda"));
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { nuclab_construction_new(ptr::null(), &mut h) }, NuclabStatus::NullPointer);
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { nuclab_construction_new(bad.as_ptr().cast(), &mut h) }, NuclabStatus::InvalidUtf8);
    let mut e = NuclabEnergy::default();
    assert_eq!(unsafe { nuclab_construction_energy(ptr::null(), 1.0, &mut e) }, NuclabStatus::NullPointer);
    let missing = CString::new("/nonexistent/f.nucf").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { nuclab_field_read(missing.as_ptr(), &mut f) }, NuclabStatus::Io);
    unsafe {
        nuclab_construction_free(ptr::null_mut());
        nuclab_field_free(ptr::null_mut());
        nuclab_string_free(ptr::null_mut());
    }
}

#[test]
fn exponents() {
    let (mut num, mut den) = (0, 0);
    assert_eq!(unsafe { nuclab_lower_exponent(3, 2, &mut num, &mut den) }, NuclabStatus::Ok);
    assert_eq!((num, den), (9, 11));
    assert_eq!(unsafe { nuclab_lower_exponent(1, 2, &mut num, &mut den) }, NuclabStatus::Parameter);

    let key = CString::new(r#"{"chain": {"n": 2, "m": 2}}"#).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { nuclab_predicted_scaling(key.as_ptr(), &mut s) }, NuclabStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(s) }.to_str().unwrap()).unwrap();
    unsafe { nuclab_string_free(s) };
    assert_eq!(v["large_volume"], serde_json::json!([5, 7]));
    let key = CString::new(r#"{"family": {"family": "nope", "n": null}}"#).unwrap();
    assert_eq!(unsafe { nuclab_predicted_scaling(key.as_ptr(), &mut s) }, NuclabStatus::UnknownFamily);
    let v = unsafe { CStr::from_ptr(nuclab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
