//! C ABI over the nuclab core library.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`NuclabStatus`]; on failure the message is kept per thread and read
//! with [`nuclab_last_error_message`]. Panics are caught and reported as
//! [`NuclabStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{CStr, CString, c_char};
use std::panic::{AssertUnwindSafe, catch_unwind};
use std::path::Path;
use std::ptr;

use nuclab::Error;
use nuclab::constructions::{Construction, ConstructionParams, construct};
use nuclab::energy::{evaluate, spectral_elastic};
use nuclab::fourier_lab::{Cone, cone_residual, low_frequency_mass, lower_exponent};
use nuclab::geometry::{GridField, rasterize, read_field, write_field};
use nuclab::scaling::{PredictKey, predicted_scaling};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NuclabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parameter = 3,
    UnknownFamily = 4,
    Geometry = 5,
    Admissibility = 6,
    Resolution = 7,
    Format = 8,
    Infeasible = 9,
    Precondition = 10,
    Io = 11,
    Other = 12,
    Panic = 13,
}

/// Exact energy of a construction.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NuclabEnergy {
    pub elastic: f64,
    pub surface: f64,
    pub epsilon: f64,
    pub total: f64,
    /// Support volume.
    pub volume: f64,
}

/// Opaque construction handle.
pub struct NuclabConstruction(Construction);

/// Opaque periodic grid field handle.
pub struct NuclabField(GridField);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NuclabStatus {
    match e {
        Error::Parameter(_) | Error::DimensionMismatch { .. } | Error::OutOfRegime(_) => NuclabStatus::Parameter,
        Error::UnknownFamily(_) => NuclabStatus::UnknownFamily,
        Error::Geometry(_) | Error::InconsistentData(_) => NuclabStatus::Geometry,
        Error::Admissibility(_) => NuclabStatus::Admissibility,
        Error::Resolution(_) => NuclabStatus::Resolution,
        Error::Format(_) | Error::UnsupportedVersion(_) | Error::Json(_) => NuclabStatus::Format,
        Error::Infeasible { .. } | Error::InsufficientData { .. } => NuclabStatus::Infeasible,
        Error::Precondition(_) | Error::UnsupportedRender(_) => NuclabStatus::Precondition,
        Error::Io(_) => NuclabStatus::Io,
    }
}

struct Fail(NuclabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail(NuclabStatus::Format, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NuclabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            NuclabStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            NuclabStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(NuclabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(NuclabStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s).map(CString::into_raw).map_err(|_| Fail(NuclabStatus::Other, "interior NUL".into()))
}

/// Message of the last failed call on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn nuclab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn nuclab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nuclab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a construction from JSON parameters such as
/// `{"family": "lens21", "lambda": 0.5, "L": 2, "H": 4}`.
///
/// # Safety
/// `params_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nuclab_construction_new(
    params_json: *const c_char,
    out: *mut *mut NuclabConstruction,
) -> NuclabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let params: ConstructionParams = serde_json::from_str(str_arg(params_json, "params_json")?)?;
        let c = construct(&params)?;
        *out = Box::into_raw(Box::new(NuclabConstruction(c)));
        Ok(())
    })
}

/// # Safety
/// `c` must come from [`nuclab_construction_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nuclab_construction_free(c: *mut NuclabConstruction) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Dimension, target volume and cell count of a construction.
///
/// # Safety
/// `c` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn nuclab_construction_info(
    c: *const NuclabConstruction,
    n: *mut u32,
    volume: *mut f64,
    cells: *mut usize,
) -> NuclabStatus {
    guard(|| {
        let c = &handle(c, "construction")?.0;
        *out_arg(n, "n")? = c.scene.n as u32;
        *out_arg(volume, "volume")? = c.volume;
        *out_arg(cells, "cells")? = c.scene.cells.len();
        Ok(())
    })
}

/// Exact energy at surface weight `epsilon`, after the admissibility check.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nuclab_construction_energy(
    c: *const NuclabConstruction,
    epsilon: f64,
    out: *mut NuclabEnergy,
) -> NuclabStatus {
    guard(|| {
        let c = &handle(c, "construction")?.0;
        let out = out_arg(out, "out")?;
        let (e, _) = evaluate(&c.scene, epsilon)?;
        *out = NuclabEnergy {
            elastic: e.elastic,
            surface: e.surface,
            epsilon: e.epsilon,
            total: e.total,
            volume: e.volume,
        };
        Ok(())
    })
}

/// Scene of a construction as JSON. Free with [`nuclab_string_free`].
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nuclab_construction_json(
    c: *const NuclabConstruction,
    out: *mut *mut c_char,
) -> NuclabStatus {
    guard(|| {
        let c = &handle(c, "construction")?.0;
        let out = out_arg(out, "out")?;
        *out = c_string(serde_json::to_string(c)?)?;
        Ok(())
    })
}

/// Samples the phase indicator on a periodic grid.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nuclab_construction_rasterize(
    c: *const NuclabConstruction,
    resolution: u32,
    padding: f64,
    out: *mut *mut NuclabField,
) -> NuclabStatus {
    guard(|| {
        let c = &handle(c, "construction")?.0;
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let r = rasterize(&c.scene, resolution as usize, padding)?;
        *out = Box::into_raw(Box::new(NuclabField(r.field)));
        Ok(())
    })
}

/// Reads a field file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nuclab_field_read(path: *const c_char, out: *mut *mut NuclabField) -> NuclabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let f = read_field(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(NuclabField(f)));
        Ok(())
    })
}

/// Writes a field file.
///
/// # Safety
/// `f` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nuclab_field_write(f: *const NuclabField, path: *const c_char) -> NuclabStatus {
    guard(|| {
        let f = &handle(f, "field")?.0;
        write_field(f, Path::new(str_arg(path, "path")?))?;
        Ok(())
    })
}

/// # Safety
/// `f` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nuclab_field_free(f: *mut NuclabField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Dimension, points per axis and box side.
///
/// # Safety
/// `f` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn nuclab_field_dims(
    f: *const NuclabField,
    n: *mut u32,
    resolution: *mut u32,
    side: *mut f64,
) -> NuclabStatus {
    guard(|| {
        let f = &handle(f, "field")?.0;
        *out_arg(n, "n")? = f.n as u32;
        *out_arg(resolution, "resolution")? = f.resolution as u32;
        *out_arg(side, "side")? = f.side;
        Ok(())
    })
}

/// Read-only view of component `j` (`resolutionⁿ` values, first axis most
/// significant). Valid while the handle lives.
///
/// # Safety
/// `f` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn nuclab_field_component(
    f: *const NuclabField,
    j: u32,
    data: *mut *const f64,
    len: *mut usize,
) -> NuclabStatus {
    guard(|| {
        let f = &handle(f, "field")?.0;
        let c = f.components.get(j as usize).ok_or_else(|| {
            Fail::from(Error::DimensionMismatch { expected: f.n, got: j as usize + 1 })
        })?;
        *out_arg(data, "data")? = c.as_ptr();
        *out_arg(len, "len")? = c.len();
        Ok(())
    })
}

/// Relaxed elastic energy of the field and its zero-frequency term.
///
/// # Safety
/// `f` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn nuclab_spectral_elastic(
    f: *const NuclabField,
    elastic: *mut f64,
    k0_term: *mut f64,
) -> NuclabStatus {
    guard(|| {
        let f = &handle(f, "field")?.0;
        let s = spectral_elastic(f)?;
        *out_arg(elastic, "elastic")? = s.elastic;
        *out_arg(k0_term, "k0_term")? = s.k0_term;
        Ok(())
    })
}

/// Spectral mass of component `component` outside the cone around `axis`.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nuclab_cone_residual(
    f: *const NuclabField,
    axis: u32,
    mu: f64,
    radius: f64,
    component: u32,
    out: *mut f64,
) -> NuclabStatus {
    guard(|| {
        let f = &handle(f, "field")?.0;
        let cone = Cone::new(axis as usize, mu, radius)?;
        *out_arg(out, "out")? = cone_residual(f, &cone, component as usize)?;
        Ok(())
    })
}

/// Low-frequency mass of the `axis` component and its a-priori bound.
///
/// # Safety
/// `f` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn nuclab_low_frequency_mass(
    f: *const NuclabField,
    axis: u32,
    mu: f64,
    radius: f64,
    mass: *mut f64,
    bound: *mut f64,
) -> NuclabStatus {
    guard(|| {
        let f = &handle(f, "field")?.0;
        let lf = low_frequency_mass(f, &Cone::new(axis as usize, mu, radius)?)?;
        *out_arg(mass, "mass")? = lf.mass;
        *out_arg(bound, "bound")? = lf.bound;
        Ok(())
    })
}

/// Large-volume exponent of an order-`m` chain in dimension `n`, as a
/// reduced fraction.
///
/// # Safety
/// The output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn nuclab_lower_exponent(n: u32, m: u32, num: *mut i64, den: *mut i64) -> NuclabStatus {
    guard(|| {
        let r = lower_exponent(n as usize, m as usize)?;
        *out_arg(num, "num")? = *r.numer();
        *out_arg(den, "den")? = *r.denom();
        Ok(())
    })
}

/// Predicted exponents as JSON for a key such as
/// `{"family": {"family": "lens21", "n": null}}` or `{"chain": {"n": 3, "m": 2}}`.
/// Free the result with [`nuclab_string_free`].
///
/// # Safety
/// `key_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nuclab_predicted_scaling(key_json: *const c_char, out: *mut *mut c_char) -> NuclabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let key: PredictKey = serde_json::from_str(str_arg(key_json, "key_json")?)?;
        *out = c_string(serde_json::to_string(&predicted_scaling(&key)?)?)?;
        Ok(())
    })
}
