//! C ABI over the `contextuality` library.
//!
//! Scenarios are opaque handles. Everything else crosses the boundary as
//! NUL-terminated UTF-8 JSON in the same shapes the `ctxkit` tool reads
//! and writes. Every call returns a [`CtxStatus`]; on failure
//! [`ctx_last_error`] describes what went wrong. Strings returned through
//! `out` parameters are owned by the caller and released with
//! [`ctx_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use contextuality::analysis::{classify_model, enumerate_extremal, EnumerationMethod};
use contextuality::exactmath::rational::format_vector;
use contextuality::exactmath::null_space;
use contextuality::io::{model_from_value, parse_json, realization_from_value, scenario_from_value, ModelFile};
use contextuality::quantum::{certify_trivial, validate_realization, Tolerances};
use contextuality::scenario::{ContextualityScenario, ProbabilisticModel};
use contextuality::search::{dykstra_find_realization, SearchConfig};
use contextuality::Error;
use serde_json::{json, Value};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or rational text.
    Parse = 3,
    /// Well-formed input that violates a precondition.
    InvalidInput = 4,
    /// The computation itself failed.
    Domain = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtxMethod {
    DoubleDescription = 0,
    Support = 1,
}

/// Opaque scenario handle.
pub struct CtxScenario {
    inner: ContextualityScenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(CtxStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse(_) => CtxStatus::Parse,
            Error::Dimension(_)
            | Error::UnknownVertex(_)
            | Error::InvalidScenario(_)
            | Error::InvalidModel(_)
            | Error::Signaling(_)
            | Error::Unsupported(_)
            | Error::NotHermitian(_)
            | Error::InvalidRealization(_)
            | Error::InvalidPovm(_) => CtxStatus::InvalidInput,
            Error::Io(_) => CtxStatus::Domain,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CtxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CtxStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CtxStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(CtxStatus::NullPointer, format!("{what} is NULL")));
    }
    // SAFETY: the caller passes a NUL-terminated string that outlives the call.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Fail(CtxStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn read_json(p: *const c_char, what: &str) -> Result<Value, Fail> {
    Ok(parse_json(unsafe { read_str(p, what)? })?)
}

unsafe fn scenario<'a>(h: *const CtxScenario) -> Result<&'a ContextualityScenario, Fail> {
    if h.is_null() {
        return Err(Fail(CtxStatus::NullPointer, "scenario handle is NULL".into()));
    }
    // SAFETY: non-null handles come from ctx_scenario_from_json and are live.
    Ok(unsafe { &(*h).inner })
}

unsafe fn write_json(out: *mut *mut c_char, v: &Value) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(CtxStatus::NullPointer, "output pointer is NULL".into()));
    }
    let text = CString::new(serde_json::to_string(v).expect("JSON values serialize")).expect("JSON has no NUL");
    // SAFETY: out is non-null and writable per the contract.
    unsafe { *out = text.into_raw() };
    Ok(())
}

unsafe fn model(h: &ContextualityScenario, p: *const c_char) -> Result<ProbabilisticModel, Fail> {
    Ok(model_from_value(h, unsafe { read_json(p, "model")? })?)
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ctx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses and validates a scenario (`{"vertices": [...], "edges": [[...]]}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ctx_scenario_from_json(json: *const c_char, out: *mut *mut CtxScenario) -> CtxStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail(CtxStatus::NullPointer, "output pointer is NULL".into()));
        }
        let inner = scenario_from_value(unsafe { read_json(json, "scenario")? })?;
        unsafe { *out = Box::into_raw(Box::new(CtxScenario { inner })) };
        Ok(())
    })
}

/// # Safety
/// `h` must be NULL or a handle from [`ctx_scenario_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ctx_scenario_free(h: *mut CtxScenario) {
    if !h.is_null() {
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Number of vertices, or 0 for a NULL handle.
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ctx_scenario_num_vertices(h: *const CtxScenario) -> usize {
    unsafe { h.as_ref() }.map_or(0, |s| s.inner.num_vertices())
}

/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ctx_scenario_num_edges(h: *const CtxScenario) -> usize {
    unsafe { h.as_ref() }.map_or(0, |s| s.inner.num_edges())
}

/// Extremal models as `{"count": n, "vertices": [{"values": ..., "vector": ...}]}`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ctx_enumerate_extremal(h: *const CtxScenario, method: CtxMethod, out: *mut *mut c_char) -> CtxStatus {
    guard(|| {
        let h = unsafe { scenario(h)? };
        let method = match method {
            CtxMethod::DoubleDescription => EnumerationMethod::Dd,
            CtxMethod::Support => EnumerationMethod::Support,
        };
        let set = enumerate_extremal(h, method).map_err(|e| Fail(CtxStatus::Domain, e.to_string()))?;
        let vertices: Vec<Value> = set
            .iter()
            .map(|v| {
                let mut m = serde_json::to_value(ModelFile::from_model(h, &ProbabilisticModel::new(v.clone()))).expect("serializable");
                m["vector"] = json!(format_vector(v));
                m
            })
            .collect();
        unsafe { write_json(out, &json!({ "count": vertices.len(), "vertices": vertices })) }
    })
}

/// Classification report for a model file or behavior file.
///
/// # Safety
/// `h` live; `model_json` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ctx_classify(h: *const CtxScenario, model_json: *const c_char, out: *mut *mut c_char) -> CtxStatus {
    guard(|| {
        let h = unsafe { scenario(h)? };
        let p = unsafe { model(h, model_json)? };
        let report = classify_model(h, &p).map_err(|e| Fail(CtxStatus::Domain, e.to_string()))?;
        unsafe { write_json(out, &serde_json::to_value(report).expect("serializable")) }
    })
}

/// Basis of the kernel of the incidence matrix, as vector strings.
///
/// # Safety
/// `h` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ctx_null_space(h: *const CtxScenario, out: *mut *mut c_char) -> CtxStatus {
    guard(|| {
        let h = unsafe { scenario(h)? };
        let basis: Vec<String> = null_space(&h.incidence_matrix()).iter().map(|v| format_vector(v)).collect();
        unsafe { write_json(out, &json!(basis)) }
    })
}

/// Triviality certificate of a realization (or a `search` output) against
/// a model, with certificate tolerance `tol`.
///
/// # Safety
/// `h` live; both strings NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ctx_certify_trivial(
    h: *const CtxScenario,
    model_json: *const c_char,
    realization_json: *const c_char,
    tol: f64,
    out: *mut *mut c_char,
) -> CtxStatus {
    guard(|| {
        let h = unsafe { scenario(h)? };
        let p = unsafe { model(h, model_json)? };
        let r = realization_from_value(h, unsafe { read_json(realization_json, "realization")? })?;
        let tolerances = Tolerances {
            cert: tol,
            ..Tolerances::default()
        };
        let violations = validate_realization(h, &r, &tolerances);
        if let Some(v) = violations.first() {
            return Err(Fail(CtxStatus::InvalidInput, format!("invalid realization: {v}")));
        }
        let cert = certify_trivial(h, &p, &r, &tolerances)?;
        unsafe { write_json(out, &serde_json::to_value(cert).expect("serializable")) }
    })
}

/// One Dykstra run with the maximally mixed state of dimension `dim`.
///
/// # Safety
/// `h` live; `model_json` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ctx_search(
    h: *const CtxScenario,
    model_json: *const c_char,
    dim: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
    out: *mut *mut c_char,
) -> CtxStatus {
    guard(|| {
        let h = unsafe { scenario(h)? };
        let p = unsafe { model(h, model_json)? };
        let config = SearchConfig {
            max_iter,
            tol,
            ..SearchConfig::new(dim).with_seed(seed)
        };
        let res = dykstra_find_realization(h, &p, &config)?;
        let r = res.realization();
        let value = json!({
            "converged": res.converged,
            "iterations": res.iterations,
            "affine_residual": res.affine_residual,
            "psd_residual": res.psd_residual,
            "realization": serde_json::to_value(r.to_file(h)).expect("serializable"),
        });
        unsafe { write_json(out, &value) }
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ctx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
