//! C ABI over the `htnml` engine.
//!
//! Every function returns an [`HtnmlStatus`]; on failure a message is kept in
//! thread-local storage and can be read with [`htnml_last_error_message`].
//! Datasets and spaces are opaque handles released with their `_free`
//! function. Strings handed out by the library are released with
//! [`htnml_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ndarray::ArrayView2;

use htnml::dataset::{parse_arff, LabeledDataset};
use htnml::harness::{run_experiment, ExperimentConfig, HarnessError};
use htnml::metrics;
use htnml::space::{default_space, parse_space, ComponentSpace};
use htnml::stats::welch_t_test;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HtnmlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ParseError = 4,
    SpaceError = 5,
    SampleTooSmall = 6,
    ConfigError = 7,
    IoError = 8,
    SearchFailed = 9,
    Panic = 10,
}

/// Test-set measures for one batch of predictions.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HtnmlMetrics {
    pub subset_zero_one: f64,
    pub exact_match_accuracy: f64,
    pub hamming_loss: f64,
    pub instance_f_measure: f64,
    pub rank_loss: f64,
    pub rank_loss_raw: f64,
    pub rank_loss_undefined_instances: usize,
}

/// Opaque parsed dataset.
pub struct HtnmlDataset(LabeledDataset);

/// Opaque component space.
pub struct HtnmlSpace(ComponentSpace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn fail(status: HtnmlStatus, message: impl Into<String>) -> HtnmlStatus {
    set_error(message.into());
    status
}

/// Runs `body`, turning panics into [`HtnmlStatus::Panic`].
fn guarded(body: impl FnOnce() -> HtnmlStatus) -> HtnmlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(HtnmlStatus::Panic, text)
        }
    }
}

unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, HtnmlStatus> {
    if text.is_null() {
        return Err(fail(HtnmlStatus::NullArgument, "string argument is null"));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|e| fail(HtnmlStatus::InvalidUtf8, e.to_string()))
}

fn into_c_string(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn htnml_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn htnml_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn htnml_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Parses multi-label ARFF text into a new dataset handle.
#[no_mangle]
pub unsafe extern "C" fn htnml_dataset_parse_arff(text: *const c_char, out: *mut *mut HtnmlDataset) -> HtnmlStatus {
    guarded(|| {
        if out.is_null() {
            return fail(HtnmlStatus::NullArgument, "output pointer is null");
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match parse_arff(text) {
            Ok(data) => {
                *out = Box::into_raw(Box::new(HtnmlDataset(data)));
                HtnmlStatus::Ok
            }
            Err(e) => fail(HtnmlStatus::ParseError, e.to_string()),
        }
    })
}

/// Instance count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn htnml_dataset_n_instances(data: *const HtnmlDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.n_instances())
}

/// Label count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn htnml_dataset_n_labels(data: *const HtnmlDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.n_labels())
}

/// Feature attribute count (before encoding), or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn htnml_dataset_n_attributes(data: *const HtnmlDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.attributes.len())
}

/// Copies the `n × m` label matrix, row-major, into `out` (`len` entries).
#[no_mangle]
pub unsafe extern "C" fn htnml_dataset_labels(data: *const HtnmlDataset, out: *mut u8, len: usize) -> HtnmlStatus {
    guarded(|| {
        let Some(data) = data.as_ref() else {
            return fail(HtnmlStatus::NullArgument, "dataset handle is null");
        };
        let labels = &data.0.labels;
        if out.is_null() {
            return fail(HtnmlStatus::NullArgument, "output buffer is null");
        }
        if len != labels.len() {
            return fail(
                HtnmlStatus::InvalidArgument,
                format!("buffer holds {len} entries, labels need {}", labels.len()),
            );
        }
        let dst = std::slice::from_raw_parts_mut(out, len);
        dst.iter_mut().zip(labels.iter()).for_each(|(d, v)| *d = *v);
        HtnmlStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn htnml_dataset_free(data: *mut HtnmlDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// The built-in component space.
#[no_mangle]
pub unsafe extern "C" fn htnml_space_default(out: *mut *mut HtnmlSpace) -> HtnmlStatus {
    guarded(|| {
        if out.is_null() {
            return fail(HtnmlStatus::NullArgument, "output pointer is null");
        }
        *out = Box::into_raw(Box::new(HtnmlSpace(default_space())));
        HtnmlStatus::Ok
    })
}

/// Parses a component space description.
#[no_mangle]
pub unsafe extern "C" fn htnml_space_parse(text: *const c_char, out: *mut *mut HtnmlSpace) -> HtnmlStatus {
    guarded(|| {
        if out.is_null() {
            return fail(HtnmlStatus::NullArgument, "output pointer is null");
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match parse_space(text) {
            Ok(space) => {
                *out = Box::into_raw(Box::new(HtnmlSpace(space)));
                HtnmlStatus::Ok
            }
            Err(e) => fail(HtnmlStatus::SpaceError, e.to_string()),
        }
    })
}

/// Number of distinct pipelines the space admits.
#[no_mangle]
pub unsafe extern "C" fn htnml_space_count_pipelines(space: *const HtnmlSpace, out: *mut u64) -> HtnmlStatus {
    guarded(|| {
        let Some(space) = space.as_ref() else {
            return fail(HtnmlStatus::NullArgument, "space handle is null");
        };
        if out.is_null() {
            return fail(HtnmlStatus::NullArgument, "output pointer is null");
        }
        match space.0.count_pipelines() {
            Ok(n) => {
                *out = n;
                HtnmlStatus::Ok
            }
            Err(e) => fail(HtnmlStatus::SpaceError, e.to_string()),
        }
    })
}

/// Method listing of the space as a new string.
#[no_mangle]
pub unsafe extern "C" fn htnml_space_listing(space: *const HtnmlSpace, out: *mut *mut c_char) -> HtnmlStatus {
    guarded(|| {
        let Some(space) = space.as_ref() else {
            return fail(HtnmlStatus::NullArgument, "space handle is null");
        };
        if out.is_null() {
            return fail(HtnmlStatus::NullArgument, "output pointer is null");
        }
        *out = into_c_string(space.0.listing());
        HtnmlStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn htnml_space_free(space: *mut HtnmlSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Measures for `n × m` row-major truth and prediction bit matrices and
/// label scores.
#[no_mangle]
pub unsafe extern "C" fn htnml_metrics(
    truth: *const u8,
    predicted: *const u8,
    scores: *const f64,
    n: usize,
    m: usize,
    out: *mut HtnmlMetrics,
) -> HtnmlStatus {
    guarded(|| {
        if truth.is_null() || predicted.is_null() || scores.is_null() || out.is_null() {
            return fail(HtnmlStatus::NullArgument, "matrix or output pointer is null");
        }
        if n == 0 || m == 0 {
            return fail(HtnmlStatus::InvalidArgument, "matrices must have at least one row and column");
        }
        let t = std::slice::from_raw_parts(truth, n * m);
        let p = std::slice::from_raw_parts(predicted, n * m);
        let s = std::slice::from_raw_parts(scores, n * m);
        if t.iter().chain(p).any(|&v| v > 1) {
            return fail(HtnmlStatus::InvalidArgument, "label matrices must hold 0 or 1");
        }
        let view = |x| ArrayView2::from_shape((n, m), x).expect("length checked");
        let summary = metrics::summarize(view(t), view(p), ArrayView2::from_shape((n, m), s).expect("length checked"))
            .expect("shapes agree");
        *out = HtnmlMetrics {
            subset_zero_one: summary.subset_zero_one,
            exact_match_accuracy: summary.exact_match_accuracy,
            hamming_loss: summary.hamming_loss,
            instance_f_measure: summary.instance_f_measure,
            rank_loss: summary.rank_loss,
            rank_loss_raw: summary.rank_loss_raw,
            rank_loss_undefined_instances: summary.rank_loss_undefined_instances,
        };
        HtnmlStatus::Ok
    })
}

/// Welch's unequal-variance t-test; writes the statistic and two-sided p.
#[no_mangle]
pub unsafe extern "C" fn htnml_welch_t_test(
    a: *const f64,
    a_len: usize,
    b: *const f64,
    b_len: usize,
    t_out: *mut f64,
    p_out: *mut f64,
) -> HtnmlStatus {
    guarded(|| {
        if a.is_null() || b.is_null() || t_out.is_null() || p_out.is_null() {
            return fail(HtnmlStatus::NullArgument, "sample or output pointer is null");
        }
        let a = std::slice::from_raw_parts(a, a_len);
        let b = std::slice::from_raw_parts(b, b_len);
        match welch_t_test(a, b) {
            Ok(w) => {
                *t_out = w.t;
                *p_out = w.p;
                HtnmlStatus::Ok
            }
            Err(e) => fail(HtnmlStatus::SampleTooSmall, e.to_string()),
        }
    })
}

/// Runs one experiment from a JSON configuration and returns the JSON
/// report as a new string.
#[no_mangle]
pub unsafe extern "C" fn htnml_run_experiment_json(config: *const c_char, report: *mut *mut c_char) -> HtnmlStatus {
    guarded(|| {
        if report.is_null() {
            return fail(HtnmlStatus::NullArgument, "output pointer is null");
        }
        let text = match read_str(config) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let config: ExperimentConfig = match serde_json::from_str(text) {
            Ok(c) => c,
            Err(e) => return fail(HtnmlStatus::ConfigError, e.to_string()),
        };
        match run_experiment(&config) {
            Ok(r) => {
                *report = into_c_string(serde_json::to_string(&r).expect("report serializes"));
                HtnmlStatus::Ok
            }
            Err(e) => {
                let status = match &e {
                    HarnessError::Io { .. } => HtnmlStatus::IoError,
                    HarnessError::Dataset(_) | HarnessError::Json { .. } => HtnmlStatus::ParseError,
                    HarnessError::Space(_) => HtnmlStatus::SpaceError,
                    HarnessError::Config(_) => HtnmlStatus::ConfigError,
                    HarnessError::Search(_) => HtnmlStatus::SearchFailed,
                };
                fail(status, e.to_string())
            }
        }
    })
}
