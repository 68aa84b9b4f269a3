//! C interface to the symbolic analyzer, loop conversion and the built-in
//! n-gram classifier.
//!
//! Every fallible call returns a [`TcpredStatus`]. On failure, a message is
//! kept per thread and can be read with [`tcpred_last_error`] until the next
//! failing call on that thread. Strings returned through out-parameters are
//! owned by the caller and must be released with [`tcpred_string_free`].
//! Handles are released with their matching `_free` function. Passing NULL
//! to any `_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use tcpred::augment::loop_convert;
use tcpred::classifier::{BuiltinModel, Classifier, ClassifierError, Hyperparams};
use tcpred::symbolic::{analyze, Analysis};
use tcpred::{ClassSet, CodeSnippet, ComplexityClass, LabeledExample, Language};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcpredStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An enum value or count was out of range.
    InvalidArgument = 3,
    /// The snippet could not be parsed.
    AnalysisUnavailable = 4,
    /// The snippet has no loop that can be converted.
    UnsupportedLoopForm = 5,
    /// Fitting or prediction failed.
    ClassifierError = 6,
    /// A model file could not be read or written.
    Io = 7,
    /// The library panicked. The handle involved should be discarded.
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcpredLanguage {
    Python = 0,
    Java = 1,
}

/// Complexity classes in dominance order. Also the index into probability
/// arrays.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcpredClass {
    Constant = 0,
    Logn = 1,
    Linear = 2,
    Nlogn = 3,
    Quadratic = 4,
    Cubic = 5,
    Exponential = 6,
}

/// Number of complexity classes; the length of probability arrays.
pub const TCPRED_NUM_CLASSES: usize = 7;

/// Opaque analyzer verdict.
pub struct TcpredAnalysis {
    class: ComplexityClass,
    trace: Vec<CString>,
}

/// Opaque built-in classifier.
pub struct TcpredModel {
    inner: BuiltinModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(TcpredStatus, String);

type Outcome = Result<(), Failure>;

fn fail<T>(status: TcpredStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn to_cstring(s: &str) -> CString {
    CString::new(s.replace('\0', " ")).expect("no interior NUL")
}

fn guard(f: impl FnOnce() -> Outcome) -> TcpredStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => return TcpredStatus::Ok,
        Ok(Err(Failure(s, m))) => (s, m),
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            (TcpredStatus::Internal, m)
        }
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(to_cstring(&msg)));
    status
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(TcpredStatus::NullArgument, format!("{what} is NULL"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(TcpredStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller passes either NULL or a valid, writable pointer.
    unsafe { p.as_mut() }.map_or_else(
        || fail(TcpredStatus::NullArgument, format!("{what} is NULL")),
        Ok,
    )
}

fn language(l: u32) -> Result<Language, Failure> {
    match l {
        0 => Ok(Language::Python),
        1 => Ok(Language::Java),
        _ => fail(
            TcpredStatus::InvalidArgument,
            format!("unknown language {l}"),
        ),
    }
}

fn class(c: u32) -> Result<ComplexityClass, Failure> {
    ComplexityClass::ALL.get(c as usize).copied().map_or_else(
        || fail(TcpredStatus::InvalidArgument, format!("unknown class {c}")),
        Ok,
    )
}

fn c_class(c: ComplexityClass) -> TcpredClass {
    match c {
        ComplexityClass::Constant => TcpredClass::Constant,
        ComplexityClass::LogN => TcpredClass::Logn,
        ComplexityClass::Linear => TcpredClass::Linear,
        ComplexityClass::NLogN => TcpredClass::Nlogn,
        ComplexityClass::Quadratic => TcpredClass::Quadratic,
        ComplexityClass::Cubic => TcpredClass::Cubic,
        ComplexityClass::Exponential => TcpredClass::Exponential,
    }
}

fn classifier_failure(e: ClassifierError) -> Failure {
    let status = match e {
        ClassifierError::Persistence(_) => TcpredStatus::Io,
        _ => TcpredStatus::ClassifierError,
    };
    Failure(status, e.to_string())
}

/// The message of the most recent failure on this thread, or NULL. Valid
/// until the next failing call on the same thread. Do not free it.
#[no_mangle]
pub extern "C" fn tcpred_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tcpred_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Lowercase name of a class ("nlogn", ...), or NULL for an invalid value.
/// The string is static.
#[no_mangle]
pub extern "C" fn tcpred_class_name(class: TcpredClass) -> *const c_char {
    match class as u32 {
        0 => c"constant".as_ptr(),
        1 => c"logn".as_ptr(),
        2 => c"linear".as_ptr(),
        3 => c"nlogn".as_ptr(),
        4 => c"quadratic".as_ptr(),
        5 => c"cubic".as_ptr(),
        6 => c"exponential".as_ptr(),
        _ => ptr::null(),
    }
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string obtained from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tcpred_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the symbolic analyzer on `source`.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tcpred_analyze(
    source: *const c_char,
    language: TcpredLanguage,
    out: *mut *mut TcpredAnalysis,
) -> TcpredStatus {
    guard(|| {
        let out = self::out(out, "out")?;
        *out = ptr::null_mut();
        let snippet = CodeSnippet::new(
            "snippet",
            text(source, "source")?,
            self::language(language as u32)?,
        );
        let Analysis { class, trace } = analyze(&snippet)
            .or_else(|e| fail(TcpredStatus::AnalysisUnavailable, e.to_string()))?;
        let trace = trace.iter().map(|l| to_cstring(l)).collect();
        *out = Box::into_raw(Box::new(TcpredAnalysis { class, trace }));
        Ok(())
    })
}

/// The class of an analysis.
///
/// # Safety
/// `analysis` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tcpred_analysis_class(analysis: *const TcpredAnalysis) -> TcpredClass {
    c_class((&*analysis).class)
}

/// Number of lines in the derivation trace.
///
/// # Safety
/// `analysis` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tcpred_analysis_trace_len(analysis: *const TcpredAnalysis) -> usize {
    (&*analysis).trace.len()
}

/// Line `i` of the derivation trace, or NULL when out of range. Owned by
/// the handle.
///
/// # Safety
/// `analysis` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tcpred_analysis_trace_line(
    analysis: *const TcpredAnalysis,
    i: usize,
) -> *const c_char {
    (&*analysis)
        .trace
        .get(i)
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// # Safety
/// `analysis` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tcpred_analysis_free(analysis: *mut TcpredAnalysis) {
    if !analysis.is_null() {
        drop(Box::from_raw(analysis));
    }
}

/// Rewrites the snippet's loops between `for` and `while` form. On success
/// `*out_code` receives the converted program.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out_code` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tcpred_loop_convert(
    source: *const c_char,
    language: TcpredLanguage,
    out_code: *mut *mut c_char,
) -> TcpredStatus {
    guard(|| {
        let out = out(out_code, "out_code")?;
        *out = ptr::null_mut();
        let snippet = CodeSnippet::new(
            "snippet",
            text(source, "source")?,
            self::language(language as u32)?,
        );
        // The label is carried through untouched; any value will do.
        let example = LabeledExample::new(snippet, ComplexityClass::Constant);
        let converted = loop_convert(&example).map_or_else(
            || fail(TcpredStatus::UnsupportedLoopForm, "no convertible loop"),
            Ok,
        )?;
        *out = to_cstring(&converted.snippet.source).into_raw();
        Ok(())
    })
}

/// Creates an unfitted model over `n_classes` classes with default
/// hyperparameters. `n_classes == 0` selects all seven classes.
///
/// # Safety
/// `classes` must point to `n_classes` values (or be NULL when zero); `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn tcpred_model_new(
    classes: *const TcpredClass,
    n_classes: usize,
    out: *mut *mut TcpredModel,
) -> TcpredStatus {
    guard(|| {
        let out = self::out(out, "out")?;
        *out = ptr::null_mut();
        let set = if n_classes == 0 {
            ClassSet::all()
        } else {
            if classes.is_null() {
                return fail(TcpredStatus::NullArgument, "classes is NULL");
            }
            let raw = std::slice::from_raw_parts(classes.cast::<u32>(), n_classes);
            ClassSet::new(
                raw.iter()
                    .map(|&c| class(c))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        };
        let inner = BuiltinModel::new(set, Hyperparams::default());
        *out = Box::into_raw(Box::new(TcpredModel { inner }));
        Ok(())
    })
}

/// Fits the model on `n` examples given as parallel arrays.
///
/// # Safety
/// `model` must be a live handle; each array must hold `n` valid entries.
#[no_mangle]
pub unsafe extern "C" fn tcpred_model_fit(
    model: *mut TcpredModel,
    sources: *const *const c_char,
    languages: *const TcpredLanguage,
    labels: *const TcpredClass,
    n: usize,
    seed: u64,
) -> TcpredStatus {
    guard(|| {
        let model = out(model, "model")?;
        if n > 0 && (sources.is_null() || languages.is_null() || labels.is_null()) {
            return fail(TcpredStatus::NullArgument, "an example array is NULL");
        }
        let mut examples = Vec::with_capacity(n);
        for i in 0..n {
            let src = text(*sources.add(i), "source")?;
            let lang = language(*languages.cast::<u32>().add(i))?;
            let label = class(*labels.cast::<u32>().add(i))?;
            examples.push(LabeledExample::new(
                CodeSnippet::new(format!("ex{i}"), src, lang),
                label,
            ));
        }
        model.inner.fit(&examples, seed).map_err(classifier_failure)
    })
}

/// Predicts one snippet. `out_probs` receives `TCPRED_NUM_CLASSES` values
/// indexed by class, zero for classes outside the model's set. `out_class`
/// may be NULL.
///
/// # Safety
/// `model` must be a live handle; `out_probs` must have room for seven
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn tcpred_model_predict(
    model: *const TcpredModel,
    source: *const c_char,
    language: TcpredLanguage,
    out_probs: *mut f64,
    out_class: *mut TcpredClass,
) -> TcpredStatus {
    guard(|| {
        let Some(model) = model.as_ref() else {
            return fail(TcpredStatus::NullArgument, "model is NULL");
        };
        if out_probs.is_null() {
            return fail(TcpredStatus::NullArgument, "out_probs is NULL");
        }
        let snippet = CodeSnippet::new(
            "snippet",
            text(source, "source")?,
            self::language(language as u32)?,
        );
        let dist = model
            .inner
            .predict_one(&snippet)
            .map_err(classifier_failure)?;
        let probs = std::slice::from_raw_parts_mut(out_probs, TCPRED_NUM_CLASSES);
        for (slot, c) in probs.iter_mut().zip(ComplexityClass::ALL) {
            *slot = dist.prob(c);
        }
        if let Some(oc) = out_class.as_mut() {
            *oc = c_class(dist.argmax());
        }
        Ok(())
    })
}

/// Writes the model to `path` as JSON.
///
/// # Safety
/// `model` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tcpred_model_save(
    model: *const TcpredModel,
    path: *const c_char,
) -> TcpredStatus {
    guard(|| {
        let Some(model) = model.as_ref() else {
            return fail(TcpredStatus::NullArgument, "model is NULL");
        };
        model
            .inner
            .save(Path::new(text(path, "path")?))
            .map_err(classifier_failure)
    })
}

/// Reads a model written by `tcpred_model_save` or `tcpred train`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tcpred_model_load(
    path: *const c_char,
    out: *mut *mut TcpredModel,
) -> TcpredStatus {
    guard(|| {
        let out = self::out(out, "out")?;
        *out = ptr::null_mut();
        let inner =
            BuiltinModel::load(Path::new(text(path, "path")?)).map_err(classifier_failure)?;
        *out = Box::into_raw(Box::new(TcpredModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tcpred_model_free(model: *mut TcpredModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
