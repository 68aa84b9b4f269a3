use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use tcpred_ffi::*;

const RUNNING_EXAMPLE: &str = include_str!("../../core/fixtures/running_example.py");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = tcpred_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn analyze_returns_class_and_trace() {
    let src = c(RUNNING_EXAMPLE);
    let mut a = ptr::null_mut();
    unsafe {
        assert_eq!(
            tcpred_analyze(src.as_ptr(), TcpredLanguage::Python, &mut a),
            TcpredStatus::Ok
        );
        assert_eq!(tcpred_analysis_class(a), TcpredClass::Nlogn);
        let n = tcpred_analysis_trace_len(a);
        assert!(n > 2);
        let last = CStr::from_ptr(tcpred_analysis_trace_line(a, n - 1))
            .to_str()
            .unwrap();
        assert_eq!(last, "classification: nlogn");
        assert!(tcpred_analysis_trace_line(a, n).is_null());
        tcpred_analysis_free(a);
    }
}

#[test]
fn unparseable_source_reports_analysis_unavailable() {
    let src = c("def (:\n");
    let mut a = ptr::null_mut();
    let status = unsafe { tcpred_analyze(src.as_ptr(), TcpredLanguage::Python, &mut a) };
    assert_eq!(status, TcpredStatus::AnalysisUnavailable);
    assert!(a.is_null());
    assert!(last_error().contains("analysis unavailable"));
}

#[test]
fn null_and_bad_utf8_arguments() {
    let mut a = ptr::null_mut();
    unsafe {
        assert_eq!(
            tcpred_analyze(ptr::null(), TcpredLanguage::Python, &mut a),
            TcpredStatus::NullArgument
        );
        let src = c("x = 1\n");
        assert_eq!(
            tcpred_analyze(src.as_ptr(), TcpredLanguage::Python, ptr::null_mut()),
            TcpredStatus::NullArgument
        );
        let bad = [0xffu8, 0xfe, 0];
        assert_eq!(
            tcpred_analyze(
                bad.as_ptr().cast::<c_char>(),
                TcpredLanguage::Python,
                &mut a
            ),
            TcpredStatus::InvalidUtf8
        );
        tcpred_analysis_free(ptr::null_mut());
        tcpred_model_free(ptr::null_mut());
        tcpred_string_free(ptr::null_mut());
    }
}

#[test]
fn loop_conversion_round_trips_through_c_strings() {
    let src = c("n = int(input())\nfor i in range(n):\n    print(i)\n");
    let mut code = ptr::null_mut();
    unsafe {
        assert_eq!(
            tcpred_loop_convert(src.as_ptr(), TcpredLanguage::Python, &mut code),
            TcpredStatus::Ok
        );
        let text = CStr::from_ptr(code).to_str().unwrap().to_string();
        tcpred_string_free(code);
        assert!(text.contains("while"), "{text}");
        let mut a = ptr::null_mut();
        let converted = c(&text);
        assert_eq!(
            tcpred_analyze(converted.as_ptr(), TcpredLanguage::Python, &mut a),
            TcpredStatus::Ok
        );
        assert_eq!(tcpred_analysis_class(a), TcpredClass::Linear);
        tcpred_analysis_free(a);

        let flat = c("print(1)\n");
        assert_eq!(
            tcpred_loop_convert(flat.as_ptr(), TcpredLanguage::Python, &mut code),
            TcpredStatus::UnsupportedLoopForm
        );
        assert!(code.is_null());
    }
}

fn training_set() -> (Vec<CString>, Vec<TcpredLanguage>, Vec<TcpredClass>) {
    let mut sources = Vec::new();
    let mut labels = Vec::new();
    for i in 0..6 {
        sources.push(c(&format!("x{i} = {i}\nprint(x{i})\n")));
        labels.push(TcpredClass::Constant);
        sources.push(c(&format!("n = int(input())\nfor i in range(n):\n    for j in range(n):\n        print(i * j + {i})\n")));
        labels.push(TcpredClass::Quadratic);
    }
    let langs = vec![TcpredLanguage::Python; sources.len()];
    (sources, langs, labels)
}

#[test]
fn model_fit_predict_save_load() {
    let (sources, langs, labels) = training_set();
    let ptrs: Vec<*const c_char> = sources.iter().map(|s| s.as_ptr()).collect();
    let classes = [TcpredClass::Constant, TcpredClass::Quadratic];
    let dir = tempfile::tempdir().unwrap();
    let path = c(dir.path().join("m.json").to_str().unwrap());
    let query =
        c("n = int(input())\nfor a in range(n):\n    for b in range(n):\n        print(a + b)\n");
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(
            tcpred_model_new(classes.as_ptr(), 2, &mut m),
            TcpredStatus::Ok
        );
        let mut probs = [0.0f64; TCPRED_NUM_CLASSES];
        assert_eq!(
            tcpred_model_predict(
                m,
                query.as_ptr(),
                TcpredLanguage::Python,
                probs.as_mut_ptr(),
                ptr::null_mut()
            ),
            TcpredStatus::ClassifierError,
            "unfitted"
        );
        assert_eq!(
            tcpred_model_fit(
                m,
                ptrs.as_ptr(),
                langs.as_ptr(),
                labels.as_ptr(),
                ptrs.len(),
                7
            ),
            TcpredStatus::Ok
        );
        let mut top = TcpredClass::Constant;
        assert_eq!(
            tcpred_model_predict(
                m,
                query.as_ptr(),
                TcpredLanguage::Python,
                probs.as_mut_ptr(),
                &mut top
            ),
            TcpredStatus::Ok
        );
        assert_eq!(top, TcpredClass::Quadratic);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(probs[TcpredClass::Linear as usize], 0.0);

        assert_eq!(tcpred_model_save(m, path.as_ptr()), TcpredStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(
            tcpred_model_load(path.as_ptr(), &mut loaded),
            TcpredStatus::Ok
        );
        let mut again = [0.0f64; TCPRED_NUM_CLASSES];
        tcpred_model_predict(
            loaded,
            query.as_ptr(),
            TcpredLanguage::Python,
            again.as_mut_ptr(),
            ptr::null_mut(),
        );
        for (x, y) in probs.iter().zip(&again) {
            assert!((x - y).abs() < 1e-12);
        }
        tcpred_model_free(m);
        tcpred_model_free(loaded);

        let missing = c(dir.path().join("none.json").to_str().unwrap());
        assert_eq!(
            tcpred_model_load(missing.as_ptr(), &mut loaded),
            TcpredStatus::Io
        );
        assert!(loaded.is_null());
    }
}

#[test]
fn labels_outside_the_class_set_are_rejected() {
    let (sources, langs, mut labels) = training_set();
    labels[0] = TcpredClass::Cubic;
    let ptrs: Vec<*const c_char> = sources.iter().map(|s| s.as_ptr()).collect();
    let classes = [TcpredClass::Constant, TcpredClass::Quadratic];
    unsafe {
        let mut m = ptr::null_mut();
        tcpred_model_new(classes.as_ptr(), 2, &mut m);
        let status = tcpred_model_fit(
            m,
            ptrs.as_ptr(),
            langs.as_ptr(),
            labels.as_ptr(),
            ptrs.len(),
            1,
        );
        assert_eq!(status, TcpredStatus::ClassifierError);
        assert!(last_error().contains("outside"), "{}", last_error());
        assert_eq!(
            tcpred_model_fit(m, ptr::null(), ptr::null(), ptr::null(), 0, 1),
            TcpredStatus::ClassifierError
        );
        tcpred_model_free(m);
    }
}

#[test]
fn out_of_range_array_values_are_rejected() {
    let raw: [u32; 2] = [0, 9];
    let mut m = ptr::null_mut();
    let status = unsafe { tcpred_model_new(raw.as_ptr().cast::<TcpredClass>(), 2, &mut m) };
    assert_eq!(status, TcpredStatus::InvalidArgument);
    assert!(m.is_null());
}

#[test]
fn static_strings() {
    let name = unsafe { CStr::from_ptr(tcpred_class_name(TcpredClass::Nlogn)) };
    assert_eq!(name.to_str().unwrap(), "nlogn");
    let v = unsafe { CStr::from_ptr(tcpred_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/tcpred.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "tcpred_analyze",
        "tcpred_loop_convert",
        "tcpred_model_fit",
        "tcpred_last_error",
        "TCPRED_STATUS_OK",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; header syntax not checked");
        return;
    };
    assert!(cc.status.success());
    for lang in ["c", "c++"] {
        let out = Command::new("cc")
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{lang}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
