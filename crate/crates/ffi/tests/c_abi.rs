use std::ffi::{CStr, CString};
use std::ptr;

use htnml_ffi::*;

fn last_error() -> String {
    let p = htnml_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

const ARFF: &str = "@relation 'toy: -C 2'\n\
@attribute a {0,1}\n@attribute b {0,1}\n@attribute x numeric\n@attribute c {red,blue}\n\
@data\n1,0,0.5,red\n0,1,?,blue\n1,1,2.0,red\n";

#[test]
fn dataset_handle_lifecycle() {
    let text = CString::new(ARFF).unwrap();
    let mut data = ptr::null_mut();
    unsafe {
        assert_eq!(htnml_dataset_parse_arff(text.as_ptr(), &mut data), HtnmlStatus::Ok);
        assert_eq!(htnml_dataset_n_instances(data), 3);
        assert_eq!(htnml_dataset_n_labels(data), 2);
        assert_eq!(htnml_dataset_n_attributes(data), 2);
        let mut labels = [9u8; 6];
        assert_eq!(htnml_dataset_labels(data, labels.as_mut_ptr(), 6), HtnmlStatus::Ok);
        assert_eq!(labels, [1, 0, 0, 1, 1, 1]);
        assert_eq!(htnml_dataset_labels(data, labels.as_mut_ptr(), 5), HtnmlStatus::InvalidArgument);
        htnml_dataset_free(data);
        htnml_dataset_free(ptr::null_mut());
        assert_eq!(htnml_dataset_n_labels(ptr::null()), 0);
    }
}

#[test]
fn parse_errors_set_the_message() {
    let text = CString::new("@relation plain\n@attribute a {0,1}\n@data\n1\n").unwrap();
    let mut data = ptr::null_mut();
    unsafe {
        assert_eq!(htnml_dataset_parse_arff(text.as_ptr(), &mut data), HtnmlStatus::ParseError);
        assert!(data.is_null());
        assert!(last_error().contains("-C"));
        assert_eq!(htnml_dataset_parse_arff(ptr::null(), &mut data), HtnmlStatus::NullArgument);
        let bad = [0xffu8, 0];
        assert_eq!(htnml_dataset_parse_arff(bad.as_ptr().cast(), &mut data), HtnmlStatus::InvalidUtf8);
    }
}

#[test]
fn space_counts() {
    unsafe {
        let mut space = ptr::null_mut();
        assert_eq!(htnml_space_default(&mut space), HtnmlStatus::Ok);
        let mut n = 0u64;
        assert_eq!(htnml_space_count_pipelines(space, &mut n), HtnmlStatus::Ok);
        assert_eq!(n, 484);
        let mut listing = ptr::null_mut();
        assert_eq!(htnml_space_listing(space, &mut listing), HtnmlStatus::Ok);
        assert!(CStr::from_ptr(listing).to_str().unwrap().contains("createMLClassifier"));
        htnml_string_free(listing);
        htnml_space_free(space);

        let restricted = include_str!("../../core/fixtures/restricted.space");
        let text = CString::new(restricted).unwrap();
        assert_eq!(htnml_space_parse(text.as_ptr(), &mut space), HtnmlStatus::Ok);
        assert_eq!(htnml_space_count_pipelines(space, &mut n), HtnmlStatus::Ok);
        assert_eq!(n, 111);
        htnml_space_free(space);

        let text = CString::new("ml-base:Nope\n").unwrap();
        assert_eq!(htnml_space_parse(text.as_ptr(), &mut space), HtnmlStatus::SpaceError);
        assert!(last_error().contains("Nope"));
        assert_eq!(htnml_space_count_pipelines(ptr::null(), &mut n), HtnmlStatus::NullArgument);
    }
}

#[test]
fn metrics_through_the_abi() {
    let truth = [1u8, 0, 1, 0, 1, 1];
    let pred = [1u8, 0, 0, 0, 1, 0];
    let scores = [0.9, 0.5, 0.2, 0.3, 0.8, 0.3];
    let mut out = HtnmlMetrics::default();
    unsafe {
        assert_eq!(
            htnml_metrics(truth.as_ptr(), pred.as_ptr(), scores.as_ptr(), 2, 3, &mut out),
            HtnmlStatus::Ok
        );
    }
    // Row 0: truth {0,2}, pred {0}: F = 2/3. Row 1: truth {1,2}, pred {1}: F = 2/3.
    assert!((out.instance_f_measure - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(out.subset_zero_one, 1.0);
    assert!((out.hamming_loss - 2.0 / 6.0).abs() < 1e-12);
    // Row 0: label 2 scored below irrelevant label 1, 1 of 2 pairs. Row 1: labels 2 and 0 tie, ½ of 2.
    assert!((out.rank_loss - 0.375).abs() < 1e-12);
    let bad = [2u8, 0, 1, 0, 1, 1];
    unsafe {
        assert_eq!(
            htnml_metrics(bad.as_ptr(), pred.as_ptr(), scores.as_ptr(), 2, 3, &mut out),
            HtnmlStatus::InvalidArgument
        );
        assert_eq!(
            htnml_metrics(truth.as_ptr(), pred.as_ptr(), ptr::null(), 2, 3, &mut out),
            HtnmlStatus::NullArgument
        );
    }
}

#[test]
fn welch_through_the_abi() {
    let a = [1.0, 2.0, 3.0];
    let (mut t, mut p) = (f64::NAN, f64::NAN);
    unsafe {
        assert_eq!(htnml_welch_t_test(a.as_ptr(), 3, a.as_ptr(), 3, &mut t, &mut p), HtnmlStatus::Ok);
        assert_eq!((t, p), (0.0, 1.0));
        assert_eq!(
            htnml_welch_t_test(a.as_ptr(), 1, a.as_ptr(), 3, &mut t, &mut p),
            HtnmlStatus::SampleTooSmall
        );
    }
}

#[test]
fn experiment_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (0..30)
        .map(|i| format!("{},{},{}.0\n", i % 2, (i / 2) % 2, i % 7))
        .collect();
    let data = dir.path().join("toy.arff");
    std::fs::write(
        &data,
        format!("@relation 'toy: -C 2'\n@attribute a {{0,1}}\n@attribute b {{0,1}}\n@attribute x numeric\n@data\n{rows}"),
    )
    .unwrap();
    let config = serde_json::json!({
        "data": data,
        "split_fraction": 0.7,
        "seed": 3,
        "optimizer": "random",
        "budget": {"kind": {"evaluations": 4}, "candidate_limit": null},
        "search": {
            "node_evaluation": {"random-completions": 3},
            "repetitions": 2, "k": 2, "selection_repetitions": 2, "selection_share": 0.3, "workers": 1
        },
        "out_dir": dir.path().join("out"),
        "space": null
    });
    let text = CString::new(config.to_string()).unwrap();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(htnml_run_experiment_json(text.as_ptr(), &mut report), HtnmlStatus::Ok, "{}", last_error());
        let json: serde_json::Value = serde_json::from_str(CStr::from_ptr(report).to_str().unwrap()).unwrap();
        htnml_string_free(report);
        assert!(json["evaluations"].as_u64().unwrap() <= 4);
        assert!(json["test"]["instance_f_measure"].is_number());

        let broken = CString::new("{\"data\": 1}").unwrap();
        assert_eq!(htnml_run_experiment_json(broken.as_ptr(), &mut report), HtnmlStatus::ConfigError);
        let missing = CString::new(config.to_string().replace("toy.arff", "absent.arff")).unwrap();
        assert_eq!(htnml_run_experiment_json(missing.as_ptr(), &mut report), HtnmlStatus::IoError);
    }
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/htnml.h");
    for name in [
        "HTNML_STATUS_OK",
        "HtnmlDataset",
        "htnml_dataset_parse_arff",
        "htnml_space_count_pipelines",
        "htnml_metrics",
        "htnml_welch_t_test",
        "htnml_run_experiment_json",
        "htnml_string_free",
        "htnml_last_error_message",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    assert!(!htnml_version().is_null());
}

#[test]
fn header_compiles_as_c() {
    let Ok(probe) = std::process::Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler on PATH; skipping");
        return;
    };
    assert!(probe.status.success());
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("use.c");
    std::fs::write(
        &source,
        "#include \"htnml.h\"\n\
         int main(void) {\n\
           HtnmlSpace *space = 0;\n\
           uint64_t n = 0;\n\
           if (htnml_space_default(&space) != HTNML_STATUS_OK) return 1;\n\
           htnml_space_count_pipelines(space, &n);\n\
           htnml_space_free(space);\n\
           return n == 484 ? 0 : 2;\n\
         }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&source)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
