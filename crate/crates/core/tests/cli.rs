use std::fs;
use std::process::Command;

fn htnml() -> Command {
    Command::new(env!("CARGO_BIN_EXE_htnml"))
}

#[test]
fn space_prints_count_and_listing() {
    let out = htnml().arg("space").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("pipelines: 484\n"));
    assert!(text.contains("setupBaseClassifier -> ZeroR"));
    let restricted = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/restricted.space");
    let out = htnml().args(["space", "--file", restricted]).output().unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("pipelines: 111\n"));
}

#[test]
fn gen_fixture_run_and_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("independent.arff");
    let status = htnml()
        .args(["gen-fixture", "--kind", "independent", "--n", "40", "--seed", "2", "--out"])
        .arg(&data)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(fs::read_to_string(&data).unwrap().contains("-C 4"));

    let out_dir = dir.path().join("runs");
    for (optimizer, seed) in [("mlplan", "1"), ("mlplan", "2"), ("random", "1"), ("random", "2")] {
        let out = htnml()
            .args(["run", "--budget-evals", "6", "--optimizer", optimizer, "--seed", seed, "--data"])
            .arg(&data)
            .arg("--out")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8(out.stdout).unwrap().contains("test_instance_f\t"));
    }
    let csv = dir.path().join("table.csv");
    let out = htnml().args(["summarize", "--in"]).arg(&out_dir).arg("--out").arg(&csv).output().unwrap();
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("population std"));
    assert!(table.lines().any(|l| l.starts_with("independent")));
    let csv = fs::read_to_string(&csv).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("independent,6evals,mlplan,2,"));
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = htnml()
        .args(["run", "--budget-evals", "3", "--data"])
        .arg(dir.path().join("missing.arff"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error:"));

    let out = htnml().args(["run", "--data", "x.arff"]).output().unwrap();
    assert!(!out.status.success(), "a budget is required");
    let out = htnml()
        .args(["run", "--data", "x.arff", "--budget-evals", "3", "--optimizer", "grid"])
        .output()
        .unwrap();
    assert!(!out.status.success());

    let data = dir.path().join("d.arff");
    fs::write(&data, "@relation 'd: -C 1'\n@attribute y {0,1}\n@attribute x numeric\n@data\n1,0\n0,1\n").unwrap();
    let out = htnml()
        .args(["run", "--budget-evals", "3", "--data"])
        .arg(&data)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success(), "too few rows must not yield a pipeline");
}
