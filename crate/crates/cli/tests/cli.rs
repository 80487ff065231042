use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn koopman(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_koopman"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn koopman")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fit_model(dir: &Path) {
    let o = koopman(&["fit", "--system", "pendulum", "--seed", "1", "--out", "m"], dir);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn missing_config_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = koopman(&["fit", "--config", "cfg.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cfg.json"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = koopman(&["fit", "--no-such-flag"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn help_on_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["generate", "fit", "predict", "analyze", "ingest", "reproduce"] {
        let o = koopman(&[sub, "--help"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{sub}");
        assert!(String::from_utf8_lossy(&o.stdout).contains("--seed"), "{sub}");
    }
}

#[test]
fn predict_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    fit_model(dir.path());
    let o = koopman(&["predict", "--model", "m/model.json", "--x0", "2.748,0", "--steps", "1000"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2"));
    assert_eq!(lines.count(), 1001);
}

#[test]
fn predict_rejects_malformed_state() {
    let dir = tempfile::tempdir().unwrap();
    fit_model(dir.path());
    let o = koopman(&["predict", "--model", "m/model.json", "--x0", "2.748", "--steps", "10"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn analyze_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    fit_model(dir.path());
    let o = koopman(&["analyze", "--model", "m/model.json", "--format", "json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["lifted_dim"], 6);
    assert_eq!(v["spectrum"]["continuous"].as_array().unwrap().len(), 6);
}

#[test]
fn generate_then_fit_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = koopman(&["generate", "--system", "duffing", "--seed", "3", "--out", "data"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("data/manifest.json").is_file());
    let o = koopman(&["fit", "--system", "duffing", "--data", "data", "--out", "m"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("m/model.json").is_file());
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn reproduce_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = koopman(&["reproduce", "pendulum_analysis", "--seed", "42", "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = files(&dir.path().join("a"));
    assert!(a.iter().any(|(n, _)| n == "report.json"));
    assert_eq!(a, files(&dir.path().join("b")));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    for (out, threads) in [("one", "1"), ("many", "4")] {
        let o = Command::new(env!("CARGO_BIN_EXE_koopman"))
            .args(["reproduce", "pendulum_fig4", "--seed", "7", "--out", out])
            .env("KOOPMAN_NUM_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(files(&dir.path().join("one")), files(&dir.path().join("many")));
}

#[test]
fn unknown_target_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = koopman(&["reproduce", "fig9"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fit_writes_a_reusable_config() {
    let dir = tempfile::tempdir().unwrap();
    fit_model(dir.path());
    let o = koopman(&["fit", "--config", "m/config.json", "--out", "again"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(dir.path().join("m/model.json")).unwrap(),
        fs::read(dir.path().join("again/model.json")).unwrap()
    );
}
