use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bibieq(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_bibieq"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn bibieq");
    assert!(
        out.status.success(),
        "bibieq {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn build_prints_checks_and_stable_circuits() {
    let checks = stdout(&bibieq(&["build", "--code", "bb72", "--checks"]));
    assert!(!checks.is_empty());
    let a = stdout(&bibieq(&["build", "--code", "bb72", "--rounds", "2"]));
    let b = stdout(&bibieq(&["build", "--code", "72", "--rounds", "2"]));
    assert_eq!(a, b);
    let stim = stdout(&bibieq(&["build", "--code", "bb72", "--rounds", "2", "--stim"]));
    assert!(stim.contains("DETECTOR") && stim.contains("OBSERVABLE_INCLUDE"));
}

#[test]
fn compile_and_convert_write_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    bibieq(&["compile", "--code", "bb72", "--rounds", "2", "-e", "0.01", "--schedule", "2ec", "-o", &p("ce.txt")]);
    assert!(fs::metadata(p("ce.txt")).unwrap().len() > 0);
    let (c1, c2, rep, dem) = (p("c1.txt"), p("c2.txt"), p("rep.json"), p("dem.txt"));
    let args = ["convert", "--code", "bb72", "--rounds", "2", "-e", "0.01", "--engine", "approx", "--seed", "3"];
    let mut first = args.to_vec();
    first.extend(["-o", &c1, "--report", &rep, "--dem", &dem]);
    bibieq(&first);
    let mut second = args.to_vec();
    second.extend(["-o", &c2]);
    bibieq(&second);
    assert_eq!(fs::read(p("c1.txt")).unwrap(), fs::read(p("c2.txt")).unwrap());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(p("rep.json")).unwrap()).unwrap();
    assert!(report.is_object());
    assert!(fs::read_to_string(p("dem.txt")).unwrap().lines().count() > 0);
}

#[test]
fn sweep_config_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let dumped = stdout(&bibieq(&["sweep", "--instances", "3", "--shots", "5", "--dump-config"]));
    assert!(dumped.contains("instances = 3"));
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, &dumped).unwrap();
    let again = stdout(&bibieq(&["sweep", "--config", cfg.to_str().unwrap(), "--dump-config"]));
    assert_eq!(dumped, again);
}

fn small_sweep(out: &Path) -> String {
    stdout(&bibieq(&[
        "sweep",
        "--codes",
        "bb72",
        "--schedules",
        "4ec",
        "--engines",
        "exact,approx",
        "--e-values",
        "0.01,0.02",
        "--instances",
        "2",
        "--shots",
        "8",
        "--rounds",
        "2",
        "-o",
        out.to_str().unwrap(),
    ]))
}

#[test]
fn sweep_resumes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let first = small_sweep(dir.path());
    assert!(first.starts_with("4 records (0 resumed, 0 failed)"), "{first}");
    let records = fs::read(dir.path().join("records.csv")).unwrap();
    let second = small_sweep(dir.path());
    assert!(second.starts_with("4 records (4 resumed, 0 failed)"), "{second}");
    assert_eq!(records, fs::read(dir.path().join("records.csv")).unwrap());
    bibieq(&["report", dir.path().to_str().unwrap(), "--e-hat", "4EC:exact=8.5e-3", "--e-hat", "4ec:approx=8.4e-3"]);
    assert!(dir.path().join("report").is_dir());
}

#[test]
fn bad_arguments_are_rejected() {
    for args in [
        &["build", "--code", "bb999"][..],
        &["compile", "-e", "1.5"],
        &["report", "/nonexistent/dir"],
        &["sweep", "--engines", "bogus", "--dump-config"],
    ] {
        let out = Command::new(env!("CARGO_BIN_EXE_bibieq")).args(args).output().unwrap();
        assert!(!out.status.success(), "{args:?} should fail");
    }
}
