use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photosim")).args(args).output().unwrap()
}

fn d(p: &str) -> String {
    data().join(p).to_string_lossy().into_owned()
}

fn tron_args(report: &Path) -> Vec<String> {
    [
        "tron",
        "run",
        "--spec",
        &d("tiny_transformer/spec.json"),
        "--weights",
        &d("tiny_transformer/weights.bin"),
        "--input",
        &d("tiny_transformer/input.csv"),
        "--mode",
        "photonic",
        "--seed",
        "7",
        "--config",
        &d("sim_noisy.json"),
        "--report",
        &report.to_string_lossy(),
    ]
    .map(String::from)
    .to_vec()
}

fn run_owned(args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs)
}

#[test]
fn device_validate_exit_codes() {
    assert_eq!(run(&["device", "validate", "--config", &d("sim.json")]).status.code(), Some(0));
    let dense = run(&["device", "validate", "--config", &d("sim_dense_bank.json")]);
    assert_eq!(dense.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&dense.stdout).contains("snr"));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"device":{"radius":5}}"#).unwrap();
    let out = run(&["device", "validate", "--config", &bad.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));
}

#[test]
fn spectrum_csv() {
    let out = run(&["device", "spectrum", "--points", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "wavelength_nm,transmission");
    assert_eq!(lines.len(), 12);
    assert_eq!(run(&["device", "spectrum", "--points", "1"]).status.code(), Some(2));
}

#[test]
fn tron_run_is_reproducible_and_replayable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out = run_owned(&tron_args(a.path()));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("total_energy_pj"));
    let mut quiet = tron_args(b.path());
    quiet.push("--quiet".into());
    let out = run_owned(&quiet);
    assert!(out.stdout.is_empty());
    for f in ["report.csv", "report.json", "trace.csv", "stages.csv", "output.csv", "manifest.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let c = tempfile::tempdir().unwrap();
    let m = a.path().join("manifest.json");
    let out = run(&["replay", "--manifest", &m.to_string_lossy(), "--report", &c.path().to_string_lossy(), "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read(a.path().join("report.csv")).unwrap(),
        std::fs::read(c.path().join("report.csv")).unwrap()
    );
}

#[test]
fn ghost_run_with_partition_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "ghost", "run", "--graph", &d("karate/graph.txt"), "--features", &d("karate/features.csv"),
        "--spec", &d("karate/gcn.json"), "--lanes", "4", "--partition", "8", "--mode", "photonic",
        "--seed", "1", "--report", &dir.path().to_string_lossy(), "--quiet",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(m.contains("\"lanes_v\": 4") && m.contains("\"partition_n\": 8"));
    let out = run(&[
        "ghost", "run", "--graph", &d("karate/graph.txt"), "--features", &d("karate/features.csv"),
        "--spec", &d("karate/gcn.json"), "--lanes", "0", "--report", &dir.path().to_string_lossy(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ghost.lanes_v"));
}

#[test]
fn reference_run_modes() {
    let dir = tempfile::tempdir().unwrap();
    let args = |mode: &str| {
        vec![
            "reference".to_string(), "run".into(), "--spec".into(), d("karate/gcn.json"), "--graph".into(),
            d("karate/graph.txt"), "--features".into(), d("karate/features.csv"), "--mode".into(), mode.into(),
            "--report".into(), dir.path().to_string_lossy().into_owned(), "--quiet".into(),
        ]
    };
    assert_eq!(run_owned(&args("float_ref")).status.code(), Some(0));
    let t = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(t.lines().count(), 1);
    assert_eq!(run_owned(&args("photonic")).status.code(), Some(2));
    assert_eq!(run_owned(&args("analog")).status.code(), Some(2));
}

#[test]
fn missing_input_and_unwritable_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = tron_args(dir.path());
    let i = args.iter().position(|a| a == "--input").unwrap();
    args[i + 1] = d("tiny_transformer/missing.csv");
    let out = run_owned(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));

    let file = dir.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    let out = run_owned(&tron_args(&file));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep", "--grid", &d("sweep_grid.json"), "--report", &dir.path().to_string_lossy()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn gen_weights_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.bin");
    let x = dir.path().join("x.csv");
    let out = run(&[
        "tron", "gen-weights", "--spec", &d("tiny_transformer/spec.json"), "--seed", "1", "--out",
        &w.to_string_lossy(), "--input-out", &x.to_string_lossy(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&w).unwrap(), std::fs::read(data().join("tiny_transformer/weights.bin")).unwrap());
    assert_eq!(std::fs::read(&x).unwrap(), std::fs::read(data().join("tiny_transformer/input.csv")).unwrap());
}
