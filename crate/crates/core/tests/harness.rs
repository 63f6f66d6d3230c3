use std::path::{Path, PathBuf};

use photosim::harness::{
    emit_report, execute, replay, run_reference, validate_config, RunManifest, SimConfig, WorkloadPaths,
};
use photosim::tron::TransformerModelSpec;
use photosim::{Error, Mode};
use serde_json::Value;

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn tiny() -> WorkloadPaths {
    let d = data().join("tiny_transformer");
    WorkloadPaths::Transformer {
        spec: d.join("spec.json"),
        weights: d.join("weights.bin"),
        input: d.join("input.csv"),
    }
}

fn fields(e: Error) -> Vec<String> {
    match e {
        Error::InvalidConfig(d) => d.into_iter().map(|d| d.field).collect(),
        other => panic!("{other:?}"),
    }
}

#[test]
fn bundled_configs_are_valid() {
    for name in ["sim.json", "sim_noisy.json", "sim_dense_bank.json"] {
        validate_config(Some(&data().join(name)), None).unwrap();
    }
    validate_config(None, Some(&data().join("cost.json"))).unwrap();
}

#[test]
fn named_diagnostics() {
    let mut cfg = SimConfig::default();
    cfg.device.channel_count = 20;
    assert!(fields(cfg.validate().unwrap_err()).contains(&"device.fsr_fit".to_string()));
    let spec: TransformerModelSpec = serde_json::from_str(
        r#"{"n_layers":1,"n_heads":3,"d_model":8,"d_k":4,"d_ff":8,"seq_len":2,"variant":"vit"}"#,
    )
    .unwrap();
    assert_eq!(fields(spec.validate().unwrap_err()), vec!["spec.d_model".to_string()]);
}

#[test]
fn reference_modes_only() {
    let w = tiny().load().unwrap();
    let cfg = SimConfig::default();
    let f = run_reference(&w, &cfg, Mode::FloatRef).unwrap();
    let q = run_reference(&w, &cfg, Mode::QuantRef).unwrap();
    assert_ne!(f, q);
    assert!(run_reference(&w, &cfg, Mode::Photonic).is_err());
}

#[test]
fn empty_trace_gives_header_only_csv() {
    let w = tiny().load().unwrap();
    let cfg = SimConfig::default();
    let out = execute(&w, &cfg, Mode::FloatRef, 0).unwrap();
    assert!(out.trace.is_empty());
    let dir = tempfile::tempdir().unwrap();
    emit_report(&out, &RunManifest::new("reference run", tiny(), 0, Mode::FloatRef, cfg), dir.path()).unwrap();
    let t = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(t, "stage,event_kind,count,payload_bits,ops\n");
}

#[test]
fn replay_and_single_source_totals() {
    let cfg = SimConfig::load(data().join("sim_noisy.json")).unwrap();
    let w = tiny().load().unwrap();
    let out = execute(&w, &cfg, Mode::Photonic, 11).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let m = RunManifest::new("tron run", tiny(), 11, Mode::Photonic, cfg);
    emit_report(&out, &m, a.path()).unwrap();
    let loaded = RunManifest::load(a.path().join("manifest.json")).unwrap();
    assert_eq!(loaded, m);
    replay(&loaded, b.path()).unwrap();
    for f in ["report.csv", "report.json", "trace.csv", "output.csv", "manifest.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }

    let csv = std::fs::read_to_string(a.path().join("report.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(a.path().join("report.json")).unwrap()).unwrap();
    for key in ["total_energy_pj", "total_latency_ns", "epb_fj_per_bit", "gops"] {
        let i = header.iter().position(|h| *h == key).unwrap();
        assert_eq!(row[i].parse::<f64>().unwrap(), doc["report"][key].as_f64().unwrap(), "{key}");
    }
    for key in ["total_bits", "total_ops"] {
        let i = header.iter().position(|h| *h == key).unwrap();
        assert_eq!(row[i].parse::<u64>().unwrap(), doc["report"][key].as_u64().unwrap(), "{key}");
    }
}

#[test]
fn bad_inputs_name_the_file() {
    let d = data().join("tiny_transformer");
    let wrong = WorkloadPaths::Transformer {
        spec: d.join("spec.json"),
        weights: data().join("encoder_transformer/weights.bin"),
        input: d.join("input.csv"),
    };
    assert!(wrong.load().is_err());
    let missing = WorkloadPaths::Gnn {
        graph: data().join("karate/graph.txt"),
        features: data().join("karate/nope.csv"),
        spec: data().join("karate/gcn.json"),
    };
    let msg = missing.load().unwrap_err().to_string();
    assert!(msg.contains("nope.csv"), "{msg}");
}
