mod common;

use common::bundled;
use instanton_weld::cli::*;
use instanton_weld::fields::read_dump;
use std::process::Command as Process;

fn flat_json() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/flat4.json")).unwrap()
}

fn flat(dir: &std::path::Path) -> Scenario {
    let mut s = Scenario::from_json(&flat_json()).unwrap();
    s.output.dir = Some(dir.to_path_buf());
    s
}

#[test]
fn bundled_scenario_is_valid() {
    let s = bundled();
    assert_eq!(s.version, SCENARIO_VERSION);
    assert_eq!(s.necks(), 4);
    assert_eq!(s.chain().unwrap().window(), 4);
}

#[test]
fn unknown_keys_are_rejected() {
    let text = flat_json().replacen("\"seed\"", "\"colour\": 1, \"seed\"", 1);
    let err = Scenario::from_json(&text).unwrap_err();
    assert!(err.to_string().contains("colour"), "{err}");
}

#[test]
fn wrong_version_is_rejected() {
    let text = flat_json().replacen("\"version\": 1", "\"version\": 2", 1);
    assert!(Scenario::from_json(&text).unwrap_err().to_string().contains("version 2"));
}

#[test]
fn budget_violation_quotes_the_budget() {
    let text = flat_json().replacen("\"budget\": 1.0", "\"budget\": 0.25", 1);
    let err = Scenario::from_json(&text).unwrap_err().to_string();
    assert!(err.contains("2.500000e-1"), "{err}");
}

#[test]
fn unknown_block_labels_are_named() {
    let mut s = Scenario::from_json(&flat_json()).unwrap();
    s.blocks[2] = "torus".into();
    assert!(s.validate().unwrap_err().to_string().contains("torus"));
}

#[test]
fn rho_specifications_compose() {
    let s = bundled();
    let mut rng = s.rng();
    let base = s.rho_from(&RhoSpec::Random, 4, &mut rng).unwrap();
    let mut rng = s.rng();
    let twist = RhoSpec::CenterTwist { of: Box::new(RhoSpec::Random), flips: vec![1, 3] };
    let t = s.rho_from(&twist, 4, &mut rng).unwrap();
    assert_eq!(t, base.center_action(&[false, true, false, true]));
    let explicit = RhoSpec::Explicit { elements: vec![[1.0, 0.0, 0.0, 0.0]; 3] };
    assert!(s.rho_from(&explicit, 4, &mut s.rng()).is_err());
    let rotate = RhoSpec::Rotate { of: Box::new(RhoSpec::Identity), neck: 7, angle: 1.0 };
    assert!(s.rho_from(&rotate, 4, &mut s.rng()).is_err());
}

#[test]
fn overrides_take_precedence() {
    let mut s = bundled();
    Overrides { seed: Some(99), out: Some("x".into()), max_passes: Some(2), target: Some(1e-3) }.apply(&mut s);
    assert_eq!((s.seed, s.passes.max_passes, s.passes.target), (99, 2, 1e-3));
    assert_eq!(s.output.dir.as_deref(), Some(std::path::Path::new("x")));
    assert_eq!(resolve_out_dir(None, None, Some("env".into())), Some("env".into()));
    assert_eq!(resolve_out_dir(Some("flag".into()), None, Some("env".into())), Some("flag".into()));
}

#[test]
fn lemma_with_defaults_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(Command::Lemma, &flat(dir.path())).unwrap();
    assert!(out.pass);
    assert!(out.lines[0].starts_with("PASS"));
    let report: instanton_weld::moduli::FuzzReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("lemma.json")).unwrap()).unwrap();
    assert_eq!(report.violations, 0);
}

#[test]
fn flat_weld_converges_at_pass_zero_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = flat(dir.path());
    s.output.dump_fields = true;
    let out = run(Command::Weld, &s).unwrap();
    assert!(out.pass);
    let trace = read_trace(&dir.path().join("trace.jsonl")).unwrap();
    assert_eq!(trace.len(), 1);
    assert_eq!(trace[0].n, 0);
    let summary: WeldSummary =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!(summary.converged && summary.delta0 <= summary.floor);
    let (header, a) = read_dump(&dir.path().join("a_0")).unwrap();
    assert_eq!(header.grid, s.chart.grid());
    assert!(a.data.iter().all(|v| *v == 0.0));
}

#[test]
fn traces_are_byte_identical_across_runs() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(Command::Decay, &flat(d1.path())).unwrap();
    run(Command::Decay, &flat(d2.path())).unwrap();
    let a = std::fs::read(d1.path().join("trace.jsonl")).unwrap();
    let b = std::fs::read(d2.path().join("trace.jsonl")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn energy_of_the_flat_chain_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(Command::Energy, &flat(dir.path())).unwrap();
    assert!(out.lines.last().unwrap().starts_with("total=0.000000"));
}

#[test]
fn binary_reports_validation_failures() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, flat_json().replacen("\"budget\": 1.0", "\"budget\": 0.01", 1)).unwrap();
    let out = Process::new(env!("CARGO_BIN_EXE_weld")).args(["weld", "--scenario"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds 1.000000e-2"));
}

#[test]
fn binary_writes_to_the_environment_directory() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("flat.json");
    std::fs::write(&scenario, flat_json()).unwrap();
    let out_dir = dir.path().join("out");
    let out = Process::new(env!("CARGO_BIN_EXE_weld"))
        .args(["decay", "--threads", "1", "--scenario"])
        .arg(&scenario)
        .env(OUT_DIR_ENV, &out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("trace.jsonl").exists());
}
