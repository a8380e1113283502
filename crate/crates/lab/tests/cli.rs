use std::path::Path;
use std::process::{Command, Output};

use fcp_core::{ContactModel, SurvivalCurve};
use fcp_lab::config::{load_preset, presets_dir};
use fcp_lab::output::RunManifest;
use fcp_lab::ExperimentConfig;
use serde_json::Value;

fn fcp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcp")).args(args).output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn simulate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let o = fcp(&["simulate", "--model", "pl.json", "--d", "2", "--t", "50", "--seed", "7", "--out", dir.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma.outputs, mb.outputs);
    assert_eq!(ma.config_hash, mb.config_hash);
    for f in ["passage.csv", "events.jsonl", "report.json"] {
        assert!(ma.outputs.contains_key(f), "{f}");
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    let csv = std::fs::read_to_string(a.join("passage.csv")).unwrap();
    assert!(csv.starts_with("x0,x1,D\r\n"));
    assert!(csv.contains("\r\n0,0,0\r\n"));
}

#[test]
fn full_line_is_degenerate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fl");
    let o = fcp(&["simulate", "--model", "full-line", "--t", "3", "--box", "6", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("box boundary"));
    let r = report(&out);
    assert_eq!(r["degenerate"], true);
    assert_eq!(r["reached"], 169);
    let o = fcp(&["simulate", "--model", "full-line", "--t", "3", "--box", "6", "--seed", "1", "--strict", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(fcp_lab::exit::BOX_OVERFLOW));
}

#[test]
fn one_dimensional_front() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("front");
    let o = fcp(&["simulate", "--model", "pl", "--d", "1", "--t", "2000", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    let front = r["right_endpoint_over_t"].as_f64().unwrap();
    assert!((front - (std::f64::consts::E - 1.0)).abs() < 0.05, "{front}");
    assert_eq!(r["truncated"], false);
}

#[test]
fn seed_is_mandatory() {
    let o = fcp(&["simulate", "--model", "pl"]);
    assert_eq!(o.status.code(), Some(fcp_lab::exit::USAGE));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
    let bad = fcp(&["simulate", "--model", "does-not-exist", "--seed", "1"]);
    assert_eq!(bad.status.code(), Some(fcp_lab::exit::IO));
    let wrong = fcp(&["shape", "--preset", "paper-1d"]);
    assert_eq!(wrong.status.code(), Some(fcp_lab::exit::USAGE));
}

#[test]
fn configs_round_trip() {
    let mut names: Vec<String> = std::fs::read_dir(presets_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "json").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    assert_eq!(names, ["paper-1d", "paper-coupling", "paper-shape-fig3"]);
    for name in &names {
        let c = load_preset(name).unwrap();
        let again = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again, "{name}");
        assert_eq!(c.hash(), again.hash());
    }
    let o = fcp(&["mu", "--model", "cox", "--model", "richardson", "--grid", "11", "--seed", "9", "--print-config"]);
    assert_eq!(o.status.code(), Some(0));
    let printed = String::from_utf8(o.stdout).unwrap();
    let c = ExperimentConfig::from_json(&printed).unwrap();
    assert_eq!(c.models.len(), 2);
    assert_eq!(c.grid, Some(11));
    assert!(c.out.is_absolute());
    assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    assert!(ExperimentConfig::from_json(r#"{"command": "speed"}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"command": "speed", "seed": 1, "sed": 2}"#).is_err());
}

#[test]
fn infinite_radius_round_trips() {
    let m = ContactModel::boolean(ContactModel::lattice(1.0), f64::INFINITY);
    let text = serde_json::to_string(&m).unwrap();
    assert!(text.contains(r#""radius":"inf""#), "{text}");
    let back: ContactModel = serde_json::from_str(&text).unwrap();
    assert_eq!(back, m);
    let p = SurvivalCurve::PointMass { at: f64::INFINITY };
    let back: SurvivalCurve = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(back, p);
    let finite: ContactModel = serde_json::from_str(r#"{"kind":"boolean","base":{"kind":"poisson","rate":1.0},"radius":0.5}"#).unwrap();
    assert_eq!(finite, ContactModel::boolean(ContactModel::poisson(1.0), 0.5));
}

#[test]
fn speed_preset_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("speed");
    let o = fcp(&["speed", "--preset", "paper-1d", "--replicas", "100", "--t", "1000", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("speeds.csv")).unwrap();
    let names: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["SL1", "PL1", "R", "SPL1"]);
}

#[test]
fn couple_inclusion_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("couple");
    let o = fcp(&["couple", "--n", "1", "--seeds", "1000", "--seed", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    for row in r["rows"].as_array().unwrap() {
        assert_eq!(row["rate"], 1.0);
    }
    let lines = std::fs::read_to_string(out.join("couple.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 2000);
}

#[test]
fn mu_cox_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("mu");
    let o = fcp(&["mu", "--model", "cox.json", "--grid", "101", "--seed", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let gap = report(&out)["rows"][0]["max_abs_gap"].as_f64().unwrap();
    assert!(gap < 0.01, "{gap}");
    // the perturbed lattice has no closed-form law
    let o = fcp(&["mu", "--model", "pl", "--seed", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(14));
}

#[test]
fn shape_svg_and_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("shape");
    let o = fcp(&["shape", "--model", "richardson", "--t", "8,16", "--replicas", "4", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0) | Some(1)));
    let svg = std::fs::read_to_string(out.join("shape.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<path").count(), 3);
    let csv = std::fs::read_to_string(out.join("shape.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 360);
    let o = fcp(&["shape", "--model", "pl", "--t", "1", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(21));
    let o = fcp(&["shape", "--model", "pl", "--t", "30", "--box", "5", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(22));
}

#[test]
fn construct_and_oracle_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("c");
    let o = fcp(&["construct", "--replicas", "20000", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let out = tmp.path().join("o");
    let o = fcp(&["oracle", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("oracle.csv").is_file());
}
