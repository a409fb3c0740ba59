use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use vqgo_cli::artifact::{csv_body, ParsedArtifact};

fn vqgo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqgo")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_CNOT: &str = r#"{
  "seed": 5,
  "experiment": {
    "kind": "cnot_sweep",
    "delta_mhz": 200.0, "g_mhz": 5.0, "phi_rad": 0.7853981633974483,
    "crosstalk_eps": [0.0, 1.0],
    "omega0_mhz": 50.0,
    "t_sweep": { "start_ns": 60.0, "stop_ns": 90.0, "step_ns": 15.0 }
  }
}"#;

#[test]
fn malformed_config_reports_line_and_column() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.json", "{\n  \"seed\": 1,\n  \"experiment\": {\"kind\": \"cartan_map\",}\n}");
    let o = vqgo(&["--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("column"), "{err}");
}

#[test]
fn unknown_field_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"seed": 1, "colour": 2, "experiment": {"kind": "cartan_map"}}"#);
    let o = vqgo(&["--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn invalid_values_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"seed": 1, "experiment": {"kind": "cartan_map", "grid_points": 1}}"#);
    assert_eq!(vqgo(&["--config", s(&cfg)]).status.code(), Some(1));
    let cfg = write(
        &dir,
        "d.json",
        &SMALL_CNOT.replace("\"omega0_mhz\": 50.0", "\"omega0_mhz\": 500.0"),
    );
    assert_eq!(vqgo(&["--config", s(&cfg)]).status.code(), Some(1));
}

#[test]
fn missing_config_and_unwritable_output_are_io_errors() {
    let dir = TempDir::new().unwrap();
    let o = vqgo(&["--config", s(&dir.path().join("absent.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write(&dir, "c.json", r#"{"seed": 1, "experiment": {"kind": "cartan_map", "grid_points": 2}}"#);
    let out = dir.path().join("no_such_dir").join("out.csv");
    let o = vqgo(&["--config", s(&cfg), "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn cnot_sweep_rows_metadata_and_verification() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", SMALL_CNOT);
    let out = dir.path().join("cnot.csv");
    let o = vqgo(&["--config", s(&cfg), "--output", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let art = ParsedArtifact::parse(&text).unwrap();
    assert_eq!(art.rows.len(), 2 * 3 * 2);
    assert_eq!(art.metadata["experiment"], "cnot_sweep");
    assert_eq!(art.metadata["seed"], "5");
    assert_eq!(art.metadata["config_sha256"].len(), 64);
    assert!(art.metadata["case[0]"].contains("reference_vqgo_omega_mhz=77.5"));
    let methods: Vec<&str> = art.rows.iter().map(|r| art.field(r, "method").unwrap()).collect();
    assert_eq!(methods.iter().filter(|m| **m == "tpcx").count(), 6);

    let v = vqgo(&["--verify", s(&out)]);
    assert_eq!(v.status.code(), Some(0), "{}", stderr(&v));
    assert!(String::from_utf8_lossy(&v.stdout).contains("12 rows checked"));

    let agi_col = art.header.iter().position(|h| h == "agi").unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let first_row = lines.iter().position(|l| l.starts_with("vqgo,")).unwrap();
    let mut cells: Vec<String> = lines[first_row].split(',').map(str::to_string).collect();
    cells[agi_col] = "0.25".into();
    lines[first_row] = cells.join(",");
    let tampered = write(&dir, "tampered.csv", &(lines.join("\n") + "\n"));
    assert_eq!(vqgo(&["--verify", s(&tampered)]).status.code(), Some(3));
}

#[test]
fn bodies_are_identical_across_worker_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", SMALL_CNOT);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(vqgo(&["--config", s(&cfg), "--output", s(&a), "--workers", "1"]).status.success());
    assert!(vqgo(&["--config", s(&cfg), "--output", s(&b), "--workers", "3"]).status.success());
    let body = |p: &Path| csv_body(&std::fs::read_to_string(p).unwrap());
    assert_eq!(body(&a), body(&b));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"seed": 1, "experiment": {"kind": "cartan_map", "grid_points": 2}}"#);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(vqgo(&["--config", s(&cfg), "--output", s(&a)]).status.success());
    assert!(vqgo(&["--config", s(&cfg), "--output", s(&b), "--seed", "99"]).status.success());
    let meta = |p: &Path| ParsedArtifact::parse(&std::fs::read_to_string(p).unwrap()).unwrap();
    let (ma, mb) = (meta(&a), meta(&b));
    assert_eq!(ma.metadata["seed"], "1");
    assert_eq!(mb.metadata["seed"], "99");
    assert_eq!(ma.rows.len(), 8);
    assert!(vqgo(&["--verify", s(&b)]).status.success());
}

#[test]
fn output_path_falls_back_to_config_then_kind() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"seed": 1, "output": "from_config.csv", "experiment": {"kind": "cartan_map", "grid_points": 2}}"#,
    );
    let o = Command::new(env!("CARGO_BIN_EXE_vqgo"))
        .args(["--config", s(&cfg)])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("from_config.csv").exists());

    let cfg = write(&dir, "d.json", r#"{"seed": 1, "experiment": {"kind": "cartan_map", "grid_points": 2}}"#);
    let o = Command::new(env!("CARGO_BIN_EXE_vqgo"))
        .args(["--config", s(&cfg)])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("cartan_map.csv").exists());
}

#[test]
fn single_optimize_writes_verifiable_json() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"seed": 3, "experiment": {"kind": "single_optimize",
            "target": {"gate": "cnot"},
            "sources": [{"gate": "canonical", "c_rad": [0.7853981633974483, 0.0, 0.0]}]}}"#,
    );
    let out = dir.path().join("r.json");
    assert!(vqgo(&["--config", s(&cfg), "--output", s(&out)]).status.success());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report["agi"].as_f64().unwrap() < 1e-10);
    assert_eq!(report["theta"].as_array().unwrap().len(), 12);
    assert!(report["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(vqgo(&["--verify", s(&out)]).status.success());
}

#[test]
fn mismatched_source_dimensions_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"seed": 3, "experiment": {"kind": "single_optimize",
            "target": {"gate": "syndrome_target"}, "sources": [{"gate": "cnot"}]}}"#,
    );
    assert_eq!(vqgo(&["--config", s(&cfg)]).status.code(), Some(1));
}

#[test]
fn bundled_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        vqgo_cli::ExperimentConfig::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
