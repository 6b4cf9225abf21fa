use std::path::Path;
use std::process::{Command as Process, Output};

use anderson_cli::commands::replay::replay;
use anderson_cli::commands::Command;
use anderson_cli::manifest::RunManifest;
use anderson_cli::output::sha256_hex;
use anderson_cli::{execute, ExperimentConfig};
use serde_json::Value;

fn bin() -> Process {
    let mut p = Process::new(env!("CARGO_BIN_EXE_anderson"));
    p.env_remove("ANDERSON_OUT_DIR");
    p
}

fn run_ok(args: &[&str], out: &Path) -> Output {
    let o = bin().args(args).arg("--out").arg(out).output().unwrap();
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

/// Data rows of a CSV as numbers, skipping metadata and the header.
fn rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn relax_snapshot_at_zero_is_delta_and_rows_are_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("relax");
    run_ok(
        &["relax", "--n", "40", "--sigma", "0.8", "--origin", "7", "--snapshot-times", "0,3,50", "--t-max", "2000",
          "--t-samples", "400", "--layout", "wide"],
        &out,
    );
    let snaps = rows(&out.join("snapshots.csv"));
    assert_eq!(snaps.len(), 3);
    assert_eq!(snaps[0][0], 0.0);
    for (j, p) in snaps[0][1..].iter().enumerate() {
        let expected = if j + 1 == 7 { 1.0 } else { 0.0 };
        assert!((p - expected).abs() < 1e-12, "site {} = {p}", j + 1);
    }
    for row in &snaps {
        assert!((row[1..].iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
    let profile = rows(&out.join("profile.csv"));
    assert_eq!(profile.len(), 40);
    assert_eq!(profile[0][0], -20.0);
    assert!((profile.iter().map(|r| r[1]).sum::<f64>() - 1.0).abs() < 1e-10);
    let traces = rows(&out.join("mssd_traces.csv"));
    assert!(traces[0][1..].iter().all(|&v| v.abs() < 1e-6));
}

#[test]
fn relax_series_mean_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.spec.n = 64;
    cfg.spec.disorder_strength = 0.5;
    cfg.spec.seed = 21;
    cfg.output_dir = dir.path().to_path_buf();
    execute(Command::Relax, &cfg).unwrap();
    let summary = json(&dir.path().join("relax_summary.json"));
    for s in summary["series"].as_array().unwrap() {
        let diff = s["abs_diff"].as_f64().unwrap();
        assert!(diff <= 1e-2, "site {}: {diff}", s["site"]);
    }
}

#[test]
fn rpse_panel_average_and_monte_carlo_gates() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["rpse", "--n", "12", "--sigma", "1.2", "--seed", "5", "--mc-samples", "20000"], dir.path());
    let s = json(&dir.path().join("rpse_summary.json"));
    let avg = s["scaled_fluct_site_avg"].as_f64().unwrap();
    let target = s["one_minus_ipr_mean"].as_f64().unwrap();
    assert!((avg - target).abs() < 1e-14, "{avg} vs {target}");
    for gate in ["mean_population_gate", "fluct_amplitude_gate", "variance_gate"] {
        assert_eq!(s[gate]["within"], s[gate]["sites"], "{gate}");
    }
    let moments = rows(&dir.path().join("moments.csv"));
    for r in &moments {
        assert!((r[1] + r[2] - r[3]).abs() < 1e-14);
    }
    let state = rows(&dir.path().join("rpse_state.csv"));
    assert!((state.iter().map(|r| r[1]).sum::<f64>() - 1.0).abs() < 1e-10);
}

#[test]
fn circle_rows_satisfy_budget_and_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["circle", "--n", "80", "--sigma-grid", "0.05,0.5,2,8,30", "--realizations", "3"], dir.path());
    let r = rows(&dir.path().join("circle.csv"));
    assert_eq!(r.len(), 5);
    for row in &r {
        assert!((row[1] + row[2] - row[3]).abs() < 1e-14);
    }
    let max_var = r.iter().map(|x| x[2]).fold(f64::MIN, f64::max);
    let max_fluct = r.iter().map(|x| x[1]).fold(f64::MIN, f64::max);
    assert_eq!(r[4][2], max_var);
    assert_eq!(r[0][1], max_fluct);
    assert!(r.windows(2).all(|w| w[1][4] > w[0][4]));
}

#[test]
fn strong_disorder_sweep_is_confined() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["sweep", "--n", "200", "--sigma-grid", "10,20,50", "--realizations", "4"], dir.path());
    let r = rows(&dir.path().join("sweep.csv"));
    assert_eq!(r.len(), 12);
    assert!(r.iter().all(|row| row[4] < 3.0), "{r:?}");
    let lines = std::fs::read_to_string(dir.path().join("metrics.jsonl")).unwrap();
    let first: Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    for key in ["mssd", "ipr_mean", "n_effective", "sqrt_mssd", "sqrt2_over_ipr"] {
        assert!(first[key].is_number(), "{key}");
    }
}

#[test]
fn sweep_records_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_ok(&["sweep", "--n", "16", "--sigma-grid", "0,1", "--realizations", "2"], dir.path());
    assert!(String::from_utf8_lossy(&o.stderr).contains("increase the disorder or change the seed"));
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(text.matches(",failed,").count(), 2);
    assert_eq!(text.matches(",ok,").count(), 2);
    let m = RunManifest::load(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.failures.len(), 2);
    assert_eq!(m.seeds.len(), 4);
}

#[test]
fn manifest_hashes_match_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/does/not/exist");
    run_ok(&["spectrum", "--n", "20", "--sigma", "2", "--realizations", "2"], &out);
    let m = RunManifest::load(&out.join("manifest.json")).unwrap();
    assert_eq!(m.command, "spectrum");
    assert_eq!(m.outputs.len(), 6);
    for rec in &m.outputs {
        let bytes = std::fs::read(out.join(&rec.file)).unwrap();
        assert_eq!(sha256_hex(&bytes), rec.sha256, "{}", rec.file);
        assert_eq!(bytes.len(), rec.bytes);
    }
    let header = std::fs::read_to_string(out.join("eigenvalues_r0.csv")).unwrap();
    assert!(header.contains(&format!("# config_sha256: {}", m.config_sha256)));
    assert_eq!(m.audits.len(), 2);
    assert!(m.audits.iter().all(|a| a.residuals.is_some()));
}

#[test]
fn replay_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    run_ok(&["circle", "--n", "30", "--sigma-grid", "1,2", "--realizations", "2"], &first);
    let report = replay(&first.join("manifest.json"), Some(dir.path().join("b")), Some(2)).unwrap();
    assert_eq!(report.identical, vec!["circle.csv".to_string()]);

    let path = first.join("manifest.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut m: Value = serde_json::from_str(&text).unwrap();
    m["outputs"][0]["sha256"] = Value::from("0".repeat(64));
    std::fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    let o = bin().arg("replay").arg(&path).arg("--out").arg(dir.path().join("c")).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("replay mismatch"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain-file");
    std::fs::write(&file, "x").unwrap();
    let o = bin()
        .args(["circle", "--n", "10", "--sigma-grid", "1", "--out"])
        .arg(file.join("sub"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("I/O error"));
}

#[test]
fn exit_codes_for_config_and_numerical_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["sweep", "--n", "2"]).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["sweep", "--sigma-grid", "2,1"]).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["rpse", "--mc-samples", "1"]).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["relax", "--n", "16", "--sigma", "0"]).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("increase the disorder or change the seed"));
}

#[test]
fn output_dir_from_environment_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.json");
    std::fs::write(
        &cfg_path,
        r#"{"spec": {"n": 24, "disorder_strength": 1.0, "seed": 3}, "sweep": [0.5, 4.0], "realizations": 2}"#,
    )
    .unwrap();
    let env_out = dir.path().join("from-env");
    let o = bin()
        .env("ANDERSON_OUT_DIR", &env_out)
        .args(["sweep", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(rows(&env_out.join("sweep.csv")).len(), 4);
}
