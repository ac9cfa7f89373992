//! End-to-end tests of the `preydef` binary: every subcommand against both
//! bundled studies, plus error-path and determinism checks.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_preydef"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn cfg(name: &str) -> String {
    configs_dir().join(name).to_string_lossy().into_owned()
}

#[test]
fn equilibria_reports_rejection_under_strong_allee() {
    let out = run(&[
        "--config",
        &cfg("conversion_strong.cfg"),
        "--set",
        "model.c=0.4",
        "equilibria",
    ]);
    let text = stdout_of(&out);
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let labels: Vec<&str> = json["equilibria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["label"].as_str().unwrap())
        .collect();
    assert_eq!(labels, vec!["E0", "E1", "E2"]);
    let e1 = &json["equilibria"][1];
    assert!((e1["state"]["n"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let notes = json["notes"].as_array().unwrap();
    assert!(
        notes.iter().any(|n| n.as_str().unwrap().contains("rejected")),
        "notes: {notes:?}"
    );
}

#[test]
fn stability_classifies_the_coexistence_focus() {
    let out = run(&["--config", &cfg("conversion_weak.cfg"), "stability"]);
    let json: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let reports = json.as_array().unwrap();
    let e5 = reports
        .iter()
        .find(|r| r["equilibrium"]["label"] == "E5")
        .expect("E5 classified");
    assert_eq!(e5["classification"], "StableFocus");
    assert!(e5["trace"].as_f64().unwrap() < 0.0);
    assert!(e5["det"].as_f64().unwrap() > 0.0);
}

#[test]
fn critical_finds_both_thresholds_of_the_conversion_study() {
    let out = run(&["--config", &cfg("conversion_weak.cfg"), "critical"]);
    let json: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let points = json.as_array().unwrap();
    let find = |kind: &str| {
        points
            .iter()
            .find(|p| p["kind"] == kind)
            .unwrap_or_else(|| panic!("{kind} missing in {points:?}"))["value"]
            .as_f64()
            .unwrap()
    };
    assert!((find("Transcritical") - 0.1674).abs() < 5e-4);
    assert!((find("Hopf") - 0.359).abs() < 2e-3);
    assert!((find("CoexistenceFold") - 0.16733).abs() < 1e-4);
}

#[test]
fn critical_on_the_protection_study() {
    let out = run(&["--config", &cfg("protection_weak.cfg"), "critical"]);
    let json: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let points = json.as_array().unwrap();
    let hopf = points.iter().find(|p| p["kind"] == "Hopf").unwrap();
    assert!((hopf["value"].as_f64().unwrap() - 0.465).abs() < 2e-3);
    let tc = points.iter().find(|p| p["kind"] == "Transcritical").unwrap();
    assert!((tc["value"].as_f64().unwrap() - 0.9682).abs() < 1e-4);
}

#[test]
fn simulate_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for path in [&out_a, &out_b] {
        let out = run(&[
            "--config",
            &cfg("conversion_weak.cfg"),
            "--set",
            "integrator.t_end=50",
            "--output",
            path.to_str().unwrap(),
            "simulate",
        ]);
        assert!(out.status.success());
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b, "outputs differ between runs");
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("t,N,P\n0,0.5,0.3\n"), "head: {}", &text[..40]);
}

#[test]
fn simulate_accepts_initial_state_flags() {
    let out = run(&[
        "--config",
        &cfg("conversion_weak.cfg"),
        "--set",
        "integrator.t_end=10",
        "simulate",
        "--n0",
        "0.8",
        "--p0",
        "0.1",
    ]);
    let text = stdout_of(&out);
    assert!(text.starts_with("t,N,P\n0,0.8,0.1\n"));
}

#[test]
fn sweep_emits_diagram_rows_and_flags() {
    let out = run(&[
        "--config",
        &cfg("conversion_weak.cfg"),
        "--set",
        "sweep.lo=0.15",
        "--set",
        "sweep.hi=0.2",
        "--set",
        "sweep.steps=6",
        "--set",
        "integrator.t_end=300",
        "sweep",
    ]);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "param,value,N_min,N_max,P_min,P_max,attractor,labels");
    assert!(lines.len() >= 7, "lines: {}", lines.len());
    assert!(lines[1].starts_with("c,0.15,"));
    // the transcritical exchange at ~0.167 falls inside this range
    assert!(
        lines.iter().any(|l| l.contains("critical")),
        "no flagged rows in:\n{text}"
    );
}

#[test]
fn basin_emits_cell_rows() {
    let out = run(&[
        "--config",
        &cfg("protection_strong.cfg"),
        "--set",
        "grid.n_res=5",
        "--set",
        "grid.p_res=4",
        "--set",
        "integrator.t_end=400",
        "basin",
    ]);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N0,P0,attractor_label");
    assert_eq!(lines.len(), 1 + 5 * 4);
    assert!(lines[1].starts_with("0.1,0.125,"));
}

#[test]
fn every_subcommand_runs_on_both_studies() {
    for config in [
        "conversion_weak.cfg",
        "conversion_strong.cfg",
        "protection_weak.cfg",
        "protection_strong.cfg",
    ] {
        for command in ["equilibria", "stability", "simulate", "critical", "basin"] {
            let needs_sweep = command == "critical";
            let has_sweep = config.ends_with("weak.cfg");
            if needs_sweep && !has_sweep {
                continue;
            }
            let out = run(&[
                "--config",
                &cfg(config),
                "--set",
                "integrator.t_end=50",
                "--set",
                "grid.n_res=3",
                "--set",
                "grid.p_res=3",
                command,
            ]);
            assert!(
                out.status.success(),
                "{command} failed on {config}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
        // sweep needs a [sweep] section; both weak configs carry one
        if config.ends_with("weak.cfg") {
            let out = run(&[
                "--config",
                &cfg(config),
                "--set",
                "sweep.steps=3",
                "--set",
                "integrator.t_end=50",
                "sweep",
            ]);
            assert!(out.status.success(), "sweep failed on {config}");
        }
    }
}

#[test]
fn validation_failures_exit_one() {
    // zero horizon
    let out = run(&[
        "--config",
        &cfg("conversion_weak.cfg"),
        "--set",
        "integrator.t_end=0",
        "simulate",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("t_end"), "stderr: {err}");

    // negative growth rate
    let out = run(&[
        "--config",
        &cfg("conversion_weak.cfg"),
        "--set",
        "model.r=-1",
        "equilibria",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("model.r"), "stderr: {err}");

    // sweep without a [sweep] section
    let out = run(&["--config", &cfg("conversion_strong.cfg"), "sweep"]);
    assert_eq!(out.status.code(), Some(1));

    // malformed config text
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.cfg");
    std::fs::write(&path, "[model]\nr 1\n").unwrap();
    let out = run(&["--config", path.to_str().unwrap(), "equilibria"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    // unknown flag
    let out = run(&["equilibria", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numerical_failures_exit_two() {
    // an impossible tolerance/step combination starves the integrator
    let out = run(&[
        "--config",
        &cfg("conversion_weak.cfg"),
        "--set",
        "integrator.rel_tol=1e-13",
        "--set",
        "integrator.abs_tol=1e-14",
        "--set",
        "integrator.h_min=0.9",
        "--set",
        "integrator.h_init=1",
        "--set",
        "integrator.h_max=1",
        "--set",
        "model.c=0.4",
        "simulate",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn overrides_beat_config_values() {
    // the weak study at c = 0.1 has no coexistence point; raising c past
    // the exchange brings E5 back
    let out = run(&[
        "--config",
        &cfg("conversion_weak.cfg"),
        "--set",
        "model.c=0.1",
        "equilibria",
    ]);
    let json: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let labels: Vec<&str> = json["equilibria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["label"].as_str().unwrap())
        .collect();
    assert_eq!(labels, vec!["E0", "E1"]);
}
