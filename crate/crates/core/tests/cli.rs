use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::Command;

fn curvflow(args: &[&str], dir: &Path) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_curvflow"))
        .args(args)
        .arg("--quiet")
        .current_dir(dir)
        .output()
        .expect("spawn curvflow");
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.json");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn spheroid(segments: usize, flow_extra: &str, pinching: &str) -> String {
    format!(
        r#"{{
  "speed": {{ "alpha": 1.0 }},
  "geometry": {{ "kind": "spheroid", "a": 1.0, "c": 1.1, "segments": {segments} }},
  "flow": {{ "h_stop": 1000.0, "snapshot_h_factor": 1.25{flow_extra} }},
  "pinching": {pinching}
}}"#
    )
}

const AUTO: &str = r#"{ "C": "auto", "sigma": "auto" }"#;

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn sphere_reference_run_reaches_its_blowup_time() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{ "mode": "mcf-reference", "speed": {}, "geometry": { "kind": "sphere", "radius": 1.0, "segments": 64 },
            "flow": { "h_stop": 1000.0, "snapshot_h_factor": 1.25 } }"#,
    );
    let out = tmp.path().join("run");
    let o = out.to_str().unwrap();
    assert_eq!(
        curvflow(&["simulate", "--config", &cfg, "--out", o], tmp.path()),
        0
    );
    let summary = read_json(&out.join("summary.json"));
    let t = summary["t_final"].as_f64().unwrap();
    assert!((t - 0.25).abs() < 1e-3, "t_final = {t}");

    assert_eq!(curvflow(&["singularity", "--out", o], tmp.path()), 0);
    let rep = read_json(&out.join("singularity_report.json"));
    assert_eq!(rep["classification"], "type1");
    let c0 = rep["C0"].as_f64().unwrap();
    assert!((c0 / 2f64.sqrt() - 1.0).abs() < 0.02, "C0 = {c0}");
}

#[test]
fn spheroid_simulate_and_verify_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &spheroid(64, "", AUTO));
    let out = tmp.path().join("run");
    let o = out.to_str().unwrap();
    assert_eq!(
        curvflow(&["simulate", "--config", &cfg, "--out", o], tmp.path()),
        0
    );
    let trace = curvflow::io::read_trace(&out.join("trace.csv")).unwrap();
    assert!(trace.rows().windows(2).all(|w| w[1].h_min >= w[0].h_min));

    let vout = tmp.path().join("verify");
    assert_eq!(
        curvflow(
            &["verify", "--config", &cfg, "--out", vout.to_str().unwrap()],
            tmp.path()
        ),
        0
    );
    let rep = read_json(&vout.join("verify_report.json"));
    assert_eq!(rep["pass"], true);
    for l in rep["ladders"].as_array().unwrap() {
        assert!(l["report"]["space_levels"].as_array().unwrap().len() >= 3);
        assert!(l["report"]["time_levels"].as_array().unwrap().len() >= 3);
    }
}

#[test]
fn invalid_config_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &spheroid(32, r#", "cfl": -0.5"#, AUTO));
    assert_eq!(curvflow(&["simulate", "--config", &cfg], tmp.path()), 1);
    assert_eq!(curvflow(&["no-such-command"], tmp.path()), 1);
}

#[test]
fn convexity_loss_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &spheroid(128, r#", "cfl": 1.0"#, AUTO));
    let out = tmp.path().join("run");
    assert_eq!(
        curvflow(
            &["simulate", "--config", &cfg, "--out", out.to_str().unwrap()],
            tmp.path()
        ),
        2
    );
    let s = read_json(&out.join("summary.json"));
    assert_eq!(s["exit_code"], 2);
}

#[test]
fn step_collapse_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &spheroid(32, r#", "dt_min": 1e-3"#, AUTO));
    let out = tmp.path().join("run");
    assert_eq!(
        curvflow(
            &["simulate", "--config", &cfg, "--out", out.to_str().unwrap()],
            tmp.path()
        ),
        3
    );
}

#[test]
fn oversized_sigma_fails_certificate() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &spheroid(64, "", r#"{ "C": "auto", "sigma": 30.0 }"#),
    );
    let out = tmp.path().join("verify");
    assert_eq!(
        curvflow(
            &["verify", "--config", &cfg, "--out", out.to_str().unwrap()],
            tmp.path()
        ),
        4
    );
    assert_eq!(read_json(&out.join("verify_report.json"))["pass"], false);
}

#[test]
fn short_run_is_insufficient_for_singularity() {
    let tmp = tempfile::tempdir().unwrap();
    let h_stop = 3.0 * std::f64::consts::E;
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{ "speed": {{ "alpha": 1.0 }}, "geometry": {{ "kind": "sphere", "radius": 1.0, "segments": 32 }},
                "flow": {{ "h_stop": {h_stop} }} }}"#
        ),
    );
    let out = tmp.path().join("run");
    let o = out.to_str().unwrap();
    assert_eq!(
        curvflow(&["simulate", "--config", &cfg, "--out", o], tmp.path()),
        0
    );
    assert_eq!(curvflow(&["singularity", "--out", o], tmp.path()), 5);
}

#[test]
fn oracle_and_constants_write_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = out.to_str().unwrap();
    assert_eq!(curvflow(&["oracle", "--out", o], tmp.path()), 0);
    assert_eq!(curvflow(&["constants", "--out", o], tmp.path()), 0);
    let s = read_json(&out.join("sphere_oracle.json"));
    assert!(s["T_blowup"].as_f64().unwrap() > 0.0);
    let c = read_json(&out.join("constants.json"));
    assert!(c["constants"]["sigma"].as_f64().unwrap() > 0.0);
}

#[test]
fn repeated_runs_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &spheroid(48, "", AUTO));
    let dirs = ["a", "b"].map(|d| tmp.path().join(d));
    for d in &dirs {
        assert_eq!(
            curvflow(
                &["simulate", "--config", &cfg, "--out", d.to_str().unwrap()],
                tmp.path()
            ),
            0
        );
    }
    for f in ["trace.csv", "summary.json"] {
        assert_eq!(
            fs::read(dirs[0].join(f)).unwrap(),
            fs::read(dirs[1].join(f)).unwrap(),
            "{f}"
        );
    }
    let snaps = |d: &Path| {
        let mut v: Vec<_> = fs::read_dir(d.join("snapshots"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        v.sort();
        v.iter().map(|p| fs::read(p).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(snaps(&dirs[0]), snaps(&dirs[1]));
}
