//! End-to-end checks of the command-line contract: output schema, exit
//! codes, and the config-file/override layering.

use std::process::Command;

fn qdot() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qdot"))
}

fn temp_path(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("qdot_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn scan_schema_has_eleven_columns() {
    let out = temp_path("schema");
    let status = qdot()
        .args([
            "scan",
            "beta_min=1.5",
            "beta_max=4.0",
            "beta_points=3",
            "l_perp=0.2",
            "m_size=8",
            &format!("output={}", out.display()),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.with_extension("tsv")).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap();
    let columns: Vec<&str> = header.split('\t').collect();
    assert_eq!(
        columns,
        vec![
            "beta",
            "l_perp",
            "re_epsilon",
            "gamma",
            "re_linear_c",
            "im_linear_c",
            "linear_r",
            "label",
            "m_size",
            "re_omega",
            "im_omega"
        ]
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3, "3-point scan emits 3 rows");
    for row in rows {
        assert_eq!(row.split('\t').count(), 11);
    }
}

#[test]
fn noninteracting_solve_reports_zero_entropy() {
    let out = temp_path("free");
    let status = qdot()
        .args([
            "solve",
            "interacting=false",
            "beta=3.0",
            "l_perp=0.2",
            "m_size=10",
            &format!("output={}", out.display()),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap())
            .unwrap();
    let rows = &json["rows"];
    assert_eq!(rows["label"], "bound");
    assert!(rows["linear_r"].as_f64().unwrap().abs() < 1e-12);
    assert!(rows["gamma"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn resonant_solve_reports_width() {
    let out = temp_path("res");
    let status = qdot()
        .args([
            "solve",
            "beta=1.0",
            "l_perp=0.2",
            "m_size=12",
            &format!("output={}", out.display()),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(json["rows"]["label"], "resonance");
    assert!(json["rows"]["gamma"].as_f64().unwrap() > 1e-4);
    assert!(json["rows"]["im_linear_c"].as_f64().unwrap().abs() > 0.0);
}

#[test]
fn exit_codes_follow_the_contract() {
    // configuration errors -> 1
    let status = qdot().args(["scan", "v0=-2"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));
    let status = qdot().args(["frobnicate"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));
    // numerical failures -> 2 (threshold bracket entirely on the bound side)
    let out = temp_path("nobracket");
    let status = qdot()
        .args([
            "threshold",
            "beta_lo=3.0",
            "beta_hi=6.0",
            "l_perp=0.2",
            "m_size=8",
            &format!("output={}", out.display()),
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn config_file_with_overrides() {
    let cfg_path = temp_path("run.conf");
    std::fs::write(
        &cfg_path,
        "# example configuration\nv0 = 2.0\nbeta = 2.5\nl_perp = 0.25\nm_size = 8\n",
    )
    .unwrap();
    let out = temp_path("layered");
    let status = qdot()
        .args([
            "solve",
            "--config",
            cfg_path.to_str().unwrap(),
            "beta=3.5",
            &format!("output={}", out.display()),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap())
            .unwrap();
    // override wins over the file value
    assert_eq!(json["rows"]["beta"].as_f64().unwrap(), 3.5);
    assert_eq!(json["rows"]["l_perp"].as_f64().unwrap(), 0.25);
}

#[test]
fn trajectory_of_bound_state_is_flat() {
    let out = temp_path("traj");
    let status = qdot()
        .args([
            "trajectory",
            "beta=3.0",
            "l_perp=0.2",
            "m_size=16",
            "interacting=false",
            "omega_start=0.9,-0.05",
            "omega_end=0.9,-0.3",
            "omega_points=5",
            &format!("output={}", out.display()),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.with_extension("tsv")).unwrap();
    let energies: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("branch"))
        .map(|l| l.split('\t').nth(3).unwrap().parse::<f64>().unwrap())
        .collect();
    assert!(energies.len() >= 5);
    let first = energies[0];
    for e in &energies {
        assert!((e - first).abs() < 1e-5, "bound trajectory moved: {e} vs {first}");
    }
}
