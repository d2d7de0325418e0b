use std::path::Path;
use std::process::{Command, Output};

use tripod_cli::sweeps::{CONTOUR_HEADER, GATE_ERROR_HEADER, NOISE_MAP_HEADER, ORACLE_HEADER, PULSE_HEADER};

fn tripod_sta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tripod-sta"))
        .args(args)
        .env_remove("TRIPOD_STA_JOBS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn first_line(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).lines().next().unwrap_or_default().to_string()
}

#[test]
fn every_subcommand_writes_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (&["sweep", "gate-error"][..], r#"{"kind": "gate_time_error", "tg_grid": {"values": [5.0, 10.0]}}"#, GATE_ERROR_HEADER, 4),
        (
            &["sweep", "noise-map"][..],
            r#"{"kind": "noise_map", "tg_grid": {"values": [3.0]}, "noise": {"gamma_e": 0.01, "k": 0.2}, "uncertainty_nodes": 3}"#,
            NOISE_MAP_HEADER,
            4,
        ),
        (
            &["contour"][..],
            r#"{"kind": "contour", "tg_grid": {"values": [0.5, 20.0]}, "gamma_gs_grid": {"values": [0.001]},
                "gamma_e_grid": {"values": [0.01]}, "flavors": ["satd"], "uncertainty_nodes": 1,
                "contour": {"bracket_points": 6, "rel_tol": 0.05}}"#,
            CONTOUR_HEADER,
            1,
        ),
        (&["pulses", "export"][..], r#"{"kind": "pulse_export", "tg_grid": {"values": [2.0]}, "samples": 11}"#, PULSE_HEADER, 22),
        (
            &["oracle", "compare"][..],
            r#"{"kind": "oracle_compare", "tg_grid": {"values": [4.0]}, "noise": {"gamma_e": 0.001}}"#,
            ORACLE_HEADER,
            1,
        ),
    ];
    for (i, (sub, body, header, rows)) in cases.into_iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("c{i}.json"), body);
        let out = dir.path().join(format!("o{i}.csv"));
        let mut args = sub.to_vec();
        args.extend(["--config", &cfg, "--out", out.to_str().unwrap()]);
        let res = tripod_sta(&args);
        assert!(res.status.success(), "{sub:?}: {}", String::from_utf8_lossy(&res.stderr));
        let csv = std::fs::read_to_string(&out).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), header);
        assert_eq!(lines.count(), rows, "{sub:?}");
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("o{i}.csv.meta.json"))).unwrap())
                .unwrap();
        assert_eq!(meta["rows"], rows);
    }
}

#[test]
fn stdout_output_is_deterministic_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "g.json",
        r#"{"kind": "gate_time_error", "tg_grid": {"scale": "log", "min": 2.0, "max": 20.0, "count": 5}}"#,
    );
    let one = tripod_sta(&["sweep", "gate-error", "--config", &cfg, "--jobs", "1"]);
    let four = tripod_sta(&["sweep", "gate-error", "--config", &cfg, "--jobs", "4"]);
    assert!(one.status.success() && four.status.success());
    assert_eq!(first_line(&one.stdout), GATE_ERROR_HEADER);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn malformed_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{\"kind\": \"gate_time_error\",\n \"tg_grid\": }");
    let res = tripod_sta(&["sweep", "gate-error", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains(":2:"));
}

#[test]
fn invalid_or_mismatched_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body, sub) in [
        ("neg.json", r#"{"kind": "gate_time_error", "tg_grid": {"values": [-1.0]}}"#, &["sweep", "gate-error"][..]),
        ("unknown.json", r#"{"kind": "gate_time_error", "tg_grid": {"values": [1.0]}, "bogus": 1}"#, &["sweep", "gate-error"][..]),
        ("kind.json", r#"{"kind": "noise_map", "tg_grid": {"values": [1.0]}}"#, &["sweep", "gate-error"][..]),
        ("generic.json", r#"{"kind": "noise_map", "tg_grid": {"values": [1.0]}, "flavors": ["generic_dressed"]}"#, &["sweep", "noise-map"][..]),
    ] {
        let cfg = write_config(dir.path(), name, body);
        let mut args = sub.to_vec();
        args.extend(["--config", &cfg]);
        let res = tripod_sta(&args);
        assert_eq!(res.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&res.stderr));
    }
}

#[test]
fn diverging_integration_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "rk4.json",
        r#"{"kind": "gate_time_error", "tg_grid": {"values": [20.0]}, "flavors": ["adiabatic"],
            "integrator": {"method": "rk4", "max_step": 5.0}}"#,
    );
    let res = tripod_sta(&["sweep", "gate-error", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("tg_cycles=20"));
}

#[test]
fn missing_config_file_exits_with_1() {
    let res = tripod_sta(&["sweep", "gate-error", "--config", "/nonexistent/sweep.json"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn tolerance_flag_is_recorded_in_meta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.json", r#"{"kind": "gate_time_error", "tg_grid": {"values": [6.0]}}"#);
    let out = dir.path().join("g.csv");
    let res = tripod_sta(&["sweep", "gate-error", "--config", &cfg, "--out", out.to_str().unwrap(), "--tol", "1e-9"]);
    assert!(res.status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("g.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["spec"]["integrator"]["rel_tol"], 1e-9);
    assert_eq!(meta["kind"], "gate_time_error");
}
