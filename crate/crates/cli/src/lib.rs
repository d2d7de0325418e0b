//! Sweep driver for the tripod gate simulations: reads a JSON sweep
//! description, evaluates every parameter point on a worker pool and writes
//! a CSV table plus a `<out>.meta.json` sidecar.

pub mod config;
pub mod contour;
pub mod error;
pub mod output;
pub mod sweeps;

use std::path::Path;

use serde_json::json;

pub use config::{GridSpec, Scale, SweepKind, SweepSpec};
pub use error::CliError;

use sweeps::*;

/// Runs `spec` and returns the CSV bytes and the metadata document.
pub fn run(spec: &SweepSpec, jobs: usize) -> Result<(Vec<u8>, serde_json::Value), CliError> {
    spec.validate()?;
    let mut buf = Vec::new();
    let sink = Path::new("<memory>");
    let mut meta = json!({ "kind": spec.kind.as_str(), "spec": spec });
    let rows = match spec.kind {
        SweepKind::GateTimeError => {
            let rows = run_gate_time_error_sweep(spec, jobs)?;
            output::write_csv(&mut buf, GATE_ERROR_HEADER, &rows, sink)?;
            rows.len()
        }
        SweepKind::NoiseMap => {
            let rows = run_noise_map_sweep(spec, jobs)?;
            output::write_csv(&mut buf, NOISE_MAP_HEADER, &rows, sink)?;
            meta["markers"] = json!(satd_markers(spec)?);
            rows.len()
        }
        SweepKind::Contour => {
            let rows = contour::run_contour_search(spec, jobs)?;
            output::write_csv(&mut buf, CONTOUR_HEADER, &rows, sink)?;
            meta["satd_min_tg_cycles"] = json!(contour::satd_floor(spec)?);
            rows.len()
        }
        SweepKind::PulseExport => {
            let rows = export_pulses(spec, jobs)?;
            output::write_csv(&mut buf, PULSE_HEADER, &rows, sink)?;
            rows.len()
        }
        SweepKind::OracleCompare => {
            let rows = compare_oracles(spec, jobs)?;
            output::write_csv(&mut buf, ORACLE_HEADER, &rows, sink)?;
            rows.len()
        }
    };
    meta["rows"] = json!(rows);
    Ok((buf, meta))
}

/// Runs `spec` and writes `out` and its metadata sidecar.
pub fn run_to_file(spec: &SweepSpec, jobs: usize, out: &Path) -> Result<(), CliError> {
    let (csv, meta) = run(spec, jobs)?;
    std::fs::write(out, csv).map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
    output::write_meta(out, &meta)
}
