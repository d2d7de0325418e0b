//! Gate-time, noise-map, pulse-export and oracle-comparison sweeps.

use rayon::prelude::*;
use serde::Serialize;
use tripod_core::controls::{
    envelopes, make_pulse_shape, satd_amplitude_threshold, satd_cost_threshold, ControlParams, Flavor,
};
use tripod_core::dynamics::{propagate_unitary, NoiseModel};
use tripod_core::metrics::{
    analytic_satd_dephasing_fidelity, avg_gate_fidelity, clamp_error, closed_form_fidelities,
    gate_fidelities, map_fidelity, map_fidelity_uncertainty_avg,
};
use tripod_core::oracles::{dissipative_magnus_map_fidelity, magnus_gate_error};
use tripod_core::tripod::{ideal_gate, satd_gate};

use crate::config::{SweepKind, SweepSpec};
use crate::error::CliError;

pub const GATE_ERROR_HEADER: &str =
    "tg_cycles,flavor,eps_full,eps_qubit,eps_full_pred,eps_qubit_pred,eps_oracleA";
pub const NOISE_MAP_HEADER: &str =
    "tg_cycles,flavor,k,eps_map,eps_map_avg,max_amp_over_omega0,cost_over_halfomega0";
pub const CONTOUR_HEADER: &str = "gamma_gs,gamma_e,flavor,tg_star_cycles,eps_star,feasible";
pub const PULSE_HEADER: &str =
    "tg_cycles,flavor,t_cycles,abs_omega_0e,abs_omega_1e,abs_omega_ae,arg_omega_1e,arg_omega_ae";
pub const ORACLE_HEADER: &str =
    "tg_cycles,gamma_e,eps_full_numeric,eps_full_oracleA,eps_numeric,eps_analytic,eps_oracleB";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateErrorRow {
    pub tg_cycles: f64,
    pub flavor: Flavor,
    pub eps_full: f64,
    pub eps_qubit: f64,
    pub eps_full_pred: f64,
    pub eps_qubit_pred: f64,
    #[serde(rename = "eps_oracleA")]
    pub eps_oracle_a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseMapRow {
    pub tg_cycles: f64,
    pub flavor: Flavor,
    pub k: f64,
    pub eps_map: f64,
    pub eps_map_avg: f64,
    pub max_amp_over_omega0: f64,
    pub cost_over_halfomega0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourRow {
    pub gamma_gs: f64,
    pub gamma_e: f64,
    pub flavor: Flavor,
    pub tg_star_cycles: f64,
    pub eps_star: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PulseRow {
    pub tg_cycles: f64,
    pub flavor: Flavor,
    pub t_cycles: f64,
    pub abs_omega_0e: f64,
    pub abs_omega_1e: f64,
    pub abs_omega_ae: f64,
    pub arg_omega_1e: f64,
    pub arg_omega_ae: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRow {
    pub tg_cycles: f64,
    pub gamma_e: f64,
    pub eps_full_numeric: f64,
    #[serde(rename = "eps_full_oracleA")]
    pub eps_full_oracle_a: f64,
    pub eps_numeric: f64,
    pub eps_analytic: f64,
    #[serde(rename = "eps_oracleB")]
    pub eps_oracle_b: f64,
}

/// Runs `f` over `items` on a pool of `jobs` workers. Output order follows
/// `items`; the first failing item (in that order) is reported.
pub fn par_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>, CliError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R, CliError> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<R, CliError>> = pool.install(|| items.par_iter().map(&f).collect());
    results.into_iter().collect()
}

fn expect_kind(spec: &SweepSpec, kind: SweepKind) -> Result<(), CliError> {
    if spec.kind != kind {
        return Err(CliError::Config(format!(
            "expected a {} config, got {}",
            kind.as_str(),
            spec.kind.as_str()
        )));
    }
    Ok(())
}

fn point(tg: f64, flavor: Flavor) -> String {
    format!("tg_cycles={tg} flavor={flavor}")
}

/// Errors at or below this level are reported as zero.
pub fn report_floor(spec: &SweepSpec) -> f64 {
    10.0 * spec.integrator.rel_tol
}

pub fn gate_error_point(spec: &SweepSpec, tg: f64, flavor: Flavor) -> Result<GateErrorRow, CliError> {
    let fail = || CliError::numerical(point(tg, flavor));
    let p = spec.control_params(flavor, tg);
    let shape = make_pulse_shape(p.t_gate);
    let env = envelopes(&p, &shape).map_err(fail())?;
    let r = propagate_unitary(&env, &spec.integrator).map_err(fail())?;
    r.check_invariants().map_err(fail())?;
    let target = ideal_gate(&p).to_unitary();
    let (f_full, f_qubit) = gate_fidelities(&target, &r.final_operator).map_err(fail())?;
    let (pred_full, pred_qubit, oracle) = match flavor {
        Flavor::Adiabatic => {
            let (f, q) = closed_form_fidelities(&p).map_err(fail())?;
            (1.0 - f, 1.0 - q, magnus_gate_error(&p).map_err(fail())?)
        }
        _ => {
            let g = satd_gate(&p, &shape).map_err(fail())?.to_unitary();
            let o = target.adjoint().matmul(&g).map_err(fail())?;
            (1.0 - avg_gate_fidelity(&o, 4).map_err(fail())?, 0.0, f64::NAN)
        }
    };
    let floor = report_floor(spec);
    Ok(GateErrorRow {
        tg_cycles: tg,
        flavor,
        eps_full: clamp_error(1.0 - f_full, floor),
        eps_qubit: clamp_error(1.0 - f_qubit, floor),
        eps_full_pred: pred_full,
        eps_qubit_pred: pred_qubit,
        eps_oracle_a: oracle,
    })
}

fn tasks(spec: &SweepSpec) -> Result<Vec<(f64, Flavor)>, CliError> {
    let tg = spec.tg_points()?;
    Ok(tg.iter().flat_map(|t| spec.flavors.iter().map(move |f| (*t, *f))).collect())
}

pub fn run_gate_time_error_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<GateErrorRow>, CliError> {
    expect_kind(spec, SweepKind::GateTimeError)?;
    par_map(jobs, &tasks(spec)?, |(tg, flavor)| gate_error_point(spec, *tg, *flavor))
}

/// Map error of `p` under `noise`, with the amplitude average when `k > 0`.
pub fn map_errors(
    spec: &SweepSpec,
    p: &ControlParams,
    noise: &NoiseModel,
) -> Result<(f64, f64), tripod_core::Error> {
    let env = envelopes(p, &make_pulse_shape(p.t_gate))?;
    let nominal = 1.0 - map_fidelity(p, &env, noise, &spec.integrator)?;
    let avg = if noise.k > 0.0 {
        1.0 - map_fidelity_uncertainty_avg(p, noise, spec.uncertainty_nodes, &spec.integrator)?
    } else {
        nominal
    };
    Ok((nominal, avg))
}

pub fn noise_map_points(spec: &SweepSpec, tg: f64, flavor: Flavor) -> Result<Vec<NoiseMapRow>, CliError> {
    let fail = || CliError::numerical(point(tg, flavor));
    let p = spec.control_params(flavor, tg);
    let env = envelopes(&p, &make_pulse_shape(p.t_gate)).map_err(fail())?;
    let base = spec.noise_model();
    let max_amp = env.max_amplitude() / p.omega0;
    let cost = env.cost().map_err(fail())? / (0.5 * p.omega0);
    let floor = report_floor(spec);
    let mut ks = vec![0.0];
    if base.k > 0.0 {
        ks.push(base.k);
    }
    let (nominal, _) = map_errors(spec, &p, &base.with_k(0.0)).map_err(fail())?;
    ks.into_iter()
        .map(|k| {
            let avg = if k > 0.0 { map_errors(spec, &p, &base.with_k(k)).map_err(fail())?.1 } else { nominal };
            Ok(NoiseMapRow {
                tg_cycles: tg,
                flavor,
                k,
                eps_map: clamp_error(nominal, floor),
                eps_map_avg: clamp_error(avg, floor),
                max_amp_over_omega0: max_amp,
                cost_over_halfomega0: cost,
            })
        })
        .collect()
}

pub fn run_noise_map_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<NoiseMapRow>, CliError> {
    expect_kind(spec, SweepKind::NoiseMap)?;
    let rows = par_map(jobs, &tasks(spec)?, |(tg, flavor)| noise_map_points(spec, *tg, *flavor))?;
    Ok(rows.into_iter().flatten().collect())
}

/// SATD marker gate times in cycles: amplitude threshold, 2× and 3× cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Markers {
    pub satd_max_amplitude_tg_cycles: f64,
    pub satd_cost_2x_tg_cycles: f64,
    pub satd_cost_3x_tg_cycles: f64,
}

pub fn satd_markers(spec: &SweepSpec) -> Result<Markers, CliError> {
    let p = spec.control_params(Flavor::Satd, 1.0);
    let fail = || CliError::numerical("satd markers");
    let c = spec.cycle();
    Ok(Markers {
        satd_max_amplitude_tg_cycles: satd_amplitude_threshold(&p).map_err(fail())? / c,
        satd_cost_2x_tg_cycles: satd_cost_threshold(&p, 2.0).map_err(fail())? / c,
        satd_cost_3x_tg_cycles: satd_cost_threshold(&p, 3.0).map_err(fail())? / c,
    })
}

pub fn export_pulses(spec: &SweepSpec, jobs: usize) -> Result<Vec<PulseRow>, CliError> {
    expect_kind(spec, SweepKind::PulseExport)?;
    let cycle = spec.cycle();
    let rows = par_map(jobs, &tasks(spec)?, |(tg, flavor)| {
        let p = spec.control_params(*flavor, *tg);
        let env = envelopes(&p, &make_pulse_shape(p.t_gate)).map_err(CliError::numerical(point(*tg, *flavor)))?;
        Ok(env
            .sample(spec.samples)
            .into_iter()
            .map(|(t, e)| PulseRow {
                tg_cycles: *tg,
                flavor: *flavor,
                t_cycles: t / cycle,
                abs_omega_0e: e.omega_0e.norm() / p.omega0,
                abs_omega_1e: e.omega_1e.norm() / p.omega0,
                abs_omega_ae: e.omega_ae.norm() / p.omega0,
                arg_omega_1e: e.omega_1e.arg(),
                arg_omega_ae: e.omega_ae.arg(),
            })
            .collect::<Vec<_>>())
    })?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn oracle_point(spec: &SweepSpec, tg: f64) -> Result<OracleRow, CliError> {
    let fail = || CliError::numerical(format!("tg_cycles={tg}"));
    let adiabatic = gate_error_point(spec, tg, Flavor::Adiabatic)?;
    let p = spec.control_params(Flavor::Satd, tg);
    let shape = make_pulse_shape(p.t_gate);
    let noise = spec.noise_model().with_k(0.0);
    let (eps, _) = map_errors(spec, &p, &noise).map_err(fail())?;
    let excited_only = noise.gamma_phi[..3].iter().all(|g| *g == 0.0);
    let (analytic, oracle_b) = if excited_only {
        (
            1.0 - analytic_satd_dephasing_fidelity(&p, &shape, &noise).map_err(fail())?,
            1.0 - dissipative_magnus_map_fidelity(&p, &shape, &noise, &spec.integrator).map_err(fail())?,
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(OracleRow {
        tg_cycles: tg,
        gamma_e: spec.noise.gamma_e,
        eps_full_numeric: adiabatic.eps_full,
        eps_full_oracle_a: adiabatic.eps_oracle_a,
        eps_numeric: eps,
        eps_analytic: analytic,
        eps_oracle_b: oracle_b,
    })
}

pub fn compare_oracles(spec: &SweepSpec, jobs: usize) -> Result<Vec<OracleRow>, CliError> {
    expect_kind(spec, SweepKind::OracleCompare)?;
    par_map(jobs, &spec.tg_points()?, |tg| oracle_point(spec, *tg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{GridSpec, NoiseSpec};

    fn spec(kind: SweepKind, tg: Vec<f64>) -> SweepSpec {
        SweepSpec { tg_grid: Some(GridSpec::values(tg)), ..SweepSpec::new(kind) }
    }

    #[test]
    fn two_point_gate_error_grid() {
        let rows = run_gate_time_error_sweep(&spec(SweepKind::GateTimeError, vec![1.0, 2.0]), 1).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert!(r.eps_full.is_finite() && r.eps_qubit.is_finite() && r.eps_full_pred.is_finite());
            if r.flavor == Flavor::Adiabatic {
                assert!(r.eps_oracle_a.is_finite());
            } else {
                assert_eq!(r.eps_qubit, 0.0);
            }
        }
    }

    #[test]
    fn zero_noise_map_equals_unitary_map() {
        let rows = run_noise_map_sweep(&spec(SweepKind::NoiseMap, vec![1.0]), 1).unwrap();
        assert_eq!(rows.len(), 2);
        let satd = rows.iter().find(|r| r.flavor == Flavor::Satd).unwrap();
        assert_eq!(satd.eps_map, 0.0);
        assert!(satd.max_amp_over_omega0 > 1.0 && satd.cost_over_halfomega0 > 1.0);
        let adiabatic = rows.iter().find(|r| r.flavor == Flavor::Adiabatic).unwrap();
        assert!(adiabatic.eps_map > 1e-3);
        assert!((adiabatic.max_amp_over_omega0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncertainty_rows_are_added() {
        let mut s = spec(SweepKind::NoiseMap, vec![2.0]);
        s.flavors = vec![Flavor::Satd];
        s.noise = NoiseSpec { gamma_e: 0.01, k: 0.2, ..NoiseSpec::default() };
        s.uncertainty_nodes = 5;
        let rows = run_noise_map_sweep(&s, 1).unwrap();
        assert_eq!(rows.iter().map(|r| r.k).collect::<Vec<_>>(), vec![0.0, 0.2]);
        assert_eq!(rows[0].eps_map, rows[1].eps_map);
        assert!(rows[1].eps_map_avg > rows[0].eps_map_avg);
    }

    #[test]
    fn pulse_export_starts_on_the_auxiliary_drive() {
        let mut s = spec(SweepKind::PulseExport, vec![2.0]);
        s.flavors = vec![Flavor::Adiabatic];
        s.params.amp_scale = 0.9;
        let rows = export_pulses(&s, 1).unwrap();
        assert_eq!(rows.len(), 101);
        let first = &rows[0];
        assert_eq!((first.abs_omega_0e, first.abs_omega_1e), (0.0, 0.0));
        assert!((first.abs_omega_ae - 0.9).abs() < 1e-15);
        assert!((rows[100].t_cycles - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_kind_is_a_config_error() {
        let s = spec(SweepKind::NoiseMap, vec![1.0, 2.0]);
        assert!(matches!(run_gate_time_error_sweep(&s, 1), Err(CliError::Config(_))));
    }

    #[test]
    fn parallel_matches_serial() {
        let s = spec(SweepKind::GateTimeError, vec![0.7, 1.1, 1.9]);
        let serial = run_gate_time_error_sweep(&s, 1).unwrap();
        let parallel = run_gate_time_error_sweep(&s, 3).unwrap();
        assert_eq!(serial.len(), parallel.len());
        for (a, b) in serial.iter().zip(&parallel) {
            assert_eq!(a.tg_cycles, b.tg_cycles);
            assert_eq!(a.eps_full.to_bits(), b.eps_full.to_bits());
        }
    }

    #[test]
    fn markers_are_ordered() {
        let m = satd_markers(&SweepSpec::new(SweepKind::NoiseMap)).unwrap();
        assert!(m.satd_cost_3x_tg_cycles < m.satd_cost_2x_tg_cycles);
        assert!(m.satd_max_amplitude_tg_cycles > 0.0);
    }
}
