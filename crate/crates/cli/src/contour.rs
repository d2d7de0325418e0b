//! Minimum-error gate time for fixed dephasing rates.

use tripod_core::controls::{satd_amplitude_threshold, Flavor};
use tripod_core::metrics::clamp_error;

use crate::config::{NoiseSpec, SweepKind, SweepSpec};
use crate::error::CliError;
use crate::sweeps::{map_errors, par_map, report_floor, ContourRow};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// Minimizes `f` on `[lo, hi]`: an `n`-point log grid brackets the best
/// point, then golden-section search in `ln x` refines it until the bracket
/// is narrower than `rel_tol` relative to its midpoint.
pub fn minimize_bracketed<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    lo: f64,
    hi: f64,
    n: usize,
    rel_tol: f64,
) -> Result<Minimum, E> {
    let n = n.max(3);
    let (la, lb) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..n).map(|i| la + (lb - la) * i as f64 / (n - 1) as f64).collect();
    let mut best = Minimum { x: lo, value: f64::INFINITY };
    let mut best_i = 0;
    for (i, g) in grid.iter().enumerate() {
        let v = f(g.exp())?;
        if v < best.value {
            best = Minimum { x: g.exp(), value: v };
            best_i = i;
        }
    }
    let (mut a, mut b) = (grid[best_i.saturating_sub(1)], grid[(best_i + 1).min(n - 1)]);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c.exp())?, f(d.exp())?);
    while b - a > rel_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d.exp())?;
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v < best.value {
            best = Minimum { x: x.exp(), value: v };
        }
    }
    Ok(best)
}

/// Smallest `ε_map` (amplitude-averaged) over the feasible gate-time window
/// for one rate pair and flavor. SATD gate times are bounded below by the
/// requirement `max|Ω_ie| ≤ Ω0`; `satd_floor` is that bound in cycles.
pub fn contour_point(
    spec: &SweepSpec,
    gamma_gs: f64,
    gamma_e: f64,
    flavor: Flavor,
    satd_floor: f64,
) -> Result<ContourRow, CliError> {
    let tg = spec.tg_points()?;
    let (mut lo, hi) = (tg.iter().cloned().fold(f64::INFINITY, f64::min), tg.iter().cloned().fold(0.0, f64::max));
    if flavor == Flavor::Satd {
        lo = lo.max(satd_floor);
    }
    let row = |tg_star: f64, eps: f64, feasible: bool| ContourRow {
        gamma_gs,
        gamma_e,
        flavor,
        tg_star_cycles: tg_star,
        eps_star: eps,
        feasible,
    };
    if !(lo < hi) {
        return Ok(row(f64::NAN, f64::NAN, false));
    }
    let noise = spec.noise_model_from(&NoiseSpec::ground_and_excited(gamma_gs, gamma_e, spec.noise.k));
    let fail = || CliError::numerical(format!("gamma_gs={gamma_gs} gamma_e={gamma_e} flavor={flavor}"));
    let m = minimize_bracketed(
        |t| map_errors(spec, &spec.control_params(flavor, t), &noise).map(|e| e.1),
        lo,
        hi,
        spec.contour.bracket_points,
        spec.contour.rel_tol,
    )
    .map_err(fail())?;
    Ok(row(m.x, clamp_error(m.value, report_floor(spec)), true))
}

/// SATD amplitude threshold in cycles.
pub fn satd_floor(spec: &SweepSpec) -> Result<f64, CliError> {
    let p = spec.control_params(Flavor::Satd, 1.0);
    Ok(satd_amplitude_threshold(&p).map_err(CliError::numerical("satd amplitude threshold"))? / spec.cycle())
}

pub fn run_contour_search(spec: &SweepSpec, jobs: usize) -> Result<Vec<ContourRow>, CliError> {
    if spec.kind != SweepKind::Contour {
        return Err(CliError::Config(format!("expected a contour config, got {}", spec.kind.as_str())));
    }
    let gs = spec.gamma_gs_grid.as_ref().map(|g| g.points("gamma_gs_grid")).transpose()?.unwrap_or_default();
    let ge = spec.gamma_e_grid.as_ref().map(|g| g.points("gamma_e_grid")).transpose()?.unwrap_or_default();
    let floor = if spec.flavors.contains(&Flavor::Satd) { satd_floor(spec)? } else { 0.0 };
    let mut tasks = Vec::new();
    for g in &gs {
        for e in &ge {
            for f in &spec.flavors {
                tasks.push((*g, *e, *f));
            }
        }
    }
    par_map(jobs, &tasks, |(g, e, f)| contour_point(spec, *g, *e, *f, floor))
}
