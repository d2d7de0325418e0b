//! Explicit Runge–Kutta integrators for complex-valued linear ODEs.
//!
//! The state is a flat `&mut [C64]`; callers pack matrices (or batches of
//! matrices) into it. The adaptive method is Dormand–Prince 5(4) with
//! first-same-as-last stage reuse.

use serde::{Deserialize, Serialize};

use super::{CMatrix, C64};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Adaptive embedded Runge–Kutta 5(4) (Dormand–Prince).
    Dopri5,
    /// Classical RK4 with fixed step `max_step`.
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub method: Method,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: 0.05, method: Method::Dopri5 }
    }
}

impl IntegratorConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.rel_tol) || !ok(self.abs_tol) || !(self.max_step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "integrator tolerances and max_step must be > 0 (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Step counters accumulated over one or more solves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, rhs: Self) {
        self.accepted += rhs.accepted;
        self.rejected += rhs.rejected;
    }
}

// Dormand–Prince coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t1` in place.
///
/// `project`, when given, is applied to the state after every accepted step
/// (e.g. Hermitian symmetrization of density matrices).
pub fn integrate<F>(
    mut rhs: F,
    y: &mut [C64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    mut project: Option<&mut dyn FnMut(&mut [C64])>,
) -> Result<StepStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    cfg.validate()?;
    if !(t1 >= t0) {
        return Err(Error::InvalidParameter(format!("t1 = {t1} precedes t0 = {t0}")));
    }
    if t1 == t0 {
        return Ok(StepStats::default());
    }
    match cfg.method {
        Method::Dopri5 => dopri5(&mut rhs, y, t0, t1, cfg, &mut project),
        Method::Rk4 => rk4(&mut rhs, y, t0, t1, cfg, &mut project),
    }
}

fn axpy_into(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (coef, k) in terms {
            if *coef != 0.0 {
                acc += k[i] * *coef;
            }
        }
        *o = y[i] + acc * h;
    }
}

fn dopri5<F>(
    rhs: &mut F,
    y: &mut [C64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    project: &mut Option<&mut dyn FnMut(&mut [C64])>,
) -> Result<StepStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y.len();
    let zero = C64::new(0.0, 0.0);
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];

    let span = t1 - t0;
    let mut stats = StepStats::default();
    let mut t = t0;
    rhs(t, y, &mut k1);

    // Initial step from the scaled norms of y and y'.
    let scaled = |v: &[C64], y: &[C64]| -> f64 {
        let s: f64 = v
            .iter()
            .zip(y)
            .map(|(a, b)| (a.norm() / (cfg.abs_tol + cfg.rel_tol * b.norm())).powi(2))
            .sum();
        (s / n.max(1) as f64).sqrt()
    };
    let d0 = scaled(y, y);
    let d1 = scaled(&k1, y);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(cfg.max_step).min(span);

    let mut last_rejected = false;
    loop {
        let remaining = t1 - t;
        if remaining <= 1e-15 * t1.abs().max(1.0) {
            break;
        }
        // Stretch onto t1 rather than leave a sliver below the underflow limit.
        let last = 1.01 * h >= remaining;
        if last {
            h = remaining;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h });
        }

        axpy_into(&mut tmp, y, h, &[(A21, &k1)]);
        rhs(t + C2 * h, &tmp, &mut k2);
        axpy_into(&mut tmp, y, h, &[(A31, &k1), (A32, &k2)]);
        rhs(t + C3 * h, &tmp, &mut k3);
        axpy_into(&mut tmp, y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(t + C4 * h, &tmp, &mut k4);
        axpy_into(&mut tmp, y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(t + C5 * h, &tmp, &mut k5);
        axpy_into(&mut tmp, y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        rhs(t + h, &tmp, &mut k6);
        axpy_into(
            &mut y_new,
            y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        rhs(t + h, &y_new, &mut k7);

        let mut err_sq = 0.0;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                * h;
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].norm().max(y_new[i].norm());
            err_sq += (e.norm() / sc).powi(2);
        }
        let err = (err_sq / n.max(1) as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::NonFinite { t });
        }

        if err <= 1.0 {
            stats.accepted += 1;
            t = if last { t1 } else { t + h };
            y.copy_from_slice(&y_new);
            if let Some(p) = project.as_mut() {
                p(y);
            }
            std::mem::swap(&mut k1, &mut k7);
            let mut factor = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
            factor = factor.clamp(0.2, 5.0);
            if last_rejected {
                factor = factor.min(1.0);
            }
            h = (h * factor).min(cfg.max_step);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
    Ok(stats)
}

fn rk4<F>(
    rhs: &mut F,
    y: &mut [C64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    project: &mut Option<&mut dyn FnMut(&mut [C64])>,
) -> Result<StepStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y.len();
    let zero = C64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut tmp = vec![zero; n];
    let steps = ((t1 - t0) / cfg.max_step).ceil().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        rhs(t, y, &mut k1);
        axpy_into(&mut tmp, y, h, &[(0.5, &k1)]);
        rhs(t + 0.5 * h, &tmp, &mut k2);
        axpy_into(&mut tmp, y, h, &[(0.5, &k2)]);
        rhs(t + 0.5 * h, &tmp, &mut k3);
        axpy_into(&mut tmp, y, h, &[(1.0, &k3)]);
        rhs(t + h, &tmp, &mut k4);
        for i in 0..n {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        if let Some(p) = project.as_mut() {
            p(y);
        }
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t: t + h });
        }
    }
    Ok(StepStats { accepted: steps, rejected: 0 })
}

/// Solves the linear matrix ODE `dY/dt = G(t)·Y` on `[t0, t1]`.
pub fn ode_solve<G>(
    generator: G,
    y0: &CMatrix,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<(CMatrix, StepStats)>
where
    G: Fn(f64) -> CMatrix,
{
    let n = y0.dim();
    let mut y = y0.as_slice().to_vec();
    let stats = integrate(
        |t, state, out| {
            let g = generator(t);
            debug_assert_eq!(g.dim(), n);
            for r in 0..n {
                for c in 0..n {
                    out[r * n + c] = (0..n).map(|k| g[(r, k)] * state[k * n + c]).sum();
                }
            }
        },
        &mut y,
        t0,
        t1,
        cfg,
        None,
    )?;
    Ok((CMatrix::from_row_major(y)?, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::expm_hermitian_generator;

    fn test_hamiltonian() -> CMatrix {
        CMatrix::from_fn(4, |r, c| {
            let base = C64::new((r + c) as f64 * 0.3, (r as f64 - c as f64) * 0.7);
            if r == c { C64::new(r as f64 - 1.5, 0.0) } else { base }
        })
        .hermitize()
    }

    #[test]
    fn zero_rhs_leaves_state_unchanged() {
        let y0 = CMatrix::from_fn(4, |r, c| C64::new(r as f64, c as f64));
        let (y, _) = ode_solve(|_| CMatrix::zeros(4), &y0, 0.0, 3.0, &IntegratorConfig::default())
            .unwrap();
        assert_eq!(y, y0);
    }

    #[test]
    fn constant_generator_matches_matrix_exponential() {
        let h = test_hamiltonian();
        let gen = h.scale(C64::new(0.0, -1.0));
        let (t0, t1) = (0.25, 2.75);
        let exact = expm_hermitian_generator(&h, t1 - t0).unwrap();
        for method in [Method::Dopri5, Method::Rk4] {
            let cfg = IntegratorConfig { method, max_step: 1e-3, ..Default::default() };
            let (u, _) = ode_solve(|_| gen.clone(), &CMatrix::identity(4), t0, t1, &cfg).unwrap();
            assert!((&u - &exact).max_abs() < 1e-9, "{method:?}");
        }
    }

    #[test]
    fn tightening_tolerance_reduces_error() {
        let h = test_hamiltonian();
        let gen = h.scale(C64::new(0.0, -1.0));
        let exact = expm_hermitian_generator(&h, 20.0).unwrap();
        let mut prev = f64::INFINITY;
        for rel_tol in [1e-4, 1e-6, 1e-8, 1e-10] {
            let cfg = IntegratorConfig { rel_tol, abs_tol: rel_tol * 1e-2, max_step: 10.0, ..Default::default() };
            let (u, _) = ode_solve(|_| gen.clone(), &CMatrix::identity(4), 0.0, 20.0, &cfg).unwrap();
            let err = (&u - &exact).max_abs();
            assert!(err < prev, "rel_tol {rel_tol}: {err} !< {prev}");
            prev = err;
        }
    }

    #[test]
    fn rejects_reversed_interval() {
        let r = ode_solve(|_| CMatrix::zeros(2), &CMatrix::identity(2), 1.0, 0.0, &Default::default());
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn stiff_blowup_reports_underflow_or_nonfinite() {
        // y' = y^2 blows up at t = 1 for y(0) = 1.
        let mut y = vec![C64::new(1.0, 0.0)];
        let r = integrate(|_, s, o| o[0] = s[0] * s[0], &mut y, 0.0, 2.0, &Default::default(), None);
        match r {
            Err(Error::StepUnderflow { t, .. }) | Err(Error::NonFinite { t }) => {
                assert!((t - 1.0).abs() < 1e-3, "t = {t}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
