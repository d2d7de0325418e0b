//! Segmented Schrödinger and Lindblad propagation of the tripod protocol.

use serde::{Deserialize, Serialize};

use crate::controls::{EnvelopeSet, Segment};
use crate::qmath::{eigh, integrate, CMatrix, IntegratorConfig, Method, StepStats, C64};
use crate::{Error, Result};

/// Trace defect above which a Lindblad propagation is rejected.
pub const TRACE_DEFECT_LIMIT: f64 = 1e-6;

/// Unitary propagations aim for `‖U†U − I‖_max ≤ UNITARITY_DEFECT_FACTOR · rel_tol`.
pub const UNITARITY_DEFECT_FACTOR: f64 = 10.0;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Pure-dephasing rates on `(|0>, |1>, |a>, |e>)` and the half-width `k` of
/// the relative Rabi-amplitude uncertainty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub gamma_phi: [f64; 4],
    #[serde(default)]
    pub k: f64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    /// Dephasing on the excited level only.
    pub fn excited(gamma_e: f64) -> Self {
        Self { gamma_phi: [0.0, 0.0, 0.0, gamma_e], k: 0.0 }
    }

    /// Equal dephasing `gamma_gs` on the three ground levels plus `gamma_e`.
    pub fn ground_and_excited(gamma_gs: f64, gamma_e: f64) -> Self {
        Self { gamma_phi: [gamma_gs, gamma_gs, gamma_gs, gamma_e], k: 0.0 }
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma_phi.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "dephasing rates must be finite and >= 0 (got {:?})",
                self.gamma_phi
            )));
        }
        if !(0.0..1.0).contains(&self.k) {
            return Err(Error::InvalidParameter(format!("k must lie in [0, 1) (got {})", self.k)));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.gamma_phi.iter().all(|g| *g == 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationKind {
    Unitary,
    Density,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: StepStats,
    /// `‖U†U − I‖_max` (unitary) or `|Tr ρ − 1|` (density).
    pub defect: f64,
    /// Smallest eigenvalue of the final density operator (0 for unitaries).
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropagationResult {
    pub final_operator: CMatrix,
    pub kind: PropagationKind,
    pub diagnostics: Diagnostics,
}

impl PropagationResult {
    /// Checks unitarity (`≤ 1e-8`) or trace and positivity (`≤ 1e-8`).
    pub fn check_invariants(&self) -> Result<()> {
        let d = &self.diagnostics;
        match self.kind {
            PropagationKind::Unitary if d.defect > 1e-8 => {
                Err(Error::InvalidParameter(format!("unitarity defect {:.3e}", d.defect)))
            }
            PropagationKind::Density if d.defect > 1e-8 => Err(Error::TraceDefect { defect: d.defect }),
            PropagationKind::Density if d.min_eigenvalue < -1e-8 => Err(Error::InvalidParameter(
                format!("negative eigenvalue {:.3e}", d.min_eigenvalue),
            )),
            _ => Ok(()),
        }
    }
}

/// Nonzero column `h_i = H[i][3] = Ω_i/2` of the tripod Hamiltonian.
#[inline]
fn coupling(env: &EnvelopeSet, seg: Segment, t: f64) -> [C64; 3] {
    let e = env.eval(seg, t);
    [e.omega_0e * 0.5, e.omega_1e * 0.5, e.omega_ae * 0.5]
}

/// `out = −i·H·y` for a row-major 4×`cols` block `y`.
#[inline]
fn apply_minus_i_h(h: &[C64; 3], y: &[C64], out: &mut [C64], cols: usize) {
    for c in 0..cols {
        let y3 = y[3 * cols + c];
        let mut acc = ZERO;
        for i in 0..3 {
            out[i * cols + c] = -I * h[i] * y3;
            acc += h[i].conj() * y[i * cols + c];
        }
        out[3 * cols + c] = -I * acc;
    }
}

/// Integrates `i∂_tU = H(t)U` over both half-segments starting from `I`.
pub fn propagate_unitary(env: &EnvelopeSet, cfg: &IntegratorConfig) -> Result<PropagationResult> {
    propagate_unitary_from(env, &CMatrix::identity(4), cfg)
}

/// As [`propagate_unitary`], starting from `u0`.
pub fn propagate_unitary_from(
    env: &EnvelopeSet,
    u0: &CMatrix,
    cfg: &IntegratorConfig,
) -> Result<PropagationResult> {
    if u0.dim() != 4 {
        return Err(Error::DimensionMismatch { left: u0.dim(), right: 4 });
    }
    let tg = env.t_gate();
    let limit = UNITARITY_DEFECT_FACTOR * cfg.rel_tol;
    let mut work = *cfg;
    let mut steps = StepStats::default();
    let mut attempt = 0;
    loop {
        let mut y = u0.as_slice().to_vec();
        for seg in [Segment::First, Segment::Second] {
            let (t0, t1) = seg.span(tg);
            steps += integrate(
                |t, y, dy| apply_minus_i_h(&coupling(env, seg, t), y, dy, 4),
                &mut y,
                t0,
                t1,
                &work,
                None,
            )?;
        }
        let u = CMatrix::from_row_major(y)?;
        let defect = u.unitarity_defect();
        attempt += 1;
        // Global drift grows with the step count; tighten and redo once or twice.
        if defect <= limit || attempt > 2 || work.method != Method::Dopri5 {
            return Ok(PropagationResult {
                final_operator: u,
                kind: PropagationKind::Unitary,
                diagnostics: Diagnostics { steps, defect, min_eigenvalue: 0.0 },
            });
        }
        let shrink = (defect / (0.25 * limit)).clamp(4.0, 1e3);
        work.rel_tol = (work.rel_tol / shrink).max(1e-15);
        work.abs_tol = (work.abs_tol / shrink).max(1e-17);
    }
}

fn hermitize_in_place(y: &mut [C64]) {
    for r in 0..4 {
        y[r * 4 + r].im = 0.0;
        for c in r + 1..4 {
            let m = (y[r * 4 + c] + y[c * 4 + r].conj()) * 0.5;
            y[r * 4 + c] = m;
            y[c * 4 + r] = m.conj();
        }
    }
}

/// Pairwise coherence decay rates `(Γ_a + Γ_b)/2`.
fn decay_rates(noise: &NoiseModel) -> [[f64; 4]; 4] {
    let g = noise.gamma_phi;
    let mut d = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            if a != b {
                d[a][b] = 0.5 * (g[a] + g[b]);
            }
        }
    }
    d
}

/// Lindblad right-hand side for one 4×4 density matrix stored row-major.
#[inline]
fn lindblad_rhs_tripod(h: &[C64; 3], decay: &[[f64; 4]; 4], rho: &[C64], out: &mut [C64]) {
    // −i(Hρ − ρH); H has nonzeros only in row 3 and column 3.
    for r in 0..4 {
        for c in 0..4 {
            let h_rho = if r < 3 {
                h[r] * rho[12 + c]
            } else {
                h[0].conj() * rho[c] + h[1].conj() * rho[4 + c] + h[2].conj() * rho[8 + c]
            };
            let rho_h = if c < 3 {
                rho[r * 4 + 3] * h[c].conj()
            } else {
                rho[r * 4] * h[0] + rho[r * 4 + 1] * h[1] + rho[r * 4 + 2] * h[2]
            };
            out[r * 4 + c] = -I * (h_rho - rho_h) - rho[r * 4 + c] * decay[r][c];
        }
    }
}

/// Direct-form Lindblad right-hand side for a generic Hamiltonian.
pub fn lindblad_rhs(h: &CMatrix, noise: &NoiseModel, rho: &CMatrix) -> Result<CMatrix> {
    let comm = h.commutator(rho)?;
    let decay = decay_rates(noise);
    Ok(CMatrix::from_fn(4, |r, c| -I * comm[(r, c)] - rho[(r, c)] * decay[r][c]))
}

fn density_result(y: Vec<C64>, steps: StepStats) -> Result<PropagationResult> {
    let rho = CMatrix::from_row_major(y)?;
    let defect = (rho.trace() - C64::new(1.0, 0.0)).norm();
    if defect > TRACE_DEFECT_LIMIT {
        return Err(Error::TraceDefect { defect });
    }
    let min_eigenvalue = eigh(&rho)?.values[0];
    Ok(PropagationResult {
        final_operator: rho,
        kind: PropagationKind::Density,
        diagnostics: Diagnostics { steps, defect, min_eigenvalue },
    })
}

fn check_density(rho: &CMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: 4 });
    }
    let defect = rho.hermiticity_defect();
    if defect > 1e-12 {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let tr = (rho.trace() - C64::new(1.0, 0.0)).norm();
    if tr > 1e-10 {
        return Err(Error::TraceDefect { defect: tr });
    }
    Ok(())
}

/// Integrates the dephasing master equation over both half-segments.
pub fn propagate_lindblad(
    env: &EnvelopeSet,
    noise: &NoiseModel,
    rho0: &CMatrix,
    cfg: &IntegratorConfig,
) -> Result<PropagationResult> {
    Ok(propagate_lindblad_batch(env, noise, std::slice::from_ref(rho0), cfg)?.remove(0))
}

/// Propagates several initial density matrices together, sharing Hamiltonian
/// evaluations and step control.
pub fn propagate_lindblad_batch(
    env: &EnvelopeSet,
    noise: &NoiseModel,
    rho0: &[CMatrix],
    cfg: &IntegratorConfig,
) -> Result<Vec<PropagationResult>> {
    noise.validate()?;
    for r in rho0 {
        check_density(r)?;
    }
    let n = rho0.len();
    let decay = decay_rates(noise);
    let tg = env.t_gate();
    let mut y: Vec<C64> = rho0.iter().flat_map(|r| r.as_slice().iter().copied()).collect();
    let mut steps = StepStats::default();
    let mut project = |y: &mut [C64]| {
        for chunk in y.chunks_mut(16) {
            hermitize_in_place(chunk);
        }
    };
    for seg in [Segment::First, Segment::Second] {
        let (t0, t1) = seg.span(tg);
        steps += integrate(
            |t, y, dy| {
                let h = coupling(env, seg, t);
                for k in 0..n {
                    lindblad_rhs_tripod(&h, &decay, &y[16 * k..16 * k + 16], &mut dy[16 * k..16 * k + 16]);
                }
            },
            &mut y,
            t0,
            t1,
            cfg,
            Some(&mut project),
        )?;
    }
    y.chunks(16).map(|c| density_result(c.to_vec(), steps)).collect()
}

/// Integrates the master equation for an arbitrary time-dependent Hamiltonian
/// on `[t0, t1]`.
pub fn propagate_lindblad_with<H>(
    hamiltonian: H,
    noise: &NoiseModel,
    rho0: &CMatrix,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<PropagationResult>
where
    H: Fn(f64) -> CMatrix,
{
    noise.validate()?;
    check_density(rho0)?;
    let mut y = rho0.as_slice().to_vec();
    let mut project = |y: &mut [C64]| hermitize_in_place(y);
    let mut failure = None;
    let steps = integrate(
        |t, y, dy| {
            let rho = CMatrix::from_row_major(y.to_vec()).expect("4x4 state");
            match lindblad_rhs(&hamiltonian(t), noise, &rho) {
                Ok(d) => dy.copy_from_slice(d.as_slice()),
                Err(e) => {
                    failure.get_or_insert(e);
                    dy.fill(C64::new(f64::NAN, 0.0));
                }
            }
        },
        &mut y,
        t0,
        t1,
        cfg,
        Some(&mut project),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    density_result(y, steps?)
}

/// Column-stacked Liouvillian for a single collapse operator `L`:
/// `−i(I⊗H − Hᵀ⊗I) + L*⊗L − ½ I⊗L†L − ½ (L†L)ᵀ⊗I`.
pub fn vectorize_superoperator(h: &CMatrix, l: &CMatrix) -> Result<CMatrix> {
    if h.dim() != l.dim() {
        return Err(Error::DimensionMismatch { left: h.dim(), right: l.dim() });
    }
    let id = CMatrix::identity(h.dim());
    let ldl = l.adjoint().matmul(l)?;
    let mut s = (&id.kron(h) - &h.transpose().kron(&id)).scale(-I);
    s += &l.conj().kron(l);
    s += &id.kron(&ldl).scale_re(-0.5);
    s += &ldl.transpose().kron(&id).scale_re(-0.5);
    Ok(s)
}

/// Liouvillian of `H` with the projector dephasing channels of `noise`.
pub fn lindblad_superoperator(h: &CMatrix, noise: &NoiseModel) -> Result<CMatrix> {
    let mut s = vectorize_superoperator(h, &CMatrix::zeros(h.dim()))?;
    for (j, g) in noise.gamma_phi.iter().enumerate() {
        if *g == 0.0 {
            continue;
        }
        let mut proj = CMatrix::zeros(h.dim());
        proj[(j, j)] = C64::new(g.sqrt(), 0.0);
        s += &vectorize_superoperator(&CMatrix::zeros(h.dim()), &proj)?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controls::{adiabatic_envelopes, make_pulse_shape, satd_envelopes, ControlParams, Flavor};
    use crate::tripod::{block_leakage, ideal_gate, FrameBasis};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const OMEGA0: f64 = 2.0 * PI;

    fn params(flavor: Flavor, tg: f64) -> ControlParams {
        ControlParams::new(OMEGA0, PI / 4.0, 0.0, PI, tg, flavor)
    }

    fn env(p: &ControlParams) -> EnvelopeSet {
        crate::controls::envelopes(p, &make_pulse_shape(p.t_gate)).unwrap()
    }

    fn random_density(rng: &mut impl Rng) -> CMatrix {
        let a = CMatrix::from_fn(4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let m = &a * &a.adjoint();
        let tr = m.trace().re;
        m.scale_re(1.0 / tr).hermitize()
    }

    /// Scaled Taylor exponential for a general (non-Hermitian) matrix.
    fn expm_general(a: &CMatrix) -> CMatrix {
        let n = a.dim();
        let norm = a.max_abs() * n as f64;
        let sq = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
        let b = a.scale_re(0.5f64.powi(sq));
        let (mut term, mut sum) = (CMatrix::identity(n), CMatrix::identity(n));
        for k in 1..=30 {
            term = (&term * &b).scale_re(1.0 / k as f64);
            sum += &term;
        }
        for _ in 0..sq {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseModel::excited(0.01).validate().is_ok());
        assert!(NoiseModel::excited(-0.01).validate().is_err());
        assert!(NoiseModel::excited(0.01).with_k(1.0).validate().is_err());
    }

    #[test]
    fn special_time_gives_identity_qubit_block() {
        let cfg = IntegratorConfig::default();
        // The leading-order refocusing is only exact asymptotically; the
        // first two special times still carry ε_q ≈ 2e-2 and 4e-5.
        for k1 in 3..=5 {
            let tg = 8.0 * PI * k1 as f64 / OMEGA0;
            let p = ControlParams { gamma0: 0.0, ..params(Flavor::Adiabatic, tg) };
            let r = propagate_unitary(&env(&p), &cfg).unwrap();
            let q = r.final_operator.block(0, 2);
            let f = crate::metrics::avg_gate_fidelity(&q, 2).unwrap();
            assert!(1.0 - f < 1e-6, "k1 = {k1}: {}", 1.0 - f);
            assert!(r.check_invariants().is_ok());
        }
    }

    #[test]
    fn qubit_dark_state_is_stationary() {
        let cfg = IntegratorConfig::default();
        for flavor in [Flavor::Adiabatic, Flavor::Satd] {
            let p = ControlParams { alpha: 0.6, beta: 2.2, gamma0: 1.3, ..params(flavor, 1.7) };
            let u = propagate_unitary(&env(&p), &cfg).unwrap().final_operator;
            let dark = FrameBasis::new(&p).qubit_dark();
            let out = u.apply(&dark);
            for (a, b) in out.iter().zip(dark) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn satd_qubit_block_matches_target() {
        let p = params(Flavor::Satd, 6.0);
        let r = propagate_unitary(&env(&p), &IntegratorConfig::default()).unwrap();
        let target = ideal_gate(&p).qubit_block();
        let o = target.adjoint().matmul(&r.final_operator.block(0, 2)).unwrap();
        assert!(1.0 - crate::metrics::avg_gate_fidelity(&o, 2).unwrap() < 1e-6);
        assert!(block_leakage(&r.final_operator) < 1e-6);
    }

    #[test]
    fn unitarity_holds_across_gate_times() {
        let cfg = IntegratorConfig::default();
        for tg in [0.5, 2.0, 8.0, 30.0] {
            for flavor in [Flavor::Adiabatic, Flavor::Satd] {
                let r = propagate_unitary(&env(&params(flavor, tg)), &cfg).unwrap();
                assert!(r.diagnostics.defect <= 10.0 * cfg.rel_tol, "{flavor} {tg}: {}", r.diagnostics.defect);
            }
        }
    }

    #[test]
    fn zero_noise_lindblad_matches_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = IntegratorConfig::default();
        let p = params(Flavor::Satd, 1.5);
        let e = env(&p);
        let u = propagate_unitary(&e, &cfg).unwrap().final_operator;
        let rhos: Vec<CMatrix> = (0..3).map(|_| random_density(&mut rng)).collect();
        let out = propagate_lindblad_batch(&e, &NoiseModel::noiseless(), &rhos, &cfg).unwrap();
        for (rho0, r) in rhos.iter().zip(&out) {
            let expected = &(&u * rho0) * &u.adjoint();
            assert!((&r.final_operator - &expected).max_abs() < 1e-8);
            assert!(r.check_invariants().is_ok());
        }
    }

    #[test]
    fn qubit_dark_density_is_untouched_by_excited_dephasing() {
        let p = ControlParams { alpha: 0.4, beta: 1.0, ..params(Flavor::Adiabatic, 1.2) };
        let dark = FrameBasis::new(&p).qubit_dark();
        let rho0 = CMatrix::outer(&dark, &dark);
        let r = propagate_lindblad(&env(&p), &NoiseModel::excited(0.3), &rho0, &IntegratorConfig::default())
            .unwrap();
        assert!((&r.final_operator - &rho0).max_abs() < 1e-9);
    }

    #[test]
    fn two_level_dephasing_decay() {
        let g = 0.7;
        let mut rho0 = CMatrix::zeros(4);
        for (r, c) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            rho0[(r, c)] = C64::new(0.5, 0.0);
        }
        let t = 2.3;
        let r = propagate_lindblad_with(|_| CMatrix::zeros(4), &NoiseModel::excited(g), &rho0, 0.0, t, &Default::default())
            .unwrap();
        let coh = r.final_operator[(2, 3)].re;
        assert!((coh - 0.5 * (-g * t / 2.0).exp()).abs() < 1e-10);
        assert!((r.final_operator[(3, 3)].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn superoperator_of_zero_is_zero() {
        let s = vectorize_superoperator(&CMatrix::zeros(4), &CMatrix::zeros(4)).unwrap();
        assert_eq!(s, CMatrix::zeros(16));
    }

    #[test]
    fn superoperator_matches_direct_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let h = CMatrix::from_fn(4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .hermitize();
            let noise = NoiseModel { gamma_phi: [0.0; 4].map(|_| rng.gen_range(0.0..0.5)), k: 0.0 };
            let rho = random_density(&mut rng);
            let s = lindblad_superoperator(&h, &noise).unwrap();
            let via_super = CMatrix::unvec_col(&s.apply(&rho.vec_col())).unwrap();
            let direct = lindblad_rhs(&h, &noise, &rho).unwrap();
            assert!((&via_super - &direct).max_abs() < 1e-12);
        }
    }

    #[test]
    fn general_collapse_operator_matches_direct_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rand_c = |rng: &mut ChaCha8Rng| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let h = CMatrix::from_fn(4, |_, _| rand_c(&mut rng)).hermitize();
        let l = CMatrix::from_fn(4, |_, _| rand_c(&mut rng));
        let rho = random_density(&mut rng);
        let s = vectorize_superoperator(&h, &l).unwrap();
        let got = CMatrix::unvec_col(&s.apply(&rho.vec_col())).unwrap();
        let ldl = &l.adjoint() * &l;
        let direct = &(&(&h.commutator(&rho).unwrap().scale(-I) + &(&(&l * &rho) * &l.adjoint()))
            - &(&ldl * &rho).scale_re(0.5))
            - &(&rho * &ldl).scale_re(0.5);
        assert!((&got - &direct).max_abs() < 1e-12);
    }

    #[test]
    fn constant_generator_matches_superoperator_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = CMatrix::from_fn(4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .hermitize();
        let noise = NoiseModel { gamma_phi: [0.1, 0.2, 0.05, 0.4], k: 0.0 };
        let rho0 = random_density(&mut rng);
        let t = 1.7;
        let prop = expm_general(&lindblad_superoperator(&h, &noise).unwrap().scale_re(t));
        let expected = CMatrix::unvec_col(&prop.apply(&rho0.vec_col())).unwrap();
        let r = propagate_lindblad_with(|_| h.clone(), &noise, &rho0, 0.0, t, &Default::default()).unwrap();
        assert!((&r.final_operator - &expected).max_abs() < 1e-8);
    }

    #[test]
    fn tripod_rhs_matches_generic_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = ControlParams { alpha: 0.3, beta: 0.9, gamma0: 2.0, ..params(Flavor::Satd, 0.8) };
        let e = satd_envelopes(&p, &make_pulse_shape(0.8)).unwrap();
        let noise = NoiseModel { gamma_phi: [0.1, 0.2, 0.3, 0.4], k: 0.0 };
        for t in [0.1, 0.5, 0.7] {
            let seg = Segment::of(t, 0.8);
            let rho = random_density(&mut rng);
            let mut out = vec![ZERO; 16];
            lindblad_rhs_tripod(&coupling(&e, seg, t), &decay_rates(&noise), rho.as_slice(), &mut out);
            let direct = lindblad_rhs(&crate::tripod::hamiltonian(&e, seg, t), &noise, &rho).unwrap();
            let fast = CMatrix::from_row_major(out).unwrap();
            assert!((&fast - &direct).max_abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_invalid_initial_state() {
        let p = params(Flavor::Adiabatic, 1.0);
        let e = adiabatic_envelopes(&p, &make_pulse_shape(1.0)).unwrap();
        let bad = CMatrix::identity(4);
        assert!(matches!(
            propagate_lindblad(&e, &NoiseModel::noiseless(), &bad, &Default::default()),
            Err(Error::TraceDefect { .. })
        ));
    }

    #[test]
    fn adiabatic_leakage_shrinks_with_gate_time() {
        let cfg = IntegratorConfig::default();
        let leak = |tg: f64| block_leakage(&propagate_unitary(&env(&params(Flavor::Adiabatic, tg)), &cfg).unwrap().final_operator);
        let (a, b, c) = (leak(2.0), leak(6.0), leak(18.0));
        assert!(a > b && b > c, "{a} {b} {c}");
    }
}
