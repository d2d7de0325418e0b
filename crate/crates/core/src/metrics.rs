//! Gate, qubit-projected and map fidelities, with their closed-form
//! predictions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::controls::{envelopes, expect_flavor, make_pulse_shape, ControlParams, EnvelopeSet, Flavor, PulseShape};
use crate::dynamics::{propagate_lindblad_batch, NoiseModel};
use crate::qmath::{quad::GaussLegendre, CMatrix, IntegratorConfig, C64};
use crate::tripod::ideal_gate;
use crate::{Error, Result};

/// Coefficient of the qubit-projected fidelity prediction.
pub const QUBIT_PRED_COEFF: f64 = 14_745_600.0;

/// Default Gauss–Legendre node count for amplitude-uncertainty averaging.
pub const DEFAULT_UNCERTAINTY_NODES: usize = 21;

/// `F̄ = (Tr[OO†] + |Tr O|²)/(d(d+1))`.
pub fn avg_gate_fidelity(o: &CMatrix, d: usize) -> Result<f64> {
    if o.dim() != d {
        return Err(Error::DimensionMismatch { left: o.dim(), right: d });
    }
    let oo: f64 = o.as_slice().iter().map(|z| z.norm_sqr()).sum();
    let tr = o.trace().norm_sqr();
    Ok((oo + tr) / (d * (d + 1)) as f64)
}

/// Full-space (`d = 4`) and qubit-projected (`d = 2`) fidelities of `u`
/// against the block-diagonal `target`.
pub fn gate_fidelities(target: &CMatrix, u: &CMatrix) -> Result<(f64, f64)> {
    let full = avg_gate_fidelity(&target.adjoint().matmul(u)?, 4)?;
    let oq = target.block(0, 2).adjoint().matmul(&u.block(0, 2))?;
    Ok((full, avg_gate_fidelity(&oq, 2)?))
}

/// Fidelities in `[0, 1 + 1e-9]`, with errors `ε = 1 − F`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub f_full: f64,
    pub f_qubit: f64,
    pub f_map: f64,
    pub f_map_avg: f64,
}

impl FidelityReport {
    pub fn eps_full(&self) -> f64 {
        1.0 - self.f_full
    }
    pub fn eps_qubit(&self) -> f64 {
        1.0 - self.f_qubit
    }
    pub fn eps_map(&self) -> f64 {
        1.0 - self.f_map
    }
    pub fn eps_map_avg(&self) -> f64 {
        1.0 - self.f_map_avg
    }
}

/// Reports errors at or below `tol` as exactly zero.
pub fn clamp_error(eps: f64, tol: f64) -> f64 {
    if eps.abs() <= tol {
        0.0
    } else {
        eps
    }
}

/// Leading-order predictions `(F̄, F̄_q)` for the adiabatic gate with the
/// quintic ramp.
pub fn closed_form_fidelities(p: &ControlParams) -> Result<(f64, f64)> {
    expect_flavor(p.flavor, Flavor::Adiabatic)?;
    let x = p.omega_tg();
    let full = 1.0 - 40.0 * PI.powi(4) / (49.0 * x * x);
    let qubit = 1.0
        + QUBIT_PRED_COEFF * PI * PI / x.powi(6)
            * (-1.0 + (0.25 * x).cos() * p.gamma0.cos())
            * (0.125 * x).sin().powi(2);
    Ok((full, qubit))
}

/// The six axial qubit states `ρ_{±z}, ρ_{±x}, ρ_{±y}` in the `{|0>, |1>}` block.
pub fn axial_states() -> [CMatrix; 6] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let ket = |a: C64, b: C64| [a, b, z, z];
    let (one, i) = (C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    [
        ket(one, z),
        ket(z, one),
        ket(one * s, one * s),
        ket(one * s, -one * s),
        ket(one * s, i * s),
        ket(one * s, -i * s),
    ]
    .map(|v| CMatrix::outer(&v, &v))
}

/// Map fidelity from final states of the six axial inputs (same order as
/// [`axial_states`]) against the qubit block `uq` embedded in 4×4.
pub fn map_fidelity_from_states(uq: &CMatrix, finals: &[CMatrix; 6]) -> Result<f64> {
    let mut sum = 0.0;
    for (rho, rho_t) in axial_states().iter().zip(finals) {
        let ideal = uq.matmul(rho)?.matmul(&uq.adjoint())?;
        sum += ideal.matmul(rho_t)?.trace().re;
    }
    Ok(sum / 6.0)
}

/// Ideal qubit block `P_q U_G,ad P_q` at nominal `Ω0`, embedded in 4×4.
pub fn target_qubit_block(p: &ControlParams) -> CMatrix {
    let q = ideal_gate(p).qubit_block();
    let mut uq = CMatrix::zeros(4);
    for r in 0..2 {
        for c in 0..2 {
            uq[(r, c)] = q[(r, c)];
        }
    }
    uq
}

/// Average single-qubit map fidelity under the dephasing master equation.
///
/// Only four states are propagated; `ρ_{−x}` and `ρ_{−y}` follow by linearity
/// from `ρ_{−x} = ρ_{+z} + ρ_{−z} − ρ_{+x}`.
pub fn map_fidelity(
    p: &ControlParams,
    env: &EnvelopeSet,
    noise: &NoiseModel,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let states = axial_states();
    let inputs = [states[0].clone(), states[1].clone(), states[2].clone(), states[4].clone()];
    let out = propagate_lindblad_batch(env, noise, &inputs, cfg)?;
    for r in &out {
        r.check_invariants()?;
    }
    let [pz, mz, px, py] = [0, 1, 2, 3].map(|k| out[k].final_operator.clone());
    let sum_z = &pz + &mz;
    let finals = [pz, mz, px.clone(), &sum_z - &px, py.clone(), &sum_z - &py];
    map_fidelity_from_states(&target_qubit_block(p), &finals)
}

/// Uniform average of [`map_fidelity`] over `Ω0' ∈ [Ω0(1−k), Ω0(1+k)]` by
/// Gauss–Legendre quadrature. Pulses stay designed at nominal `Ω0`; each node
/// only rescales the realized amplitude.
pub fn map_fidelity_uncertainty_avg(
    p: &ControlParams,
    noise: &NoiseModel,
    n_nodes: usize,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    noise.validate()?;
    let shape = make_pulse_shape(p.t_gate);
    let at = |r: f64| -> Result<f64> {
        let q = p.with_amp_scale(p.amp_scale * r);
        map_fidelity(p, &envelopes(&q, &shape)?, noise, cfg)
    };
    if noise.k == 0.0 {
        return at(1.0);
    }
    let gl = GaussLegendre::new(n_nodes)?;
    let mut acc = 0.0;
    for (x, w) in gl.nodes().iter().zip(gl.weights()) {
        acc += 0.5 * w * at(1.0 + noise.k * x)?;
    }
    Ok(acc)
}

/// First-order prediction of the SATD map fidelity under excited-state
/// dephasing.
pub fn analytic_satd_dephasing_fidelity(
    p: &ControlParams,
    shape: &PulseShape,
    noise: &NoiseModel,
) -> Result<f64> {
    expect_flavor(p.flavor, Flavor::Satd)?;
    noise.validate()?;
    if noise.gamma_phi[..3].iter().any(|g| *g != 0.0) {
        return Err(Error::InvalidParameter(
            "the analytic SATD prediction covers excited-state dephasing only".into(),
        ));
    }
    let ge = noise.gamma_phi[3];
    let w2 = p.omega0 * p.omega0;
    let gl = GaussLegendre::new(21)?;
    let (half, panels) = (0.5 * shape.t_gate, 16);
    let i1 = gl.integrate_composite(
        |t| {
            let d2 = shape.theta_dot(t).powi(2);
            d2 / (w2 + 4.0 * d2)
        },
        0.0,
        half,
        panels,
    );
    let i2 = gl.integrate_composite(
        |t| {
            let d2 = shape.theta_dot(t).powi(2);
            d2 / (w2 + 4.0 * d2).powi(2)
        },
        0.0,
        half,
        panels,
    );
    Ok(1.0 - 4.0 / 3.0 * ge * i1 - 8.0 / 3.0 * ge * w2 * i2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controls::satd_envelopes;
    use crate::dynamics::propagate_unitary;
    use crate::qmath::expm_hermitian_generator;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const OMEGA0: f64 = 2.0 * PI;

    fn params(flavor: Flavor, tg: f64) -> ControlParams {
        ControlParams::new(OMEGA0, PI / 4.0, 0.0, PI, tg, flavor)
    }

    #[test]
    fn identity_and_phase_flip() {
        assert!((avg_gate_fidelity(&CMatrix::identity(4), 4).unwrap() - 1.0).abs() < 1e-15);
        let o = CMatrix::diag(&[C64::new(1.0, 0.0), C64::from_polar(1.0, PI)]);
        assert!((avg_gate_fidelity(&o, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(avg_gate_fidelity(&o, 4).is_err());
    }

    #[test]
    fn unit_fidelity_iff_phase_times_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let phase = C64::from_polar(1.0, rng.gen_range(-PI..PI));
            let f = avg_gate_fidelity(&CMatrix::identity(4).scale(phase), 4).unwrap();
            assert!((f - 1.0).abs() < 1e-14);
            let h = CMatrix::from_fn(4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .hermitize();
            let u = expm_hermitian_generator(&h, 0.3).unwrap().scale(phase);
            let f = avg_gate_fidelity(&u, 4).unwrap();
            assert!(f < 1.0 - 1e-6 && f >= 0.0);
        }
    }

    #[test]
    fn closed_form_limits() {
        let (f, q) = closed_form_fidelities(&params(Flavor::Adiabatic, 1e5)).unwrap();
        assert!(1.0 - f < 1e-8 && (1.0 - q).abs() < 1e-20);
        let (f, _) = closed_form_fidelities(&params(Flavor::Adiabatic, 10.0)).unwrap();
        assert!((f - (1.0 - PI * PI / 490.0)).abs() < 1e-14);
        for k1 in 1..5 {
            let tg = 8.0 * PI * k1 as f64 / OMEGA0;
            let (_, q) = closed_form_fidelities(&params(Flavor::Adiabatic, tg)).unwrap();
            assert!((q - 1.0).abs() < 1e-20);
        }
        assert!(closed_form_fidelities(&params(Flavor::Satd, 1.0)).is_err());
    }

    #[test]
    fn axial_states_are_pure_and_complementary() {
        let s = axial_states();
        for rho in &s {
            assert!((rho.trace().re - 1.0).abs() < 1e-15);
            assert!((&(rho * rho) - rho).max_abs() < 1e-15);
        }
        for k in [0, 2, 4] {
            let sum = &s[k] + &s[k + 1];
            assert!((&sum - &(&s[0] + &s[1])).max_abs() < 1e-15);
        }
    }

    #[test]
    fn noiseless_satd_map_is_perfect() {
        let cfg = IntegratorConfig::default();
        for tg in [0.5, 2.0] {
            let p = params(Flavor::Satd, tg);
            let env = satd_envelopes(&p, &make_pulse_shape(tg)).unwrap();
            let f = map_fidelity(&p, &env, &NoiseModel::noiseless(), &cfg).unwrap();
            assert!((1.0 - f).abs() < 1e-6 && f <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn map_fidelity_matches_six_state_propagation() {
        let cfg = IntegratorConfig::default();
        let p = params(Flavor::Adiabatic, 1.3);
        let env = envelopes(&p, &make_pulse_shape(1.3)).unwrap();
        let noise = NoiseModel::ground_and_excited(0.05, 0.2);
        let fast = map_fidelity(&p, &env, &noise, &cfg).unwrap();
        let finals = axial_states().map(|rho| {
            crate::dynamics::propagate_lindblad(&env, &noise, &rho, &cfg).unwrap().final_operator
        });
        let slow = map_fidelity_from_states(&target_qubit_block(&p), &finals).unwrap();
        assert!((fast - slow).abs() < 1e-10);
    }

    #[test]
    fn noiseless_map_fidelity_agrees_with_unitary() {
        // Closed system: F_map = (1/6)Σ|<ψ_j|Uq†U|ψ_j>|² relation via Tr.
        let cfg = IntegratorConfig::default();
        let p = params(Flavor::Adiabatic, 2.3);
        let env = envelopes(&p, &make_pulse_shape(2.3)).unwrap();
        let u = propagate_unitary(&env, &cfg).unwrap().final_operator;
        let finals = axial_states().map(|rho| &(&u * &rho) * &u.adjoint());
        let expected = map_fidelity_from_states(&target_qubit_block(&p), &finals).unwrap();
        let f = map_fidelity(&p, &env, &NoiseModel::noiseless(), &cfg).unwrap();
        assert!((f - expected).abs() < 1e-8);
    }

    #[test]
    fn uncertainty_average_reduces_to_nominal_at_k_zero() {
        let cfg = IntegratorConfig::default();
        let p = params(Flavor::Satd, 1.0);
        let noise = NoiseModel::excited(0.01);
        let env = envelopes(&p, &make_pulse_shape(1.0)).unwrap();
        let nominal = map_fidelity(&p, &env, &noise, &cfg).unwrap();
        let avg = map_fidelity_uncertainty_avg(&p, &noise, 5, &cfg).unwrap();
        assert_eq!(nominal, avg);
        let spread = map_fidelity_uncertainty_avg(&p, &noise.with_k(0.2), 5, &cfg).unwrap();
        assert!(spread < nominal);
    }

    #[test]
    fn analytic_satd_prediction_limits() {
        let p = params(Flavor::Satd, 2.0);
        let noise = NoiseModel::excited(0.01);
        let f = analytic_satd_dephasing_fidelity(&p, &make_pulse_shape(2.0), &noise).unwrap();
        assert!(f < 1.0 && f > 0.99);
        let eps = |tg: f64| 1.0 - analytic_satd_dephasing_fidelity(&params(Flavor::Satd, tg), &make_pulse_shape(tg), &noise).unwrap();
        // ε ~ 1/t_g for slow gates.
        let ratio = eps(200.0) / eps(400.0);
        assert!((ratio - 2.0).abs() < 0.01, "{ratio}");
        let bad = NoiseModel::ground_and_excited(0.01, 0.01);
        assert!(analytic_satd_dephasing_fidelity(&p, &make_pulse_shape(2.0), &bad).is_err());
        let zero = analytic_satd_dephasing_fidelity(&p, &make_pulse_shape(2.0), &NoiseModel::noiseless()).unwrap();
        assert_eq!(zero, 1.0);
    }

    #[test]
    fn clamping() {
        assert_eq!(clamp_error(5e-11, 1e-10), 0.0);
        assert_eq!(clamp_error(-5e-11, 1e-10), 0.0);
        assert_eq!(clamp_error(2e-10, 1e-10), 2e-10);
    }
}
