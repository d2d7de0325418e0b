//! Independent perturbative solutions used to cross-check the numerics: the
//! fourth-order Magnus propagator of the adiabatic gate, the first-order
//! dissipative Magnus map of the SATD gate, and the dressed-dark-state phase
//! of the generic dressing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::controls::{
    envelopes, expect_flavor, generic_dressing, satd_dressing_angle, ControlParams, DressingAngle,
    Flavor, GammaDot, PulseShape, Segment,
};
use crate::dynamics::{vectorize_superoperator, NoiseModel};
use crate::metrics::{axial_states, map_fidelity_from_states, target_qubit_block};
use crate::qmath::{integrate, quad::GaussLegendre, CMatrix, IntegratorConfig, C64};
use crate::tripod::{hamiltonian, spin_combination, spin_x, FrameBasis};
use crate::{Error, Result};

pub const A1: f64 = -5.0 * PI * PI / 7.0;
pub const A2: f64 = 4500.0 * PI * PI * PI * PI / 2431.0 - 960.0 * PI * PI / 7.0;
pub const B1: f64 = 3840.0 * PI;
pub const B2: f64 = 960.0 * PI * (336.0 + 5.0 * PI * PI) / 7.0;
pub const C1: f64 = -1920.0 * PI;
pub const C2: f64 = -1920.0 * PI * (336.0 + 5.0 * PI * PI) / 7.0;

/// Half-pulse Magnus generator `ΔJ_z + Ω_xJ_x + Ω_yJ_y = ξ·n·J` at `t_g/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagnusCoefficients {
    pub delta: f64,
    pub omega_x: f64,
    pub omega_y: f64,
    pub xi: f64,
    /// `(n_x, n_y, n_z)`.
    pub axis: [f64; 3],
}

impl MagnusCoefficients {
    pub fn new(omega_tg: f64) -> Self {
        let x = omega_tg;
        let (s4, s8, c8) = ((0.25 * x).sin(), (0.125 * x).sin(), (0.125 * x).cos());
        let delta = A1 / x + A2 / x.powi(3);
        let omega_x = B1 * s8 * s8 / x.powi(3) + B2 * s4 / x.powi(4);
        let omega_y = C1 * s4 / x.powi(3) + C2 * c8 * c8 / x.powi(4);
        let xi = (delta * delta + omega_x * omega_x + omega_y * omega_y).sqrt();
        let axis = if xi > 0.0 {
            [omega_x / xi, omega_y / xi, delta / xi]
        } else {
            [0.0, 0.0, 1.0]
        };
        Self { delta, omega_x, omega_y, xi, axis }
    }
}

/// `exp(−iξ n·J)` by the closed spin-1 form `1 − i sinξ (n·J) + (cosξ − 1)(n·J)²`.
pub fn spin1_exponential(xi: f64, axis: [f64; 3]) -> CMatrix {
    let nj = spin_combination(axis[0], axis[1], axis[2]);
    let mut u = CMatrix::identity(4);
    u += &nj.scale(C64::new(0.0, -xi.sin()));
    u += &(&nj * &nj).scale_re(xi.cos() - 1.0);
    u
}

/// Lab-frame propagator of one half of the adiabatic gate, built from the
/// fourth-order Magnus generator at the half-pulse endpoint.
pub fn magnus_halfpulse_unitary(p: &ControlParams, segment: Segment) -> Result<CMatrix> {
    expect_flavor(p.flavor, Flavor::Adiabatic)?;
    p.validate()?;
    let m = MagnusCoefficients::new(p.omega_tg());
    let frames = FrameBasis::new(p);
    let u0 = spin1_exponential(-0.25 * p.omega_tg(), [0.0, 0.0, 1.0]);
    let [nx, ny, nz] = m.axis;
    let (ui, start, end) = match segment {
        Segment::First => (
            spin1_exponential(m.xi, [nx, ny, nz]),
            frames.frame_unitary(0.0, 0.0),
            frames.frame_unitary(0.5 * PI, 0.0),
        ),
        Segment::Second => (
            spin1_exponential(m.xi, [-nx, -ny, nz]),
            frames.frame_unitary(0.5 * PI, p.gamma0),
            frames.frame_unitary(0.0, p.gamma0),
        ),
    };
    Ok(&(&(&end * &u0) * &ui) * &start.adjoint())
}

/// `Û(t_g) = Û₂Û₁` from [`magnus_halfpulse_unitary`].
pub fn magnus_unitary(p: &ControlParams) -> Result<CMatrix> {
    let u1 = magnus_halfpulse_unitary(p, Segment::First)?;
    let u2 = magnus_halfpulse_unitary(p, Segment::Second)?;
    Ok(&u2 * &u1)
}

/// Dressed-frame collapse amplitudes `(c_d2, c_b-, c_b+)` of `|e>`.
pub fn dressed_collapse_amplitudes(nu: f64) -> [C64; 3] {
    let (s, c) = nu.sin_cos();
    let b = C64::new(c * std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [C64::new(0.0, s), b, b]
}

/// `vec(SρS†) = (S̄ ⊗ S) vec ρ`.
fn conjugation_superoperator(s: &CMatrix) -> CMatrix {
    s.conj().kron(s)
}

/// Lab-frame superoperator of the SATD gate under excited-state dephasing to
/// first order in the dephasing rate.
///
/// Within each segment the dynamics is written in the SATD-dressed frame, the
/// noiseless propagator `𝓛₀` is integrated from the identity, and the
/// interaction-picture dephasing generator is integrated alongside on the
/// same mesh: `𝓛 ≈ 𝓛₀(I + ∫𝓛₀⁻¹ℓ_φ𝓛₀)`.
pub fn dissipative_magnus_superoperator(
    p: &ControlParams,
    shape: &PulseShape,
    noise: &NoiseModel,
    cfg: &IntegratorConfig,
) -> Result<CMatrix> {
    expect_flavor(p.flavor, Flavor::Satd)?;
    noise.validate()?;
    cfg.validate()?;
    if noise.gamma_phi[..3].iter().any(|g| *g != 0.0) {
        return Err(Error::InvalidParameter(
            "the dissipative Magnus oracle covers excited-state dephasing only".into(),
        ));
    }
    let env = envelopes(p, shape)?;
    let nu = satd_dressing_angle(p, shape);
    let frames = FrameBasis::new(p);
    let jx = spin_x();
    let sqrt_g = noise.gamma_phi[3].sqrt();
    let tg = shape.t_gate;

    let frame = |seg: Segment, t: f64| -> (CMatrix, CMatrix) {
        let th = shape.eval(t);
        let gamma = seg.gamma(p.gamma0);
        let s_nu = spin1_exponential(nu.angle(t), [1.0, 0.0, 0.0]);
        let s = &frames.frame_unitary(th.theta, gamma) * &s_nu;
        let ds_ad = frames.frame_unitary_dtheta(th.theta, gamma).scale_re(th.dot);
        let ds = &(&ds_ad * &s_nu) + &(&frames.frame_unitary(th.theta, gamma) * &(&jx * &s_nu))
            .scale(C64::new(0.0, -nu.rate(t)));
        (s, ds)
    };

    let mut total = CMatrix::identity(16);
    for seg in [Segment::First, Segment::Second] {
        let (t0, t1) = seg.span(tg);
        let mut y = vec![C64::new(0.0, 0.0); 512];
        for k in 0..16 {
            y[k * 16 + k] = C64::new(1.0, 0.0);
        }
        let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
            let (s, ds) = frame(seg, t);
            let h_lab = hamiltonian(&env, seg, t);
            let h_dr = &(&(&s.adjoint() * &h_lab) * &s) + &(&s.adjoint() * &ds).scale(C64::new(0.0, -1.0));
            let h_dr = h_dr.hermitize();
            // Row 3 of S is <e|S, so S†|e> is its conjugate.
            let c: Vec<C64> = (0..4).map(|k| s[(3, k)].conj()).collect();
            let l = CMatrix::outer(&c, &c).scale_re(sqrt_g);
            let zero = CMatrix::zeros(4);
            let l0 = vectorize_superoperator(&h_dr, &zero).expect("4x4 operands");
            let lphi = vectorize_superoperator(&zero, &l).expect("4x4 operands");
            let big = CMatrix::from_row_major(y[..256].to_vec()).expect("16x16 block");
            let d_big = &l0 * &big;
            let d_k = &(&big.adjoint() * &lphi) * &big;
            dy[..256].copy_from_slice(d_big.as_slice());
            dy[256..].copy_from_slice(d_k.as_slice());
        };
        integrate(rhs, &mut y, t0, t1, cfg, None)?;
        let l0 = CMatrix::from_row_major(y[..256].to_vec())?;
        let k = CMatrix::from_row_major(y[256..].to_vec())?;
        let (s_start, _) = frame(seg, t0);
        let (s_end, _) = frame(seg, t1);
        let first_order = &CMatrix::identity(16) + &k;
        let seg_map = &(&(&conjugation_superoperator(&s_end) * &l0) * &first_order)
            * &conjugation_superoperator(&s_start).adjoint();
        total = &seg_map * &total;
    }
    Ok(total)
}

/// Final state of `rho0` under [`dissipative_magnus_superoperator`].
pub fn dissipative_magnus_map(
    p: &ControlParams,
    shape: &PulseShape,
    noise: &NoiseModel,
    rho0: &CMatrix,
) -> Result<CMatrix> {
    if rho0.dim() != 4 {
        return Err(Error::DimensionMismatch { left: rho0.dim(), right: 4 });
    }
    let m = dissipative_magnus_superoperator(p, shape, noise, &IntegratorConfig::default())?;
    CMatrix::unvec_col(&m.apply(&rho0.vec_col()))
}

/// Map fidelity of the dissipative Magnus oracle over the six axial states.
pub fn dissipative_magnus_map_fidelity(
    p: &ControlParams,
    shape: &PulseShape,
    noise: &NoiseModel,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let m = dissipative_magnus_superoperator(p, shape, noise, cfg)?;
    let finals = axial_states()
        .map(|rho| CMatrix::unvec_col(&m.apply(&rho.vec_col())).expect("16 entries"));
    map_fidelity_from_states(&target_qubit_block(p), &finals)
}

/// `φ_dds = ∫ (sec²μ/8){γ̇[3 + cos2μ − cos2θ(1 + 3cos2μ)] + 4√2 sin2μ θ̇} dt`
/// for an arbitrary dressing angle `μ`.
pub fn dressed_dark_phase(
    shape: &PulseShape,
    mu: &impl DressingAngle,
    gamma_dot: impl Fn(f64) -> f64,
) -> Result<f64> {
    let gl = GaussLegendre::new(16)?;
    let integrand = |t: f64| {
        let th = shape.eval(t);
        let m = mu.angle(t);
        let (s2m, c2m) = (2.0 * m).sin_cos();
        let sec2 = 1.0 / m.cos().powi(2);
        sec2 / 8.0
            * (gamma_dot(t) * (3.0 + c2m - (2.0 * th.theta).cos() * (1.0 + 3.0 * c2m))
                + 4.0 * std::f64::consts::SQRT_2 * s2m * th.dot)
    };
    let half = 0.5 * shape.t_gate;
    Ok(gl.integrate_composite(&integrand, 0.0, half, 256)
        + gl.integrate_composite(&integrand, half, shape.t_gate, 256))
}

/// Dressed-dark-state phase of the generic dressing driven by `gamma_dot`.
pub fn generic_dressing_phase(p: &ControlParams, shape: &PulseShape, gamma_dot: GammaDot) -> Result<f64> {
    let dressing = generic_dressing(p, shape, gamma_dot.clone())?;
    dressed_dark_phase(shape, &dressing, |t| gamma_dot(t))
}

/// Gate error `1 − F̄` of the fourth-order Magnus propagator against the ideal gate.
pub fn magnus_gate_error(p: &ControlParams) -> Result<f64> {
    let u = magnus_unitary(p)?;
    let target = crate::tripod::ideal_gate(p).to_unitary();
    Ok(1.0 - crate::metrics::avg_gate_fidelity(&target.adjoint().matmul(&u)?, 4)?)
}
