//! Tripod Hamiltonian, analytic adiabatic and dressed frames, and the
//! closed-form target gates.
//!
//! Lab basis ordering is `(|0>, |1>, |a>, |e>)`. Frame bases are ordered
//! `(|0̃>, |d2>, |b->, |b+>)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::controls::{
    expect_flavor, ControlParams, DressingAngle, EnvelopeSet, Flavor, PulseShape, Segment,
};
use crate::qmath::{expm_hermitian_generator, quad::GaussLegendre, CMatrix, C64};
use crate::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Frame-basis indices.
pub const QUBIT_DARK: usize = 0;
pub const DARK2: usize = 1;
pub const BRIGHT_MINUS: usize = 2;
pub const BRIGHT_PLUS: usize = 3;

/// `H(t) = ½[Ω_0e|0><e| + Ω_1e|1><e| + Ω_ae|a><e| + h.c.]`.
pub fn hamiltonian(env: &EnvelopeSet, seg: Segment, t: f64) -> CMatrix {
    let e = env.eval(seg, t).as_array();
    let mut h = CMatrix::zeros(4);
    for (i, w) in e.iter().enumerate() {
        h[(i, 3)] = w * 0.5;
        h[(3, i)] = w.conj() * 0.5;
    }
    h
}

/// Analytic instantaneous eigenbasis of the tripod Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameBasis {
    alpha: f64,
    beta: f64,
}

impl FrameBasis {
    pub fn new(p: &ControlParams) -> Self {
        Self { alpha: p.alpha, beta: p.beta }
    }

    /// `|0̃> = sinα|0> − e^{iβ}cosα|1>`.
    pub fn qubit_dark(&self) -> [C64; 4] {
        let (s, c) = self.alpha.sin_cos();
        [C64::new(s, 0.0), -C64::from_polar(c, self.beta), ZERO, ZERO]
    }

    /// `|1̃> = cosα|0> + e^{iβ}sinα|1>`.
    pub fn qubit_bright(&self) -> [C64; 4] {
        let (s, c) = self.alpha.sin_cos();
        [C64::new(c, 0.0), C64::from_polar(s, self.beta), ZERO, ZERO]
    }

    /// Basis vectors `(|0̃>, |d2>, |b->, |b+>)` at mixing angle `θ` and phase `γ`.
    pub fn vectors(&self, theta: f64, gamma: f64) -> [[C64; 4]; 4] {
        let (s, c) = theta.sin_cos();
        let one = self.qubit_bright();
        let ph = C64::from_polar(1.0, gamma);
        let mut d2 = [ZERO; 4];
        let mut bm = [ZERO; 4];
        let mut bp = [ZERO; 4];
        for k in 0..2 {
            d2[k] = one[k] * c;
            bm[k] = -one[k] * (s * FRAC_1_SQRT_2);
            bp[k] = one[k] * (s * FRAC_1_SQRT_2);
        }
        d2[2] = -ph * s;
        bm[2] = -ph * (c * FRAC_1_SQRT_2);
        bp[2] = ph * (c * FRAC_1_SQRT_2);
        bm[3] = C64::new(FRAC_1_SQRT_2, 0.0);
        bp[3] = C64::new(FRAC_1_SQRT_2, 0.0);
        [self.qubit_dark(), d2, bm, bp]
    }

    /// `S_ad(θ, γ)`, whose columns are the frame basis vectors.
    pub fn frame_unitary(&self, theta: f64, gamma: f64) -> CMatrix {
        let v = self.vectors(theta, gamma);
        CMatrix::from_fn(4, |r, c| v[c][r])
    }

    /// `∂_θ S_ad(θ, γ)`.
    pub fn frame_unitary_dtheta(&self, theta: f64, gamma: f64) -> CMatrix {
        let (s, c) = theta.sin_cos();
        let one = self.qubit_bright();
        let ph = C64::from_polar(1.0, gamma);
        let mut m = CMatrix::zeros(4);
        for k in 0..2 {
            m[(k, DARK2)] = -one[k] * s;
            m[(k, BRIGHT_MINUS)] = -one[k] * (c * FRAC_1_SQRT_2);
            m[(k, BRIGHT_PLUS)] = one[k] * (c * FRAC_1_SQRT_2);
        }
        m[(2, DARK2)] = -ph * c;
        m[(2, BRIGHT_MINUS)] = ph * (s * FRAC_1_SQRT_2);
        m[(2, BRIGHT_PLUS)] = -ph * (s * FRAC_1_SQRT_2);
        m
    }

    /// Frame at time `t` on a segment.
    pub fn at(&self, p: &ControlParams, shape: &PulseShape, seg: Segment, t: f64) -> CMatrix {
        self.frame_unitary(shape.theta(t), seg.gamma(p.gamma0))
    }
}

/// Spin-1 operator `J_z = |b-><b-| − |b+><b+|` in the frame basis.
pub fn spin_z() -> CMatrix {
    let mut m = CMatrix::zeros(4);
    m[(BRIGHT_MINUS, BRIGHT_MINUS)] = ONE;
    m[(BRIGHT_PLUS, BRIGHT_PLUS)] = -ONE;
    m
}

/// `J_x = (|d2><b+| + |d2><b-| + h.c.)/√2`.
pub fn spin_x() -> CMatrix {
    let mut m = CMatrix::zeros(4);
    let v = C64::new(FRAC_1_SQRT_2, 0.0);
    for b in [BRIGHT_MINUS, BRIGHT_PLUS] {
        m[(DARK2, b)] = v;
        m[(b, DARK2)] = v;
    }
    m
}

/// `J_y = (i|d2><b-| − i|d2><b+| + h.c.)/√2`.
pub fn spin_y() -> CMatrix {
    let mut m = CMatrix::zeros(4);
    let v = I * FRAC_1_SQRT_2;
    m[(DARK2, BRIGHT_MINUS)] = v;
    m[(BRIGHT_MINUS, DARK2)] = -v;
    m[(DARK2, BRIGHT_PLUS)] = -v;
    m[(BRIGHT_PLUS, DARK2)] = v;
    m
}

/// `x·J_x + y·J_y + z·J_z`.
pub fn spin_combination(x: f64, y: f64, z: f64) -> CMatrix {
    let mut m = spin_x().scale_re(x);
    m += &spin_y().scale_re(y);
    m += &spin_z().scale_re(z);
    m
}

/// Adiabatic-frame Hamiltonian split into its diagonal part `H0` and the
/// non-adiabatic coupling `V_err`, in frame-basis ordering.
///
/// The phase jump at `t_g/2` is carried by the segment frames, so within a
/// segment `γ̇ = 0` and `V_err = θ̇·J_y`.
pub fn adiabatic_frame_generators(
    p: &ControlParams,
    shape: &PulseShape,
    t: f64,
) -> Result<(CMatrix, CMatrix)> {
    expect_flavor(p.flavor, Flavor::Adiabatic)?;
    let omega = p.amp_scale * p.omega0;
    let h0 = spin_z().scale_re(-0.5 * omega);
    let verr = spin_y().scale_re(shape.theta_dot(t));
    Ok((h0, verr))
}

/// Effective fields of the dressed frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedFields {
    /// `(B_x, B_y, B_z)`.
    pub b: [f64; 3],
    /// `Ξ_1..Ξ_5`, the coefficients of the `γ̇`-proportional non-spin terms.
    pub xi: [f64; 5],
    /// `sin²θ·cos²ν`, the dressed-dark-state geometric rate per unit `γ̇`.
    pub geom_rate: f64,
}

pub fn dressed_frame_fields(
    p: &ControlParams,
    shape: &PulseShape,
    nu: &impl DressingAngle,
    t: f64,
) -> DressedFields {
    let th = shape.eval(t);
    let (n, nd) = (nu.angle(t), nu.rate(t));
    let (sn, cn) = n.sin_cos();
    let (st, ct) = th.theta.sin_cos();
    let half = 0.5 * p.omega0;
    let b = [-nd, -half * sn + th.dot * cn, -half * cn - th.dot * sn];
    let s2t = (2.0 * th.theta).sin();
    let xi = [
        ct * ct + st * st * sn * sn,
        -ct * ct + st * st * sn * sn,
        s2t * sn,
        s2t * cn * FRAC_1_SQRT_2,
        -st * st * (2.0 * n).sin() * FRAC_1_SQRT_2,
    ];
    DressedFields { b, xi, geom_rate: st * st * cn * cn }
}

/// Dressed-frame Hamiltonian `S_ν†H_ad S_ν − iS_ν†∂_t S_ν` within a segment
/// (`γ̇ = 0`), with `S_ν = exp(−iνJ_x)` and `H_ad = −(Ω0/2)J_z + θ̇J_y`.
pub fn dressed_hamiltonian(
    p: &ControlParams,
    shape: &PulseShape,
    nu: &impl DressingAngle,
    t: f64,
) -> Result<CMatrix> {
    let h_ad = spin_combination(0.0, shape.theta_dot(t), -0.5 * p.omega0);
    let s = expm_hermitian_generator(&spin_x(), nu.angle(t))?;
    let rotated = &(&s.adjoint() * &h_ad) * &s;
    Ok(&rotated - &spin_x().scale_re(nu.rate(t)))
}

/// Target unitary as qubit-block ⊕ auxiliary-block rotations. Each block is
/// `e^{iφ_g}·exp(−i(angle/2)·axis·σ)`, with the auxiliary Pauli matrices
/// acting on `(|a>, |e>)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDecomposition {
    pub qubit_axis: [f64; 3],
    pub qubit_angle: f64,
    pub qubit_global_phase: f64,
    pub aux_axis: [f64; 3],
    pub aux_angle: f64,
    pub aux_global_phase: f64,
}

fn su2(axis: [f64; 3], angle: f64, phase: f64) -> [[C64; 2]; 2] {
    let (s, c) = (0.5 * angle).sin_cos();
    let g = C64::from_polar(1.0, phase);
    let [x, y, z] = axis;
    [
        [g * C64::new(c, -s * z), g * C64::new(-s * y, -s * x)],
        [g * C64::new(s * y, -s * x), g * C64::new(c, s * z)],
    ]
}

fn decompose_block(b: &CMatrix) -> ([f64; 3], f64, f64) {
    let det = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
    let phase = 0.5 * det.arg();
    let v = b.scale(C64::from_polar(1.0, -phase));
    let c = 0.5 * (v[(0, 0)] + v[(1, 1)]).re;
    // s_k = −Im Tr(Vσ_k)/2
    let sx = -0.5 * (v[(1, 0)] + v[(0, 1)]).im;
    let sy = -0.5 * (I * (v[(0, 1)] - v[(1, 0)])).im;
    let sz = -0.5 * (v[(0, 0)] - v[(1, 1)]).im;
    let norm = (sx * sx + sy * sy + sz * sz).sqrt();
    let angle = 2.0 * norm.atan2(c);
    let axis = if norm < 1e-14 { [0.0, 0.0, 1.0] } else { [sx / norm, sy / norm, sz / norm] };
    (axis, angle, phase)
}

impl GateDecomposition {
    /// Reassembled 4×4 block-diagonal unitary.
    pub fn to_unitary(&self) -> CMatrix {
        let q = su2(self.qubit_axis, self.qubit_angle, self.qubit_global_phase);
        let a = su2(self.aux_axis, self.aux_angle, self.aux_global_phase);
        let mut u = CMatrix::zeros(4);
        for r in 0..2 {
            for c in 0..2 {
                u[(r, c)] = q[r][c];
                u[(r + 2, c + 2)] = a[r][c];
            }
        }
        u
    }

    /// Decomposes the diagonal blocks of `u`; off-diagonal blocks are ignored
    /// (see [`block_leakage`]).
    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        if u.dim() != 4 {
            return Err(Error::DimensionMismatch { left: u.dim(), right: 4 });
        }
        let (qubit_axis, qubit_angle, qubit_global_phase) = decompose_block(&u.block(0, 2));
        let (aux_axis, aux_angle, aux_global_phase) = decompose_block(&u.block(2, 2));
        Ok(Self { qubit_axis, qubit_angle, qubit_global_phase, aux_axis, aux_angle, aux_global_phase })
    }

    /// Qubit block `P_q U P_q` as a 2×2 matrix.
    pub fn qubit_block(&self) -> CMatrix {
        self.to_unitary().block(0, 2)
    }
}

/// Largest modulus of the qubit↔auxiliary off-diagonal blocks.
pub fn block_leakage(u: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for q in 0..2 {
        for a in 2..4 {
            worst = worst.max(u[(q, a)].norm()).max(u[(a, q)].norm());
        }
    }
    worst
}

/// Block gate for an auxiliary dynamical phase `Φ`.
fn block_gate(p: &ControlParams, phi: f64) -> GateDecomposition {
    let g = p.gamma0;
    let (sg, cg) = (0.5 * g).sin_cos();
    let (sp, cp) = phi.sin_cos();
    let angle = 2.0 * (cg * cp).clamp(-1.0, 1.0).acos();
    let s_half = (0.5 * angle).sin();
    // The auxiliary block is e^{iγ0/2}·exp(+i(angle/2) n·σ); store the axis as −n.
    let aux_axis = if s_half.abs() < 1e-14 {
        [0.0, 0.0, 1.0]
    } else {
        [sp * cg / s_half, -sp * sg / s_half, -cp * sg / s_half]
    };
    GateDecomposition {
        qubit_axis: p.qubit_axis(),
        qubit_angle: g,
        qubit_global_phase: -0.5 * g,
        aux_axis,
        aux_angle: angle,
        aux_global_phase: 0.5 * g,
    }
}

/// Adiabatic-limit geometric gate.
pub fn ideal_gate(p: &ControlParams) -> GateDecomposition {
    block_gate(p, 0.5 * p.omega_tg())
}

/// Adiabatic gate with the leading non-adiabatic correction to the auxiliary
/// dynamical phase, `Φ = Ω0t_g/2 + 10π²/(7Ω0t_g)`.
pub fn magnus_gate(p: &ControlParams) -> Result<GateDecomposition> {
    expect_flavor(p.flavor, Flavor::Adiabatic)?;
    let x = p.omega_tg();
    Ok(block_gate(p, 0.5 * x + 10.0 * PI * PI / (7.0 * x)))
}

/// `Φ = ∫₀^{t_g/2} sqrt(Ω0² + 4θ̇²) dt`.
pub fn satd_phase(p: &ControlParams, shape: &PulseShape) -> Result<f64> {
    let gl = GaussLegendre::new(21)?;
    let w2 = p.omega0 * p.omega0;
    Ok(gl.integrate_composite(
        |t| {
            let d = shape.theta_dot(t);
            (w2 + 4.0 * d * d).sqrt()
        },
        0.0,
        0.5 * shape.t_gate,
        16,
    ))
}

/// SATD gate: same qubit block as [`ideal_gate`], auxiliary phase [`satd_phase`].
pub fn satd_gate(p: &ControlParams, shape: &PulseShape) -> Result<GateDecomposition> {
    expect_flavor(p.flavor, Flavor::Satd)?;
    Ok(block_gate(p, satd_phase(p, shape)?))
}

/// Target gate for the flavor of `p` (ideal for adiabatic, SATD otherwise).
pub fn target_gate(p: &ControlParams, shape: &PulseShape) -> Result<GateDecomposition> {
    match p.flavor {
        Flavor::Satd => satd_gate(p, shape),
        _ => Ok(ideal_gate(p)),
    }
}
