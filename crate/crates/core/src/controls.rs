//! Control-field synthesis: pulse shape, adiabatic and SATD envelopes,
//! dressing angles, and amplitude/energy diagnostics.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::qmath::{hermitian_norm2, quad::GaussLegendre, simpson, C64};
use crate::tripod::hamiltonian;
use crate::{Error, Result};

/// Default Simpson sample count for [`energy_cost`].
pub const DEFAULT_COST_SAMPLES: usize = 1001;
/// Default sample count for the max-amplitude scan.
pub const DEFAULT_AMPLITUDE_SAMPLES: usize = 4001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Adiabatic,
    Satd,
    GenericDressed,
}

impl Flavor {
    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Adiabatic => "adiabatic",
            Flavor::Satd => "satd",
            Flavor::GenericDressed => "generic_dressed",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub(crate) fn expect_flavor(got: Flavor, expected: Flavor) -> Result<()> {
    if got != expected {
        return Err(Error::FlavorMismatch { expected: expected.as_str(), got: got.as_str() });
    }
    Ok(())
}

/// Static pulse parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    pub omega0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma0: f64,
    pub t_gate: f64,
    pub flavor: Flavor,
    /// Actual over nominal Rabi amplitude.
    #[serde(default = "one")]
    pub amp_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl ControlParams {
    pub fn new(omega0: f64, alpha: f64, beta: f64, gamma0: f64, t_gate: f64, flavor: Flavor) -> Self {
        Self { omega0, alpha, beta, gamma0, t_gate, flavor, amp_scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return bad(format!("omega0 must be > 0 (got {})", self.omega0));
        }
        if !(self.t_gate > 0.0 && self.t_gate.is_finite()) {
            return bad(format!("t_gate must be > 0 (got {})", self.t_gate));
        }
        if !(self.amp_scale > 0.0 && self.amp_scale.is_finite()) {
            return bad(format!("amp_scale must be > 0 (got {})", self.amp_scale));
        }
        if !(0.0..=FRAC_PI_2).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, pi/2] (got {})", self.alpha));
        }
        if !(0.0..2.0 * PI).contains(&self.beta) {
            return bad(format!("beta must lie in [0, 2pi) (got {})", self.beta));
        }
        if !(self.gamma0 > -2.0 * PI && self.gamma0 <= 2.0 * PI) {
            return bad(format!("gamma0 must lie in (-2pi, 2pi] (got {})", self.gamma0));
        }
        Ok(())
    }

    pub fn with_flavor(mut self, flavor: Flavor) -> Self {
        self.flavor = flavor;
        self
    }

    pub fn with_t_gate(mut self, t_gate: f64) -> Self {
        self.t_gate = t_gate;
        self
    }

    pub fn with_amp_scale(mut self, amp_scale: f64) -> Self {
        self.amp_scale = amp_scale;
        self
    }

    /// Dimensionless gate time `Ω0·t_g`.
    pub fn omega_tg(&self) -> f64 {
        self.omega0 * self.t_gate
    }

    pub fn qubit_axis(&self) -> [f64; 3] {
        let (s2a, c2a) = (2.0 * self.alpha).sin_cos();
        [s2a * self.beta.cos(), s2a * self.beta.sin(), c2a]
    }
}

/// Half-protocol segment. The phase of `Ω_ae` is 0 on the first and `γ0`
/// on the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Segment {
    First,
    Second,
}

impl Segment {
    pub fn of(t: f64, t_gate: f64) -> Self {
        if t < 0.5 * t_gate {
            Segment::First
        } else {
            Segment::Second
        }
    }

    pub fn span(self, t_gate: f64) -> (f64, f64) {
        match self {
            Segment::First => (0.0, 0.5 * t_gate),
            Segment::Second => (0.5 * t_gate, t_gate),
        }
    }

    pub fn gamma(self, gamma0: f64) -> f64 {
        match self {
            Segment::First => 0.0,
            Segment::Second => gamma0,
        }
    }
}

/// Monotonic ramp `P(u)`, `u ∈ [0, 1]`, with `P(0) = 0` and `P(1) = 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    /// `6u⁵ − 15u⁴ + 10u³`: first and second derivatives vanish at both ends.
    #[default]
    Quintic,
    /// `3u² − 2u³`: first derivative vanishes at both ends.
    Cubic,
    /// `u`.
    Linear,
}

impl Ramp {
    fn eval(self, u: f64) -> (f64, f64, f64) {
        match self {
            Ramp::Quintic => {
                let u2 = u * u;
                let u3 = u2 * u;
                (
                    u3 * (10.0 - 15.0 * u + 6.0 * u2),
                    30.0 * u2 * (1.0 - u) * (1.0 - u),
                    60.0 * u * (1.0 - 3.0 * u + 2.0 * u2),
                )
            }
            Ramp::Cubic => (u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u), 6.0 - 12.0 * u),
            Ramp::Linear => (u, 1.0, 0.0),
        }
    }
}

/// Mixing angle `θ` and its first two time derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theta {
    pub theta: f64,
    pub dot: f64,
    pub ddot: f64,
}

/// Mixing-angle schedule: `θ = (π/2)P(t)` on the first half and
/// `θ = (π/2)(1 − P(t − t_g/2))` on the second, with `P` the ramp evaluated at
/// `u = 2s/t_g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub t_gate: f64,
    #[serde(default)]
    pub ramp: Ramp,
}

pub fn make_pulse_shape(t_gate: f64) -> PulseShape {
    PulseShape { t_gate, ramp: Ramp::Quintic }
}

impl PulseShape {
    pub fn with_ramp(t_gate: f64, ramp: Ramp) -> Self {
        Self { t_gate, ramp }
    }

    /// Ramp value `P(s)` for `s ∈ [0, t_g/2]`.
    pub fn p(&self, s: f64) -> f64 {
        self.ramp.eval((2.0 * s / self.t_gate).clamp(0.0, 1.0)).0
    }

    pub fn eval(&self, t: f64) -> Theta {
        let half = 0.5 * self.t_gate;
        let k = 2.0 / self.t_gate;
        let (s, sign) = if t <= half { (t, 1.0) } else { (t - half, -1.0) };
        let (p, dp, ddp) = self.ramp.eval((k * s).clamp(0.0, 1.0));
        let theta = if sign > 0.0 { FRAC_PI_2 * p } else { FRAC_PI_2 * (1.0 - p) };
        Theta { theta, dot: sign * FRAC_PI_2 * k * dp, ddot: sign * FRAC_PI_2 * k * k * ddp }
    }

    pub fn theta(&self, t: f64) -> f64 {
        self.eval(t).theta
    }

    pub fn theta_dot(&self, t: f64) -> f64 {
        self.eval(t).dot
    }

    pub fn theta_ddot(&self, t: f64) -> f64 {
        self.eval(t).ddot
    }
}

/// The three complex Rabi envelopes at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelopes {
    pub omega_0e: C64,
    pub omega_1e: C64,
    pub omega_ae: C64,
}

impl Envelopes {
    pub fn as_array(&self) -> [C64; 3] {
        [self.omega_0e, self.omega_1e, self.omega_ae]
    }

    /// `sqrt(|Ω_0e|² + |Ω_1e|² + |Ω_ae|²)`.
    pub fn total(&self) -> f64 {
        self.as_array().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.as_array().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Control envelopes for one protocol (adiabatic or SATD-corrected).
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeSet {
    params: ControlParams,
    shape: PulseShape,
}

pub fn adiabatic_envelopes(p: &ControlParams, shape: &PulseShape) -> Result<EnvelopeSet> {
    expect_flavor(p.flavor, Flavor::Adiabatic)?;
    p.validate()?;
    Ok(EnvelopeSet { params: *p, shape: *shape })
}

pub fn satd_envelopes(p: &ControlParams, shape: &PulseShape) -> Result<EnvelopeSet> {
    expect_flavor(p.flavor, Flavor::Satd)?;
    p.validate()?;
    let theta_dot = shape.theta_dot(0.5 * shape.t_gate);
    if theta_dot.abs() > 1e-12 * p.omega0 {
        return Err(Error::SatdConstraint { theta_dot });
    }
    Ok(EnvelopeSet { params: *p, shape: *shape })
}

/// Envelopes for `p.flavor`. The generic-dressed flavor has no finite lab-frame
/// envelopes (its `W_z` diverges where the dressing vanishes) and is rejected.
pub fn envelopes(p: &ControlParams, shape: &PulseShape) -> Result<EnvelopeSet> {
    match p.flavor {
        Flavor::Adiabatic => adiabatic_envelopes(p, shape),
        Flavor::Satd => satd_envelopes(p, shape),
        Flavor::GenericDressed => Err(Error::InvalidParameter(
            "generic-dressed controls have no finite lab-frame envelopes".into(),
        )),
    }
}

impl EnvelopeSet {
    pub fn params(&self) -> &ControlParams {
        &self.params
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    pub fn flavor(&self) -> Flavor {
        self.params.flavor
    }

    pub fn t_gate(&self) -> f64 {
        self.shape.t_gate
    }

    /// Envelopes at `t` on the given segment.
    pub fn eval(&self, seg: Segment, t: f64) -> Envelopes {
        let p = &self.params;
        let th = self.shape.eval(t);
        let (mut s, mut c) = th.theta.sin_cos();
        if p.flavor == Flavor::Satd {
            let corr = 4.0 * th.ddot / (p.omega0 * p.omega0 + 4.0 * th.dot * th.dot);
            (s, c) = (s + c * corr, c - s * corr);
        }
        let amp = p.amp_scale * p.omega0;
        let (sa, ca) = p.alpha.sin_cos();
        Envelopes {
            omega_0e: C64::new(amp * ca * s, 0.0),
            omega_1e: C64::from_polar(amp * sa * s, p.beta),
            omega_ae: C64::from_polar(amp * c, seg.gamma(p.gamma0)),
        }
    }

    /// Envelopes at `t`, taking the second segment for `t ≥ t_g/2`.
    pub fn at(&self, t: f64) -> Envelopes {
        self.eval(Segment::of(t, self.t_gate()), t)
    }

    /// `n` uniformly spaced samples over `[0, t_g]`.
    pub fn sample(&self, n: usize) -> Vec<(f64, Envelopes)> {
        let tg = self.t_gate();
        let n = n.max(2);
        (0..n)
            .map(|i| {
                let t = tg * i as f64 / (n - 1) as f64;
                (t, self.at(t))
            })
            .collect()
    }

    /// Largest single-envelope modulus over the protocol.
    pub fn max_amplitude(&self) -> f64 {
        self.max_amplitude_sampled(DEFAULT_AMPLITUDE_SAMPLES)
    }

    pub fn max_amplitude_sampled(&self, n: usize) -> f64 {
        self.sample(n).iter().map(|(_, e)| e.max_abs()).fold(0.0, f64::max)
    }

    /// Energy cost with the default Simpson sampling.
    pub fn cost(&self) -> Result<f64> {
        energy_cost(self, &self.params, DEFAULT_COST_SAMPLES)
    }
}

/// `C = (1/t_g)∫‖H(t)‖₂ dt` by composite Simpson.
pub fn energy_cost(env: &EnvelopeSet, p: &ControlParams, n_samples: usize) -> Result<f64> {
    let tg = p.t_gate;
    let mut err = None;
    let integral = simpson(
        |t| match hermitian_norm2(&hamiltonian(env, Segment::of(t, tg), t)) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        tg,
        n_samples,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(integral / tg),
    }
}

/// Bisection in `t_g` for `f(envelopes(t_g)) = target`, assuming `f` is
/// decreasing in `t_g` across `[lo, hi]`.
fn bisect_gate_time(
    p: &ControlParams,
    ramp: Ramp,
    lo: f64,
    hi: f64,
    target: f64,
    f: impl Fn(&EnvelopeSet) -> Result<f64>,
) -> Result<f64> {
    let eval = |tg: f64| -> Result<f64> {
        let q = p.with_t_gate(tg);
        Ok(f(&envelopes(&q, &PulseShape::with_ramp(tg, ramp))?)? - target)
    };
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (eval(lo)?, eval(hi)?);
    if !(flo > 0.0 && fhi <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target {target} not bracketed on t_g in [{lo}, {hi}]"
        )));
    }
    while (hi - lo) > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Shortest SATD gate time whose largest envelope stays within `Ω0`.
pub fn satd_amplitude_threshold(p: &ControlParams) -> Result<f64> {
    let q = p.with_flavor(Flavor::Satd).with_amp_scale(1.0);
    let scale = 2.0 * PI / q.omega0;
    bisect_gate_time(&q, Ramp::Quintic, 0.05 * scale, 100.0 * scale, q.omega0, |e| {
        Ok(e.max_amplitude())
    })
}

/// SATD gate time at which the energy cost equals `multiple·Ω0/2`.
pub fn satd_cost_threshold(p: &ControlParams, multiple: f64) -> Result<f64> {
    let q = p.with_flavor(Flavor::Satd).with_amp_scale(1.0);
    let scale = 2.0 * PI / q.omega0;
    bisect_gate_time(&q, Ramp::Quintic, 0.01 * scale, 100.0 * scale, multiple * 0.5 * q.omega0, |e| {
        e.cost()
    })
}

/// A time-dependent dressing angle with its derivative.
pub trait DressingAngle {
    fn angle(&self, t: f64) -> f64;
    fn rate(&self, t: f64) -> f64;
}

/// The undressed frame, `ν ≡ 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoDressing;

impl DressingAngle for NoDressing {
    fn angle(&self, _t: f64) -> f64 {
        0.0
    }
    fn rate(&self, _t: f64) -> f64 {
        0.0
    }
}

/// `ν(t) = arctan(2θ̇/Ω0)`.
#[derive(Clone, Copy, Debug)]
pub struct SatdDressing {
    omega0: f64,
    shape: PulseShape,
}

pub fn satd_dressing_angle(p: &ControlParams, shape: &PulseShape) -> SatdDressing {
    SatdDressing { omega0: p.omega0, shape: *shape }
}

impl DressingAngle for SatdDressing {
    fn angle(&self, t: f64) -> f64 {
        (2.0 * self.shape.theta_dot(t) / self.omega0).atan()
    }

    fn rate(&self, t: f64) -> f64 {
        let th = self.shape.eval(t);
        2.0 * self.omega0 * th.ddot / (self.omega0 * self.omega0 + 4.0 * th.dot * th.dot)
    }
}

pub type GammaDot = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Smooth phase-rate profile `γ̇(t) = (πγ0/t_g)·sin(2πt/t_g)`, antisymmetric
/// about `t_g/2`, reaching `γ = γ0` at mid-protocol.
pub fn default_gamma_dot(p: &ControlParams) -> GammaDot {
    let (g0, tg) = (p.gamma0, p.t_gate);
    Arc::new(move |t| PI * g0 / tg * (2.0 * PI * t / tg).sin())
}

/// Control modifications `(W_x, W_y, W_z)` of the generic dressing. `W_z` is
/// `None` where `sin 2μ` vanishes and its `cot 2μ` term diverges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WField {
    pub x: f64,
    pub y: f64,
    pub z: Option<f64>,
}

const GENERIC_GRID: usize = 4096;
const GENERIC_PANEL_NODES: usize = 8;

/// Generic dressing `μ̇ = sin(2θ)γ̇/√2`, `μ(0) = 0`, tabulated on a uniform grid
/// and interpolated by cubic Hermite splines.
#[derive(Clone)]
pub struct GenericDressing {
    omega0: f64,
    shape: PulseShape,
    gamma_dot: GammaDot,
    grid_mu: Vec<f64>,
    step: f64,
}

impl fmt::Debug for GenericDressing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericDressing")
            .field("omega0", &self.omega0)
            .field("shape", &self.shape)
            .field("mu_end", &self.mu_end())
            .finish()
    }
}

pub fn generic_dressing(
    p: &ControlParams,
    shape: &PulseShape,
    gamma_dot: GammaDot,
) -> Result<GenericDressing> {
    expect_flavor(p.flavor, Flavor::GenericDressed)?;
    p.validate()?;
    let tg = shape.t_gate;
    let step = tg / GENERIC_GRID as f64;
    let gl = GaussLegendre::new(GENERIC_PANEL_NODES)?;
    let mu_dot = |t: f64| (2.0 * shape.theta(t)).sin() * gamma_dot(t) / SQRT_2;
    let mut grid_mu = Vec::with_capacity(GENERIC_GRID + 1);
    let mut mu = 0.0;
    grid_mu.push(mu);
    for k in 0..GENERIC_GRID {
        let lo = k as f64 * step;
        let prev = mu;
        mu += gl.integrate(mu_dot, lo, lo + step);
        if mu.cos().abs() < 1e-6 || mu.cos() * prev.cos() < 0.0 {
            return Err(Error::GenericDressingSingular { t: lo + step, mu });
        }
        grid_mu.push(mu);
    }
    Ok(GenericDressing { omega0: p.omega0, shape: *shape, gamma_dot, grid_mu, step })
}

impl GenericDressing {
    pub fn mu_end(&self) -> f64 {
        *self.grid_mu.last().expect("non-empty grid")
    }

    pub fn gamma_dot(&self, t: f64) -> f64 {
        (self.gamma_dot)(t)
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    pub fn w_field(&self, t: f64) -> WField {
        let th = self.shape.eval(t);
        let (mu, gd) = (self.angle(t), self.gamma_dot(t));
        let (s2t, c2t) = (2.0 * th.theta).sin_cos();
        let cos2 = th.theta.cos().powi(2);
        let sec2 = 1.0 / mu.cos().powi(2);
        let s2m = (2.0 * mu).sin();
        let z = (s2m.abs() > 1e-12).then(|| {
            -self.omega0
                + 4.0 * SQRT_2 * (2.0 * mu).cos() / s2m * th.dot
                + 0.5 * gd * (1.0 + 5.0 * c2t - 2.0 * cos2 * sec2)
        });
        WField { x: s2t * gd, y: SQRT_2 * (cos2 * mu.tan() * gd + SQRT_2 * th.dot), z }
    }
}

impl DressingAngle for GenericDressing {
    fn angle(&self, t: f64) -> f64 {
        let n = self.grid_mu.len() - 1;
        let x = (t / self.step).clamp(0.0, n as f64);
        let k = (x.floor() as usize).min(n - 1);
        let s = x - k as f64;
        let (t0, t1) = (k as f64 * self.step, (k + 1) as f64 * self.step);
        let (m0, m1) = (self.grid_mu[k], self.grid_mu[k + 1]);
        let (d0, d1) = (self.rate(t0) * self.step, self.rate(t1) * self.step);
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * m0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * m1
            + (s3 - s2) * d1
    }

    fn rate(&self, t: f64) -> f64 {
        (2.0 * self.shape.theta(t)).sin() * self.gamma_dot(t) / SQRT_2
    }
}
