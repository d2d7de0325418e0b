//! Simulation of geometric single-qubit gates in a resonant four-level tripod
//! system (ground levels `|0>`, `|1>`, `|a>` coupled to one excited level `|e>`).
//!
//! The crate builds the double-STIRAP control envelopes and their
//! superadiabatic (SATD) corrections, propagates the Schrödinger and Lindblad
//! equations, and evaluates gate and map fidelities together with the
//! perturbative oracles used to cross-check the numerics.
//!
//! Module map:
//! - [`qmath`]: small dense complex matrices, Hermitian eigensolver, ODE
//!   integrators and quadrature.
//! - [`controls`]: pulse shape, envelopes, dressing angles, energy cost.
//! - [`tripod`]: Hamiltonian, analytic frames and target gates.
//! - [`dynamics`]: unitary and Lindblad propagation.
//! - [`metrics`]: gate and map fidelities.
//! - [`oracles`]: Magnus-expansion predictions and the dressing no-go check.

pub mod controls;
pub mod dynamics;
pub mod error;
pub mod metrics;
pub mod oracles;
pub mod qmath;
pub mod tripod;

pub use error::{Error, Result};
pub use qmath::C64;
