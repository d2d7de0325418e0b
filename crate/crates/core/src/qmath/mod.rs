//! Dense complex linear algebra and numerical kernels sized for 4×4 operators
//! and their 16×16 superoperators.

mod eigen;
mod matrix;
pub mod ode;
pub mod quad;

pub use eigen::{eigh, expm_hermitian_generator, hermitian_norm2, HermitianEigen, HERMITIAN_TOL};
pub use matrix::CMatrix;
pub use ode::{integrate, ode_solve, IntegratorConfig, Method, StepStats};
pub use quad::{gauss_legendre, simpson, GaussLegendre};

pub type C64 = num_complex::Complex64;
