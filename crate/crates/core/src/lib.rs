//! Laboratory for the entry-wise Brownian diffusion of non-hermitian random
//! matrices `X(τ) = X0 + Brownian noise`.
//!
//! * [`matrix`] and [`spectrum`]: initial conditions and the spectral kernel
//!   `s(z)` of `(z - X0)(z - X0)†`.
//! * [`mc`]: exact Gaussian sampling of the diffusion and the planar Coulomb
//!   gas Langevin system.
//! * [`observables`]: eigenvalues, biorthogonal overlaps and binned density /
//!   overlap fields.
//! * [`aecp`]: exact finite-`n` averaged extended characteristic polynomial.
//! * [`largen`]: the large-`n` Hopf–Lax solution, closed forms,
//!   characteristics and support contours.
//! * [`asymptotics`]: universal scaling profiles and shape tests.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aecp;
pub mod asymptotics;
pub mod error;
pub mod largen;
pub mod matrix;
pub mod mc;
pub mod observables;
pub mod special;
pub mod spectrum;

pub use error::{Error, Result};
pub use matrix::{build_initial, ComplexMatrix, InitialCondition};
pub use num_complex::Complex64;
pub use spectrum::{phi0, singular_spectrum, QuaternionPoint, SingularSpectrum, SpectralKernel};
