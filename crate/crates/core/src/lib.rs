//! Spectral verification laboratory for the fractional Kolmogorov operator
//! `(-Δ)^{α/2} + b·∇` on the torus `Π^d = (-2, 2]^d` with a critical attracting
//! drift `b(x) = ν⋆ x / |x|^α` near the origin.
//!
//! Modules, bottom-up: [`constants`] (Gamma function, κ_β, ν⋆, ν_SV, ν(p),
//! γ(ν)), [`spectral`] (grid, fields, Fourier multipliers and a lattice-sum
//! kernel), [`lyapunov`] (φ_β, the singular drift and its mollification),
//! [`orlicz`] (Luxemburg norm for `cosh t − 1`), [`hardy`] (empirical
//! constants), [`solver`] (the operator T, elliptic and parabolic solves) and
//! [`acceptance`] (end-to-end criteria shared by the tests and `sweep`).
//!
//! All numerical code is generic over [`Real`] (implemented for `f32` and `f64`);
//! the `f64` aliases at the crate root are what the CLI and the tests use.

pub mod acceptance;
pub mod constants;
pub mod error;
pub mod hardy;
pub mod lyapunov;
pub mod orlicz;
pub mod quad;
pub mod scalar;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

/// Periodic grid in double precision.
pub type Grid = spectral::TorusGrid<f64>;
/// Scalar field in double precision.
pub type Field = spectral::ScalarField<f64>;
/// Vector field in double precision.
pub type VField = spectral::VectorField<f64>;
/// Model parameters in double precision.
pub type Params = constants::Params<f64>;
/// Constants table in double precision.
pub type Constants = constants::ConstantsTable<f64>;
/// Drift set in double precision.
pub type Drift = lyapunov::DriftSet<f64>;
/// Lyapunov field in double precision.
pub type Lyapunov = lyapunov::LyapunovField<f64>;

/// Crate version, echoed in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
