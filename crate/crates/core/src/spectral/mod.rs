//! The periodic grid over `Q = (-2, 2]^d`, sampled fields and the Fourier
//! multiplier calculus, plus a direct lattice-sum kernel for cross-checks.

mod field;
mod grid;
pub mod io;
pub mod kernel;
mod ops;

pub use field::{ScalarField, VectorField};
pub use grid::TorusGrid;
pub use kernel::{kernel_apply, KernelPlan, KernelResult, QuadraticForm};
pub use ops::{
    advect, apply_power, dealias, divergence, frac_laplacian, gradient, heat, partial, SpectralOperator,
};
