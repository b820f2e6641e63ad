use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::field::{same_grid, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fourier multiplier `(λ + |ξ|^α)^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralOperator<T: Real> {
    pub alpha: T,
    pub lambda: T,
    pub s: T,
}

impl<T: Real> SpectralOperator<T> {
    pub fn new(alpha: T, s: T, lambda: T) -> Result<Self> {
        if !(lambda >= T::zero()) {
            return Err(Error::Domain(format!("shift lambda={lambda} must be nonnegative")));
        }
        if !(alpha > T::zero() && alpha <= T::lit(2.0)) {
            return Err(Error::Domain(format!("alpha={alpha} must lie in (0, 2]")));
        }
        Ok(Self { alpha, lambda, s })
    }

    /// Multiplier value at `|ξ|`. The zero mode of a negative power at λ = 0
    /// is mapped to 0 (pseudo-inverse on mean-zero fields).
    pub fn symbol(&self, xi: T) -> T {
        let base = self.lambda + xi.powf(self.alpha);
        if base == T::zero() {
            if self.s == T::zero() {
                T::one()
            } else {
                T::zero()
            }
        } else {
            base.powf(self.s)
        }
    }

    pub fn apply(&self, u: &ScalarField<T>) -> Result<ScalarField<T>> {
        if self.s < T::zero() && self.lambda == T::zero() {
            let m = u.mean();
            let scale = u.norm_inf().max(T::min_positive_value());
            if m.abs() > T::lit(1e3) * T::epsilon() * scale {
                return Err(Error::Singular(format!(
                    "negative power {} at lambda=0 applied to a field with mean {m}",
                    self.s
                )));
            }
        }
        Ok(u.multiply_radial(|xi| self.symbol(xi)))
    }
}

/// `(λ + A)^s u` with `A = (-Δ)^{α/2}`.
pub fn apply_power<T: Real>(u: &ScalarField<T>, alpha: T, s: T, lambda: T) -> Result<ScalarField<T>> {
    SpectralOperator::new(alpha, s, lambda)?.apply(u)
}

/// The fractional Laplacian `A u`.
pub fn frac_laplacian<T: Real>(u: &ScalarField<T>, alpha: T) -> ScalarField<T> {
    u.multiply_radial(|xi| xi.powf(alpha))
}

/// `e^{-tA} u`.
pub fn heat<T: Real>(u: &ScalarField<T>, alpha: T, t: T) -> Result<ScalarField<T>> {
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("heat time t={t} must be nonnegative")));
    }
    if t == T::zero() {
        return Ok(u.clone());
    }
    Ok(u.multiply_radial(|xi| (-t * xi.powf(alpha)).exp()))
}

fn derivative_multiplier<T: Real>(u: &ScalarField<T>, axis: usize) -> ScalarField<T> {
    let grid = u.grid();
    let stride = grid.stride(axis);
    let n = grid.n();
    let coeffs = u.coefficients();
    let out: Vec<Complex<T>> = coeffs
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let j = (i / stride) % n;
            if grid.is_nyquist(j) {
                Complex::new(T::zero(), T::zero())
            } else {
                // i ξ c
                let xi = grid.xi(j);
                Complex::new(-xi * c.im, xi * c.re)
            }
        })
        .collect();
    ScalarField::from_coefficients(grid, out).expect("same grid")
}

/// Spectral partial derivative `∂_axis u`; the Nyquist slot is zeroed.
pub fn partial<T: Real>(u: &ScalarField<T>, axis: usize) -> ScalarField<T> {
    derivative_multiplier(u, axis)
}

/// Spectral gradient; the Nyquist slot of each axis is zeroed.
pub fn gradient<T: Real>(u: &ScalarField<T>) -> VectorField<T> {
    let comps = (0..u.grid().dim()).map(|a| derivative_multiplier(u, a)).collect();
    VectorField::new(comps).expect("components share a grid")
}

/// Spectral divergence.
pub fn divergence<T: Real>(f: &VectorField<T>) -> ScalarField<T> {
    let grid = f.grid();
    let mut acc = vec![T::zero(); grid.len()];
    for (a, c) in f.components().iter().enumerate() {
        let da = derivative_multiplier(c, a);
        acc.par_iter_mut().zip(da.values().par_iter()).for_each(|(s, &v)| *s += v);
    }
    ScalarField::from_values(grid, acc).expect("sized")
}

/// Zeroes every mode with some `|k_i| > N/3` (2/3 rule).
pub fn dealias<T: Real>(u: &ScalarField<T>) -> ScalarField<T> {
    let grid = u.grid();
    let (n, d) = (grid.n(), grid.dim());
    let cut = (n / 3) as i64;
    u.multiply_spectrum(|mut i| {
        for _ in 0..d {
            if grid.wavenumber(i % n).abs() > cut {
                return T::zero();
            }
            i /= n;
        }
        T::one()
    })
}

/// Pointwise `b · ∇u`.
pub fn advect<T: Real>(b: &VectorField<T>, u: &ScalarField<T>) -> Result<ScalarField<T>> {
    same_grid(b.grid(), u.grid())?;
    b.dot(&gradient(u))
}
