use std::sync::{Arc, OnceLock};

use num_complex::Complex;
use rayon::prelude::*;

use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Real samples on a [`TorusGrid`] with lazily cached DFT coefficients.
///
/// The cache holds the raw (unnormalised, unphased) DFT of the samples and is
/// dropped on every mutable access to the values.
#[derive(Debug)]
pub struct ScalarField<T: Real> {
    grid: Arc<TorusGrid<T>>,
    values: Vec<T>,
    spectral: OnceLock<Arc<Vec<Complex<T>>>>,
}

impl<T: Real> Clone for ScalarField<T> {
    fn clone(&self) -> Self {
        let spectral = OnceLock::new();
        if let Some(c) = self.spectral.get() {
            let _ = spectral.set(Arc::clone(c));
        }
        Self { grid: Arc::clone(&self.grid), values: self.values.clone(), spectral }
    }
}

pub(crate) fn same_grid<T: Real>(a: &TorusGrid<T>, b: &TorusGrid<T>) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "d={} N={} vs d={} N={}",
            a.dim(),
            a.n(),
            b.dim(),
            b.n()
        )))
    }
}

impl<T: Real> ScalarField<T> {
    pub fn from_values(grid: &Arc<TorusGrid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid: Arc::clone(grid), values, spectral: OnceLock::new() })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F>(grid: &Arc<TorusGrid<T>>, f: F) -> Self
    where
        F: Fn(&[T]) -> T + Sync,
    {
        let d = grid.dim();
        let values = (0..grid.len())
            .into_par_iter()
            .map_init(|| vec![T::zero(); d], |x, i| {
                grid.point(i, x);
                f(x)
            })
            .collect();
        Self { grid: Arc::clone(grid), values, spectral: OnceLock::new() }
    }

    /// Samples `f(|x|)` at every grid point.
    pub fn from_radial<F>(grid: &Arc<TorusGrid<T>>, f: F) -> Self
    where
        F: Fn(T) -> T + Sync,
    {
        let values = (0..grid.len()).into_par_iter().map(|i| f(grid.radius(i))).collect();
        Self { grid: Arc::clone(grid), values, spectral: OnceLock::new() }
    }

    pub fn constant(grid: &Arc<TorusGrid<T>>, c: T) -> Self {
        Self { grid: Arc::clone(grid), values: vec![c; grid.len()], spectral: OnceLock::new() }
    }

    pub fn zeros(grid: &Arc<TorusGrid<T>>) -> Self {
        Self::constant(grid, T::zero())
    }

    /// Inverse transform of raw DFT coefficients; the imaginary part is dropped.
    pub fn from_coefficients(grid: &Arc<TorusGrid<T>>, mut coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch("coefficient count".into()));
        }
        grid.fft_inverse(&mut coeffs);
        let values = coeffs.par_iter().map(|c| c.re).collect();
        Ok(Self { grid: Arc::clone(grid), values, spectral: OnceLock::new() })
    }

    pub fn grid(&self) -> &Arc<TorusGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Mutable access; invalidates the spectral cache.
    pub fn values_mut(&mut self) -> &mut [T] {
        self.spectral.take();
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Raw DFT coefficients, computed once.
    pub fn coefficients(&self) -> Arc<Vec<Complex<T>>> {
        Arc::clone(self.spectral.get_or_init(|| {
            let mut data: Vec<Complex<T>> =
                self.values.par_iter().map(|&v| Complex::new(v, T::zero())).collect();
            self.grid.fft_forward(&mut data);
            Arc::new(data)
        }))
    }

    /// Multiplies the spectrum by a real multiplier of the flat spectral index.
    pub fn multiply_spectrum<F>(&self, m: F) -> Self
    where
        F: Fn(usize) -> T + Sync,
    {
        let coeffs = self.coefficients();
        let scaled: Vec<Complex<T>> =
            coeffs.par_iter().enumerate().map(|(i, c)| c.scale(m(i))).collect();
        Self::from_coefficients(&self.grid, scaled).expect("same grid")
    }

    /// Multiplies the spectrum by a function of `|ξ|`.
    pub fn multiply_radial<F>(&self, m: F) -> Self
    where
        F: Fn(T) -> T + Sync,
    {
        let xi = self.grid.xi_norm();
        self.multiply_spectrum(|i| m(xi[i]))
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(T) -> T + Sync,
    {
        let values = self.values.par_iter().map(|&v| f(v)).collect();
        Self { grid: Arc::clone(&self.grid), values, spectral: OnceLock::new() }
    }

    /// Pointwise `f(self, other)`.
    pub fn zip_map<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(T, T) -> T + Sync,
    {
        same_grid(&self.grid, &other.grid)?;
        let values = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self { grid: Arc::clone(&self.grid), values, spectral: OnceLock::new() })
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: T, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + s * b)
    }

    /// `⟨u⟩ = ∫_{Π^d} u`, the cell-volume weighted sum.
    pub fn integral(&self) -> T {
        self.grid.cell_volume() * self.values.par_iter().copied().sum::<T>()
    }

    /// Average value `⟨u⟩/|Π^d|`.
    pub fn mean(&self) -> T {
        self.values.par_iter().copied().sum::<T>() / T::from_usize_lossy(self.len())
    }

    /// `⟨u, v⟩ = ∫ u v`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        same_grid(&self.grid, &other.grid)?;
        let s: T = self.values.par_iter().zip(other.values.par_iter()).map(|(&a, &b)| a * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn norm_l2(&self) -> T {
        let s: T = self.values.par_iter().map(|&v| v * v).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn norm_lp(&self, p: T) -> T {
        let s: T = self.values.par_iter().map(|&v| v.abs().powf(p)).sum();
        (s * self.grid.cell_volume()).powf(T::one() / p)
    }

    pub fn norm_inf(&self) -> T {
        self.values.par_iter().map(|v| v.abs()).reduce(T::zero, |a, b| a.max(b))
    }

    pub fn max(&self) -> T {
        self.values.par_iter().copied().reduce(T::neg_infinity, |a, b| a.max(b))
    }

    pub fn min(&self) -> T {
        self.values.par_iter().copied().reduce(T::infinity, |a, b| a.min(b))
    }

    /// Spectral interpolation onto another grid of the same dimension.
    ///
    /// Modes absent from the target are dropped; the Nyquist slot of the
    /// coarser grid is dropped as well so the result stays real.
    pub fn resample(&self, target: &Arc<TorusGrid<T>>) -> Result<Self> {
        let src = &self.grid;
        if src.dim() != target.dim() {
            return Err(Error::GridMismatch("resample across dimensions".into()));
        }
        if src.n() == target.n() {
            return Ok(self.clone());
        }
        let d = src.dim();
        let kmax = (src.n().min(target.n()) / 2) as i64;
        let coeffs = self.coefficients();
        let mut out = vec![Complex::new(T::zero(), T::zero()); target.len()];
        let mut ms = vec![0usize; d];
        let mut mt = vec![0usize; d];
        // Sample phase: x_0 = -2 + h/2 on each grid.
        let shift = |g: &TorusGrid<T>| -T::lit(2.0) + g.h() / T::lit(2.0);
        let (s0, t0) = (shift(src), shift(target));
        let ratio = T::from_usize_lossy(target.len()) / T::from_usize_lossy(src.len());
        'modes: for (i, c) in coeffs.iter().enumerate() {
            src.unflatten(i, &mut ms);
            let mut phase = T::zero();
            for a in 0..d {
                let k = src.wavenumber(ms[a]);
                if k.abs() >= kmax {
                    continue 'modes;
                }
                mt[a] = if k < 0 { (target.n() as i64 + k) as usize } else { k as usize };
                phase += T::FRAC_PI_2() * T::lit(k as f64) * (t0 - s0);
            }
            let rot = Complex::new(phase.cos(), phase.sin());
            out[target.flatten(&mt)] = c * rot * ratio;
        }
        Self::from_coefficients(target, out)
    }
}

/// `d` scalar components on one grid.
#[derive(Debug, Clone)]
pub struct VectorField<T: Real> {
    components: Vec<ScalarField<T>>,
}

impl<T: Real> VectorField<T> {
    pub fn new(components: Vec<ScalarField<T>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::GridMismatch("vector field without components".into()))?;
        if components.len() != first.grid().dim() {
            return Err(Error::GridMismatch("component count differs from dimension".into()));
        }
        for c in &components[1..] {
            same_grid(first.grid(), c.grid())?;
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: &Arc<TorusGrid<T>>) -> Self {
        Self { components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect() }
    }

    /// Samples a vector-valued `f(x, out)`.
    pub fn from_fn<F>(grid: &Arc<TorusGrid<T>>, f: F) -> Self
    where
        F: Fn(&[T], &mut [T]) + Sync,
    {
        let d = grid.dim();
        let mut comps: Vec<Vec<T>> = vec![vec![T::zero(); grid.len()]; d];
        let flat: Vec<T> = (0..grid.len())
            .into_par_iter()
            .map_init(
                || (vec![T::zero(); d], vec![T::zero(); d]),
                |(x, v), i| {
                    grid.point(i, x);
                    f(x, v);
                    v.clone()
                },
            )
            .flatten_iter()
            .collect();
        for (i, chunk) in flat.chunks(d).enumerate() {
            for a in 0..d {
                comps[a][i] = chunk[a];
            }
        }
        Self {
            components: comps
                .into_iter()
                .map(|v| ScalarField::from_values(grid, v).expect("sized"))
                .collect(),
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid<T>> {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[ScalarField<T>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField<T> {
        &self.components[i]
    }

    pub fn map_components<F>(&self, f: F) -> Self
    where
        F: Fn(&ScalarField<T>) -> ScalarField<T>,
    {
        Self { components: self.components.iter().map(f).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map_components(|c| c.scale(s))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_>>()?;
        Ok(Self { components })
    }

    /// Pointwise Euclidean norm.
    pub fn magnitude(&self) -> ScalarField<T> {
        let grid = self.grid();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| self.components.iter().map(|c| c.values()[i] * c.values()[i]).sum::<T>().sqrt())
            .collect();
        ScalarField::from_values(grid, values).expect("sized")
    }

    /// Pointwise `self · other`.
    pub fn dot(&self, other: &Self) -> Result<ScalarField<T>> {
        same_grid(self.grid(), other.grid())?;
        let grid = self.grid();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                self.components
                    .iter()
                    .zip(&other.components)
                    .map(|(a, b)| a.values()[i] * b.values()[i])
                    .sum::<T>()
            })
            .collect();
        ScalarField::from_values(grid, values)
    }

    pub fn max_magnitude(&self) -> T {
        self.magnitude().norm_inf()
    }

    pub fn resample(&self, target: &Arc<TorusGrid<T>>) -> Result<Self> {
        let components = self.components.iter().map(|c| c.resample(target)).collect::<Result<_>>()?;
        Ok(Self { components })
    }
}
