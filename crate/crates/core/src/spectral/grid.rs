use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Half-shifted periodic grid on `Q = (-2, 2]^d` with `N` points per axis.
///
/// Samples sit at `x_j = -2 + 4(j + 1/2)/N`, so the origin is never a sample.
/// Values are stored row-major: the last axis is contiguous.
pub struct TorusGrid<T: Real> {
    d: usize,
    n: usize,
    len: usize,
    coords: Vec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    xi_norm: OnceLock<Vec<T>>,
}

impl<T: Real> fmt::Debug for TorusGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid").field("d", &self.d).field("n", &self.n).finish()
    }
}

impl<T: Real> PartialEq for TorusGrid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n
    }
}

impl<T: Real> TorusGrid<T> {
    /// `n` must be a power of two, at least 4.
    pub fn new(d: usize, n: usize) -> Result<Arc<Self>> {
        if d == 0 || d > 6 {
            return Err(Error::Params(format!("grid dimension {d} not in 1..=6")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Params(format!("N={n} must be a power of two >= 4")));
        }
        let len = n
            .checked_pow(d as u32)
            .filter(|&l| l <= 1 << 27)
            .ok_or_else(|| Error::Params(format!("grid {n}^{d} is too large")))?;
        let h = T::lit(4.0) / T::from_usize_lossy(n);
        let coords = (0..n)
            .map(|j| -T::lit(2.0) + h * (T::from_usize_lossy(j) + T::lit(0.5)))
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            d,
            n,
            len,
            coords,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            xi_norm: OnceLock::new(),
        }))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of samples, `N^d`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `4/N`.
    pub fn h(&self) -> T {
        T::lit(4.0) / T::from_usize_lossy(self.n)
    }

    pub fn cell_volume(&self) -> T {
        self.h().powi(self.d as i32)
    }

    /// `|Π^d| = 4^d`.
    pub fn volume(&self) -> T {
        T::lit(4.0).powi(self.d as i32)
    }

    /// Per-axis sample coordinates.
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Stride of `axis` in the flat layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.d - 1 - axis) as u32)
    }

    /// Multi-index of a flat index.
    pub fn unflatten(&self, mut idx: usize, out: &mut [usize]) {
        for a in (0..self.d).rev() {
            out[a] = idx % self.n;
            idx /= self.n;
        }
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &j| acc * self.n + j)
    }

    /// Sample point of a flat index.
    pub fn point(&self, mut idx: usize, out: &mut [T]) {
        for a in (0..self.d).rev() {
            out[a] = self.coords[idx % self.n];
            idx /= self.n;
        }
    }

    /// Euclidean norm of the sample point of a flat index.
    pub fn radius(&self, mut idx: usize) -> T {
        let mut r2 = T::zero();
        for _ in 0..self.d {
            let x = self.coords[idx % self.n];
            r2 += x * x;
            idx /= self.n;
        }
        r2.sqrt()
    }

    /// Signed wavenumber of FFT slot `j`: `j` below `N/2`, `j - N` otherwise.
    pub fn wavenumber(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Frequency `ξ = (π/2)k` of FFT slot `j`.
    pub fn xi(&self, j: usize) -> T {
        T::FRAC_PI_2() * T::lit(self.wavenumber(j) as f64)
    }

    /// True when slot `j` is the Nyquist slot `N/2`.
    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    /// `|ξ_k|` for every flat spectral index.
    pub fn xi_norm(&self) -> &[T] {
        self.xi_norm.get_or_init(|| {
            let xi: Vec<T> = (0..self.n).map(|j| self.xi(j)).collect();
            (0..self.len)
                .into_par_iter()
                .map(|mut idx| {
                    let mut s = T::zero();
                    for _ in 0..self.d {
                        let x = xi[idx % self.n];
                        s += x * x;
                        idx /= self.n;
                    }
                    s.sqrt()
                })
                .collect()
        })
    }

    /// All sample points, flattened `len × d`.
    pub fn points(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.len * self.d];
        out.par_chunks_mut(self.d).enumerate().for_each(|(i, p)| self.point(i, p));
        out
    }

    fn transform(&self, data: &mut [Complex<T>], fft: &Arc<dyn Fft<T>>) {
        assert_eq!(data.len(), self.len);
        let n = self.n;
        for axis in 0..self.d {
            let stride = self.stride(axis);
            if stride == 1 {
                data.par_chunks_mut(n * 64.min(self.len / n).max(1))
                    .for_each(|chunk| fft.process(chunk));
                continue;
            }
            // Gather the lines of this axis into contiguous storage.
            let block = n * stride;
            let mut lines = vec![Complex::new(T::zero(), T::zero()); self.len];
            lines
                .par_chunks_mut(block)
                .zip(data.par_chunks(block))
                .for_each(|(dst, src)| {
                    for i in 0..stride {
                        for k in 0..n {
                            dst[i * n + k] = src[k * stride + i];
                        }
                    }
                    fft.process(dst);
                });
            data.par_chunks_mut(block)
                .zip(lines.par_chunks(block))
                .for_each(|(dst, src)| {
                    for i in 0..stride {
                        for k in 0..n {
                            dst[k * stride + i] = src[i * n + k];
                        }
                    }
                });
        }
    }

    /// Unnormalised forward DFT along every axis, in place.
    pub fn fft_forward(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.forward);
    }

    /// Inverse DFT along every axis, in place, including the `1/N^d` factor.
    pub fn fft_inverse(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.inverse);
        let s = T::one() / T::from_usize_lossy(self.len);
        data.par_iter_mut().for_each(|c| *c = c.scale(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(TorusGrid::<f64>::new(2, 6).is_err());
        assert!(TorusGrid::<f64>::new(2, 2).is_err());
        assert!(TorusGrid::<f64>::new(0, 8).is_err());
    }

    #[test]
    fn half_shift_avoids_origin() {
        let g = TorusGrid::<f64>::new(3, 8).unwrap();
        assert!((0..g.len()).all(|i| g.radius(i) > 0.0));
        assert_eq!(g.coords()[0], -2.0 + 0.25);
        assert_eq!(g.volume(), 64.0);
        assert_eq!(g.cell_volume() * g.len() as f64, 64.0);
    }

    #[test]
    fn flatten_roundtrip() {
        let g = TorusGrid::<f64>::new(3, 4).unwrap();
        let mut m = [0; 3];
        for i in 0..g.len() {
            g.unflatten(i, &mut m);
            assert_eq!(g.flatten(&m), i);
        }
    }

    #[test]
    fn fft_roundtrip() {
        let g = TorusGrid::<f64>::new(3, 8).unwrap();
        let orig: Vec<Complex<f64>> =
            (0..g.len()).map(|i| Complex::new((i as f64 * 0.37).sin(), 0.0)).collect();
        let mut data = orig.clone();
        g.fft_forward(&mut data);
        g.fft_inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
