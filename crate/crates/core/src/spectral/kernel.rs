//! Direct lattice-sum evaluation of `A = (-Δ)^{α/2}` through its jump kernel,
//! `Au(x) = c_{d,α} p.v.∫ (u(x) - u(y)) K(x - y) dy`, with
//! `K(w) = Σ_m |w + 4m|^{-d-α}`.
//!
//! Images with `|m|_∞ ≤ M` are summed exactly; the rest are replaced by their
//! Taylor expansion in `w` up to fourth order, whose lattice coefficients are
//! summed once. The punctured trapezoid sum is corrected at the singular point
//! with the generalised Euler–Maclaurin terms of orders `h^{2-α}` and `h^{4-α}`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::field::{same_grid, ScalarField};
use super::grid::TorusGrid;
use crate::constants::{gamma, kernel_constant};
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, integrate, plateau};
use crate::scalar::Real;

/// Calls `f(n, weight)` for every `n ∈ ℤ^d` with `0 ≤ n_i ≤ bound`, where
/// `weight = 2^{#nonzero}` accounts for the sign images.
fn for_each_orthant(d: usize, bound: i64, f: &mut dyn FnMut(&[i64], f64)) {
    let mut n = vec![0i64; d];
    loop {
        let nz = n.iter().filter(|&&v| v != 0).count();
        f(&n, (1u64 << nz) as f64);
        let mut a = 0;
        loop {
            if a == d {
                return;
            }
            n[a] += 1;
            if n[a] <= bound {
                break;
            }
            n[a] = 0;
            a += 1;
        }
    }
}

fn sphere_area(d: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0).expect("d >= 1")
}

/// `∫_0^∞ t^{a-1} ψ(t) dt` for the flat-top cutoff ψ = 1 on [0, 1], 0 past 2.
fn radial_moment(a: f64) -> f64 {
    1.0 / a + integrate(|t| t.powf(a - 1.0) * plateau(t, 1.0, 2.0), 1.0, 2.0, 24, 64)
}

/// Zeta-type constants of the punctured lattice `ℤ^d \ {0}`:
/// the finite parts `lim_R [Σ' f(n)ψ(|n|/R) - ∫ f ψ(|z|/R) dz]` for
/// `f = |n|^{2-s}`, `n_1^4 |n|^{-s}` and `n_1^2 n_2^2 |n|^{-s}`, `s = d + α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeZeta {
    pub z2: f64,
    pub a4: f64,
    pub b4: f64,
}

/// Finite part of `Σ' |n|^{-σ}` over `ℤ^d` (analytic continuation for `σ < d`).
pub fn epstein_zeta(d: usize, sigma: f64, radius: f64) -> f64 {
    lattice_finite_parts(d, &[(sigma, 0)], radius)[0]
}

/// Finite parts of `Σ' P_k(n)|n|^{-σ}` with `P_0 = 1`, `P_1 = n_1^4`,
/// `P_2 = n_1^2 n_2^2`, each requested as `(σ, k)`.
fn lattice_finite_parts(d: usize, terms: &[(f64, usize)], radius: f64) -> Vec<f64> {
    let bound = (2.0 * radius).ceil() as i64;
    let mut sums = vec![0.0f64; terms.len()];
    let mut comp = vec![0.0f64; terms.len()];
    for_each_orthant(d, bound, &mut |n, w| {
        let r2: i64 = n.iter().map(|v| v * v).sum();
        if r2 == 0 {
            return;
        }
        let r = (r2 as f64).sqrt();
        let cut = plateau(r / radius, 1.0, 2.0);
        if cut == 0.0 {
            return;
        }
        for (k, &(sigma, poly)) in terms.iter().enumerate() {
            let p = match poly {
                0 => 1.0,
                1 => (n[0] * n[0] * n[0] * n[0]) as f64,
                _ => (n[0] * n[0] * n[1] * n[1]) as f64,
            };
            // symmetrise the monomial over coordinate permutations
            let p = if poly == 0 {
                p
            } else {
                let mut acc = 0.0;
                let mut cnt = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        if poly == 1 && i == j {
                            acc += (n[i] as f64).powi(4);
                            cnt += 1.0;
                        } else if poly == 2 && i != j {
                            acc += (n[i] * n[i] * n[j] * n[j]) as f64;
                            cnt += 1.0;
                        }
                    }
                }
                acc / cnt
            };
            // Kahan summation: terms span many magnitudes
            let y = w * p * r.powf(-sigma) * cut - comp[k];
            let t = sums[k] + y;
            comp[k] = (t - sums[k]) - y;
            sums[k] = t;
        }
    });
    let area = sphere_area(d);
    let df = d as f64;
    terms
        .iter()
        .zip(sums)
        .map(|(&(sigma, poly), s)| {
            let (deg, ang) = match poly {
                0 => (0.0, 1.0),
                1 => (4.0, 3.0 / (df * (df + 2.0))),
                _ => (4.0, 1.0 / (df * (df + 2.0))),
            };
            let a = deg - sigma + df;
            s - ang * area * radius.powf(a) * radial_moment(a)
        })
        .collect()
}

impl LatticeZeta {
    pub fn new(d: usize, alpha: f64) -> Self {
        let s = d as f64 + alpha;
        let radius = match d {
            1 => 4000.0,
            2 => 320.0,
            3 => 48.0,
            _ => 14.0,
        };
        let mut terms = vec![(s - 2.0, 0), (s, 1)];
        if d >= 2 {
            terms.push((s, 2));
        }
        let v = lattice_finite_parts(d, &terms, radius);
        Self { z2: v[0], a4: v[1], b4: if d >= 2 { v[2] } else { 0.0 } }
    }
}

/// Lattice coefficients of the far-image Taylor expansion.
#[derive(Debug, Clone, Copy, Serialize)]
struct FarField {
    s0: f64,
    s2: f64,
    s4: f64,
    p4: f64,
    q4: f64,
    s6: f64,
    min_image: f64,
}

/// `∫_{|z|_∞>1} |z|^{-a} dz`.
fn cube_exterior_moment(d: usize, a: f64) -> f64 {
    let (x, w) = gauss_legendre(24);
    let mut acc = 0.0;
    let mut idx = vec![0usize; d.saturating_sub(1)];
    loop {
        let mut wt = 1.0;
        let mut v2 = 0.0;
        for &i in &idx {
            wt *= w[i];
            v2 += x[i] * x[i];
        }
        acc += wt * (1.0 + v2).powf(-a / 2.0);
        let mut k = 0;
        loop {
            if k == idx.len() {
                return 2.0 * d as f64 / (a - d as f64) * acc;
            }
            idx[k] += 1;
            if idx[k] < x.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

impl FarField {
    fn new(d: usize, alpha: f64, m: usize) -> Self {
        let s = d as f64 + alpha;
        let m2: i64 = match d {
            1 => 200_000,
            2 => 1500,
            3 => 120,
            _ => 24,
        }
        .max(4 * m as i64);
        let (mut s0, mut s2, mut s4, mut s6, mut p4, mut q4) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for_each_orthant(d, m2, &mut |n, w| {
            let inf = n.iter().copied().max().unwrap_or(0);
            if inf <= m as i64 {
                return;
            }
            let y2: f64 = n.iter().map(|&v| 16.0 * (v * v) as f64).sum();
            let base = y2.powf(-s / 2.0);
            s0 += w * base;
            s2 += w * base / y2;
            let b4 = base / (y2 * y2);
            s4 += w * b4;
            s6 += w * b4 / y2;
            let sq: Vec<f64> = n.iter().map(|&v| 16.0 * (v * v) as f64).collect();
            let q = sq.iter().map(|v| v * v).sum::<f64>() / d as f64;
            p4 += w * q * b4 / (y2 * y2);
            if d >= 2 {
                let tot: f64 = sq.iter().sum();
                let pairs = (tot * tot - sq.iter().map(|v| v * v).sum::<f64>()) / 2.0;
                q4 += w * pairs / (d * (d - 1) / 2) as f64 * b4 / (y2 * y2);
            }
        });
        // Continuum remainder past |m|_∞ = m2 (midpoint rule on unit cells).
        let l = m2 as f64 + 0.5;
        let rem = |a: f64| 4f64.powf(-a) * l.powf(d as f64 - a) * cube_exterior_moment(d, a);
        s0 += rem(s);
        s2 += rem(s + 2.0);
        Self { s0, s2, s4, p4, q4, s6, min_image: 4.0 * (m as f64 + 1.0) }
    }

    /// Far-image contribution at offset `w` and the bound on its truncation.
    fn eval(&self, d: usize, s: f64, w: &[f64]) -> (f64, f64) {
        let b: f64 = w.iter().map(|v| v * v).sum();
        let hs = -s / 2.0;
        let c1 = hs;
        let c2 = hs * (hs - 1.0);
        let c3 = c2 * (hs - 2.0);
        let c4 = c3 * (hs - 3.0);
        let df = d as f64;
        let t2 = b * self.s2 * (c1 + 2.0 * c2 / df);
        let sum_w4: f64 = w.iter().map(|v| v.powi(4)).sum();
        let cross = (b * b - sum_w4) / 2.0;
        let t4 = 0.5 * c2 * b * b * self.s4
            + 2.0 * c3 * b * b / df * self.s4
            + (2.0 / 3.0) * c4 * (sum_w4 * self.p4 + 6.0 * cross * self.q4);
        let rising6: f64 = (0..6).map(|k| s + k as f64).product();
        let shrink = (1.0 - b.sqrt() / self.min_image).powf(-s - 6.0);
        let tail = rising6 / 720.0 * b.powi(3) * self.s6 * shrink;
        (self.s0 + t2 + t4, tail)
    }
}

/// Precomputed periodic kernel table and correction constants for one grid.
#[derive(Debug)]
pub struct KernelPlan<T: Real> {
    grid: Arc<TorusGrid<T>>,
    alpha: f64,
    m: usize,
    c: f64,
    zeta: LatticeZeta,
    table: Vec<f64>,
    tail: f64,
}

/// Output of [`kernel_apply`] with its error budget.
#[derive(Debug, Clone)]
pub struct KernelResult<T: Real> {
    pub field: ScalarField<T>,
    /// Bound on the far-image truncation, `c Σ_y |u(x)-u(y)| |R_6(x-y)| h^d`.
    pub tail_bound: f64,
    /// Size of the singular-point correction, `max |corr|`.
    pub correction: f64,
}

impl<T: Real> KernelPlan<T> {
    /// `m ≥ 2` exact image shells; requires `α < 2`.
    pub fn new(grid: &Arc<TorusGrid<T>>, alpha: T, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Params(format!("image radius M={m} must be at least 2")));
        }
        let d = grid.dim();
        let a = alpha.as_f64();
        if !(a > 0.0 && a < 2.0) {
            return Err(Error::Domain(format!("kernel route needs 0 < alpha < 2, got {a}")));
        }
        let c = if d >= 2 {
            kernel_constant(d, a)?
        } else {
            let num = 2f64.powf(a) * gamma((1.0 + a) / 2.0)?;
            num / (std::f64::consts::PI.sqrt() * gamma(-a / 2.0)?.abs())
        };
        let s = d as f64 + a;
        let far = FarField::new(d, a, m);
        let zeta = LatticeZeta::new(d, a);
        let n = grid.n();
        let h = grid.h().as_f64();
        let mi = m as i64;
        let rows: Vec<(f64, f64)> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let mut w = vec![0.0; d];
                let mut rest = idx;
                for a in (0..d).rev() {
                    let j = rest % n;
                    rest /= n;
                    let k = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                    w[a] = h * k as f64;
                }
                if idx == 0 {
                    return (0.0, 0.0);
                }
                let mut near = 0.0;
                let mut img = vec![-mi; d];
                loop {
                    let r2: f64 = w.iter().zip(&img).map(|(x, &k)| (x + 4.0 * k as f64).powi(2)).sum();
                    near += r2.powf(-s / 2.0);
                    let mut a = 0;
                    loop {
                        if a == d {
                            break;
                        }
                        img[a] += 1;
                        if img[a] <= mi {
                            break;
                        }
                        img[a] = -mi;
                        a += 1;
                    }
                    if a == d {
                        break;
                    }
                }
                let (f, tail) = far.eval(d, s, &w);
                (near + f, tail)
            })
            .collect();
        let tail = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        let table = rows.into_iter().map(|r| r.0).collect();
        Ok(Self { grid: Arc::clone(grid), alpha: a, m, c, zeta, table, tail })
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn zeta(&self) -> LatticeZeta {
        self.zeta
    }

    pub fn images(&self) -> usize {
        self.m
    }

    /// Periodic kernel at the offset of flat index `idx` (minimal image).
    pub fn kernel(&self, idx: usize) -> f64 {
        self.table[idx]
    }

    /// `h^d Σ_y (u(x) - u(y)) K(x - y)` without the constant or correction.
    fn raw_sum(&self, u: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let (d, n) = (g.dim(), g.n());
        let len = g.len();
        let rows = len / n;
        let hd = g.cell_volume().as_f64();
        (0..len)
            .into_par_iter()
            .map_init(
                || (vec![0usize; d], vec![0usize; d]),
                |(xm, om), ix| {
                    g.unflatten(ix, xm);
                    let mut acc = 0.0;
                    for r in 0..rows {
                        // outer multi-index of the offset row
                        let mut rest = r;
                        for a in (0..d - 1).rev() {
                            om[a] = rest % n;
                            rest /= n;
                        }
                        let mut ybase = 0;
                        for a in 0..d - 1 {
                            ybase = ybase * n + (xm[a] + om[a]) % n;
                        }
                        let ybase = ybase * n;
                        let krow = &self.table[r * n..(r + 1) * n];
                        let x_last = xm[d - 1];
                        let split = n - x_last;
                        let ua = &u[ybase + x_last..ybase + n];
                        let ub = &u[ybase..ybase + x_last];
                        let mut s = 0.0;
                        for (k, v) in krow[..split].iter().zip(ua) {
                            s += k * v;
                        }
                        for (k, v) in krow[split..].iter().zip(ub) {
                            s += k * v;
                        }
                        acc += s;
                    }
                    acc
                },
            )
            .zip((0..len).into_par_iter())
            .map(|(conv, ix)| hd * (self.row_total() * u[ix] - conv))
            .collect()
    }

    fn row_total(&self) -> f64 {
        self.table.iter().sum()
    }

    /// Euler–Maclaurin correction at the singular point.
    fn correction(&self, u: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let d = g.dim();
        let h = g.h().as_f64();
        let second: Vec<Vec<f64>> = (0..d).map(|a| fd_second(g, u, a)).collect();
        let lap: Vec<f64> = (0..u.len()).map(|i| second.iter().map(|s| s[i]).sum()).collect();
        let mut fourth = vec![0.0; u.len()];
        for a in 0..d {
            let da = fd_second(g, &second[a], a);
            for (f, v) in fourth.iter_mut().zip(da) {
                *f += self.zeta.a4 * v;
            }
            for b in a + 1..d {
                let dab = fd_second(g, &second[b], a);
                for (f, v) in fourth.iter_mut().zip(dab) {
                    *f += 6.0 * self.zeta.b4 * v;
                }
            }
        }
        let c2 = h.powf(2.0 - self.alpha) * self.zeta.z2 / (2.0 * d as f64);
        let c4 = h.powf(4.0 - self.alpha) / 24.0;
        lap.iter().zip(&fourth).map(|(l, f)| c2 * l + c4 * f).collect()
    }

    /// Kernel evaluation of `A u`.
    pub fn apply(&self, u: &ScalarField<T>) -> Result<KernelResult<T>> {
        same_grid(&self.grid, u.grid())?;
        let vals: Vec<f64> = u.values().iter().map(|v| v.as_f64()).collect();
        let raw = self.raw_sum(&vals);
        let corr = self.correction(&vals);
        let out: Vec<T> = raw.iter().zip(&corr).map(|(r, k)| T::lit(self.c * (r + k))).collect();
        let osc = u.max().as_f64() - u.min().as_f64();
        let tail_bound = self.c * self.tail * osc * self.grid.volume().as_f64();
        let correction = self.c * corr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(KernelResult { field: ScalarField::from_values(&self.grid, out)?, tail_bound, correction })
    }

    /// Kernel form of `⟨A^{1/2}u, A^{1/2}u⟩`:
    /// `(c/2) ∬ |u(x)-u(y)|² K(x-y) dx dy`, plus the singular-point correction.
    pub fn quadratic_form(&self, u: &ScalarField<T>) -> Result<QuadraticForm> {
        same_grid(&self.grid, u.grid())?;
        let vals: Vec<f64> = u.values().iter().map(|v| v.as_f64()).collect();
        let hd = self.grid.cell_volume().as_f64();
        let raw = self.raw_sum(&vals);
        // Σ_x u(x) Σ_y (u(x)-u(y))K = ½ Σ_x Σ_y (u(x)-u(y))² K by symmetry of K.
        let double_sum = self.c * hd * vals.iter().zip(&raw).map(|(u, r)| u * r).sum::<f64>();
        let corr = self.correction(&vals);
        let correction = self.c * hd * vals.iter().zip(&corr).map(|(u, k)| u * k).sum::<f64>();
        Ok(QuadraticForm { double_sum, correction, total: double_sum + correction })
    }
}

/// Kernel-side quadratic form and its pieces.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadraticForm {
    pub double_sum: f64,
    pub correction: f64,
    pub total: f64,
}

/// Eighth-order periodic central difference for `∂²_axis`.
pub(crate) fn fd_second<T: Real>(g: &TorusGrid<T>, u: &[f64], axis: usize) -> Vec<f64> {
    const C: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
    let n = g.n();
    let stride = g.stride(axis);
    let h = g.h().as_f64();
    let inv = 1.0 / (h * h);
    (0..u.len())
        .into_par_iter()
        .map(|i| {
            let j = (i / stride) % n;
            let base = i - j * stride;
            let at = |k: isize| u[base + ((j as isize + k).rem_euclid(n as isize) as usize) * stride];
            let mut s = C[0] * u[i];
            for (k, c) in C.iter().enumerate().skip(1) {
                s += c * (at(k as isize) + at(-(k as isize)));
            }
            s * inv
        })
        .collect()
}

/// Kernel evaluation of `A u` with `m` exact image shells.
pub fn kernel_apply<T: Real>(u: &ScalarField<T>, alpha: T, m: usize, tolerance: f64) -> Result<KernelResult<T>> {
    let plan = KernelPlan::new(u.grid(), alpha, m)?;
    let r = plan.apply(u)?;
    if r.tail_bound > tolerance {
        return Err(Error::Truncation { tail_bound: r.tail_bound, tolerance });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_one_dim_matches_riemann() {
        // Σ'_{n∈ℤ} |n|^{-1/2} = 2ζ(1/2)
        let z = epstein_zeta(1, 0.5, 4000.0);
        assert!((z - (-2.920_709_017_619_173_6)).abs() < 1e-9, "{z}");
    }

    #[test]
    fn zeta_two_dim_matches_dirichlet_product() {
        // Σ'_{ℤ²} |n|^{-2s} = 4 ζ(s) β(s); here s = 3/4
        let z = epstein_zeta(2, 1.5, 320.0);
        assert!((z - (-10.077_559_478_793_151)).abs() < 1e-8, "{z}");
    }

    #[test]
    fn cube_exterior_moment_matches_polar_form() {
        // d = 1: ∫_{|z|>1} |z|^{-a} = 2/(a-1)
        assert!((cube_exterior_moment(1, 3.0) - 1.0).abs() < 1e-14);
    }
}
