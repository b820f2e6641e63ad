//! Empirical constants of the Hardy-type inequalities on seeded test families,
//! and the scalar inequalities behind them.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{kappa, nu_of_p, nu_sv, sv_constant};
use crate::error::{Error, Result};
use crate::lyapunov::{cutoff, eta, phi_profile};
use crate::quad::gauss_legendre;
use crate::scalar::Real;
use crate::solver::{eval_modes, random_modes, TOperator};
use crate::spectral::{advect, apply_power, frac_laplacian, heat, ScalarField, TorusGrid, VectorField};

/// How a family member was generated.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "recipe", rename_all = "kebab-case")]
pub enum Recipe {
    /// `exp(w)` for a random trigonometric polynomial `w`.
    BandLimitedPositive { index: usize, kmax: usize, amplitude: f64 },
    /// `e^{-δA} φ_β`.
    MollifiedLyapunov { beta: f64, delta: f64 },
    /// `1 + height · Π_i exp((cos(π(x_i − c_i)/2) − 1)/w²)`.
    ShiftedBump { center: Vec<f64>, width: f64, height: f64 },
}

/// One member: the positive field and its logarithm.
#[derive(Debug, Clone)]
pub struct Member<T: Real> {
    pub recipe: Recipe,
    pub field: ScalarField<T>,
    pub log: ScalarField<T>,
}

/// Recipes of a family. Members are smooth functions of `x` evaluated on the
/// grid, so the same spec gives the same functions on every resolution.
#[derive(Debug, Clone, Serialize)]
pub struct FamilySpec {
    pub band_limited: usize,
    pub kmax: usize,
    pub amplitude: f64,
    /// `(β, δ)` pairs.
    pub lyapunov: Vec<(f64, f64)>,
    /// `(center, width, height)`.
    pub bumps: Vec<(Vec<f64>, f64, f64)>,
}

impl FamilySpec {
    /// 20 band-limited members, two mollified Lyapunov profiles per β and
    /// three off-center bumps.
    pub fn standard(d: usize, betas: &[f64]) -> Self {
        let mut lyapunov = Vec::new();
        for &b in betas {
            lyapunov.push((b, 0.1));
            lyapunov.push((b, 0.01));
        }
        let at = |v: f64, w: f64| {
            let mut c = vec![0.0; d];
            c[0] = v;
            if d > 1 {
                c[1] = w;
            }
            c
        };
        Self {
            band_limited: 20,
            kmax: 2,
            amplitude: 1.0,
            lyapunov,
            bumps: vec![(at(0.75, 0.0), 0.35, 1.0), (at(1.2, 0.6), 0.3, 2.0), (at(-0.5, 1.1), 0.4, 1.5)],
        }
    }

    /// Drops the Lyapunov members with `δ < min_delta`.
    pub fn without_sharp(mut self, min_delta: f64) -> Self {
        self.lyapunov.retain(|&(_, d)| d >= min_delta);
        self
    }
}

/// A seeded family of smooth positive fields.
#[derive(Debug, Clone)]
pub struct TestFamily<T: Real> {
    pub seed: u64,
    pub members: Vec<Member<T>>,
}

impl<T: Real> TestFamily<T> {
    pub fn build(grid: &Arc<TorusGrid<T>>, alpha: T, spec: &FamilySpec, seed: u64) -> Result<Self> {
        let d = grid.dim();
        let mut members = Vec::new();
        for index in 0..spec.band_limited {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(index as u64));
            let modes = random_modes(d, spec.kmax, &mut rng);
            let total: f64 = modes.iter().map(|m| m.1.abs()).sum();
            let scale = spec.amplitude / total;
            let log = ScalarField::from_fn(grid, |x| T::lit(scale * eval_modes(&modes, x)));
            members.push(Member {
                recipe: Recipe::BandLimitedPositive { index, kmax: spec.kmax, amplitude: spec.amplitude },
                field: log.map(|v| v.exp()),
                log,
            });
        }
        for &(beta, delta) in &spec.lyapunov {
            let field = mollified_lyapunov(grid, alpha, T::lit(beta), T::lit(delta))?;
            members.push(Member {
                recipe: Recipe::MollifiedLyapunov { beta, delta },
                log: field.map(|v| v.ln()),
                field,
            });
        }
        for (center, width, height) in &spec.bumps {
            let (c, w, hgt) = (center.clone(), *width, *height);
            let field = ScalarField::from_fn(grid, |x| {
                let e: f64 = x
                    .iter()
                    .zip(&c)
                    .map(|(&xi, ci)| ((std::f64::consts::FRAC_PI_2 * (xi.as_f64() - ci)).cos() - 1.0) / (w * w))
                    .sum();
                T::lit(1.0 + hgt * e.exp())
            });
            members.push(Member {
                recipe: Recipe::ShiftedBump { center: c, width: w, height: hgt },
                log: field.map(|v| v.ln()),
                field,
            });
        }
        Ok(Self { seed, members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `e^{-δA} φ_β`, computed on a finer grid (up to 2^20 points) and
/// restricted to `grid`.
pub fn mollified_lyapunov<T: Real>(grid: &Arc<TorusGrid<T>>, alpha: T, beta: T, delta: T) -> Result<ScalarField<T>> {
    let fine = fine_grid(grid)?;
    let phi = heat(&phi_profile(&fine, beta), alpha, delta)?;
    phi.resample(grid)
}

/// `e^{-δA} ln φ_β`, a bounded field with the logarithmic profile at scales above δ^{1/α}.
pub fn mollified_log_profile<T: Real>(grid: &Arc<TorusGrid<T>>, alpha: T, beta: T, delta: T) -> Result<ScalarField<T>> {
    let fine = fine_grid(grid)?;
    let log = ScalarField::from_radial(&fine, |r| eta(beta, r).ln());
    heat(&log, alpha, delta)?.resample(grid)
}

fn fine_grid<T: Real>(grid: &Arc<TorusGrid<T>>) -> Result<Arc<TorusGrid<T>>> {
    let d = grid.dim() as u32;
    let mut n = grid.n();
    while n < 4 * grid.n() && (2 * n).pow(d) <= 1 << 20 {
        n *= 2;
    }
    if n == grid.n() {
        Ok(grid.clone())
    } else {
        TorusGrid::new(grid.dim(), n)
    }
}

/// `∫_{[0,1]^d} |y|^{-s} dy` for `s < d`.
pub fn unit_cube_moment(d: usize, s: f64) -> f64 {
    if d == 1 {
        return 1.0 / (1.0 - s);
    }
    // pyramids over the faces y_i = 1: ∫ t^{d-1-s} dt · ∫ (1 + |σ|²)^{-s/2} dσ
    let (x, w) = gauss_legendre(24);
    let m = d - 1;
    let mut idx = vec![0usize; m];
    let mut sum = 0.0;
    loop {
        let mut r2 = 1.0;
        let mut wt = 1.0;
        for &i in &idx {
            let v = 0.5 * (x[i] + 1.0);
            r2 += v * v;
            wt *= 0.5 * w[i];
        }
        sum += wt * r2.powf(-0.5 * s);
        let mut k = 0;
        while k < m {
            idx[k] += 1;
            if idx[k] < x.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == m {
            break;
        }
    }
    d as f64 / (d as f64 - s) * sum
}

/// Cell averages of `φ_α` (the cut-off `|x|^{-α}`). The origin is a grid
/// vertex; the cells touching it use the exact moment, the others tensor
/// Gauss–Legendre rules graded by their distance to the origin.
pub fn weight_cell_average<T: Real>(grid: &Arc<TorusGrid<T>>, alpha: T) -> ScalarField<T> {
    let d = grid.dim();
    let h = grid.h().as_f64();
    let a = alpha.as_f64();
    let corner = h.powf(-a) * unit_cube_moment(d, a);
    let (x8, w8) = gauss_legendre(8);
    let (x3, w3) = gauss_legendre(3);
    let values: Vec<T> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut p = vec![T::zero(); d];
            grid.point(i, &mut p);
            let c: Vec<f64> = p.iter().map(|v| v.as_f64()).collect();
            let near = c.iter().map(|v| (v.abs() - 0.5 * h).max(0.0)).map(|v| v * v).sum::<f64>().sqrt();
            if c.iter().all(|v| v.abs() < h) {
                return T::lit(corner);
            }
            let (xs, ws) = if near < 4.0 * h { (&x8, &w8) } else { (&x3, &w3) };
            let far = near > 1.5 + h;
            if far {
                return T::one();
            }
            let q = xs.len();
            let mut idx = vec![0usize; d];
            let mut sum = 0.0;
            loop {
                let mut r2 = 0.0;
                let mut wt = 1.0;
                for k in 0..d {
                    let y = c[k] + 0.5 * h * xs[idx[k]];
                    r2 += y * y;
                    wt *= 0.5 * ws[idx[k]];
                }
                let r = r2.sqrt();
                sum += wt * (-a * cutoff(r) * r.ln()).exp();
                let mut k = 0;
                while k < d {
                    idx[k] += 1;
                    if idx[k] < q {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
            T::lit(sum)
        })
        .collect();
    ScalarField::from_values(grid, values).expect("sized")
}

/// Terms of one empirical-constant evaluation, each divided by the mass term.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    /// Empirical constant, clipped below at zero.
    pub c: f64,
    /// Unclipped value.
    pub raw: f64,
    pub drift: f64,
    pub dispersion: f64,
    /// Relative gap between the direct and integrated-by-parts drift terms.
    pub ibp_gap: f64,
}

fn positive<T: Real>(u: &ScalarField<T>) -> Result<()> {
    if !(u.min() > T::zero()) {
        return Err(Error::Domain("test function must be strictly positive".into()));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("p={p} must exceed 1")));
    }
    Ok(())
}

/// Powers `u^{p-1}`, `u^p` of a positive field after division by its maximum.
fn powers<T: Real>(u: &ScalarField<T>, p: f64) -> (ScalarField<T>, ScalarField<T>, ScalarField<T>) {
    let v = u.scale(u.max().recip());
    let pm1 = v.map(|x| x.powf(T::lit(p - 1.0)));
    let pp = v.map(|x| x.powf(T::lit(p)));
    (v, pm1, pp)
}

/// `p·max(0, κ_{(d−α)/p}⟨φ_α, u^p⟩ − ⟨Au, u^{p−1}⟩)/⟨u^p⟩`; `weight` is
/// [`weight_cell_average`].
pub fn c_schrodinger<T: Real>(u: &ScalarField<T>, alpha: T, p: f64, weight: &ScalarField<T>) -> Result<Estimate> {
    positive(u)?;
    check_p(p)?;
    let d = u.grid().dim();
    let k = kappa(d, alpha.as_f64(), (d as f64 - alpha.as_f64()) / p)?;
    let (v, pm1, pp) = powers(u, p);
    let mass = pp.integral().as_f64();
    let pot = k * weight.inner(&pp)?.as_f64() / mass;
    let disp = frac_laplacian(&v, alpha).inner(&pm1)?.as_f64() / mass;
    let raw = p * (pot - disp);
    Ok(Estimate { c: raw.max(0.0), raw, drift: p * pot, dispersion: p * disp, ibp_gap: 0.0 })
}

/// `p·max(0, ν(p)|⟨q_ε·∇u, u^{p−1}⟩| − ⟨Au, u^{p−1}⟩)/⟨u^p⟩` with
/// `ν(p) = (p/(d−α))κ_{(d−α)/p}`. The drift term is also evaluated as
/// `−(1/p)⟨div q_ε, u^p⟩` with the spectral divergence `div_q`.
pub fn c_kolmogorov<T: Real>(
    u: &ScalarField<T>,
    alpha: T,
    p: f64,
    q: &VectorField<T>,
    div_q: &ScalarField<T>,
) -> Result<Estimate> {
    positive(u)?;
    check_p(p)?;
    let d = u.grid().dim();
    let nu = nu_of_p(d, alpha.as_f64(), p)?;
    let (v, pm1, pp) = powers(u, p);
    let mass = pp.integral().as_f64();
    let direct = advect(q, &v)?.inner(&pm1)?.as_f64();
    let ibp = -div_q.inner(&pp)?.as_f64() / p;
    let drift = nu * direct.abs() / mass;
    let disp = frac_laplacian(&v, alpha).inner(&pm1)?.as_f64() / mass;
    let raw = p * (drift - disp);
    let gap = (direct - ibp).abs() / direct.abs().max(ibp.abs()).max(f64::MIN_POSITIVE);
    Ok(Estimate { c: raw.max(0.0), raw, drift: p * drift, dispersion: p * disp, ibp_gap: gap })
}

/// `max(0, ν(p)|⟨q_ε·∇v, w^{p−1}⟩| − ⟨Av, w^{p−1}⟩)/⟨w^p⟩`, `w = 1 + v/p`.
pub fn c_shifted<T: Real>(v: &ScalarField<T>, alpha: T, p: f64, q: &VectorField<T>) -> Result<Estimate> {
    check_p(p)?;
    let d = v.grid().dim();
    let nu = nu_of_p(d, alpha.as_f64(), p)?;
    let pt = T::lit(p);
    let lw = v.map(|x| (T::one() + x / pt).ln());
    if !lw.is_finite() {
        return Err(Error::Domain(format!("1 + v/p must be positive on the grid (p={p})")));
    }
    let m = lw.max() * pt;
    let pm1 = lw.map(|l| (l * (pt - T::one()) - m).exp());
    let pp = lw.map(|l| (l * pt - m).exp());
    let mass = pp.integral().as_f64();
    let drift = nu * advect(q, v)?.inner(&pm1)?.as_f64().abs() / mass;
    let disp = frac_laplacian(v, alpha).inner(&pm1)?.as_f64() / mass;
    let raw = drift - disp;
    Ok(Estimate { c: raw.max(0.0), raw, drift, dispersion: disp, ibp_gap: 0.0 })
}

/// Exponential form with its `sinh`/`cosh` companion.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpEstimate {
    pub exp: Estimate,
    /// `max(0, |⟨b·∇u, sinh u⟩| − ⟨Au, sinh u⟩)/⟨cosh u⟩`.
    pub sinh_c: f64,
}

/// `max(0, |⟨b_ε·∇u, e^u⟩| − ⟨Au, e^u⟩)/⟨e^u⟩`.
pub fn c_exponential<T: Real>(u: &ScalarField<T>, alpha: T, b: &VectorField<T>) -> Result<ExpEstimate> {
    let m = u.max();
    let e = u.map(|x| (x - m).exp());
    let mass = e.integral().as_f64();
    let bu = advect(b, u)?;
    let au = frac_laplacian(u, alpha);
    let drift = bu.inner(&e)?.as_f64().abs() / mass;
    let disp = au.inner(&e)?.as_f64() / mass;
    let raw = drift - disp;
    // sinh u = (e^u − e^{−u})/2, scaled by e^{−M} with M = max|u|
    let big = u.norm_inf();
    let sh = u.map(|x| ((x - big).exp() - (-x - big).exp()) * T::lit(0.5));
    let ch = u.map(|x| ((x - big).exp() + (-x - big).exp()) * T::lit(0.5));
    let cmass = ch.integral().as_f64();
    let s_raw = (bu.inner(&sh)?.as_f64().abs() - au.inner(&sh)?.as_f64()) / cmass;
    Ok(ExpEstimate {
        exp: Estimate { c: raw.max(0.0), raw, drift, dispersion: disp, ibp_gap: 0.0 },
        sinh_c: s_raw.max(0.0),
    })
}

/// A posteriori form evaluated through `T`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Posteriori {
    /// `⟨A^{α/4}u, A^{α/4}e^u⟩ + c⟨e^u⟩ − |⟨T(λ+A)^{1/2}u, (λ+A)^{1/2}e^u⟩|`, divided by `⟨e^u⟩`.
    pub margin: f64,
    /// Relative gap between the `T` form and the direct `⟨b·∇u, e^u⟩`.
    pub t_gap: f64,
}

pub fn c_posteriori<T: Real>(
    u: &ScalarField<T>,
    alpha: T,
    lambda: T,
    lambda_min: f64,
    b: &VectorField<T>,
    c: f64,
) -> Result<Posteriori> {
    if lambda.as_f64() < lambda_min {
        return Err(Error::Domain(format!("lambda={lambda} below the threshold {lambda_min}")));
    }
    let m = u.max();
    let e = u.map(|x| (x - m).exp());
    let mass = e.integral().as_f64();
    let t = TOperator::new(lambda, alpha, b.clone())?;
    let tu = t.apply(&apply_power(u, alpha, T::lit(0.5), lambda)?)?;
    let t_form = tu.inner(&apply_power(&e, alpha, T::lit(0.5), lambda)?)?.as_f64();
    let direct = advect(b, u)?.inner(&e)?.as_f64();
    let quarter = T::lit(0.5);
    let form = apply_power(u, alpha, quarter, T::zero())?
        .inner(&apply_power(&e, alpha, quarter, T::zero())?)?
        .as_f64();
    let margin = (form + c * mass - t_form.abs()) / mass;
    let t_gap = (t_form - direct).abs() / direct.abs().max(mass * 1e-300);
    Ok(Posteriori { margin, t_gap })
}

/// `F_p(a, b) = |b|^p − |a|^p − p|a|^{p−2}a(b − a)`.
pub fn bregman(a: f64, b: f64, p: f64) -> f64 {
    let ap = a.abs().powf(p);
    let slope = if a == 0.0 { 0.0 } else { p * a.abs().powf(p - 1.0) * a.signum() };
    b.abs().powf(p) - ap - slope * (b - a)
}

/// Minimum of `F_p(a,b)/(|b|^p + |a|^p + p|a|^{p−1}|b−a|)` over random
/// `a, b ∈ [−2, 2]`, `p ∈ (1, 64]`.
pub fn bregman_sweep(samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let a: f64 = rng.gen_range(-2.0..2.0);
        let b: f64 = rng.gen_range(-2.0..2.0);
        let p: f64 = 1.0 + rng.gen_range(f64::EPSILON..63.0);
        let scale = b.abs().powf(p) + a.abs().powf(p) + p * a.abs().powf(p - 1.0) * (b - a).abs();
        if scale > 0.0 {
            worst = worst.min(bregman(a, b, p) / scale);
        }
    }
    worst
}

/// Margins of the three scalar inequalities with `φ(u) = 2 sinh u`,
/// `G(u) = 2 sinh(u/2)`, `c_φ = 2`, each divided by `1 +` its left side.
/// The third inequality is evaluated at `t`.
pub fn sv_scalar(t: f64, s: f64) -> [f64; 3] {
    let phi = |u: f64| 2.0 * u.sinh();
    let g = |u: f64| 2.0 * (0.5 * u).sinh();
    let l1 = 0.5 * (t - s) * (phi(t) - phi(s));
    let l2 = 0.5 * (t + s) * (phi(t) + phi(s));
    let l3 = 0.5 * t * phi(t);
    let r1 = (g(t) - g(s)).powi(2);
    let r2 = (g(t) + g(s)).powi(2);
    let r3 = g(t).powi(2);
    [(l1 - r1) / (1.0 + l1), (l2 - r2) / (1.0 + l2), (l3 - r3) / (1.0 + l3)]
}

/// Componentwise minimum of [`sv_scalar`] over random pairs in `[0, 50]²`.
pub fn sv_sweep(samples: usize, seed: u64) -> [f64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [f64::INFINITY; 3];
    for _ in 0..samples {
        let t: f64 = rng.gen_range(0.0..50.0);
        let s: f64 = rng.gen_range(0.0..50.0);
        let m = sv_scalar(t, s);
        for k in 0..3 {
            worst[k] = worst[k].min(m[k]);
        }
    }
    worst
}

/// The functional inequality `⟨Au, sinh u⟩ ≥ 8⟨|A^{1/2}_{α/2} sinh(u/2)|²⟩`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Sv2 {
    /// `⟨Au, sinh u⟩ − 8⟨|(−Δ)^{α/4} sinh(u/2)|²⟩`.
    pub margin_8: f64,
    /// `⟨Au, sinh u⟩ / ⟨|(−Δ)^{α/4} sinh(u/2)|²⟩`; `+∞` for constant `u`.
    pub best_constant: f64,
}

pub fn sv2_margin<T: Real>(u: &ScalarField<T>, alpha: T) -> Result<Sv2> {
    let sh = u.map(|x| x.sinh());
    let half = u.map(|x| (x * T::lit(0.5)).sinh());
    let lhs = frac_laplacian(u, alpha).inner(&sh)?.as_f64();
    let den = frac_laplacian(&half, alpha).inner(&half)?.as_f64();
    let best = if den > 0.0 { lhs / den } else { f64::INFINITY };
    Ok(Sv2 { margin_8: lhs - 8.0 * den, best_constant: best })
}

/// One row of the constant comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComparisonRow {
    pub p: f64,
    /// `4(p−1)/p² · κ_{(d−α)/2}`.
    pub sv_kappa: f64,
    /// `κ_{(d−α)/p}`.
    pub kappa_p: f64,
    pub nu_p: f64,
    /// `p/(d−α) · 4(p−1)/p² · κ_{(d−α)/2}`.
    pub nu_sv_route: f64,
}

/// Rows over a p-grid; fails unless the SV column is strictly below κ_{(d−α)/p}
/// away from `p = 2`.
pub fn constant_comparison(d: usize, alpha: f64, ps: &[f64]) -> Result<Vec<ComparisonRow>> {
    if !(alpha < 2.0) {
        return Err(Error::Params(format!("constant comparison needs alpha < 2, got {alpha}")));
    }
    let gap = d as f64 - alpha;
    let k2 = kappa(d, alpha, gap / 2.0)?;
    let mut rows = Vec::with_capacity(ps.len());
    for &p in ps {
        let sv = sv_constant(p)? * k2;
        let kp = kappa(d, alpha, gap / p)?;
        let row = ComparisonRow { p, sv_kappa: sv, kappa_p: kp, nu_p: nu_of_p(d, alpha, p)?, nu_sv_route: p / gap * sv };
        if (p - 2.0).abs() > 1e-9 && !(sv < kp) {
            return Err(Error::Tolerance(format!("SV column not strictly smaller at p={p}: {sv} vs {kp}")));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// `ν_SV` against the supremum of the SV-route column (attained as p → ∞).
pub fn sv_route_limit(d: usize, alpha: f64) -> Result<(f64, f64)> {
    let gap = d as f64 - alpha;
    let k2 = kappa(d, alpha, gap / 2.0)?;
    let p = 1e12;
    Ok((nu_sv(d, alpha)?, p / gap * sv_constant(p)? * k2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bregman_values() {
        assert_eq!(bregman(1.0, 1.0, 3.0), 0.0);
        assert_eq!(bregman(0.0, 1.0, 2.0), 1.0);
        assert!(bregman(0.5, 1.5, 2.5) > 0.0);
    }

    #[test]
    fn sv_scalar_values() {
        let m = sv_scalar(0.7, 0.7);
        assert_eq!(m[0], 0.0);
        let e = std::f64::consts::E;
        let expect = 0.5 * (e - 1.0 / e) - (e.sqrt() - 1.0 / e.sqrt()).powi(2);
        let l3 = 0.5 * (e - 1.0 / e);
        assert!((sv_scalar(1.0, 0.0)[2] * (1.0 + l3) - expect).abs() < 1e-15);
    }

    #[test]
    fn cube_moment() {
        // ∫_{[0,1]^2} |y|^{-1} = 2 ln(1 + √2)
        let v = unit_cube_moment(2, 1.0);
        assert!((v - 2.0 * (1.0 + 2f64.sqrt()).ln()).abs() < 1e-13);
        assert!((unit_cube_moment(3, 0.0) - 1.0).abs() < 1e-14);
        assert!((unit_cube_moment(1, 0.5) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sv_route_column_supremum() {
        let (a, b) = sv_route_limit(2, 1.5).unwrap();
        assert!((a / b - 1.0).abs() < 1e-10);
    }
}
