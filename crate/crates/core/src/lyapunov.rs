//! Torus Lyapunov functions `φ_β`, the remainder `g_β = φ̃_β - |·|^{-β}`, the
//! singular drift `q = x/|x|^α` (and `b = ν⋆ q`) and its heat-semigroup
//! mollification.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{check_model, kappa, nu_star};
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, integrate, plateau, plateau_deriv};
use crate::scalar::Real;
use crate::spectral::{divergence, ScalarField, TorusGrid, VectorField};

/// Cutoff `a(t)`: 1 on `(0, 1]`, 0 on `[3/2, 2)`, smooth in between.
pub fn cutoff<T: Real>(t: T) -> T {
    plateau(t, T::one(), T::lit(1.5))
}

/// `η_β(t) = t^{-β a(t)}`, equal to 1 for `t ≥ 3/2`.
pub fn eta<T: Real>(beta: T, t: T) -> T {
    let a = cutoff(t);
    if a == T::zero() || beta == T::zero() {
        T::one()
    } else {
        (-beta * a * t.ln()).exp()
    }
}

/// Sampled `φ_β` with its lower bound.
#[derive(Debug, Clone)]
pub struct LyapunovField<T: Real> {
    pub beta: T,
    pub field: ScalarField<T>,
    /// `(3/2)^{-(d-α)}`, a lower bound for every admissible β.
    pub c0: T,
}

/// `φ_β` on the grid without a range check on β (any `β ≥ 0`).
pub fn phi_profile<T: Real>(grid: &Arc<TorusGrid<T>>, beta: T) -> ScalarField<T> {
    ScalarField::from_radial(grid, |r| eta(beta, r))
}

/// `φ_β` for `0 ≤ β < d − α`.
pub fn make_phi<T: Real>(grid: &Arc<TorusGrid<T>>, alpha: T, beta: T) -> Result<LyapunovField<T>> {
    let d = grid.dim();
    check_model(d, alpha)?;
    let gap = T::from_usize_lossy(d) - alpha;
    if !(beta >= T::zero() && beta < gap) {
        return Err(Error::Domain(format!("beta={beta} outside [0, d-alpha) = [0, {gap})")));
    }
    Ok(LyapunovField { beta, field: phi_profile(grid, beta), c0: T::lit(1.5).powf(-gap) })
}

/// `φ̃_β(y)` for any `y ∈ ℝ^d` (periodic extension).
pub fn phi_periodic(beta: f64, y: &[f64]) -> f64 {
    let r2: f64 = y
        .iter()
        .map(|&v| {
            let w = v - 4.0 * (v / 4.0).round();
            w * w
        })
        .sum();
    eta(beta, r2.sqrt())
}

/// Bounds on `g_β`.
#[derive(Debug, Clone, Serialize)]
pub struct GBounds {
    pub beta: f64,
    /// Sampled sup of `|g_β|` over `(8/7)Q`.
    pub sup_87q: f64,
    /// Closed form `1 - ((16/7)√d)^{-β}`.
    pub sup_closed_form: f64,
    /// `(m, ‖g_β‖_{L¹(Q+m)})` for `m ∈ 4ℤ^d \ {0}`, `|m|_∞ ≤ 8`.
    pub l1_cells: Vec<(Vec<i64>, f64)>,
}

/// Sup and per-cell L¹ bounds on `g_β` in dimension `d`.
///
/// The sup is taken over a tensor sample of `(8/7)Q` that contains its
/// corners; the L¹ norms use adaptive cubature with the `|y|^{-β}`
/// singularity inside `B_1` integrated in closed form.
pub fn g_bounds(d: usize, alpha: f64, beta: f64, samples: usize) -> Result<GBounds> {
    check_model(d, alpha)?;
    if !(beta >= 0.0 && beta < d as f64 - alpha) {
        return Err(Error::Domain(format!("beta={beta} outside [0, d-alpha)")));
    }
    let closed = 1.0 - (16.0 / 7.0 * (d as f64).sqrt()).powf(-beta);
    if beta == 0.0 {
        let cells = lattice_cells(d).into_iter().map(|m| (m, 0.0)).collect();
        return Ok(GBounds { beta, sup_87q: 0.0, sup_closed_form: 0.0, l1_cells: cells });
    }
    let k = samples.max(2);
    let side = 16.0 / 7.0;
    let axis: Vec<f64> = (0..=k).map(|i| -side + 2.0 * side * i as f64 / k as f64).collect();
    let total = (k + 1).pow(d as u32);
    let sup = (0..total)
        .into_par_iter()
        .map(|mut i| {
            let mut y = vec![0.0; d];
            for v in y.iter_mut() {
                *v = axis[i % (k + 1)];
                i /= k + 1;
            }
            let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r <= 1.0 {
                0.0
            } else {
                (phi_periodic(beta, &y) - r.powf(-beta)).abs()
            }
        })
        .reduce(|| 0.0, f64::max);
    let l1_cells = lattice_cells(d)
        .into_par_iter()
        .map(|m| {
            let v = cell_l1(d, beta, &m);
            (m, v)
        })
        .collect();
    Ok(GBounds { beta, sup_87q: sup, sup_closed_form: closed, l1_cells })
}

fn lattice_cells(d: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let total = 5usize.pow(d as u32);
    for mut i in 0..total {
        let m: Vec<i64> = (0..d)
            .map(|_| {
                let v = (i % 5) as i64 * 4 - 8;
                i /= 5;
                v
            })
            .collect();
        if m.iter().any(|&v| v != 0) {
            out.push(m);
        }
    }
    out
}

fn sphere_area(d: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / crate::constants::gamma(d as f64 / 2.0).expect("d >= 1")
}

/// `‖φ_β - |· + m|^{-β}‖_{L¹(Q)}`.
///
/// On `Q` one has `φ_β ≥ (3/2)^{-β} > 2^{-β} ≥ |y + m|^{-β}`, so the norm is
/// `∫_Q (φ_β - 1) + ∫_Q (1 - |y + m|^{-β})`: a radial integral independent of
/// `m` plus a smooth one.
fn cell_l1(d: usize, beta: f64, m: &[i64]) -> f64 {
    let df = d as f64;
    let inner = 1.0 / (df - beta) - 1.0 / df;
    let annulus = integrate(|r| (eta(beta, r) - 1.0) * r.powi(d as i32 - 1), 1.0, 1.5, 20, 8);
    let radial = sphere_area(d) * (inner + annulus);
    let (x, w) = gauss_legendre(12);
    // 4 panels per axis on (-2, 2)
    let nodes: Vec<(f64, f64)> = (0..4)
        .flat_map(|p| {
            let mid = -1.5 + p as f64;
            x.iter().zip(&w).map(move |(&x, &w)| (mid + 0.5 * x, 0.5 * w))
        })
        .collect();
    let total = nodes.len().pow(d as u32);
    let smooth: f64 = (0..total)
        .into_par_iter()
        .map(|mut i| {
            let mut wt = 1.0;
            let mut r2 = 0.0;
            for &k in m {
                let (y, wy) = nodes[i % nodes.len()];
                i /= nodes.len();
                wt *= wy;
                r2 += (y + k as f64).powi(2);
            }
            wt * (1.0 - r2.powf(-beta / 2.0))
        })
        .sum();
    radial + smooth
}

/// The singular drift and its mollification.
#[derive(Debug, Clone)]
pub struct DriftSet<T: Real> {
    pub alpha: T,
    pub nu_star: T,
    /// `q = χ(|x|) x/|x|^α`.
    pub q: VectorField<T>,
    /// `b = ν⋆ q`.
    pub b: VectorField<T>,
    pub epsilon: T,
    /// Mollifier index, `min(2, d - α)` by default.
    pub alpha1: T,
    pub q_eps: VectorField<T>,
    pub b_eps: VectorField<T>,
    /// Analytic `div q` at the samples.
    pub div_q: ScalarField<T>,
    /// `div q_ε = E_ε div q`, the mollified analytic divergence.
    pub div_q_eps: ScalarField<T>,
}

/// Default mollifier index `min(2, d − α)`.
pub fn default_alpha1<T: Real>(d: usize, alpha: T) -> T {
    (T::from_usize_lossy(d) - alpha).min(T::lit(2.0))
}

/// Drift profile: `q(x) = χ(|x|) x/|x|^α`, χ = 1 on `[0,1]`, 0 past `3/2`.
pub fn drift_profile<T: Real>(alpha: T, x: &[T], out: &mut [T]) {
    let r = x.iter().map(|&v| v * v).sum::<T>().sqrt();
    let w = cutoff(r) * r.powf(-alpha);
    for (o, &v) in out.iter_mut().zip(x) {
        *o = w * v;
    }
}

/// `div q = χ'(r) r^{1-α} + (d - α) χ(r) r^{-α}`.
pub fn drift_divergence<T: Real>(d: usize, alpha: T, r: T) -> T {
    let one = T::one();
    let lo = T::lit(1.5);
    (T::from_usize_lossy(d) - alpha) * plateau(r, one, lo) * r.powf(-alpha)
        + plateau_deriv(r, one, lo) * r.powf(one - alpha)
}

/// The unmollified drift set (ε = 0).
pub fn make_drift<T: Real>(grid: &Arc<TorusGrid<T>>, alpha: T) -> Result<DriftSet<T>> {
    let d = grid.dim();
    let ns = nu_star(d, alpha)?;
    let q = VectorField::from_fn(grid, |x, out| drift_profile(alpha, x, out));
    let b = q.scale(ns);
    let div_q = ScalarField::from_radial(grid, |r| drift_divergence(d, alpha, r));
    let div_q_eps = div_q.clone();
    Ok(DriftSet {
        alpha,
        nu_star: ns,
        b: b.clone(),
        q: q.clone(),
        epsilon: T::zero(),
        alpha1: default_alpha1(d, alpha),
        q_eps: q,
        b_eps: b,
        div_q,
        div_q_eps,
    })
}

/// `e^{-t(-Δ)^{α₁/2}}` applied to a scalar field.
pub fn heat_index<T: Real>(u: &ScalarField<T>, alpha1: T, t: T) -> ScalarField<T> {
    if t == T::zero() {
        return u.clone();
    }
    u.multiply_radial(|xi| (-t * xi.powf(alpha1)).exp())
}

impl<T: Real> DriftSet<T> {
    /// `q_ε = e^{-ε(-Δ)^{α₁/2}} q` with the default α₁.
    pub fn mollify(&self, epsilon: T) -> Result<Self> {
        self.mollify_with(epsilon, self.alpha1)
    }

    pub fn mollify_with(&self, epsilon: T, alpha1: T) -> Result<Self> {
        if !(epsilon >= T::zero()) {
            return Err(Error::Domain(format!("epsilon={epsilon} must be nonnegative")));
        }
        if !(alpha1 > T::zero() && alpha1 <= T::lit(2.0)) {
            return Err(Error::Domain(format!("alpha1={alpha1} must lie in (0, 2]")));
        }
        let q_eps = self.q.map_components(|c| heat_index(c, alpha1, epsilon));
        let b_eps = q_eps.scale(self.nu_star);
        let div_q_eps = heat_index(&self.div_q, alpha1, epsilon);
        Ok(Self { epsilon, alpha1, b_eps, div_q_eps, q_eps, ..self.clone() })
    }

    /// Same set with the drift coefficient replaced by `nu` (`b = nu q`).
    pub fn with_coupling(&self, nu: T) -> Self {
        Self { b: self.q.scale(nu), b_eps: self.q_eps.scale(nu), nu_star: nu, ..self.clone() }
    }

    pub fn grid(&self) -> &Arc<TorusGrid<T>> {
        self.q.grid()
    }

    /// Spectral divergence of `q_ε`, the discrete adjoint of `q_ε · ∇`.
    pub fn spectral_div_q_eps(&self) -> ScalarField<T> {
        divergence(&self.q_eps)
    }
}

/// Domination constants of the mollified drift.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Domination {
    pub epsilon: f64,
    /// `max (div q_ε - div q)`.
    pub div_constant: f64,
    /// `max (|q_ε| - |q|)`.
    pub magnitude_constant: f64,
    /// `max |q_ε - q|` over samples with `|x| ≥ 1/2`.
    pub smooth_region_error: f64,
}

pub fn domination<T: Real>(ds: &DriftSet<T>) -> Result<Domination> {
    let div = ds.div_q_eps.sub(&ds.div_q)?.max().as_f64();
    let mag = ds.q_eps.magnitude().sub(&ds.q.magnitude())?.max().as_f64();
    let grid = ds.grid();
    let diff = ds.q_eps.sub(&ds.q)?.magnitude();
    let smooth = (0..grid.len())
        .filter(|&i| grid.radius(i) >= T::lit(0.5))
        .map(|i| diff.values()[i].as_f64())
        .fold(0.0, f64::max);
    Ok(Domination { epsilon: ds.epsilon.as_f64(), div_constant: div, magnitude_constant: mag, smooth_region_error: smooth })
}

/// Supermedian margin `e^{-εA_{α₁}} φ_β − φ_β`.
#[derive(Debug, Clone)]
pub struct Supermedian<T: Real> {
    pub margin: ScalarField<T>,
    /// Smallest `C₃ ≥ 0` with `e^{-εA_{α₁}}φ_β ≤ φ_β + C₃`.
    pub c3: T,
    /// Same constant restricted to `|x| ≥ 1/2`.
    pub c3_away: T,
}

/// Requires `0 ≤ β < d`, so that `φ_β` is integrable.
pub fn check_supermedian<T: Real>(
    grid: &Arc<TorusGrid<T>>,
    beta: T,
    epsilon: T,
    alpha1: T,
) -> Result<Supermedian<T>> {
    let d = T::from_usize_lossy(grid.dim());
    if !(beta >= T::zero() && beta < d) {
        return Err(Error::Domain(format!("beta={beta} outside [0, d)")));
    }
    if !(epsilon >= T::zero()) || !(alpha1 > T::zero() && alpha1 <= T::lit(2.0)) {
        return Err(Error::Domain("need epsilon >= 0 and alpha1 in (0, 2]".into()));
    }
    let phi = phi_profile(grid, beta);
    let smoothed = heat_index(&phi, alpha1, epsilon);
    let margin = smoothed.sub(&phi)?;
    let c3 = margin.max().max(T::zero());
    let c3_away = (0..grid.len())
        .filter(|&i| grid.radius(i) >= T::lit(0.5))
        .map(|i| margin.values()[i])
        .fold(T::zero(), |a, b| a.max(b));
    Ok(Supermedian { margin, c3, c3_away })
}

/// Outcome of comparing `Aφ_β` with `κ_β |x|^{-α} φ_β`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RieszCheck {
    pub beta: f64,
    pub n: usize,
    pub window: (f64, f64),
    pub samples: usize,
    /// `max |Aφ_β − κ_β|x|^{-α}φ_β| / (κ_β|x|^{-α}φ_β)` on the window.
    pub max_relative: f64,
    /// Same deviation without the division (for β → 0).
    pub max_absolute: f64,
    /// Relative deviation after removing a least-squares fit `c₀ + c₂|x|²`
    /// of the residual, the leading part of the smooth torus correction `A g_β`.
    pub max_relative_smooth_removed: f64,
    pub smooth_fit: (f64, f64),
}

/// Compares the spectral `Aφ_β` with the ℝ^d identity on the annulus
/// `[4h, 1/4]`, or on `window` when given.
pub fn riesz_eigen_check<T: Real>(
    grid: &Arc<TorusGrid<T>>,
    alpha: T,
    beta: T,
    window: Option<(f64, f64)>,
) -> Result<RieszCheck> {
    let d = grid.dim();
    let phi = make_phi(grid, alpha, beta)?;
    let k = kappa(d, alpha, beta)?;
    let a_phi = crate::spectral::frac_laplacian(&phi.field, alpha);
    let h = grid.h().as_f64();
    let (lo, hi) = window.unwrap_or((4.0 * h, 0.25));
    let mut worst = (0.0f64, 0.0f64);
    // (r², target, residual)
    let mut rows = Vec::new();
    for i in 0..grid.len() {
        let r = grid.radius(i).as_f64();
        if r < lo || r > hi {
            continue;
        }
        let target = k.as_f64() * r.powf(-alpha.as_f64()) * phi.field.values()[i].as_f64();
        let res = a_phi.values()[i].as_f64() - target;
        worst.1 = worst.1.max(res.abs());
        if target != 0.0 {
            worst.0 = worst.0.max(res.abs() / target.abs());
        }
        rows.push((r * r, target, res));
    }
    let count = rows.len();
    if count == 0 {
        return Err(Error::Domain(format!("window [{lo}, {hi}] contains no samples at N={}", grid.n())));
    }
    // normal equations for res ≈ c0 + c2 r²
    let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, _, y) in &rows {
        s0 += 1.0;
        s1 += x;
        s2 += x * x;
        t0 += y;
        t1 += x * y;
    }
    let det = s0 * s2 - s1 * s1;
    let (c0, c2) = if det.abs() > 1e-300 {
        ((t0 * s2 - t1 * s1) / det, (s0 * t1 - s1 * t0) / det)
    } else {
        (t0 / s0, 0.0)
    };
    let smooth_removed = rows
        .iter()
        .filter(|r| r.1 != 0.0)
        .map(|&(x, t, y)| (y - c0 - c2 * x).abs() / t.abs())
        .fold(0.0, f64::max);
    Ok(RieszCheck {
        beta: beta.as_f64(),
        n: grid.n(),
        window: (lo, hi),
        samples: count,
        max_relative: worst.0,
        max_absolute: worst.1,
        max_relative_smooth_removed: smooth_removed,
        smooth_fit: (c0, c2),
    })
}

/// `|κ_{d−γ} − ν(γ−α)|` for `γ = γ(ν)`: the constants-level form of
/// `Λ*_ν |·|^{-d+γ} = 0`.
pub fn adjoint_identity_residual(d: usize, alpha: f64, nu: f64) -> Result<f64> {
    Ok(crate::constants::gamma_exponent(d, alpha, nu)?.residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_plateaus() {
        assert_eq!(cutoff(0.5_f64), 1.0);
        assert_eq!(cutoff(1.0_f64), 1.0);
        assert_eq!(cutoff(1.5_f64), 0.0);
        assert_eq!(cutoff(1.9_f64), 0.0);
        assert!(cutoff(1.25_f64) > 0.0 && cutoff(1.25_f64) < 1.0);
    }

    #[test]
    fn phi_zero_is_one() {
        let g = TorusGrid::<f64>::new(2, 16).unwrap();
        let p = make_phi(&g, 1.5, 0.0).unwrap();
        assert!(p.field.values().iter().all(|&v| v == 1.0));
        assert!(make_phi(&g, 1.5, 0.5).is_err());
    }

    #[test]
    fn drift_divergence_inside_unit_ball() {
        let r = 0.3_f64;
        let expect = 0.5 * r.powf(-1.5);
        assert!((drift_divergence(2, 1.5, r) - expect).abs() < 1e-14 * expect);
        // finite-difference check of the radial formula past r = 1
        let (d, a) = (3usize, 1.5_f64);
        let r = 1.2;
        let e = 1e-5;
        let f = |r: f64| cutoff(r) * r.powf(1.0 - a) * r.powi(d as i32 - 1);
        let fd = (f(r + e) - f(r - e)) / (2.0 * e) / r.powi(d as i32 - 1);
        assert!((fd - drift_divergence(d, a, r)).abs() < 1e-7);
    }

    #[test]
    fn supermedian_rejects_bad_beta() {
        let g = TorusGrid::<f64>::new(2, 8).unwrap();
        assert!(check_supermedian(&g, 2.0, 0.1, 0.5).is_err());
    }
}
