//! The bounded operator `T`, the elliptic problem `(λ + A + b·∇)u = f` and the
//! parabolic evolution `∂_t v + A v + b·∇v = 0`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::orlicz::{modular, orlicz_norm};
use crate::scalar::Real;
use crate::spectral::{
    advect, apply_power, dealias, divergence, frac_laplacian, heat, ScalarField, TorusGrid, VectorField,
};

/// `T = (λ+A)^{-1/2} b·∇ (λ+A)^{-1/2}` for a fixed drift field.
#[derive(Debug, Clone)]
pub struct TOperator<T: Real> {
    pub lambda: T,
    pub alpha: T,
    pub drift: VectorField<T>,
}

/// Power-iteration estimate of an operator norm.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormEstimate {
    pub norm: f64,
    pub iterations: usize,
    /// Relative change over the last iteration of the best restart.
    pub settle: f64,
    pub converged: bool,
}

impl<T: Real> TOperator<T> {
    pub fn new(lambda: T, alpha: T, drift: VectorField<T>) -> Result<Self> {
        if !(lambda > T::zero()) {
            return Err(Error::Domain(format!("lambda={lambda} must be positive")));
        }
        Ok(Self { lambda, alpha, drift })
    }

    pub fn grid(&self) -> &Arc<TorusGrid<T>> {
        self.drift.grid()
    }

    fn resolvent_root(&self, u: &ScalarField<T>) -> Result<ScalarField<T>> {
        apply_power(u, self.alpha, T::lit(-0.5), self.lambda)
    }

    /// `T w`.
    pub fn apply(&self, w: &ScalarField<T>) -> Result<ScalarField<T>> {
        let v = self.resolvent_root(w)?;
        self.resolvent_root(&advect(&self.drift, &v)?)
    }

    /// `T* w = -(λ+A)^{-1/2} div(b (λ+A)^{-1/2} w)`.
    pub fn adjoint(&self, w: &ScalarField<T>) -> Result<ScalarField<T>> {
        let v = self.resolvent_root(w)?;
        let flux = VectorField::new(
            self.drift.components().iter().map(|b| b.mul(&v)).collect::<Result<Vec<_>>>()?,
        )?;
        Ok(self.resolvent_root(&divergence(&flux))?.scale(-T::one()))
    }

    /// Largest singular value by power iteration on `T*T`.
    pub fn norm(&self, iterations: usize, restarts: usize, seed: u64) -> Result<NormEstimate> {
        let grid = self.grid().clone();
        let mut best = NormEstimate { norm: 0.0, iterations: 0, settle: f64::INFINITY, converged: false };
        for r in 0..restarts.max(1) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            let mut w = smooth_random(&grid, &mut rng, 8);
            let n0 = w.norm_l2();
            w = w.scale(n0.recip());
            let mut sigma = 0.0;
            let mut settle = f64::INFINITY;
            let mut it = 0;
            while it < iterations {
                it += 1;
                let z = self.adjoint(&self.apply(&w)?)?;
                let nz = z.norm_l2().as_f64();
                if nz == 0.0 {
                    sigma = 0.0;
                    settle = 0.0;
                    break;
                }
                let s = nz.sqrt();
                settle = ((s - sigma) / s).abs();
                sigma = s;
                w = z.scale(T::lit(nz.recip()));
                if settle < 1e-8 {
                    break;
                }
            }
            if sigma > best.norm || r == 0 {
                best = NormEstimate { norm: sigma, iterations: it, settle, converged: settle < 1e-8 };
            }
        }
        Ok(best)
    }
}

/// Random smooth field with modes `|k|_∞ ≤ kmax` and decaying amplitudes.
pub fn smooth_random<T: Real, R: Rng>(grid: &Arc<TorusGrid<T>>, rng: &mut R, kmax: usize) -> ScalarField<T> {
    let d = grid.dim();
    let modes = random_modes(d, kmax, rng);
    ScalarField::from_fn(grid, |x| T::lit(eval_modes(&modes, x)))
}

/// Terms `(k, amplitude, phase)` of a random trigonometric polynomial.
pub(crate) fn random_modes<R: Rng>(d: usize, kmax: usize, rng: &mut R) -> Vec<(Vec<f64>, f64, f64)> {
    let side = 2 * kmax + 1;
    let total = side.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rest = idx;
        let k: Vec<f64> = (0..d)
            .map(|_| {
                let c = (rest % side) as f64 - kmax as f64;
                rest /= side;
                c
            })
            .collect();
        let k2: f64 = k.iter().map(|v| v * v).sum();
        let amp: f64 = rng.gen_range(-1.0..1.0) / (1.0 + k2);
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        out.push((k, amp, phase));
    }
    out
}

pub(crate) fn eval_modes<T: Real>(modes: &[(Vec<f64>, f64, f64)], x: &[T]) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    modes
        .iter()
        .map(|(k, a, ph)| {
            let arg: f64 = k.iter().zip(x).map(|(k, x)| k * x.as_f64()).sum::<f64>() * half_pi + ph;
            a * arg.cos()
        })
        .sum()
}

/// Smallest dyadic `λ ∈ [1, 2^20]` with `‖ |b| (λ+A)^{-1+1/α} ‖ ≤ bound`.
pub fn lambda_threshold<T: Real>(drift: &VectorField<T>, alpha: T, bound: f64) -> Result<f64> {
    let mag = drift.magnitude();
    let grid = drift.grid().clone();
    let s = T::one() / alpha - T::one();
    let mut lambda = 1.0;
    for _ in 0..=20 {
        let l = T::lit(lambda);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut w = smooth_random(&grid, &mut rng, 8);
        w = w.scale(w.norm_l2().recip());
        let mut sigma = 0.0;
        for _ in 0..60 {
            let z = mag.mul(&apply_power(&w, alpha, s, l)?)?;
            let z = apply_power(&mag.mul(&z)?, alpha, s, l)?;
            let nz = z.norm_l2().as_f64();
            if nz == 0.0 {
                break;
            }
            let next = nz.sqrt();
            let done = ((next - sigma) / next).abs() < 1e-6;
            sigma = next;
            w = z.scale(T::lit(nz.recip()));
            if done {
                break;
            }
        }
        if sigma <= bound {
            return Ok(lambda);
        }
        lambda *= 2.0;
    }
    Err(Error::NonConvergence(format!("no lambda up to 2^20 brings the composition norm below {bound}")))
}

/// The a priori quantities of a solved instance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Apriori {
    /// `λ ‖u‖_∞ / ‖f‖_∞`.
    pub sup_ratio: f64,
    /// `λ⟨u²⟩ + ⟨|A^{1/4}u|²⟩`.
    pub energy_lhs: f64,
    /// `‖f‖_∞² / λ²`.
    pub energy_rhs: f64,
}

impl Apriori {
    /// Empirical constant of the energy bound.
    pub fn energy_constant(&self) -> f64 {
        self.energy_lhs / self.energy_rhs
    }
}

/// Outcome of an elliptic solve.
#[derive(Debug, Clone)]
pub struct SolveResult<T: Real> {
    pub u: ScalarField<T>,
    /// `‖(λ + A + b·∇)u − f‖₂ / ‖f‖₂`.
    pub residual: f64,
    pub iterations: usize,
    pub method: SolveMethod,
    pub apriori: Apriori,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Gmres,
    FixedPoint,
}

/// Iteration controls of [`solve_elliptic`].
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-10, restart: 40, max_iter: 2000 }
    }
}

/// `(λ + A + b·∇)u`.
pub fn apply_elliptic<T: Real>(
    lambda: T,
    alpha: T,
    drift: &VectorField<T>,
    u: &ScalarField<T>,
) -> Result<ScalarField<T>> {
    let au = frac_laplacian(u, alpha);
    u.scale(lambda).add(&au)?.add(&advect(drift, u)?)
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Restarted GMRES for `x + K x = rhs`. Returns the iterate, the number of
/// inner steps and whether the preconditioned residual reached `tol·‖rhs‖`.
fn gmres<T: Real, F>(k: F, rhs: &[T], x0: Vec<T>, opts: SolveOptions) -> Result<(Vec<T>, usize, bool)>
where
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let op = |v: &[T]| -> Result<Vec<T>> {
        let kv = k(v)?;
        Ok(v.iter().zip(&kv).map(|(&a, &b)| a + b).collect())
    };
    let bnorm = dot(rhs, rhs).sqrt().as_f64().max(f64::MIN_POSITIVE);
    let mut x = x0;
    let mut total = 0;
    let m = opts.restart;
    while total < opts.max_iter {
        let ax = op(&x)?;
        let r: Vec<T> = rhs.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
        let beta = dot(&r, &r).sqrt();
        if beta.as_f64() <= opts.tol * bnorm {
            return Ok((x, total, true));
        }
        let mut v: Vec<Vec<T>> = vec![r.iter().map(|&z| z / beta).collect()];
        let mut h = vec![vec![T::zero(); m]; m + 1];
        let (mut cs, mut sn) = (vec![T::zero(); m], vec![T::zero(); m]);
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            total += 1;
            let mut w = op(&v[j])?;
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&w, vi);
                h[i][j] = hij;
                for (wk, &vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
            }
            let hn = dot(&w, &w).sqrt();
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let den = (h[j][j] * h[j][j] + h[j + 1][j] * h[j + 1][j]).sqrt();
            cs[j] = h[j][j] / den;
            sn[j] = h[j + 1][j] / den;
            h[j][j] = den;
            h[j + 1][j] = T::zero();
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            used = j + 1;
            if g[j + 1].abs().as_f64() <= opts.tol * bnorm || hn == T::zero() || total >= opts.max_iter {
                break;
            }
            v.push(w.iter().map(|&z| z / hn).collect());
        }
        let mut y = vec![T::zero(); used];
        for i in (0..used).rev() {
            let s: T = (i + 1..used).map(|l| h[i][l] * y[l]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for (xk, &vk) in x.iter_mut().zip(&v[i]) {
                *xk += *yi * vk;
            }
        }
    }
    let ax = op(&x)?;
    let r: T = rhs.iter().zip(&ax).map(|(&b, &a)| (b - a) * (b - a)).sum();
    Ok((x, total, r.sqrt().as_f64() <= opts.tol * bnorm))
}

/// Solves `(λ + A + b·∇)u = f` from the initial iterate `u0` (zero if `None`).
///
/// Left-preconditioned by `(λ+A)^{-1}`: GMRES first, then the damped
/// fixed-point iteration; if neither converges the error reports the
/// reached residual.
pub fn solve_elliptic<T: Real>(
    lambda: T,
    alpha: T,
    f: &ScalarField<T>,
    drift: &VectorField<T>,
    u0: Option<&ScalarField<T>>,
    opts: SolveOptions,
) -> Result<SolveResult<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::Domain(format!("lambda={lambda} must be positive")));
    }
    let grid = f.grid().clone();
    let precond = |v: &ScalarField<T>| apply_power(v, alpha, -T::one(), lambda);
    let k = |x: &[T]| -> Result<Vec<T>> {
        let v = ScalarField::from_values(&grid, x.to_vec())?;
        Ok(precond(&advect(drift, &v)?)?.into_values())
    };
    let rhs = precond(f)?.into_values();
    let x0 = u0.map(|u| u.values().to_vec()).unwrap_or_else(|| vec![T::zero(); rhs.len()]);
    // the inner tolerance is tighter than the reported one: A amplifies the
    // high modes of the preconditioned residual
    let inner = SolveOptions { tol: opts.tol * 1e-2, ..opts };
    let (x, iters, ok) = gmres(k, &rhs, x0.clone(), inner)?;
    let (x, iters, method) = if ok {
        (x, iters, SolveMethod::Gmres)
    } else {
        let mut x = x0;
        let mut it = 0;
        let rn = dot(&rhs, &rhs).sqrt().as_f64();
        loop {
            it += 1;
            let kx = k(&x)?;
            let next: Vec<T> = rhs.iter().zip(&kx).map(|(&r, &q)| r - q).collect();
            let change = next.iter().zip(&x).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt().as_f64();
            x = next;
            if change <= inner.tol * rn {
                break;
            }
            if it >= opts.max_iter || !change.is_finite() {
                return Err(Error::NonConvergence(format!(
                    "elliptic solve stagnated at lambda={lambda}: GMRES and fixed-point both failed \
                     (last fixed-point change {change:e}); increase lambda"
                )));
            }
        }
        (x, it, SolveMethod::FixedPoint)
    };
    let u = ScalarField::from_values(&grid, x)?;
    let res = apply_elliptic(lambda, alpha, drift, &u)?.sub(f)?;
    let residual = (res.norm_l2() / f.norm_l2().max(T::min_positive_value())).as_f64();
    if residual > opts.tol {
        return Err(Error::NonConvergence(format!(
            "elliptic residual {residual:e} above tolerance {:e}",
            opts.tol
        )));
    }
    let apriori = apriori(lambda, alpha, &u, f);
    Ok(SolveResult { u, residual, iterations: iters, method, apriori })
}

fn apriori<T: Real>(lambda: T, alpha: T, u: &ScalarField<T>, f: &ScalarField<T>) -> Apriori {
    let l = lambda.as_f64();
    let finf = f.norm_inf().as_f64();
    let form = frac_laplacian(u, alpha).inner(u).expect("same grid").as_f64();
    let u2 = u.inner(u).expect("same grid").as_f64();
    Apriori {
        sup_ratio: l * u.norm_inf().as_f64() / finf,
        energy_lhs: l * u2 + form,
        energy_rhs: finf * finf / (l * l),
    }
}

/// Residuals of the weak identity
/// `λ⟨u,φ⟩ + ⟨A^{1/2}u, φ⟩ + ⟨T(λ+A)^{1/2}u, (λ+A)^{1/2}φ⟩ − ⟨f,φ⟩`
/// for each test function, divided by `‖f‖₂‖φ‖₂`.
pub fn weak_residual<T: Real>(
    lambda: T,
    alpha: T,
    drift: &VectorField<T>,
    u: &ScalarField<T>,
    f: &ScalarField<T>,
    tests: &[ScalarField<T>],
) -> Result<Vec<f64>> {
    let t = TOperator::new(lambda, alpha, drift.clone())?;
    let root_u = apply_power(u, alpha, T::lit(0.5), lambda)?;
    let t_u = t.apply(&root_u)?;
    let quarter_u = apply_power(u, alpha, T::lit(0.5), T::zero())?;
    let fnorm = f.norm_l2();
    tests
        .iter()
        .map(|phi| {
            let quarter_phi = apply_power(phi, alpha, T::lit(0.5), T::zero())?;
            let root_phi = apply_power(phi, alpha, T::lit(0.5), lambda)?;
            let lhs = lambda * u.inner(phi)? + quarter_u.inner(&quarter_phi)? + t_u.inner(&root_phi)?;
            let scale = (fnorm * phi.norm_l2()).max(T::min_positive_value());
            Ok(((lhs - f.inner(phi)?) / scale).abs().as_f64())
        })
        .collect()
}

/// One row of the mollification study.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MollificationRow {
    pub eps_coarse: f64,
    pub eps_fine: f64,
    pub l2_distance: f64,
    pub orlicz_distance: f64,
    /// `|⟨(T(b) − T(b_ε))g, h⟩|` at `eps_fine`.
    pub weak_t_gap: f64,
}

/// Distances between consecutive solutions along a sequence of mollifiers.
/// `drifts` holds `b` (unmollified) followed by `b_{ε_n}` in order.
pub fn mollification_convergence<T: Real>(
    lambda: T,
    alpha: T,
    f: &ScalarField<T>,
    exact: &VectorField<T>,
    drifts: &[(f64, VectorField<T>)],
    g: &ScalarField<T>,
    h: &ScalarField<T>,
) -> Result<Vec<MollificationRow>> {
    let t_exact = TOperator::new(lambda, alpha, exact.clone())?.apply(g)?;
    let mut prev: Option<(f64, ScalarField<T>)> = None;
    let mut rows = Vec::new();
    for (eps, b) in drifts {
        let u = solve_elliptic(lambda, alpha, f, b, None, SolveOptions::default())?.u;
        let t_eps = TOperator::new(lambda, alpha, b.clone())?.apply(g)?;
        let gap = t_exact.sub(&t_eps)?.inner(h)?.abs().as_f64();
        if let Some((e0, u0)) = &prev {
            let diff = u.sub(u0)?;
            rows.push(MollificationRow {
                eps_coarse: *e0,
                eps_fine: *eps,
                l2_distance: diff.norm_l2().as_f64(),
                orlicz_distance: orlicz_norm(&diff)?,
                weak_t_gap: gap,
            });
        } else {
            rows.push(MollificationRow {
                eps_coarse: *eps,
                eps_fine: *eps,
                l2_distance: 0.0,
                orlicz_distance: 0.0,
                weak_t_gap: gap,
            });
        }
        prev = Some((*eps, u));
    }
    Ok(rows)
}

/// Values of `∫(cosh(v/s) − 1)` along `s = 10^{-k}`, `k = 0..steps`.
pub fn blow_up_sweep<T: Real>(v: &ScalarField<T>, steps: usize) -> Vec<(f64, f64)> {
    (0..steps)
        .map(|k| {
            let s = 10f64.powi(-(k as i32));
            (s, modular(v, T::lit(s)).as_f64())
        })
        .collect()
}

/// Outcome of a parabolic run.
#[derive(Debug, Clone)]
pub struct EvolveResult<T: Real> {
    pub times: Vec<f64>,
    pub trajectory: Vec<ScalarField<T>>,
    pub orlicz_norms: Vec<f64>,
    /// Slope of the least-squares fit of `ln ‖v(t)‖_{cosh−1}` against `t`.
    pub growth_rate: f64,
    pub dt: f64,
    pub steps: usize,
    pub scheme: &'static str,
}

/// Largest stable step `0.5 h / max|b|` (infinite without drift).
pub fn cfl_limit<T: Real>(drift: Option<&VectorField<T>>) -> f64 {
    match drift {
        Some(b) => {
            let m = b.max_magnitude().as_f64();
            if m == 0.0 {
                f64::INFINITY
            } else {
                0.5 * b.grid().h().as_f64() / m
            }
        }
        None => f64::INFINITY,
    }
}

/// Strang splitting: half-step exact diffusion, RK4 advection of
/// `∂_t v = −b·∇v` with 2/3-rule dealiasing, half-step diffusion.
pub fn evolve<T: Real>(
    f0: &ScalarField<T>,
    alpha: T,
    drift: Option<&VectorField<T>>,
    t_end: f64,
    dt: f64,
    checkpoints: usize,
) -> Result<EvolveResult<T>> {
    if !(t_end > 0.0 && dt > 0.0) || checkpoints == 0 {
        return Err(Error::Domain("evolve needs t_end > 0, dt > 0 and at least one checkpoint".into()));
    }
    let limit = cfl_limit(drift);
    if dt > limit {
        return Err(Error::Cfl { dt, limit });
    }
    let per = ((t_end / checkpoints as f64) / dt).ceil() as usize;
    let dt_eff = t_end / (per * checkpoints) as f64;
    let half = T::lit(0.5 * dt_eff);
    let h = T::lit(dt_eff);
    let rhs = |v: &ScalarField<T>| -> Result<ScalarField<T>> {
        match drift {
            Some(b) => Ok(dealias(&advect(b, v)?).scale(-T::one())),
            None => Ok(ScalarField::zeros(v.grid())),
        }
    };
    let mut v = f0.clone();
    let mut times = vec![0.0];
    let mut norms = vec![orlicz_norm(&v)?];
    let mut traj = vec![v.clone()];
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    for c in 1..=checkpoints {
        for _ in 0..per {
            v = heat(&v, alpha, half)?;
            if drift.is_some() {
                let k1 = rhs(&v)?;
                let k2 = rhs(&v.axpy(half, &k1)?)?;
                let k3 = rhs(&v.axpy(half, &k2)?)?;
                let k4 = rhs(&v.axpy(h, &k3)?)?;
                let incr = k1.add(&k2.scale(two))?.add(&k3.scale(two))?.add(&k4)?;
                v = v.axpy(h / six, &incr)?;
            }
            v = heat(&v, alpha, half)?;
        }
        let n = orlicz_norm(&v)?;
        if !(n <= 1e12) {
            return Err(Error::BlowUp(format!("orlicz norm {n:e} at t={}", c as f64 * t_end / checkpoints as f64)));
        }
        times.push(c as f64 * t_end / checkpoints as f64);
        norms.push(n);
        traj.push(v.clone());
    }
    let growth_rate = log_slope(&times, &norms);
    Ok(EvolveResult {
        times,
        trajectory: traj,
        orlicz_norms: norms,
        growth_rate,
        dt: dt_eff,
        steps: per * checkpoints,
        scheme: "strang-exact-diffusion-rk4-advection",
    })
}

/// Least-squares slope of `ln y` against `t`.
pub fn log_slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mt = t.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = t.iter().zip(&ly).map(|(a, b)| (a - mt) * (b - my)).sum();
    let var: f64 = t.iter().map(|a| (a - mt) * (a - mt)).sum();
    cov / var
}

/// One row of the resolvent bound table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResolventRow {
    pub lambda: f64,
    pub u_norm: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Rows `(λ, ‖u‖, ‖f‖/(λ − ω₀), ratio)` for `u = (λ + A + b·∇)^{-1} f`.
pub fn resolvent_bound_check<T: Real>(
    lambdas: &[f64],
    alpha: T,
    f: &ScalarField<T>,
    drift: &VectorField<T>,
    omega0: f64,
) -> Result<Vec<ResolventRow>> {
    let fnorm = orlicz_norm(f)?;
    lambdas
        .iter()
        .map(|&l| {
            if !(l > omega0) {
                return Err(Error::Domain(format!("lambda={l} must exceed omega0={omega0}")));
            }
            let u = solve_elliptic(T::lit(l), alpha, f, drift, None, SolveOptions::default())?.u;
            let un = orlicz_norm(&u)?;
            let bound = fnorm / (l - omega0);
            Ok(ResolventRow { lambda: l, u_norm: un, bound, ratio: un / bound })
        })
        .collect()
}
