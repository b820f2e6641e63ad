//! End-to-end acceptance criteria. Each check returns a [`Criterion`] with its
//! measured metrics; errors inside a check become a failed criterion.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{default_p_grid, gamma_exponent, kappa, nu_of_p, nu_star, nu_sv};
use crate::error::Result;
use crate::hardy::{
    bregman_sweep, c_exponential, c_kolmogorov, c_schrodinger, c_shifted, sv_sweep, weight_cell_average, FamilySpec,
    TestFamily,
};
use crate::lyapunov::{domination, drift_divergence, g_bounds, make_drift, make_phi};
use crate::orlicz::{elementary_margins, taylor_comparison};
use crate::solver::{
    blow_up_sweep, cfl_limit, evolve, lambda_threshold, resolvent_bound_check, smooth_random, solve_elliptic,
    weak_residual, SolveOptions, TOperator,
};
use crate::spectral::{apply_power, frac_laplacian, KernelPlan, ScalarField, TorusGrid};

/// Outcome of one criterion.
#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
    pub seconds: f64,
    /// Runtime budget in seconds.
    pub budget: f64,
}

impl Criterion {
    /// One line: `PASS [3] name (0.12 s): detail`.
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {} ({:.2} s, budget {} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.budget,
            self.detail
        )
    }
}

struct Check {
    metrics: BTreeMap<String, f64>,
    failures: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { metrics: BTreeMap::new(), failures: Vec::new() }
    }

    fn metric(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    /// Records `v` and fails unless `ok`.
    fn require(&mut self, key: impl Into<String>, v: f64, ok: bool, what: &str) {
        let key = key.into();
        if !ok {
            self.failures.push(format!("{key}={v:e} ({what})"));
        }
        self.metrics.insert(key, v);
    }
}

fn run(id: u8, name: &'static str, budget: f64, body: impl FnOnce(&mut Check) -> Result<()>) -> Criterion {
    let start = Instant::now();
    let mut c = Check::new();
    let outcome = body(&mut c);
    let seconds = start.elapsed().as_secs_f64();
    let mut failures = c.failures;
    if let Err(e) = outcome {
        failures.push(format!("error: {e}"));
    }
    if seconds > budget {
        failures.push(format!("runtime {seconds:.1} s over budget {budget} s"));
    }
    let passed = failures.is_empty();
    let detail = if passed { format!("{} metrics within tolerance", c.metrics.len()) } else { failures.join("; ") };
    Criterion { id, name, passed, detail, metrics: c.metrics, seconds, budget }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Ratio `max/min` of positive values (`∞` if some value is zero while others are not).
fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let min = v.iter().cloned().fold(f64::MAX, f64::min);
    if max == 0.0 {
        1.0
    } else if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn grid(d: usize, n: usize) -> Result<Arc<TorusGrid<f64>>> {
    TorusGrid::new(d, n)
}

/// Classical limit α = 2.
pub fn classical_limit() -> Criterion {
    run(1, "classical-limit anchors", 1.0, |c| {
        let mut worst_nu = 0.0f64;
        let mut worst_kappa = 0.0f64;
        for d in 3..=6 {
            let df = d as f64;
            worst_nu = worst_nu.max(rel(nu_star(d, 2.0)?, df - 2.0));
            let b = (df - 2.0) / 2.0;
            worst_kappa = worst_kappa.max(rel(kappa(d, 2.0, b)?, b * b));
        }
        c.require("nu_star_rel_err", worst_nu, worst_nu <= 1e-12, "≤ 1e-12");
        c.require("kappa_rel_err", worst_kappa, worst_kappa <= 1e-12, "≤ 1e-12");
        let e = rel(nu_sv(4, 2.0)?, nu_star(4, 2.0)?);
        c.require("nu_sv_vs_nu_star_d4", e, e <= 1e-12, "≤ 1e-12");
        Ok(())
    })
}

/// Maximum of κ_{(d−α)/p} at p = 2 and convergence of ν(p) to ν⋆.
pub fn kappa_maximum() -> Criterion {
    run(2, "kappa maximum and nu(p) limit", 1.0, |c| {
        let ps: Vec<f64> = default_p_grid();
        for &(d, alpha) in &[(2usize, 1.5f64), (3, 1.5), (3, 2.0)] {
            let tag = format!("d{d}_a{alpha}");
            let gap = d as f64 - alpha;
            let k2 = kappa(d, alpha, gap / 2.0)?;
            let ks: Vec<f64> = ps.iter().map(|&p| kappa(d, alpha, gap / p)).collect::<Result<_>>()?;
            let excess = ks.iter().map(|k| k - k2).fold(f64::MIN, f64::max);
            c.require(format!("{tag}_max_excess"), excess, excess <= 1e-15 * k2, "κ_{(d−α)/p} ≤ κ_{(d−α)/2}");
            let imax = ks.iter().enumerate().fold(0, |b, (i, &k)| if k > ks[b] { i } else { b });
            let lo = if imax > 0 { ps[imax - 1] } else { ps[0] };
            let hi = if imax + 1 < ps.len() { ps[imax + 1] } else { ps[imax] };
            c.require(format!("{tag}_argmax_p"), ps[imax], lo <= 2.0 && 2.0 <= hi, "grid maximum next to p = 2");
            let star = nu_star(d, alpha)?;
            let nus: Vec<f64> = ps.iter().map(|&p| nu_of_p(d, alpha, p)).collect::<Result<_>>()?;
            let worst = ps
                .iter()
                .zip(&nus)
                .filter(|(&p, _)| p >= 100.0)
                .map(|(&p, &n)| (n / star - 1.0).abs() * p / 2.0)
                .fold(0.0, f64::max);
            c.require(format!("{tag}_limit_ratio"), worst, worst <= 1.0, "|ν(p)/ν⋆ − 1| ≤ 2/p for p ≥ 100");
            let mono = nus.windows(2).all(|w| w[1] > w[0]);
            c.require(format!("{tag}_nu_monotone"), mono as u8 as f64, mono, "ν(p) increasing");
        }
        Ok(())
    })
}

/// γ(ν) root: plug-back, endpoints and monotonicity.
pub fn exponent_curve() -> Criterion {
    run(3, "gamma exponent curve", 1.0, |c| {
        for &(d, alpha) in &[(2usize, 1.5f64), (3, 1.5), (3, 2.0)] {
            let tag = format!("d{d}_a{alpha}");
            let star = nu_star(d, alpha)?;
            let g0 = gamma_exponent(d, alpha, 0.0)?.gamma;
            c.require(format!("{tag}_gamma0"), g0, g0 == d as f64, "γ(0) = d exactly");
            let mut worst = 0.0f64;
            let mut prev = f64::INFINITY;
            let mut mono = true;
            for k in 0..100 {
                let nu = star * k as f64 / 100.0;
                let r = gamma_exponent(d, alpha, nu)?;
                worst = worst.max(r.residual);
                mono &= r.gamma < prev;
                prev = r.gamma;
            }
            c.require(format!("{tag}_residual"), worst, worst < 1e-12, "< 1e-12");
            c.require(format!("{tag}_monotone"), mono as u8 as f64, mono, "strictly decreasing");
            let edge = gamma_exponent(d, alpha, star * (1.0 - 1e-6))?.gamma - alpha;
            c.require(format!("{tag}_edge"), edge.abs(), edge.abs() < 1e-3, "|γ(ν⋆(1−1e-6)) − α| < 1e-3");
        }
        Ok(())
    })
}

fn bump(g: &Arc<TorusGrid<f64>>, kappa: f64) -> ScalarField<f64> {
    ScalarField::from_fn(g, |x| (kappa * x.iter().map(|v| (FRAC_PI_2 * v).cos() - 1.0).sum::<f64>()).exp())
}

/// Plane waves, kernel route and quadratic form.
pub fn spectral_operator() -> Criterion {
    run(4, "spectral operator", 30.0, |c| {
        let n = 64usize;
        let g = grid(2, n)?;
        let alpha = 1.5;
        let mut worst = 0.0f64;
        let half = (n / 2) as i64;
        for k0 in -half..half {
            for k1 in -half..half {
                let xi = [FRAC_PI_2 * k0 as f64, FRAC_PI_2 * k1 as f64];
                let lam = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt().powf(alpha);
                let u = ScalarField::from_fn(&g, |x: &[f64]| (xi[0] * x[0] + xi[1] * x[1]).cos());
                let err = frac_laplacian(&u, alpha).axpy(-lam, &u)?.norm_inf() / lam.max(1.0);
                worst = worst.max(err);
            }
        }
        c.require("plane_wave_err", worst, worst <= 1e-12, "≤ 1e-12");
        let g = grid(2, 128)?;
        let u = bump(&g, 2.0);
        let plan = KernelPlan::new(&g, alpha, 6)?;
        let k = plan.apply(&u)?;
        let s = frac_laplacian(&u, alpha);
        let e = k.field.sub(&s)?.norm_inf() / s.norm_inf();
        c.require("kernel_vs_spectral", e, e <= 1e-6, "≤ 1e-6");
        c.metric("kernel_tail_bound", k.tail_bound);
        let q = plan.quadratic_form(&u)?;
        let h = apply_power(&u, alpha, 0.5, 0.0)?;
        let spec = h.inner(&h)?;
        let e = rel(q.total, spec);
        c.require("quadratic_form", e, e <= 1e-6, "≤ 1e-6");
        Ok(())
    })
}

/// Lyapunov functions and the mollified drift.
pub fn lyapunov_drift() -> Criterion {
    run(5, "Lyapunov functions and drift", 60.0, |c| {
        let alpha = 1.5;
        let g = grid(2, 64)?;
        let beta = 0.5 / 6.0;
        let a = make_phi(&g, alpha, beta)?;
        let b = make_phi(&g, alpha, 3.0 * beta)?;
        let scaling = a
            .field
            .values()
            .iter()
            .zip(b.field.values())
            .map(|(x, y)| (x.powi(3) - y).abs() / y)
            .fold(0.0, f64::max);
        c.require("scaling_rel_err", scaling, scaling <= 4.0 * f64::EPSILON, "ulp level");
        let mut corner = 0.0f64;
        for &(d, beta) in &[(2usize, 0.1), (2, 0.3), (3, 0.7)] {
            let gb = g_bounds(d, alpha, beta, if d == 2 { 700 } else { 40 })?;
            corner = corner.max((gb.sup_87q - gb.sup_closed_form).abs());
        }
        c.require("corner_value_err", corner, corner <= 1e-10, "≤ 1e-10");
        let ds = make_drift(&g, alpha)?;
        let mut worst = 0.0f64;
        for i in 0..g.len() {
            let r = g.radius(i);
            if r <= 1.0 {
                let expect = (2.0 - alpha) * r.powf(-alpha);
                worst = worst.max((ds.div_q.values()[i] - expect).abs() / expect);
                worst = worst.max((drift_divergence(2, alpha, r) - expect).abs() / expect);
            }
        }
        c.require("div_q_err", worst, worst <= 1e-10, "≤ 1e-10 on B₁");
        let mut div = Vec::new();
        let mut mag = Vec::new();
        for &eps in &[0.1, 0.01, 0.001] {
            let dm = domination(&ds.mollify(eps)?)?;
            c.metric(format!("div_constant_eps{eps}"), dm.div_constant);
            c.metric(format!("magnitude_constant_eps{eps}"), dm.magnitude_constant);
            div.push(dm.div_constant);
            mag.push(dm.magnitude_constant);
        }
        // one constant serves all ε: the sup over the ε-grid is attained at the coarsest ε
        let dmax = div.iter().cloned().fold(f64::MIN, f64::max);
        let mmax = mag.iter().cloned().fold(f64::MIN, f64::max);
        c.require("div_constant_sup", dmax, dmax.is_finite() && dmax <= 1.1 * div[0].max(0.0) + 1e-12, "bounded by the ε = 0.1 value");
        c.require("magnitude_constant_sup", mmax, mmax.is_finite() && mmax <= 1.1 * mag[0].max(0.0) + 1e-12, "bounded by the ε = 0.1 value");
        Ok(())
    })
}

/// Family-sup constants of one inequality on two grids.
struct Sup {
    coarse: f64,
    fine: f64,
}

impl Sup {
    fn refinement(&self) -> f64 {
        rel(self.coarse, self.fine)
    }
}

fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

/// Hardy suite on the standard families.
pub fn hardy_suite() -> Criterion {
    run(6, "Hardy suite", 600.0, |c| {
        let alpha = 1.5;
        let d = 2;
        let seed = 42;
        let grids = [grid(d, 64)?, grid(d, 128)?];
        let check_sup = |c: &mut Check, tag: String, s: &Sup| {
            c.metric(format!("{tag}_n64"), s.coarse);
            c.metric(format!("{tag}_n128"), s.fine);
            let r = s.refinement();
            c.require(format!("{tag}_refinement"), r, s.fine.is_finite() && r <= 0.1, "≤ 10% under N 64→128");
        };

        let schr_ps = [2.0, 4.0, 16.0, 64.0, 256.0];
        let mut schr = Vec::new();
        for &p in &schr_ps {
            let spec = FamilySpec::standard(d, &[(d as f64 - alpha) / p]);
            let mut v = [0.0; 2];
            for (k, g) in grids.iter().enumerate() {
                let w = weight_cell_average(g, alpha);
                let fam = TestFamily::build(g, alpha, &spec, seed)?;
                v[k] = sup(fam.members.iter().map(|m| c_schrodinger(&m.field, alpha, p, &w).map(|e| e.c)).collect::<Result<Vec<_>>>()?);
            }
            let s = Sup { coarse: v[0], fine: v[1] };
            check_sup(c, format!("schrodinger_p{p}"), &s);
            schr.push(s.fine);
        }
        let sp = spread(&schr);
        c.require("schrodinger_p_spread", sp, sp <= 4.0, "≤ 4× across the p-grid");

        let spec = FamilySpec::standard(d, &[(d as f64 - alpha) / 4.0]);
        let eps_grid = [0.1, 0.03, 0.01, 0.003];
        let mut exp_sup = vec![[0.0; 2]; eps_grid.len()];
        let mut kolm = vec![[0.0; 2]; 2];
        let mut shifted = vec![[0.0; 2]; 3];
        let mut ibp = 0.0f64;
        let mut limit = 0.0f64;
        for (k, g) in grids.iter().enumerate() {
            let fam = TestFamily::build(g, alpha, &spec, seed)?;
            let ds = make_drift(g, alpha)?;
            let m = ds.mollify(0.01)?;
            let sdiv = m.spectral_div_q_eps();
            for (j, &p) in [2.0, 8.0].iter().enumerate() {
                let es = fam
                    .members
                    .iter()
                    .map(|mm| c_kolmogorov(&mm.field, alpha, p, &m.q_eps, &sdiv))
                    .collect::<Result<Vec<_>>>()?;
                kolm[j][k] = sup(es.iter().map(|e| e.c));
                ibp = ibp.max(sup(es.iter().zip(&fam.members).filter(|(_, mm)| is_band_limited(mm)).map(|(e, _)| e.ibp_gap)));
            }
            let mut exp_ref = Vec::new();
            for (j, &eps) in eps_grid.iter().enumerate() {
                let me = ds.mollify(eps)?;
                let es = fam.members.iter().map(|mm| c_exponential(&mm.log, alpha, &me.b_eps)).collect::<Result<Vec<_>>>()?;
                exp_sup[j][k] = sup(es.iter().map(|e| e.exp.c));
                if eps == 0.01 {
                    exp_ref = es;
                }
            }
            for (j, &p) in [64.0, 256.0, 1024.0].iter().enumerate() {
                let es = fam.members.iter().map(|mm| c_shifted(&mm.log, alpha, p, &m.q_eps)).collect::<Result<Vec<_>>>()?;
                shifted[j][k] = sup(es.iter().map(|e| e.c));
                if p == 1024.0 {
                    limit = limit.max(sup(es.iter().zip(&exp_ref).map(|(a, b)| rel(a.raw, b.exp.raw))));
                }
            }
        }
        for (j, p) in [2, 8].iter().enumerate() {
            check_sup(c, format!("kolmogorov_p{p}"), &Sup { coarse: kolm[j][0], fine: kolm[j][1] });
        }
        c.require("kolmogorov_ibp_gap", ibp, ibp <= 1e-8, "direct vs integrated-by-parts drift ≤ 1e-8 on band-limited members");
        for (j, eps) in eps_grid.iter().enumerate() {
            check_sup(c, format!("exponential_eps{eps}"), &Sup { coarse: exp_sup[j][0], fine: exp_sup[j][1] });
        }
        let se = spread(&exp_sup.iter().map(|v| v[1]).collect::<Vec<_>>());
        c.require("exponential_eps_spread", se, se <= 2.0, "≤ 2× across the ε-grid");
        for (j, p) in [64, 256, 1024].iter().enumerate() {
            check_sup(c, format!("shifted_p{p}"), &Sup { coarse: shifted[j][0], fine: shifted[j][1] });
        }
        c.require("shifted_1024_vs_exponential", limit, limit <= 0.01, "≤ 1% per member");
        Ok(())
    })
}

fn is_band_limited<T: crate::Real>(m: &crate::hardy::Member<T>) -> bool {
    matches!(m.recipe, crate::hardy::Recipe::BandLimitedPositive { .. })
}

/// Random smooth fields with amplitudes spread over `[0.1, 20]`.
fn random_fields(g: &Arc<TorusGrid<f64>>, count: usize, seed: u64) -> Vec<ScalarField<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let amp: f64 = rng.gen_range(0.1..20.0);
            let u = smooth_random(g, &mut rng, 3);
            u.scale(amp / u.norm_inf())
        })
        .collect()
}

/// Scalar property sweeps.
pub fn property_sweeps() -> Criterion {
    run(7, "property sweeps", 60.0, |c| {
        let b = bregman_sweep(1_000_000, 1);
        c.require("bregman_min", b, b >= -1e-12, "≥ −1e-12");
        let s = sv_sweep(1_000_000, 2);
        for (k, v) in s.iter().enumerate() {
            c.require(format!("sv_scalar_{}_min", k + 1), *v, *v >= -1e-12, "≥ −1e-12");
        }
        let g = grid(2, 32)?;
        let (mut e1, mut e2, mut tc) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        for u in random_fields(&g, 100, 3) {
            let (a, b) = elementary_margins(&u);
            e1 = e1.min(a);
            e2 = e2.min(b);
            tc = tc.min(taylor_comparison(&u, 0.5, 1.0)?);
        }
        c.require("v_sinh_v_vs_2phi", e1, e1 >= -1e-12, "≥ −1e-12");
        c.require("v_sinh_v_vs_phi", e2, e2 >= -1e-12, "≥ −1e-12");
        c.require("taylor_comparison", tc, tc >= -1e-12, "≥ −1e-12");
        Ok(())
    })
}

fn reference_f(g: &Arc<TorusGrid<f64>>) -> ScalarField<f64> {
    ScalarField::from_fn(g, |x: &[f64]| {
        (FRAC_PI_2 * x[0]).cos() * (FRAC_PI_2 * x[1]).cos() + 0.5 * (FRAC_PI_2 * (x[0] - x[1])).sin()
    })
}

/// Elliptic a priori estimates, weak identity and uniqueness.
pub fn elliptic() -> Criterion {
    run(8, "elliptic problem", 300.0, |c| {
        let alpha = 1.5;
        let g = grid(2, 128)?;
        let ds = make_drift(&g, alpha)?;
        let f = reference_f(&g);
        let mut sup_ratio = 0.0f64;
        let mut spread_c = 1.0f64;
        let mut c_max = 0.0f64;
        let mut weak = 0.0f64;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut tests: Vec<ScalarField<f64>> = (0..18).map(|_| smooth_random(&g, &mut rng, 6)).collect();
        tests.push(ScalarField::constant(&g, 1.0));
        let mut uniq = 0.0f64;
        let mut blow = 0.0f64;
        for &lambda in &[20.0, 50.0, 100.0] {
            let mut cs = Vec::new();
            for &eps in &[0.1, 0.01] {
                let b = ds.mollify(eps)?.b_eps;
                let r = solve_elliptic(lambda, alpha, &f, &b, None, SolveOptions::default())?;
                sup_ratio = sup_ratio.max(r.apriori.sup_ratio);
                cs.push(r.apriori.energy_constant());
                let mut set = tests.clone();
                set.push(r.u.clone());
                weak = weak.max(sup(weak_residual(lambda, alpha, &b, &r.u, &f, &set)?));
                let start = smooth_random(&g, &mut rng, 4);
                let r2 = solve_elliptic(lambda, alpha, &f, &b, Some(&start), SolveOptions::default())?;
                let diff = r.u.sub(&r2.u)?;
                uniq = uniq.max(diff.norm_l2());
                blow = blow.max(blow_up_sweep(&diff, 6).last().map(|v| v.1).unwrap_or(0.0));
            }
            c.metric(format!("energy_constant_l{lambda}"), cs[0].max(cs[1]));
            c_max = c_max.max(cs[0].max(cs[1]));
            spread_c = spread_c.max(spread(&cs));
        }
        c.require("sup_ratio", sup_ratio, sup_ratio <= 1.0 + 1e-6, "λ‖u‖∞ ≤ (1+1e-6)‖f‖∞");
        c.require("energy_eps_spread", spread_c, spread_c <= 1.1, "one constant across the ε-grid (≤ 10% spread per λ)");
        c.metric("energy_constant_max", c_max);
        c.require("weak_residual", weak, weak <= 1e-6, "≤ 1e-6 scale for 20 test functions");
        c.require("uniqueness_l2", uniq, uniq <= 1e-9, "two initial iterates agree");
        c.require("blow_up_modular", blow, blow <= 1e-6, "⟨cosh(v/s) − 1⟩ stays small down to s = 1e-5");
        Ok(())
    })
}

fn smooth_bump(g: &Arc<TorusGrid<f64>>) -> ScalarField<f64> {
    ScalarField::from_fn(g, |x: &[f64]| ((FRAC_PI_2 * x[0]).cos() + (FRAC_PI_2 * x[1]).cos()).exp() - 1.0)
}

/// Orlicz norms along the parabolic flow.
pub fn parabolic() -> Criterion {
    run(9, "parabolic flow in the Orlicz norm", 600.0, |c| {
        let alpha = 1.5;
        let t_end = 1.0;
        let mut omegas = BTreeMap::new();
        for &n in &[64usize, 128] {
            let g = grid(2, n)?;
            let f0 = smooth_bump(&g);
            let free = evolve(&f0, alpha, None, t_end, 0.01, 32)?;
            let incr = free.orlicz_norms.windows(2).map(|w| w[1] / w[0] - 1.0).fold(f64::MIN, f64::max);
            c.require(format!("zero_drift_max_increase_n{n}"), incr, incr <= 1e-8, "non-increasing");
            let ds = make_drift(&g, alpha)?;
            for &eps in &[0.03, 0.01] {
                let b = ds.mollify(eps)?.b_eps;
                let r = evolve(&f0, alpha, Some(&b), t_end, cfl_limit(Some(&b)), 32)?;
                c.metric(format!("omega_n{n}_eps{eps}"), r.growth_rate);
                omegas.insert((n, (eps * 1e3) as u32), r.growth_rate);
            }
        }
        let e = rel(omegas[&(64, 30)], omegas[&(64, 10)]);
        c.require("omega_eps_change", e, e <= 0.15, "≤ 15% for ε 0.03→0.01");
        let e = rel(omegas[&(64, 10)], omegas[&(128, 10)]);
        c.require("omega_grid_change", e, e <= 0.15, "≤ 15% for N 64→128");
        let all_finite = omegas.values().all(|w| w.is_finite());
        c.require("omega_finite", all_finite as u8 as f64, all_finite, "finite");

        // ω₀ = max(ω_emp, exponential Hardy constant, λ threshold)
        let g = grid(2, 64)?;
        let f0 = smooth_bump(&g);
        let ds = make_drift(&g, alpha)?;
        let b = ds.mollify(0.01)?.b_eps;
        let fam = TestFamily::build(&g, alpha, &FamilySpec::standard(2, &[0.125]), 42)?;
        let c_exp = sup(fam.members.iter().map(|m| c_exponential(&m.log, alpha, &b).map(|e| e.exp.c)).collect::<Result<Vec<_>>>()?);
        let lam_min = lambda_threshold(&ds.b, alpha, 10.0)?;
        let omega0 = omegas[&(64, 10)].max(c_exp).max(lam_min);
        c.metric("omega0", omega0);
        c.metric("lambda_threshold", lam_min);
        let lambdas: Vec<f64> = [1.0, 2.0, 4.0, 8.0].iter().map(|k| 4.0 * omega0 * k).collect();
        let rows = resolvent_bound_check(&lambdas, alpha, &f0, &b, omega0)?;
        let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        c.require("resolvent_ratio", worst, worst <= 1.0, "≤ 1 for λ ≥ 4ω₀");
        let slope = (rows[3].u_norm / rows[2].u_norm).log2();
        c.metric("resolvent_loglog_slope", slope);

        let base = 1.0 / (32.0 * (1.0 / (32.0 * cfl_limit(Some(&b)))).ceil());
        let runs = [base, base / 2.0, base / 4.0]
            .iter()
            .map(|&dt| evolve(&f0, alpha, Some(&b), t_end, dt, 32))
            .collect::<Result<Vec<_>>>()?;
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let d1 = diff(&runs[0].orlicz_norms, &runs[1].orlicz_norms);
        let d2 = diff(&runs[1].orlicz_norms, &runs[2].orlicz_norms);
        let order = (d1 / d2).log2();
        c.require("dt_order", order, order >= 1.8, "observed order ≥ 1.8");
        Ok(())
    })
}

/// Norm, adjoint and weak convergence of `T`.
pub fn t_operator() -> Criterion {
    run(10, "operator T", 120.0, |c| {
        let alpha = 1.5;
        let lambda = 1.0;
        let mut norms = Vec::new();
        for &n in &[64usize, 128] {
            let g = grid(2, n)?;
            let ds = make_drift(&g, alpha)?;
            let est = TOperator::new(lambda, alpha, ds.b.clone())?.norm(200, 3, 11)?;
            c.metric(format!("t_norm_n{n}"), est.norm);
            norms.push(est.norm);
        }
        let e = rel(norms[0], norms[1]);
        c.require("t_norm_refinement", e, norms[1].is_finite() && e <= 0.15, "≤ 15% under N 64→128");

        let g = grid(2, 64)?;
        let ds = make_drift(&g, alpha)?;
        let t = TOperator::new(lambda, alpha, ds.b.clone())?;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let u = smooth_random(&g, &mut rng, 6);
            let v = smooth_random(&g, &mut rng, 6);
            let a = t.apply(&u)?.inner(&v)?;
            let b = u.inner(&t.adjoint(&v)?)?;
            worst = worst.max((a - b).abs() / (u.norm_l2() * v.norm_l2()));
        }
        c.require("adjoint_pairing", worst, worst <= 1e-10, "≤ 1e-10");
        let twice = TOperator::new(lambda, alpha, ds.b.scale(2.0))?;
        let u = smooth_random(&g, &mut rng, 6);
        let lin = twice.apply(&u)?.sub(&t.apply(&u)?.scale(2.0))?.norm_inf() / t.apply(&u)?.norm_inf();
        c.require("drift_linearity", lin, lin <= 1e-12, "T(2b) = 2T(b)");

        let gf = smooth_random(&g, &mut rng, 4);
        let hf = smooth_random(&g, &mut rng, 4);
        let exact = t.apply(&gf)?;
        let mut gaps = Vec::new();
        for k in 0..6 {
            let eps = 0.1 * 0.5f64.powi(k);
            let te = TOperator::new(lambda, alpha, ds.mollify(eps)?.b_eps)?.apply(&gf)?;
            gaps.push(exact.sub(&te)?.inner(&hf)?.abs());
        }
        for (k, v) in gaps.iter().enumerate() {
            c.metric(format!("weak_gap_n{k}"), *v);
        }
        let dec = gaps.windows(2).all(|w| w[1] < w[0]);
        c.require("weak_gap_decreasing", dec as u8 as f64, dec, "decreasing along ε_n = 0.1·2^{−n}");
        Ok(())
    })
}

/// All criteria in order.
pub fn run_all() -> Vec<Criterion> {
    vec![
        classical_limit(),
        kappa_maximum(),
        exponent_curve(),
        spectral_operator(),
        lyapunov_drift(),
        hardy_suite(),
        property_sweeps(),
        elliptic(),
        parabolic(),
        t_operator(),
    ]
}

/// Runs the criteria with the given ids (all if empty).
pub fn run_selected(ids: &[u8]) -> Vec<Criterion> {
    let table: [(u8, fn() -> Criterion); 10] = [
        (1, classical_limit),
        (2, kappa_maximum),
        (3, exponent_curve),
        (4, spectral_operator),
        (5, lyapunov_drift),
        (6, hardy_suite),
        (7, property_sweeps),
        (8, elliptic),
        (9, parabolic),
        (10, t_operator),
    ];
    table.iter().filter(|(id, _)| ids.is_empty() || ids.contains(id)).map(|(_, f)| f()).collect()
}
