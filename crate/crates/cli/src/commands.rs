//! One function per subcommand. Each validates its arguments, runs the
//! numerics in timed stages and writes a single artifact carrying the manifest.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;
use std::sync::Arc;

use frakolm::acceptance::run_selected;
use frakolm::constants::{
    check_model, default_p_grid, gamma_exponent as gamma_root, kernel_constant, nu_star, sv_constant, ConstantsTable,
    Params,
};
use frakolm::hardy::{
    bregman_sweep, c_exponential, c_kolmogorov, c_posteriori, c_schrodinger, c_shifted, constant_comparison,
    mollified_log_profile, sv2_margin, sv_route_limit, sv_sweep, weight_cell_average, FamilySpec, Recipe, TestFamily,
};
use frakolm::lyapunov::{check_supermedian, domination, g_bounds, make_drift, riesz_eigen_check};
use frakolm::orlicz::orlicz_eval;
use frakolm::solver::{cfl_limit, lambda_threshold, smooth_random, SolveOptions, TOperator};
use frakolm::spectral::io::{read_field, write_field, Dtype};
use frakolm::spectral::{apply_power, frac_laplacian, heat, KernelPlan};
use frakolm::{Field, Grid, VField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{emit, float, render_json, RunManifest, Table, Timer};
use crate::{
    CompareArgs, ConstantsArgs, DriftArgs, EvolveArgs, Failure, GammaArgs, HardyArgs, Ineq, Model, OrliczArgs,
    SolveArgs, SpectralArgs, SvArgs, SweepArgs, TNormArgs,
};

type Outcome = Result<(), Failure>;

fn manifest<A: Serialize>(command: &str, args: &A, timer: Timer) -> RunManifest {
    let mut m = RunManifest::new(command, serde_json::to_value(args).expect("serializable config"));
    m.stages = timer.into_stages();
    m
}

fn write_json<A: Serialize>(command: &str, args: &A, out: Option<&Path>, timer: Timer, body: Value) -> Outcome {
    let m = manifest(command, args, timer);
    emit(out, &render_json(&m, body).map_err(Failure::Config)?)?;
    Ok(())
}

fn write_table<A: Serialize>(command: &str, args: &A, out: Option<&Path>, timer: Timer, table: &Table) -> Outcome {
    let m = manifest(command, args, timer);
    emit(out, &table.render(&m).map_err(Failure::Config)?)?;
    Ok(())
}

fn model(m: &Model) -> Result<(), Failure> {
    check_model(m.d, m.alpha)?;
    Ok(())
}

fn grid(d: usize, n: usize) -> Result<Arc<Grid>, Failure> {
    Ok(Grid::new(d, n)?)
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Failure::Config(format!("{name}={v} must be positive")));
    }
    Ok(())
}

/// `sup` of the family values and the recipe attaining it.
fn family_sup(values: &[f64], recipes: &[&Recipe]) -> (f64, Value) {
    let mut best = (0.0, Value::Null);
    for (v, r) in values.iter().zip(recipes) {
        if *v > best.0 || best.1.is_null() {
            best = (*v, serde_json::to_value(r).expect("recipe"));
        }
    }
    best
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 { 0.0 } else { (a - b).abs() / s }
}

fn max_over_min(v: &[f64]) -> f64 {
    let hi = v.iter().cloned().fold(f64::MIN, f64::max);
    let lo = v.iter().cloned().fold(f64::MAX, f64::min);
    if lo > 0.0 { hi / lo } else { f64::INFINITY }
}

pub fn constants(a: &ConstantsArgs) -> Outcome {
    let mut timer = Timer::new();
    let params = Params::new(a.model.d, a.model.alpha)?.with_beta(a.beta)?.with_p(a.p)?.with_nu(a.nu)?;
    let t = timer.stage("evaluate", || ConstantsTable::evaluate(&params))?;
    let mut table = Table::quantities();
    let r = t.residuals;
    table.push_quantity("kappa_beta", &format!("beta={}", float(a.beta)), t.kappa_beta, Some(r.kappa_beta));
    table.push_quantity("nu_star", "", t.nu_star, Some(r.nu_star));
    table.push_quantity("nu_sv", "", t.nu_sv, Some(r.nu_sv));
    table.push_quantity("nu_of_p", &format!("p={}", float(a.p)), t.nu_of_p, Some(r.nu_of_p));
    table.push_quantity("sv_constant", &format!("p={}", float(a.p)), sv_constant(a.p)?, None);
    if let Some(g) = t.gamma_of_nu {
        table.push_quantity("gamma_of_nu", &format!("nu={}", float(a.nu)), g, Some(r.gamma_of_nu));
    }
    if a.model.alpha < 2.0 {
        table.push_quantity("kernel_constant", "", kernel_constant(a.model.d, a.model.alpha)?, None);
    }
    write_table("constants", a, a.output.out.as_deref(), timer, &table)
}

pub fn gamma_exponent(a: &GammaArgs) -> Outcome {
    model(&a.model)?;
    let (d, alpha) = (a.model.d, a.model.alpha);
    let mut timer = Timer::new();
    let star = nu_star(d, alpha)?;
    let nus: Vec<f64> = match a.nu {
        Some(nu) => vec![nu],
        None => {
            if a.points < 2 {
                return Err(Failure::Config("--points must be at least 2".into()));
            }
            (0..a.points).map(|k| star * k as f64 / a.points as f64).collect()
        }
    };
    let mut table = Table::quantities();
    timer.stage("roots", || -> Result<(), Failure> {
        for &nu in &nus {
            let r = gamma_root(d, alpha, nu)?;
            table.push_quantity("gamma_of_nu", &format!("nu={}", float(nu)), r.gamma, Some(r.residual));
        }
        Ok(())
    })?;
    table.push_quantity("nu_star", "", star, None);
    table.push_quantity("nu_sv", "", frakolm::constants::nu_sv(d, alpha)?, None);
    write_table("gamma-exponent", a, a.output.out.as_deref(), timer, &table)
}

#[derive(Serialize)]
struct CheckRow {
    name: &'static str,
    value: f64,
    tolerance: f64,
    passed: bool,
    /// Reported only; does not affect the exit status.
    informational: bool,
}

fn check(rows: &mut Vec<CheckRow>, name: &'static str, value: f64, tolerance: f64) {
    rows.push(CheckRow { name, value, tolerance, passed: value <= tolerance, informational: false });
}

fn bump(g: &Arc<Grid>, kappa: f64) -> Field {
    Field::from_fn(g, |x| (kappa * x.iter().map(|v| (FRAC_PI_2 * v).cos() - 1.0).sum::<f64>()).exp())
}

/// Wavenumber vectors to test: every mode on small grids, otherwise the
/// axes, the diagonal and random modes.
fn test_modes(g: &Grid, rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let (d, n) = (g.dim(), g.n() as i64);
    if g.len() <= 4096 {
        return (0..g.len())
            .map(|i| {
                let mut idx = vec![0usize; d];
                g.unflatten(i, &mut idx);
                idx.iter().map(|&j| g.wavenumber(j)).collect()
            })
            .collect();
    }
    let mut modes = Vec::new();
    for k in -n / 2..n / 2 {
        let mut axis = vec![0; d];
        axis[0] = k;
        modes.push(axis);
        modes.push(vec![k; d]);
    }
    for _ in 0..128 {
        modes.push((0..d).map(|_| rng.gen_range(-n / 2..n / 2)).collect());
    }
    modes
}

pub fn spectral_check(a: &SpectralArgs) -> Outcome {
    model(&a.model)?;
    let alpha = a.model.alpha;
    let g = grid(a.model.d, a.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut timer = Timer::new();
    let mut rows = Vec::new();

    let worst = timer.stage("plane_waves", || {
        let mut worst = 0.0f64;
        for k in test_modes(&g, &mut rng) {
            let xi: Vec<f64> = k.iter().map(|&v| FRAC_PI_2 * v as f64).collect();
            let lam = xi.iter().map(|v| v * v).sum::<f64>().sqrt().powf(alpha);
            let u = Field::from_fn(&g, |x| xi.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().cos());
            let err = frac_laplacian(&u, alpha).axpy(-lam, &u).expect("same grid").norm_inf() / lam.max(1.0);
            worst = worst.max(err);
        }
        worst
    });
    check(&mut rows, "plane_wave_eigen", worst, 1e-12);

    let (adj, pars, semi, power) = timer.stage("identities", || -> Result<_, Failure> {
        let (mut adj, mut pars, mut semi, mut power) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..8 {
            let u = smooth_random(&g, &mut rng, 6);
            let v = smooth_random(&g, &mut rng, 6);
            let au = frac_laplacian(&u, alpha);
            let l = au.inner(&v)?;
            let r = u.inner(&frac_laplacian(&v, alpha))?;
            adj = adj.max((l - r).abs() / (au.norm_l2() * v.norm_l2()));
            let spec: f64 = u.coefficients().iter().map(|c| c.norm_sqr()).sum::<f64>() / g.len() as f64;
            pars = pars.max(rel(spec, u.inner(&u)? / g.cell_volume()));
            let two = heat(&heat(&u, alpha, 0.1)?, alpha, 0.2)?;
            let one = heat(&u, alpha, 0.3)?;
            semi = semi.max(two.sub(&one)?.norm_inf() / u.norm_inf());
            let half = apply_power(&apply_power(&u, alpha, 0.5, 2.0)?, alpha, 0.5, 2.0)?;
            let full = apply_power(&u, alpha, 1.0, 2.0)?;
            power = power.max(half.sub(&full)?.norm_inf() / full.norm_inf());
        }
        Ok((adj, pars, semi, power))
    })?;
    check(&mut rows, "self_adjointness", adj, 1e-12);
    check(&mut rows, "parseval", pars, 1e-12);
    check(&mut rows, "heat_semigroup", semi, 1e-12);
    check(&mut rows, "power_composition", power, 1e-12);

    let mut kernel = Value::Null;
    if alpha < 2.0 && g.len() <= 1 << 14 {
        let (e, q, tail) = timer.stage("kernel_route", || -> Result<_, Failure> {
            let u = bump(&g, 2.0);
            let plan = KernelPlan::new(&g, alpha, 6)?;
            let k = plan.apply(&u)?;
            let s = frac_laplacian(&u, alpha);
            let e = k.field.sub(&s)?.norm_inf() / s.norm_inf();
            let h = apply_power(&u, alpha, 0.5, 0.0)?;
            let q = rel(plan.quadratic_form(&u)?.total, h.inner(&h)?);
            Ok((e, q, k.tail_bound))
        })?;
        check(&mut rows, "kernel_vs_spectral", e, 1e-6);
        check(&mut rows, "quadratic_form", q, 1e-6);
        // the kernel quadrature is resolution-limited below N = 64
        if a.n < 64 {
            for r in rows.iter_mut().rev().take(2) {
                r.informational = true;
            }
        }
        kernel = json!({ "images": 6, "tail_bound": tail });
    }
    let passed = rows.iter().all(|r| r.passed || r.informational);
    let body = json!({ "d": a.model.d, "alpha": alpha, "n": a.n, "checks": rows, "kernel": kernel, "passed": passed });
    write_json("spectral-check", a, a.output.out.as_deref(), timer, body)?;
    if !passed {
        return Err(Failure::Tolerance("spectral invariants outside tolerance".into()));
    }
    Ok(())
}

pub fn drift_report(a: &DriftArgs) -> Outcome {
    model(&a.model)?;
    positive("eps", a.eps)?;
    let (d, alpha) = (a.model.d, a.model.alpha);
    let g = grid(d, a.n)?;
    let gap = d as f64 - alpha;
    let betas = if a.betas.is_empty() { vec![gap / 6.0, gap / 4.0, gap / 2.0] } else { a.betas.clone() };
    let mut timer = Timer::new();
    let ds = timer.stage("drift", || make_drift(&g, alpha))?;
    let m = timer.stage("mollify", || ds.mollify(a.eps))?;
    let dom = domination(&m)?;
    let samples = match d {
        2 => 200,
        3 => 24,
        _ => 8,
    };
    let mut lyap = Vec::new();
    timer.stage("lyapunov", || -> Result<(), Failure> {
        for &beta in &betas {
            let sm = check_supermedian(&g, beta, a.eps, m.alpha1)?;
            let gb = g_bounds(d, alpha, beta, samples)?;
            // the default annulus [4h, 1/4] is empty once 4h ≥ 1/4
            let riesz = if beta < gap && 16.0 * g.h() < 1.0 {
                json!(riesz_eigen_check(&g, alpha, beta, None)?)
            } else if beta < gap {
                json!({ "skipped": format!("annulus [4h, 1/4] empty at n={}", a.n) })
            } else {
                Value::Null
            };
            lyap.push(json!({
                "beta": beta,
                "supermedian_c3": sm.c3,
                "supermedian_c3_away": sm.c3_away,
                "g_bounds": gb,
                "riesz": riesz,
            }));
        }
        Ok(())
    })?;
    let body = json!({
        "d": d, "alpha": alpha, "n": a.n, "eps": a.eps,
        "nu_star": ds.nu_star,
        "alpha1": m.alpha1,
        "domination": dom,
        "b_eps_max": m.b_eps.max_magnitude(),
        "lyapunov": lyap,
    });
    write_json("drift-report", a, a.output.out.as_deref(), timer, body)
}

pub fn orlicz_norm(a: &OrliczArgs) -> Outcome {
    let mut timer = Timer::new();
    let u: Field = read_field(&a.input)?;
    let e = timer.stage("norm", || orlicz_eval(&u))?;
    let body = json!({
        "d": u.grid().dim(), "n": u.grid().n(),
        "norm": e.norm, "bracket": e.bracket, "iterations": e.iterations, "tol": e.tol,
    });
    write_json("orlicz-norm", a, a.output.out.as_deref(), timer, body)
}

#[derive(Serialize)]
struct HardyRow {
    p: Option<f64>,
    eps: Option<f64>,
    sup: f64,
    sup_coarse: f64,
    refinement: f64,
    argmax: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_ibp_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sinh_sup: Option<f64>,
}

fn or_default(v: &[f64], default: &[f64]) -> Vec<f64> {
    if v.is_empty() { default.to_vec() } else { v.to_vec() }
}

pub fn verify_hardy(a: &HardyArgs) -> Outcome {
    model(&a.model)?;
    let (d, alpha) = (a.model.d, a.model.alpha);
    if a.n < 16 {
        return Err(Failure::Config(format!("n={} too small for a refinement pair", a.n)));
    }
    let grids = [grid(d, a.n / 2)?, grid(d, a.n)?];
    let gap = d as f64 - alpha;
    let mut timer = Timer::new();
    let mut rows: Vec<HardyRow> = Vec::new();
    let mut extra = json!({});
    let row = |vals: [Vec<f64>; 2], recipes: &[&Recipe], p: Option<f64>, eps: Option<f64>| {
        let (fine, argmax) = family_sup(&vals[1], recipes);
        let (coarse, _) = family_sup(&vals[0], recipes);
        HardyRow { p, eps, sup: fine, sup_coarse: coarse, refinement: rel(coarse, fine), argmax, max_ibp_gap: None, sinh_sup: None }
    };
    match a.ineq {
        Ineq::Schrodinger => {
            for p in or_default(&a.p_grid, &[2.0, 4.0, 16.0, 64.0, 256.0]) {
                let spec = FamilySpec::standard(d, &[gap / p]);
                let mut vals: [Vec<f64>; 2] = Default::default();
                let mut recipes = Vec::new();
                timer.stage(&format!("schrodinger_p{p}"), || -> Result<(), Failure> {
                    for (k, g) in grids.iter().enumerate() {
                        let w = weight_cell_average(g, alpha);
                        let fam = TestFamily::build(g, alpha, &spec, a.seed)?;
                        for m in &fam.members {
                            vals[k].push(c_schrodinger(&m.field, alpha, p, &w)?.c);
                        }
                        recipes = fam.members.iter().map(|m| m.recipe.clone()).collect();
                    }
                    Ok(())
                })?;
                rows.push(row(vals, &recipes.iter().collect::<Vec<_>>(), Some(p), None));
            }
        }
        Ineq::Kolmogorov | Ineq::Shifted => {
            let spec = FamilySpec::standard(d, &[gap / 4.0]);
            let default_p: &[f64] = if a.ineq == Ineq::Kolmogorov { &[2.0, 8.0] } else { &[64.0, 256.0, 1024.0] };
            for eps in or_default(&a.eps_grid, &[0.01]) {
                positive("eps", eps)?;
                for p in or_default(&a.p_grid, default_p) {
                    let mut vals: [Vec<f64>; 2] = Default::default();
                    let mut ibp = 0.0f64;
                    let mut recipes = Vec::new();
                    timer.stage(&format!("p{p}_eps{eps}"), || -> Result<(), Failure> {
                        for (k, g) in grids.iter().enumerate() {
                            let fam = TestFamily::build(g, alpha, &spec, a.seed)?;
                            let m = make_drift(g, alpha)?.mollify(eps)?;
                            let sdiv = m.spectral_div_q_eps();
                            for mm in &fam.members {
                                if a.ineq == Ineq::Kolmogorov {
                                    let e = c_kolmogorov(&mm.field, alpha, p, &m.q_eps, &sdiv)?;
                                    if k == 1 && matches!(mm.recipe, Recipe::BandLimitedPositive { .. }) {
                                        ibp = ibp.max(e.ibp_gap);
                                    }
                                    vals[k].push(e.c);
                                } else {
                                    vals[k].push(c_shifted(&mm.log, alpha, p, &m.q_eps)?.c);
                                }
                            }
                            recipes = fam.members.iter().map(|m| m.recipe.clone()).collect();
                        }
                        Ok(())
                    })?;
                    let mut r = row(vals, &recipes.iter().collect::<Vec<_>>(), Some(p), Some(eps));
                    if a.ineq == Ineq::Kolmogorov {
                        r.max_ibp_gap = Some(ibp);
                    }
                    rows.push(r);
                }
            }
        }
        Ineq::Exponential => {
            let spec = FamilySpec::standard(d, &[gap / 4.0]);
            for eps in or_default(&a.eps_grid, &[0.1, 0.03, 0.01, 0.003]) {
                positive("eps", eps)?;
                let mut vals: [Vec<f64>; 2] = Default::default();
                let mut sinh = 0.0f64;
                let mut recipes = Vec::new();
                timer.stage(&format!("exponential_eps{eps}"), || -> Result<(), Failure> {
                    for (k, g) in grids.iter().enumerate() {
                        let fam = TestFamily::build(g, alpha, &spec, a.seed)?;
                        let b = make_drift(g, alpha)?.mollify(eps)?.b_eps;
                        for mm in &fam.members {
                            let e = c_exponential(&mm.log, alpha, &b)?;
                            vals[k].push(e.exp.c);
                            if k == 1 {
                                sinh = sinh.max(e.sinh_c);
                            }
                        }
                        recipes = fam.members.iter().map(|m| m.recipe.clone()).collect();
                    }
                    Ok(())
                })?;
                let mut r = row(vals, &recipes.iter().collect::<Vec<_>>(), None, Some(eps));
                r.sinh_sup = Some(sinh);
                rows.push(r);
            }
        }
        Ineq::Posteriori => {
            if a.lambda < a.lambda_min {
                return Err(Failure::Config(format!("lambda={} below the threshold {}", a.lambda, a.lambda_min)));
            }
            let betas = [gap / 4.0, gap / 2.0];
            let spec = FamilySpec::standard(d, &betas);
            let g = &grids[1];
            let ds = make_drift(g, alpha)?;
            let eps_grid = or_default(&a.eps_grid, &[0.1, 0.03, 0.01, 0.003]);
            let c = timer.stage("exponential_constant", || -> Result<f64, Failure> {
                let fam = TestFamily::build(g, alpha, &spec, a.seed)?;
                let mut c = 0.0f64;
                for &eps in &eps_grid {
                    positive("eps", eps)?;
                    let b = ds.mollify(eps)?.b_eps;
                    for mm in &fam.members {
                        c = c.max(c_exponential(&mm.log, alpha, &b)?.exp.c);
                    }
                }
                Ok(c)
            })?;
            let mut margins = Vec::new();
            timer.stage("rough_margins", || -> Result<(), Failure> {
                for &beta in &betas {
                    for &delta in &[0.1, 0.01] {
                        let u = mollified_log_profile(g, alpha, beta, delta)?;
                        let p = c_posteriori(&u, alpha, a.lambda, a.lambda_min, &ds.b, c)?;
                        margins.push(json!({ "beta": beta, "delta": delta, "margin": p.margin, "t_gap": p.t_gap }));
                    }
                }
                Ok(())
            })?;
            let mut gaps = Vec::new();
            timer.stage("smooth_t_gap", || -> Result<(), Failure> {
                let u = smooth_random(g, &mut ChaCha8Rng::seed_from_u64(a.seed), 3);
                for &eps in &eps_grid {
                    let b = ds.mollify(eps)?.b_eps;
                    gaps.push(json!({ "eps": eps, "t_gap": c_posteriori(&u, alpha, a.lambda, a.lambda_min, &b, c)?.t_gap }));
                }
                Ok(())
            })?;
            let min_margin = margins.iter().map(|m| m["margin"].as_f64().unwrap_or(f64::NAN)).fold(f64::INFINITY, f64::min);
            extra = json!({ "c": c, "lambda": a.lambda, "rough": margins, "smooth": gaps, "min_margin": min_margin });
        }
    }
    let sups: Vec<f64> = rows.iter().map(|r| r.sup).collect();
    let finite = sups.iter().all(|v| v.is_finite());
    let mut body = json!({
        "ineq": a.ineq, "d": d, "alpha": alpha, "n": a.n, "n_coarse": a.n / 2, "seed": a.seed,
        "rows": rows,
        "spread": if sups.is_empty() { Value::Null } else { json!(max_over_min(&sups)) },
    });
    if let Value::Object(m) = extra {
        for (k, v) in m {
            body[k] = v;
        }
    }
    let negative = body.get("min_margin").and_then(Value::as_f64).map(|m| m < 0.0).unwrap_or(false);
    write_json("verify-hardy", a, a.output.out.as_deref(), timer, body)?;
    if !finite {
        return Err(Failure::Tolerance("non-finite family supremum".into()));
    }
    if negative {
        return Err(Failure::Tolerance("negative a posteriori margin".into()));
    }
    Ok(())
}

pub fn verify_sv(a: &SvArgs) -> Outcome {
    check_model(a.d, a.alpha)?;
    if a.samples == 0 {
        return Err(Failure::Config("--samples must be positive".into()));
    }
    let g = grid(a.d, a.n)?;
    let mut timer = Timer::new();
    let breg = timer.stage("bregman", || bregman_sweep(a.samples, a.seed));
    let sv = timer.stage("sv_scalar", || sv_sweep(a.samples, a.seed.wrapping_add(1)));
    let (best, margin8) = timer.stage("sv2", || -> Result<(f64, f64), Failure> {
        let fam = TestFamily::build(&g, a.alpha, &FamilySpec::standard(a.d, &[(a.d as f64 - a.alpha) / 4.0]), a.seed)?;
        let mut best = f64::INFINITY;
        let mut m8 = f64::INFINITY;
        for m in &fam.members {
            let s = sv2_margin(&m.log, a.alpha)?;
            best = best.min(s.best_constant);
            m8 = m8.min(s.margin_8);
        }
        Ok((best, m8))
    })?;
    let route = if a.alpha < 2.0 { Some(sv_route_limit(a.d, a.alpha)?) } else { None };
    let passed = breg >= -1e-12 && sv.iter().all(|&v| v >= -1e-12);
    let body = json!({
        "samples": a.samples,
        "bregman_min": breg,
        "sv_scalar_min": sv,
        "sv2_min_best_constant": best,
        "sv2_min_margin_8": margin8,
        "nu_sv_vs_route_sup": route,
        "passed": passed,
    });
    write_json("verify-sv", a, a.output.out.as_deref(), timer, body)?;
    if !passed {
        return Err(Failure::Tolerance("scalar inequality violated".into()));
    }
    Ok(())
}

pub fn compare_constants(a: &CompareArgs) -> Outcome {
    model(&a.model)?;
    let mut ps: Vec<f64> = default_p_grid();
    ps.push(2.0);
    ps.sort_by(|x, y| x.partial_cmp(y).expect("finite grid"));
    let mut timer = Timer::new();
    let rows = timer.stage("compare", || constant_comparison(a.model.d, a.model.alpha, &ps))?;
    let mut table = Table::new(&["p", "sv_kappa", "kappa_p", "nu_p", "nu_sv_route"]);
    for r in rows {
        table.push(vec![float(r.p), float(r.sv_kappa), float(r.kappa_p), float(r.nu_p), float(r.nu_sv_route)]);
    }
    write_table("compare-constants", a, a.output.out.as_deref(), timer, &table)
}

fn drift_field(g: &Arc<Grid>, alpha: f64, eps: Option<f64>) -> Result<VField, Failure> {
    let ds = make_drift(g, alpha)?;
    Ok(match eps {
        Some(e) => {
            positive("eps", e)?;
            ds.mollify(e)?.b_eps
        }
        None => ds.b,
    })
}

pub fn t_norm(a: &TNormArgs) -> Outcome {
    model(&a.model)?;
    positive("lambda", a.lambda)?;
    let g = grid(a.model.d, a.n)?;
    let mut timer = Timer::new();
    let b = timer.stage("drift", || drift_field(&g, a.model.alpha, a.eps))?;
    let t = TOperator::new(a.lambda, a.model.alpha, b.clone())?;
    let est = timer.stage("power_iteration", || t.norm(a.iterations, a.restarts, a.seed))?;
    let threshold = match a.threshold_bound {
        Some(bound) => Some(timer.stage("threshold", || lambda_threshold(&b, a.model.alpha, bound))?),
        None => None,
    };
    let body = json!({
        "d": a.model.d, "alpha": a.model.alpha, "n": a.n, "lambda": a.lambda, "eps": a.eps,
        "estimate": est,
        "lambda_threshold": threshold,
    });
    write_json("t-norm", a, a.output.out.as_deref(), timer, body)?;
    if !est.converged {
        return Err(Failure::NonConvergence("power iteration did not settle".into()));
    }
    Ok(())
}

/// Right-hand side or initial datum: a preset name or a snapshot path.
fn load_field(spec: &str, g: &Arc<Grid>, seed: u64) -> Result<Field, Failure> {
    Ok(match spec {
        "cos" => Field::from_fn(g, |x| {
            let prod: f64 = x.iter().map(|v| (FRAC_PI_2 * v).cos()).product();
            let skew = if x.len() > 1 { 0.5 * (FRAC_PI_2 * (x[0] - x[1])).sin() } else { 0.0 };
            prod + skew
        }),
        "bump" => bump(g, 1.0),
        "one" => Field::constant(g, 1.0),
        "random" => smooth_random(g, &mut ChaCha8Rng::seed_from_u64(seed), 3),
        path => {
            let u: Field = read_field(Path::new(path))?;
            if u.grid().dim() != g.dim() {
                return Err(Failure::Config(format!("{path}: dimension {} but --d {}", u.grid().dim(), g.dim())));
            }
            if u.grid().n() == g.n() { Field::from_values(g, u.into_values())? } else { u.resample(g)? }
        }
    })
}

pub fn solve_elliptic(a: &SolveArgs) -> Outcome {
    model(&a.model)?;
    positive("lambda", a.lambda)?;
    positive("tol", a.tol)?;
    let alpha = a.model.alpha;
    let g = grid(a.model.d, a.n)?;
    let mut timer = Timer::new();
    let f = load_field(&a.f, &g, a.seed)?;
    let b = timer.stage("drift", || drift_field(&g, alpha, a.eps))?;
    let opts = SolveOptions { tol: a.tol, ..SolveOptions::default() };
    let r = timer.stage("solve", || frakolm::solver::solve_elliptic(a.lambda, alpha, &f, &b, None, opts))?;
    let un = orlicz_eval(&r.u)?.norm;
    let fnorm = orlicz_eval(&f)?.norm;
    let body = json!({
        "d": a.model.d, "alpha": alpha, "n": a.n, "lambda": a.lambda, "eps": a.eps,
        "residual": r.residual,
        "iterations": r.iterations,
        "method": r.method,
        "apriori": r.apriori,
        "energy_constant": r.apriori.energy_constant(),
        "u_sup": r.u.norm_inf(),
        "u_orlicz": un,
        "f_sup": f.norm_inf(),
        "f_orlicz": fnorm,
        "dump": a.dump,
    });
    let m = manifest("solve-elliptic", a, timer);
    if let Some(path) = &a.dump {
        write_field(path, &r.u, Dtype::F64, Some(serde_json::to_value(&m).expect("manifest")))?;
    }
    emit(a.output.out.as_deref(), &render_json(&m, body).map_err(Failure::Config)?)?;
    Ok(())
}

pub fn evolve(a: &EvolveArgs) -> Outcome {
    model(&a.model)?;
    positive("t_end", a.t_end)?;
    if a.checkpoints == 0 {
        return Err(Failure::Config("--checkpoints must be positive".into()));
    }
    let alpha = a.model.alpha;
    let g = grid(a.model.d, a.n)?;
    let mut timer = Timer::new();
    let f0 = load_field(&a.f, &g, a.seed)?;
    let b = if a.no_drift { None } else { Some(timer.stage("drift", || drift_field(&g, alpha, a.eps))?) };
    let limit = cfl_limit(b.as_ref());
    let dt = match a.dt {
        Some(dt) => {
            positive("dt", dt)?;
            dt
        }
        None if limit.is_finite() => 0.5 * limit,
        None => a.t_end / (16 * a.checkpoints) as f64,
    };
    let r = timer.stage("evolve", || frakolm::solver::evolve(&f0, alpha, b.as_ref(), a.t_end, dt, a.checkpoints))?;
    let last = r.trajectory.last().expect("initial state");
    let body = json!({
        "d": a.model.d, "alpha": alpha, "n": a.n, "eps": a.eps, "drift": !a.no_drift,
        "times": r.times,
        "orlicz_norms": r.orlicz_norms,
        "growth_rate": r.growth_rate,
        "dt": r.dt,
        "cfl_limit": if limit.is_finite() { json!(limit) } else { Value::Null },
        "steps": r.steps,
        "scheme": r.scheme,
        "final_sup": last.norm_inf(),
        "final_mean": last.mean(),
        "dump": a.dump,
    });
    let m = manifest("evolve", a, timer);
    if let Some(path) = &a.dump {
        write_field(path, last, Dtype::F64, Some(serde_json::to_value(&m).expect("manifest")))?;
    }
    emit(a.output.out.as_deref(), &render_json(&m, body).map_err(Failure::Config)?)?;
    Ok(())
}

pub fn sweep(a: &SweepArgs) -> Outcome {
    if let Some(bad) = a.only.iter().find(|&&id| !(1..=10).contains(&id)) {
        return Err(Failure::Config(format!("unknown criterion id {bad}; valid ids are 1 to 10")));
    }
    let mut timer = Timer::new();
    let results = timer.stage("acceptance", || run_selected(&a.only));
    for c in &results {
        eprintln!("{}", c.line());
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    let body = json!({ "criteria": results, "passed": results.len() - failed, "failed": failed });
    write_json("sweep", a, a.output.out.as_deref(), timer, body)?;
    if failed > 0 {
        return Err(Failure::Tolerance(format!("{failed} acceptance criteria failed")));
    }
    Ok(())
}
