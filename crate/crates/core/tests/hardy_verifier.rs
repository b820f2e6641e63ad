use frakolm::constants::{kappa, nu_sv};
use frakolm::hardy::*;
use frakolm::lyapunov::{eta, make_drift};
use frakolm::quad::integrate;
use frakolm::solver::smooth_random;
use frakolm::{Field, Grid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const ALPHA: f64 = 1.5;

/// ∫ φ_α over (−2, 2]²: 16 − |B_{3/2}| + ∫_{B_1} r^{−α} + ∫_{1<r<3/2} φ_α.
fn weight_integral() -> f64 {
    16.0 - PI * 2.25 + 2.0 * PI / (2.0 - ALPHA) + integrate(|r| eta(ALPHA, r) * 2.0 * PI * r, 1.0, 1.5, 16, 16)
}

#[test]
fn cell_averaged_weight_integrates_exactly() {
    for &n in &[32usize, 64] {
        let g = Grid::new(2, n).unwrap();
        let w = weight_cell_average(&g, ALPHA);
        let rel = (w.integral() / weight_integral() - 1.0).abs();
        assert!(rel < 1e-6, "N={n}: {rel:e}");
    }
}

#[test]
fn schrodinger_constant_function() {
    let g = Grid::new(2, 32).unwrap();
    let w = weight_cell_average(&g, ALPHA);
    let one = Field::constant(&g, 1.0);
    for &p in &[2.0, 16.0, 256.0] {
        let e = c_schrodinger(&one, ALPHA, p, &w).unwrap();
        let expect = p * kappa(2, ALPHA, 0.5 / p).unwrap() * weight_integral() / 16.0;
        assert!((e.c / expect - 1.0).abs() < 1e-6, "p={p}");
        // bounded in p since κ_{(d−α)/p} = O(1/p)
        assert!(e.c < 2.0);
    }
    assert!(c_schrodinger(&one.scale(-1.0), ALPHA, 2.0, &w).is_err());
}

#[test]
fn schrodinger_is_uniform_in_p_on_one_function() {
    let g = Grid::new(2, 64).unwrap();
    let w = weight_cell_average(&g, ALPHA);
    let u = mollified_lyapunov(&g, ALPHA, 0.125, 0.1).unwrap();
    let a = c_schrodinger(&u, ALPHA, 2.0, &w).unwrap().c;
    let b = c_schrodinger(&u, ALPHA, 16.0, &w).unwrap().c;
    assert!(a < 1.0 && b < 1.0, "{a} {b}");
}

#[test]
fn sharpness_probe_stays_bounded() {
    let g = Grid::new(2, 64).unwrap();
    let w = weight_cell_average(&g, ALPHA);
    let p = 4.0;
    let cs: Vec<f64> = [0.3, 0.1, 0.03, 0.01]
        .iter()
        .map(|&delta| {
            let u = mollified_lyapunov(&g, ALPHA, 0.5 / p, delta).unwrap();
            c_schrodinger(&u, ALPHA, p, &w).unwrap().c
        })
        .collect();
    assert!(cs.iter().all(|c| c.is_finite() && *c < 1.0), "{cs:?}");
}

#[test]
fn kolmogorov_and_exponential_vanish_on_constants() {
    let g = Grid::new(2, 32).unwrap();
    let ds = make_drift(&g, ALPHA).unwrap().mollify(0.01).unwrap();
    let one = Field::constant(&g, 2.0);
    let e = c_kolmogorov(&one, ALPHA, 8.0, &ds.q_eps, &ds.spectral_div_q_eps()).unwrap();
    assert_eq!(e.c, 0.0);
    let zero = Field::zeros(&g);
    assert_eq!(c_exponential(&zero, ALPHA, &ds.b_eps).unwrap().exp.c, 0.0);
    assert_eq!(c_shifted(&zero, ALPHA, 64.0, &ds.q_eps).unwrap().c, 0.0);
}

#[test]
fn kolmogorov_integration_by_parts() {
    let g = Grid::new(2, 64).unwrap();
    let ds = make_drift(&g, ALPHA).unwrap().mollify(0.01).unwrap();
    let div = ds.spectral_div_q_eps();
    let fam = TestFamily::build(&g, ALPHA, &FamilySpec::standard(2, &[]), 7).unwrap();
    for m in fam.members.iter().filter(|m| matches!(m.recipe, Recipe::BandLimitedPositive { .. })) {
        let e = c_kolmogorov(&m.field, ALPHA, 4.0, &ds.q_eps, &div).unwrap();
        assert!(e.ibp_gap <= 1e-8, "{:e}", e.ibp_gap);
    }
}

#[test]
fn shifted_converges_to_exponential() {
    let g = Grid::new(2, 32).unwrap();
    let ds = make_drift(&g, ALPHA).unwrap().mollify(0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v = smooth_random(&g, &mut rng, 2);
    let v = v.scale(1.5 / v.norm_inf());
    let e = c_exponential(&v, ALPHA, &ds.b_eps).unwrap().exp.raw;
    let mut prev = f64::INFINITY;
    for &p in &[64.0, 256.0, 1024.0] {
        let s = c_shifted(&v, ALPHA, p, &ds.q_eps).unwrap().raw;
        let dev = (s - e).abs();
        assert!(dev <= 5.0 / p, "p={p}: {dev}");
        assert!(dev < prev);
        prev = dev;
    }
    let low = v.scale(100.0);
    assert!(c_shifted(&low, ALPHA, 64.0, &ds.q_eps).is_err());
}

#[test]
fn posteriori_form() {
    let g = Grid::new(2, 64).unwrap();
    let ds = make_drift(&g, ALPHA).unwrap();
    let zero = Field::zeros(&g);
    let p = c_posteriori(&zero, ALPHA, 4.0, 1.0, &ds.b, 0.05).unwrap();
    assert!((p.margin - 0.05).abs() < 1e-15);
    assert!(c_posteriori(&zero, ALPHA, 0.5, 1.0, &ds.b, 0.05).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = smooth_random(&g, &mut rng, 3);
    for &eps in &[0.1, 0.01] {
        let b = ds.mollify(eps).unwrap().b_eps;
        assert!(c_posteriori(&u, ALPHA, 4.0, 1.0, &b, 0.05).unwrap().t_gap < 1e-3);
    }
    // rough members: mollified logarithmic profiles
    let fam = TestFamily::build(&g, ALPHA, &FamilySpec::standard(2, &[0.125, 0.25]), 42).unwrap();
    let c = fam
        .members
        .iter()
        .map(|m| c_exponential(&m.log, ALPHA, &ds.b).unwrap().exp.c)
        .fold(0.0, f64::max);
    for &delta in &[0.1, 0.01] {
        let u = mollified_log_profile(&g, ALPHA, 0.25, delta).unwrap();
        let m = c_posteriori(&u, ALPHA, 4.0, 1.0, &ds.b, c).unwrap();
        assert!(m.margin >= 0.0, "delta={delta}: {}", m.margin);
    }
}

#[test]
fn family_is_bit_stable_and_positive() {
    let g = Grid::new(2, 32).unwrap();
    let spec = FamilySpec::standard(2, &[0.2]);
    let a = TestFamily::build(&g, ALPHA, &spec, 5).unwrap();
    let b = TestFamily::build(&g, ALPHA, &spec, 5).unwrap();
    assert_eq!(a.len(), 20 + 2 + 3);
    for (x, y) in a.members.iter().zip(&b.members) {
        assert_eq!(x.recipe, y.recipe);
        assert_eq!(x.field.values(), y.field.values());
        assert!(x.field.min() > 0.0);
    }
    let c = TestFamily::build(&g, ALPHA, &spec, 6).unwrap();
    assert_ne!(a.members[0].field.values(), c.members[0].field.values());
    // members are functions of x: coarse samples equal the fine ones at shared points
    let fine = Grid::new(2, 64).unwrap();
    let f = TestFamily::build(&fine, ALPHA, &spec, 5).unwrap();
    let r = f.members[3].field.resample(&g).unwrap();
    assert!(r.sub(&a.members[3].field).unwrap().norm_inf() < 1e-10);
}

#[test]
fn bregman_sweep_has_no_violation() {
    assert!(bregman_sweep(100_000, 11) >= -1e-12);
}

#[test]
fn sv_scalar_sweep_has_no_violation() {
    let m = sv_sweep(100_000, 12);
    assert!(m.iter().all(|&v| v >= -1e-12), "{m:?}");
}

#[test]
fn sv2_linearization_gives_four() {
    let g = Grid::new(2, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = smooth_random(&g, &mut rng, 3);
    let small = u.scale(1e-4 / u.norm_inf());
    let s = sv2_margin(&small, ALPHA).unwrap();
    assert!((s.best_constant - 4.0).abs() < 1e-6, "{}", s.best_constant);
    assert!(s.margin_8 < 0.0);
    let c = sv2_margin(&Field::constant(&g, 0.3), ALPHA).unwrap();
    assert!(c.best_constant.is_infinite());
}

#[test]
fn constant_comparison_table() {
    let ps = [1.5, 2.0, 4.0, 16.0, 256.0];
    let rows = constant_comparison(2, ALPHA, &ps).unwrap();
    let r2 = &rows[1];
    assert!((r2.sv_kappa / r2.kappa_p - 1.0).abs() < 1e-14);
    assert!(rows[2].sv_kappa < rows[2].kappa_p);
    let sup = rows.iter().map(|r| r.nu_sv_route).fold(0.0, f64::max);
    assert!(sup < nu_sv(2, ALPHA).unwrap());
    assert!(constant_comparison(3, 2.0, &ps).is_err());
}
