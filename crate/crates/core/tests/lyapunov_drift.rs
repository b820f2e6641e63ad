use frakolm::constants::{kappa, nu_star};
use frakolm::lyapunov::*;
use frakolm::Grid;
use proptest::prelude::*;

#[test]
fn scaling_law_is_pointwise() {
    let g = Grid::new(2, 64).unwrap();
    let beta = 0.5 / 6.0;
    let p = 3.0;
    let a = make_phi(&g, 1.5, beta).unwrap();
    let b = make_phi(&g, 1.5, p * beta).unwrap();
    for (x, y) in a.field.values().iter().zip(b.field.values()) {
        assert!((x.powf(p) - y).abs() <= 1e-14 * y, "{x} {y}");
    }
}

#[test]
fn phi_is_power_inside_unit_ball() {
    let g = Grid::new(2, 32).unwrap();
    let phi = make_phi(&g, 1.5, 0.3).unwrap();
    for i in 0..g.len() {
        let r = g.radius(i);
        if r <= 1.0 {
            let v = phi.field.values()[i];
            assert!((v - r.powf(-0.3)).abs() <= 1e-14 * v);
        }
        if r >= 1.5 {
            assert_eq!(phi.field.values()[i], 1.0);
        }
    }
}

#[test]
fn one_lower_bound_for_all_beta() {
    let g = Grid::new(3, 16).unwrap();
    let alpha = 1.5;
    let c0 = make_phi(&g, alpha, 0.0).unwrap().c0;
    for k in 0..30 {
        let beta = 1.5 * k as f64 / 30.0;
        let phi = make_phi(&g, alpha, beta).unwrap();
        assert_eq!(phi.c0, c0);
        assert!(phi.field.min() >= c0);
    }
}

#[test]
fn g_bounds_corner_value() {
    for &beta in &[0.05, 0.25, 0.45] {
        let gb = g_bounds(2, 1.5, beta, 700).unwrap();
        assert!((gb.sup_87q - gb.sup_closed_form).abs() <= 1e-10);
    }
    let expect = 1.0 - (16.0 / 7.0 * 2f64.sqrt()).powf(-0.25);
    let gb = g_bounds(2, 1.5, 0.25, 350).unwrap();
    assert!((gb.sup_closed_form - expect).abs() < 1e-15);
    let gb = g_bounds(3, 1.5, 1.0, 40).unwrap();
    assert!((gb.sup_87q - gb.sup_closed_form).abs() <= 1e-10);
}

#[test]
fn g_bounds_vanish_at_zero() {
    let gb = g_bounds(2, 1.5, 0.0, 50).unwrap();
    assert_eq!(gb.sup_87q, 0.0);
    assert!(gb.l1_cells.iter().all(|c| c.1 == 0.0));
    assert_eq!(gb.l1_cells.len(), 24);
}

#[test]
fn g_bounds_are_linear_in_beta() {
    // sup(β)/β and the per-cell L¹ norms over β stay under one constant
    let mut c_sup = 0.0f64;
    let mut c_l1 = 0.0f64;
    for k in 1..=10 {
        let beta = 0.5 * 0.99 * k as f64 / 10.0;
        let gb = g_bounds(2, 1.5, beta, 200).unwrap();
        c_sup = c_sup.max(gb.sup_87q / beta);
        for (_, v) in &gb.l1_cells {
            c_l1 = c_l1.max(v / beta);
        }
    }
    // d/dβ of the closed form at 0 is ln((16/7)√2)
    assert!(c_sup <= (16.0 / 7.0 * 2f64.sqrt()).ln() + 1e-12);
    assert!(c_l1.is_finite() && c_l1 < 100.0, "{c_l1}");
}

#[test]
fn cell_norms_bounded_independent_of_m() {
    let beta = 0.1;
    let gb = g_bounds(2, 1.5, beta, 100).unwrap();
    let max = gb.l1_cells.iter().map(|c| c.1).fold(0.0, f64::max);
    let min = gb.l1_cells.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    assert!(min > 0.0 && max / min < 2.0);
}

#[test]
fn drift_matches_profile_inside_unit_ball() {
    let g = Grid::new(2, 64).unwrap();
    let alpha = 1.5;
    let ds = make_drift(&g, alpha).unwrap();
    let mut x = [0.0; 2];
    let ns = nu_star(2, alpha).unwrap();
    for i in 0..g.len() {
        let r = g.radius(i);
        if r > 1.0 {
            continue;
        }
        g.point(i, &mut x);
        for a in 0..2 {
            let q = ds.q.component(a).values()[i];
            assert!((q - x[a] * r.powf(-alpha)).abs() <= 1e-14 * r.powf(1.0 - alpha));
            assert!((ds.b.component(a).values()[i] - ns * q).abs() <= 1e-14 * ns * q.abs());
        }
        let expect = (2.0 - alpha) * r.powf(-alpha);
        assert!((ds.div_q.values()[i] - expect).abs() <= 1e-10 * expect);
    }
}

#[test]
fn drift_magnitude_at_half_radius() {
    let mut q = [0.0; 3];
    drift_profile(1.5, &[0.5, 0.0, 0.0], &mut q);
    assert!((q[0] - 2f64.powf(0.5)).abs() < 1e-15);
}

#[test]
fn divergence_integrates_to_zero() {
    let g = Grid::new(2, 64).unwrap();
    let ds = make_drift(&g, 1.5).unwrap().mollify(0.01).unwrap();
    assert!(ds.spectral_div_q_eps().integral().abs() < 1e-10);
}

#[test]
fn zero_epsilon_is_identity() {
    let g = Grid::new(2, 32).unwrap();
    let ds = make_drift(&g, 1.5).unwrap();
    let m = ds.mollify(0.0).unwrap();
    for a in 0..2 {
        assert_eq!(m.q_eps.component(a).values(), ds.q.component(a).values());
    }
    assert_eq!(m.div_q_eps.values(), ds.div_q.values());
}

#[test]
fn mollifier_converges_in_smooth_region() {
    let g = Grid::new(2, 64).unwrap();
    let ds = make_drift(&g, 1.5).unwrap();
    let errs: Vec<f64> =
        [0.1, 0.01, 0.001].iter().map(|&e| domination(&ds.mollify(e).unwrap()).unwrap().smooth_region_error).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 5e-3, "{errs:?}");
}

#[test]
fn dominations_stable_in_epsilon_and_grid() {
    let mut all = Vec::new();
    for &n in &[64usize, 128] {
        let g = Grid::new(2, n).unwrap();
        let ds = make_drift(&g, 1.5).unwrap();
        for &e in &[0.1, 0.01, 0.001] {
            all.push(domination(&ds.mollify(e).unwrap()).unwrap());
        }
    }
    let c_div = all.iter().map(|d| d.div_constant).fold(0.0, f64::max);
    let c_mag = all.iter().map(|d| d.magnitude_constant).fold(0.0, f64::max);
    assert!(c_div < 1.0 && c_mag < 0.1, "{c_div} {c_mag}");
}

#[test]
fn supermedian_margin() {
    let g = Grid::new(2, 64).unwrap();
    let zero = check_supermedian(&g, 0.0, 0.1, 0.5).unwrap();
    assert!(zero.c3.abs() < 1e-13);
    let c: Vec<f64> = [0.1, 0.01, 0.001].iter().map(|&e| check_supermedian(&g, 1.5, e, 0.5).unwrap().c3).collect();
    assert!(c.iter().all(|v| v.is_finite()));
    assert!(c[0] > c[1] && c[1] > c[2]);
    let away = check_supermedian(&g, 1.5, 0.001, 0.5).unwrap().c3_away;
    assert!(away < 2e-3);
}

#[test]
fn riesz_identity_improves_under_refinement_on_fixed_window() {
    let beta = 0.25;
    let w = Some((0.125, 0.25));
    let r: Vec<_> = [128usize, 256, 512]
        .iter()
        .map(|&n| riesz_eigen_check(&Grid::new(2, n).unwrap(), 1.5, beta, w).unwrap())
        .collect();
    assert!(r[0].max_relative > r[1].max_relative && r[1].max_relative > r[2].max_relative);
    assert!(r[2].max_relative_smooth_removed < 0.5 * r[1].max_relative_smooth_removed + 1e-3);
    let default = riesz_eigen_check(&Grid::new(2, 64).unwrap(), 1.5, beta, None);
    assert!(default.is_err(), "window [4h, 1/4] is empty at N=64");
}

#[test]
fn riesz_small_beta_in_absolute_terms() {
    let g = Grid::new(2, 128).unwrap();
    let a = riesz_eigen_check(&g, 1.5, 1e-3, None).unwrap().max_absolute;
    let b = riesz_eigen_check(&g, 1.5, 1e-4, None).unwrap().max_absolute;
    assert!(b < a && b < 1e-2, "{a} {b}");
}

#[test]
fn adjoint_identity_at_constants_level() {
    let star = nu_star(2, 1.5).unwrap();
    for k in 1..10 {
        let nu = star * k as f64 / 10.0;
        assert!(adjoint_identity_residual(2, 1.5, nu).unwrap() < 1e-12);
    }
    assert!(kappa(2, 1.5, 0.0).unwrap() == 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaling_holds_for_random_exponents(beta in 0.0f64..0.08, p in 1.0f64..6.0) {
        let g = Grid::new(2, 16).unwrap();
        let a = phi_profile(&g, beta);
        let b = phi_profile(&g, p * beta);
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x.powf(p) - y).abs() <= 1e-14 * y);
        }
    }
}
