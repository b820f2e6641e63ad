use std::sync::Arc;

use frakolm::orlicz::*;
use frakolm::solver::smooth_random;
use frakolm::spectral::{ScalarField, TorusGrid};
use frakolm::Grid;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(g: &Arc<TorusGrid<f64>>, seed: u64, amp: f64) -> ScalarField<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = smooth_random(g, &mut rng, 3);
    u.scale(amp / u.norm_inf())
}

#[test]
fn constant_fields_have_closed_form_norm() {
    for d in 1..=3 {
        let g = Grid::new(d, 8).unwrap();
        for &c in &[1e-3, 0.7, 40.0] {
            let n = orlicz_norm(&ScalarField::constant(&g, c)).unwrap();
            let expect = c / (1.0 + 4f64.powi(-(d as i32))).acosh();
            assert!((n / expect - 1.0).abs() < 1e-9, "d={d} c={c}");
        }
    }
}

#[test]
fn modular_is_one_at_the_norm_and_decreasing() {
    let g = Grid::new(2, 32).unwrap();
    let u = field(&g, 1, 3.0);
    let e = orlicz_eval(&u).unwrap();
    assert!((modular(&u, e.norm) - 1.0).abs() < 1e-9);
    assert!(e.iterations <= ORLICZ_MAX_ITER);
    let s: Vec<f64> = (1..20).map(|k| 0.2 * k as f64).collect();
    let g: Vec<f64> = s.iter().map(|&s| modular(&u, s)).collect();
    assert!(g.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn homogeneity() {
    let g = Grid::new(2, 32).unwrap();
    let u = field(&g, 2, 1.5);
    let n = orlicz_norm(&u).unwrap();
    for &t in &[2.0, 10.0, 1.0 / 3.0, -4.0] {
        let nt = orlicz_norm(&u.scale(t)).unwrap();
        assert!((nt - t.abs() * n).abs() <= 1e-9 * nt, "t={t}");
    }
}

#[test]
fn tiny_scales_stay_finite() {
    let g = Grid::new(2, 16).unwrap();
    let u = field(&g, 3, 1.0);
    assert!(ln_modular(&u, 1e-6).is_finite());
    let n = orlicz_norm(&u.scale(1e6)).unwrap();
    assert!((n / (1e6 * orlicz_norm(&u).unwrap()) - 1.0).abs() < 1e-9);
}

#[test]
fn taylor_step_small_gamma() {
    let g = Grid::new(2, 16).unwrap();
    let u = field(&g, 4, 2.0);
    let m = taylor_comparison(&u, 1e-12, 1.0).unwrap();
    assert!(m.abs() <= 1e-10, "{m}");
    assert!(taylor_comparison(&u, 0.5, 1.0).unwrap() >= 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn triangle_inequality(a in 0u64..10_000, b in 0u64..10_000, sa in 0.1f64..10.0, sb in 0.1f64..10.0) {
        let g = Grid::new(2, 16).unwrap();
        let u = field(&g, a, sa);
        let v = field(&g, b, sb);
        let lhs = orlicz_norm(&u.add(&v).unwrap()).unwrap();
        let rhs = orlicz_norm(&u).unwrap() + orlicz_norm(&v).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-9));
        let t = sa - 5.0;
        let ht = orlicz_norm(&u.scale(t)).unwrap();
        prop_assert!((ht - t.abs() * orlicz_norm(&u).unwrap()).abs() <= 1e-9 * ht.max(1e-300));
    }

    #[test]
    fn monotone_in_absolute_value(a in 0u64..10_000, shrink in 0.0f64..1.0) {
        let g = Grid::new(2, 16).unwrap();
        let v = field(&g, a, 5.0);
        // |u| ≤ |v| pointwise
        let u = v.map(|x| x * shrink * (0.5 + 0.5 * x.cos().abs()));
        prop_assert!(orlicz_norm(&u).unwrap() <= orlicz_norm(&v).unwrap() * (1.0 + 1e-9));
    }

    #[test]
    fn elementary_inequalities(a in 0u64..10_000, amp in 0.01f64..300.0) {
        let g = Grid::new(2, 16).unwrap();
        let (m1, m2) = elementary_margins(&field(&g, a, amp));
        prop_assert!(m1 >= -1e-12 && m2 >= -1e-12);
    }
}
