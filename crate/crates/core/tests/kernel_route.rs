use std::sync::Arc;

use frakolm::spectral::{apply_power, frac_laplacian, kernel_apply, KernelPlan, ScalarField, TorusGrid};
use frakolm::Error;

fn bump(g: &Arc<TorusGrid<f64>>, kappa: f64) -> ScalarField<f64> {
    let h = std::f64::consts::FRAC_PI_2;
    ScalarField::from_fn(g, |x| (kappa * x.iter().map(|v| (h * v).cos() - 1.0).sum::<f64>()).exp())
}

fn rel_err(g: &Arc<TorusGrid<f64>>, alpha: f64, m: usize) -> f64 {
    let u = bump(g, 2.0);
    let k = KernelPlan::new(g, alpha, m).unwrap().apply(&u).unwrap();
    let s = frac_laplacian(&u, alpha);
    k.field.sub(&s).unwrap().norm_inf() / s.norm_inf()
}

#[test]
fn kernel_matches_spectral_at_reference_resolution() {
    let g = TorusGrid::new(2, 128).unwrap();
    let e = rel_err(&g, 1.5, 6);
    assert!(e <= 1e-6, "{e:e}");
}

#[test]
fn kernel_matches_spectral_across_alpha_and_dimension() {
    let g2 = TorusGrid::new(2, 64).unwrap();
    for &a in &[1.1, 1.8] {
        let e = rel_err(&g2, a, 4);
        println!("d=2 alpha={a} err {e:e}");
        assert!(e <= 1e-5, "alpha={a}: {e:e}");
    }
    let g3 = TorusGrid::new(3, 32).unwrap();
    let e = rel_err(&g3, 1.5, 3);
    println!("d=3 err {e:e}");
    assert!(e <= 1e-4, "{e:e}");
}

#[test]
fn kernel_annihilates_constants() {
    let g = TorusGrid::new(2, 32).unwrap();
    let u = ScalarField::constant(&g, 2.5);
    let k = kernel_apply(&u, 1.5, 3, 1e-3).unwrap();
    assert!(k.field.norm_inf() < 1e-12);
}

#[test]
fn quadratic_form_matches_spectral_energy() {
    let g = TorusGrid::new(2, 128).unwrap();
    let u = bump(&g, 2.0);
    let q = KernelPlan::new(&g, 1.5, 6).unwrap().quadratic_form(&u).unwrap();
    let half = apply_power(&u, 1.5, 0.5, 0.0).unwrap();
    let spec = half.inner(&half).unwrap();
    let rel = (q.total - spec).abs() / spec;
    println!("form {} vs {} rel {rel:e}", q.total, spec);
    assert!(rel <= 1e-6);
}

#[test]
fn small_image_radius_is_rejected() {
    let g = TorusGrid::new(2, 16).unwrap();
    let u = bump(&g, 1.0);
    assert!(matches!(kernel_apply(&u, 1.5, 1, 1.0), Err(Error::Params(_))));
    assert!(matches!(kernel_apply(&u, 1.5, 2, 0.0), Err(Error::Truncation { .. })));
}
