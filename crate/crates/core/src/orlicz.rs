//! Luxemburg norm for the Young function `Φ(t) = cosh t − 1`.
//!
//! `G(s) = ∫ Φ(u/s)` is evaluated in the log domain so that tiny `s` (large
//! arguments of cosh) never overflows.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::ScalarField;

/// Default relative tolerance of the bisection.
pub const ORLICZ_TOL: f64 = 1e-10;
/// Hard cap on bracketing plus bisection steps.
pub const ORLICZ_MAX_ITER: usize = 200;

/// Result of a norm evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrliczEval {
    pub norm: f64,
    /// Final bracket `(s_lo, s_hi)` with `G(s_lo) > 1 ≥ G(s_hi)`.
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub tol: f64,
}

/// `ln(cosh x − 1)`; `-∞` at zero.
pub fn ln_phi<T: Real>(x: T) -> T {
    let a = x.abs();
    if a == T::zero() {
        return T::neg_infinity();
    }
    if a > T::lit(20.0) {
        // cosh x − 1 = e^x (1 − e^{−x})² / 2
        let e = (-a).exp();
        a + ((T::one() - e) * (T::one() - e) * T::lit(0.5)).ln()
    } else {
        // 2 sinh²(x/2)
        T::lit(2.0).ln() + T::lit(2.0) * (a * T::lit(0.5)).sinh().ln()
    }
}

/// `ln ∫ Φ(u/s)` over the torus.
pub fn ln_modular<T: Real>(u: &ScalarField<T>, s: T) -> T {
    let inv = s.recip();
    let terms: Vec<T> = u.values().iter().map(|&v| ln_phi(v * inv)).collect();
    let m = terms.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    let sum: T = terms.iter().map(|&t| (t - m).exp()).sum();
    m + sum.ln() + u.grid().cell_volume().ln()
}

/// `∫ Φ(u/s)`, possibly `+∞`.
pub fn modular<T: Real>(u: &ScalarField<T>, s: T) -> T {
    ln_modular(u, s).exp()
}

/// `‖u‖_{cosh−1}` with its bracket diagnostics.
pub fn orlicz_eval<T: Real>(u: &ScalarField<T>) -> Result<OrliczEval> {
    orlicz_eval_tol(u, ORLICZ_TOL)
}

pub fn orlicz_eval_tol<T: Real>(u: &ScalarField<T>, tol: f64) -> Result<OrliczEval> {
    if !u.is_finite() {
        return Err(Error::Domain("orlicz norm of a non-finite field".into()));
    }
    let zero = OrliczEval { norm: 0.0, bracket: (0.0, 0.0), iterations: 0, tol };
    if u.norm_inf() == T::zero() {
        return Ok(zero);
    }
    let vol = u.grid().volume().as_f64();
    let g = |s: f64| ln_modular(u, T::lit(s)).as_f64();
    let mut s = u.norm_l2().as_f64() / vol.sqrt();
    let mut it = 0;
    let (mut lo, mut hi);
    if g(s) > 0.0 {
        lo = s;
        loop {
            s *= 2.0;
            it += 1;
            if g(s) <= 0.0 {
                hi = s;
                break;
            }
            lo = s;
            if it >= ORLICZ_MAX_ITER {
                return Err(Error::NonConvergence(format!("orlicz bracket, s={s}")));
            }
        }
    } else {
        hi = s;
        loop {
            s *= 0.5;
            it += 1;
            if g(s) > 0.0 {
                lo = s;
                break;
            }
            hi = s;
            if it >= ORLICZ_MAX_ITER || s == 0.0 {
                return Err(Error::NonConvergence(format!("orlicz bracket, s={s}")));
            }
        }
    }
    while hi - lo > tol * hi {
        if it >= ORLICZ_MAX_ITER {
            return Err(Error::NonConvergence(format!("orlicz bisection, bracket [{lo}, {hi}]")));
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        it += 1;
    }
    Ok(OrliczEval { norm: 0.5 * (lo + hi), bracket: (lo, hi), iterations: it, tol })
}

/// `‖u‖_{cosh−1}`.
pub fn orlicz_norm<T: Real>(u: &ScalarField<T>) -> Result<f64> {
    Ok(orlicz_eval(u)?.norm)
}

/// Norm of the constant field `c` on a torus of volume `vol`.
pub fn constant_norm(c: f64, vol: f64) -> f64 {
    c.abs() / (1.0 + vol.recip()).acosh()
}

/// Minimum over the grid of
/// `[cosh(f/(√(1−γ)s)) − 1 − (cosh(f/s) − 1)/(1−γ)] / (1 + (cosh(f/s) − 1)/(1−γ))`.
pub fn taylor_comparison<T: Real>(f: &ScalarField<T>, gamma: f64, s: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma={gamma} outside (0, 1)")));
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!("s={s} must be positive")));
    }
    let k = 1.0 - gamma;
    let r = k.sqrt();
    let margin = f
        .values()
        .iter()
        .map(|&v| {
            let x = v.as_f64() / s;
            let rhs = phi(x) / k;
            let lhs = phi(x / r);
            if lhs.is_infinite() {
                // compare in the log domain
                let d = ln_phi(x / r) - ln_phi(x) + k.ln();
                return if d >= 0.0 { 0.0 } else { d };
            }
            (lhs - rhs) / (1.0 + rhs)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(if margin.is_infinite() { 0.0 } else { margin })
}

/// `cosh x − 1` without cancellation near zero.
pub fn phi(x: f64) -> f64 {
    let s = (0.5 * x).sinh();
    2.0 * s * s
}

/// Minimum normalized margins of `v sinh v ≥ 2(cosh v − 1)` and
/// `v sinh v ≥ cosh v − 1` over the samples.
pub fn elementary_margins<T: Real>(u: &ScalarField<T>) -> (f64, f64) {
    let mut m = (f64::INFINITY, f64::INFINITY);
    for &v in u.values() {
        let v = v.as_f64();
        if v.abs() > 700.0 {
            continue;
        }
        let a = v * v.sinh();
        let c = phi(v);
        let norm = 1.0 + a;
        m.0 = m.0.min((a - 2.0 * c) / norm);
        m.1 = m.1.min((a - c) / norm);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;

    #[test]
    fn ln_phi_branches_agree() {
        for &x in &[1e-8_f64, 0.3, 5.0, 19.9, 20.1, 40.0] {
            let direct = (x.cosh() - 1.0_f64).ln();
            let v = ln_phi(x);
            let tol = if x < 1e-4 { 1e-7 } else { 1e-13 };
            assert!((v - direct).abs() <= tol * direct.abs().max(1.0), "{x}: {v} {direct}");
        }
        assert!(ln_phi(800.0_f64).is_finite());
    }

    #[test]
    fn constant_field() {
        let g = TorusGrid::<f64>::new(2, 16).unwrap();
        let u = ScalarField::constant(&g, 3.0);
        let e = orlicz_eval(&u).unwrap();
        let expect = 3.0 / (1.0 + 0.25_f64.powi(2)).acosh();
        assert!((e.norm / expect - 1.0).abs() < 1e-10);
        assert_eq!(expect, constant_norm(3.0, 16.0));
        assert!(e.bracket.0 <= expect && expect <= e.bracket.1 * (1.0 + 1e-15));
    }

    #[test]
    fn zero_field() {
        let g = TorusGrid::<f64>::new(1, 8).unwrap();
        assert_eq!(orlicz_norm(&ScalarField::zeros(&g)).unwrap(), 0.0);
    }

    #[test]
    fn huge_values_do_not_overflow() {
        let g = TorusGrid::<f64>::new(1, 16).unwrap();
        let u = ScalarField::from_fn(&g, |x: &[f64]| 1e4 * (x[0] * 0.5).cos().powi(8));
        let n = orlicz_norm(&u).unwrap();
        assert!(n.is_finite() && n > 0.0);
        let g1 = modular(&u, n);
        assert!((g1 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn taylor_margin_at_zero() {
        let g = TorusGrid::<f64>::new(1, 8).unwrap();
        assert_eq!(taylor_comparison(&ScalarField::zeros(&g), 0.5, 1.0).unwrap(), 0.0);
        assert!(taylor_comparison(&ScalarField::zeros(&g), 1.0, 1.0).is_err());
    }
}
