//! Gauss–Legendre rules and the smooth step used by every cutoff.

use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `∫_a^b f` by composite Gauss–Legendre with `panels` equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, order: usize, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let step = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + step * p as f64;
        let mid = lo + step / 2.0;
        total += x.iter().zip(&w).map(|(&xi, &wi)| wi * f(mid + step / 2.0 * xi)).sum::<f64>() * step / 2.0;
    }
    total
}

/// Smooth step on `[0, 1]`: `h(s)/(h(s) + h(1-s))` with `h(s) = e^{-1/s}` for `s > 0`.
pub fn smoothstep<T: Real>(s: T) -> T {
    if s <= T::zero() {
        return T::zero();
    }
    if s >= T::one() {
        return T::one();
    }
    let a = (-T::one() / s).exp();
    let b = (-T::one() / (T::one() - s)).exp();
    a / (a + b)
}

/// Derivative of [`smoothstep`].
pub fn smoothstep_deriv<T: Real>(s: T) -> T {
    if s <= T::zero() || s >= T::one() {
        return T::zero();
    }
    let one = T::one();
    let a = (-one / s).exp();
    let b = (-one / (one - s)).exp();
    let da = a / (s * s);
    let db = -b / ((one - s) * (one - s));
    (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
}

/// Cutoff equal to 1 on `[0, lo]`, 0 on `[hi, ∞)`, smooth in between.
pub fn plateau<T: Real>(r: T, lo: T, hi: T) -> T {
    T::one() - smoothstep((r - lo) / (hi - lo))
}

/// Derivative of [`plateau`] in `r`.
pub fn plateau_deriv<T: Real>(r: T, lo: T, hi: T) -> T {
    -smoothstep_deriv((r - lo) / (hi - lo)) / (hi - lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(8);
        let sum: f64 = w.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        let i14: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((i14 - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn integrate_smooth() {
        let v = integrate(|x: f64| x.exp(), 0.0, 1.0, 16, 4);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn smoothstep_symmetry_and_derivative() {
        for &s in &[0.1, 0.3, 0.5, 0.77] {
            assert!((smoothstep(s) + smoothstep(1.0 - s) - 1.0_f64).abs() < 1e-15);
            let e = 1e-6;
            let fd = (smoothstep(s + e) - smoothstep(s - e)) / (2.0 * e);
            assert!((fd - smoothstep_deriv(s)).abs() < 1e-8);
        }
        assert_eq!(smoothstep(0.0_f64), 0.0);
        assert_eq!(smoothstep(1.0_f64), 1.0);
    }
}
