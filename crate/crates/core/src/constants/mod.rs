//! Closed-form constants: κ_β, the critical coupling ν⋆, the
//! Stroock–Varopoulos coupling ν_SV, the L^p coupling ν(p) and the exponent
//! γ(ν) of the adjoint Lyapunov function `|x|^{-d+γ}`.

mod gamma;

pub use gamma::{gamma, ln_gamma, rgamma, sinpi};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Validates the model pair `(d, α)`: `d ≥ 2`, `1 < α ≤ 2`, and `α = 2` only for `d ≥ 3`.
pub fn check_model<T: Real>(d: usize, alpha: T) -> Result<()> {
    if d < 2 {
        return Err(Error::Params(format!("dimension d={d} must be at least 2")));
    }
    if !(alpha > T::one() && alpha <= T::lit(2.0)) {
        return Err(Error::Params(format!("alpha={alpha} must lie in (1, 2]")));
    }
    if alpha == T::lit(2.0) && d < 3 {
        return Err(Error::Params("alpha=2 requires d≥3".into()));
    }
    Ok(())
}

/// Model parameters shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params<T: Real> {
    pub d: usize,
    pub alpha: T,
    /// Auxiliary exponent, `0 ≤ β < d − α`.
    pub beta: T,
    /// Lebesgue exponent, `p > 1`.
    pub p: T,
    /// Coupling constant, `ν ≥ 0`.
    pub nu: T,
}

impl<T: Real> Params<T> {
    /// Parameters with `β = 0`, `p = 2`, `ν = 0`.
    pub fn new(d: usize, alpha: T) -> Result<Self> {
        check_model(d, alpha)?;
        Ok(Self { d, alpha, beta: T::zero(), p: T::lit(2.0), nu: T::zero() })
    }

    pub fn with_beta(mut self, beta: T) -> Result<Self> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_p(mut self, p: T) -> Result<Self> {
        self.p = p;
        self.validate()?;
        Ok(self)
    }

    pub fn with_nu(mut self, nu: T) -> Result<Self> {
        self.nu = nu;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_model(self.d, self.alpha)?;
        check_beta(self.d, self.alpha, self.beta)?;
        if !(self.p > T::one()) {
            return Err(Error::Params(format!("p={} must exceed 1", self.p)));
        }
        if !(self.nu >= T::zero()) {
            return Err(Error::Params(format!("nu={} must be nonnegative", self.nu)));
        }
        Ok(())
    }

    pub fn dim(&self) -> T {
        T::from_usize_lossy(self.d)
    }
}

fn check_beta<T: Real>(d: usize, alpha: T, beta: T) -> Result<()> {
    let top = T::from_usize_lossy(d) - alpha;
    if !(beta >= T::zero() && beta < top) {
        return Err(Error::Domain(format!("beta={beta} outside [0, d-alpha) = [0, {top})")));
    }
    Ok(())
}

/// κ_β = 2^α Γ((β+α)/2) Γ((d−β)/2) / (Γ(β/2) Γ((d−β−α)/2)), for `0 ≤ β < d − α`.
///
/// The Γ(β/2) pole makes κ_0 = 0.
pub fn kappa<T: Real>(d: usize, alpha: T, beta: T) -> Result<T> {
    check_beta(d, alpha, beta)?;
    Ok(kappa_unchecked(T::from_usize_lossy(d), alpha, beta))
}

fn kappa_unchecked<T: Real>(d: T, alpha: T, beta: T) -> T {
    let two = T::lit(2.0);
    if beta == T::zero() {
        return T::zero();
    }
    let num = gamma((beta + alpha) / two).expect("positive argument")
        * gamma((d - beta) / two).expect("positive argument");
    two.powf(alpha) * num * rgamma(beta / two) * rgamma((d - beta - alpha) / two)
}

/// Critical coupling ν⋆ = 2^{α−1} Γ(α/2) Γ(d/2) / Γ((d−α)/2).
pub fn nu_star<T: Real>(d: usize, alpha: T) -> Result<T> {
    check_model(d, alpha)?;
    let two = T::lit(2.0);
    let dd = T::from_usize_lossy(d);
    Ok(two.powf(alpha - T::one()) * gamma(alpha / two)? * gamma(dd / two)? * rgamma((dd - alpha) / two))
}

/// Largest coupling reachable through the Stroock–Varopoulos route,
/// ν_SV = 2^{α+2}/(d−α) · (Γ((d+α)/4) / Γ((d−α)/4))².
pub fn nu_sv<T: Real>(d: usize, alpha: T) -> Result<T> {
    check_model(d, alpha)?;
    let four = T::lit(4.0);
    let dd = T::from_usize_lossy(d);
    let ratio = gamma((dd + alpha) / four)? / gamma((dd - alpha) / four)?;
    Ok(T::lit(2.0).powf(alpha + T::lit(2.0)) / (dd - alpha) * ratio * ratio)
}

/// Coupling of the L^p Hardy inequality, ν(p) = p/(d−α) · κ_{(d−α)/p}.
pub fn nu_of_p<T: Real>(d: usize, alpha: T, p: T) -> Result<T> {
    check_model(d, alpha)?;
    if !(p > T::one()) {
        return Err(Error::Domain(format!("p={p} must exceed 1")));
    }
    let gap = T::from_usize_lossy(d) - alpha;
    Ok(p / gap * kappa_unchecked(T::from_usize_lossy(d), alpha, gap / p))
}

/// The Stroock–Varopoulos factor 4(p−1)/p².
pub fn sv_constant<T: Real>(p: T) -> Result<T> {
    if !(p > T::one()) {
        return Err(Error::Domain(format!("p={p} must exceed 1")));
    }
    Ok(T::lit(4.0) * (p - T::one()) / (p * p))
}

/// Left-hand side of the γ-equation, `κ_{d−γ}/(γ−α)`, written so that it is
/// regular at `γ = α` (value ν⋆) and vanishes at `γ = d`.
pub fn exponent_coupling<T: Real>(d: usize, alpha: T, gamma_exp: T) -> T {
    let two = T::lit(2.0);
    let dd = T::from_usize_lossy(d);
    let g = gamma_exp;
    two.powf(alpha - T::one())
        * gamma(g / two).expect("gamma > 0")
        * gamma((dd - g + alpha) / two).expect("positive argument")
        * rgamma((dd - g) / two)
        * rgamma((g - alpha) / two + T::one())
}

/// Outcome of the γ(ν) root solve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExponentRoot<T: Real> {
    pub gamma: T,
    /// |κ_{d−γ} − ν(γ−α)|
    pub residual: T,
    pub iterations: usize,
}

/// Solves `κ_{d−γ} = ν(γ−α)` for γ ∈ (α, d] by bisection, `0 ≤ ν < ν⋆`.
pub fn gamma_exponent<T: Real>(d: usize, alpha: T, nu: T) -> Result<ExponentRoot<T>> {
    let star = nu_star(d, alpha)?;
    if !(nu >= T::zero()) {
        return Err(Error::Domain(format!("nu={nu} must be nonnegative")));
    }
    if nu >= star {
        return Err(Error::Domain(format!(
            "nu={nu} is not below the critical value {star}: no Lyapunov exponent"
        )));
    }
    let dd = T::from_usize_lossy(d);
    let residual = |g: T| {
        let k = if g >= dd { T::zero() } else { kappa_unchecked(dd, alpha, dd - g) };
        (k - nu * (g - alpha)).abs()
    };
    if nu == T::zero() {
        return Ok(ExponentRoot { gamma: dd, residual: residual(dd), iterations: 0 });
    }
    // h(γ) decreases from ν⋆ at γ = α to 0 at γ = d.
    let (mut lo, mut hi) = (alpha, dd);
    let mut iterations = 0;
    while iterations < 200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if exponent_coupling(d, alpha, mid) > nu {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let g = (lo + hi) / T::lit(2.0);
    Ok(ExponentRoot { gamma: g, residual: residual(g), iterations })
}

/// Riesz normalisation of the fractional Laplacian kernel,
/// c_{d,α} = 2^α Γ((d+α)/2) / (π^{d/2} |Γ(−α/2)|). Requires α < 2.
pub fn kernel_constant<T: Real>(d: usize, alpha: T) -> Result<T> {
    check_model(d, alpha)?;
    if alpha >= T::lit(2.0) {
        return Err(Error::Domain("the jump kernel degenerates at alpha = 2".into()));
    }
    let two = T::lit(2.0);
    let dd = T::from_usize_lossy(d);
    Ok(two.powf(alpha) * gamma((dd + alpha) / two)?
        / (T::PI().powf(dd / two) * gamma(-alpha / two)?.abs()))
}

/// `n` log-spaced points in `[lo, hi]`.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(n >= 2 && lo > T::zero() && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + step * T::from_usize_lossy(i)).exp()
            }
        })
        .collect()
}

/// Default p-grid for max/limit checks: 200 log-spaced points in [1.01, 10⁴].
pub fn default_p_grid<T: Real>() -> Vec<T> {
    log_grid(T::lit(1.01), T::lit(1e4), 200)
}

/// Relative residuals attached to each constant.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Residuals<T: Real> {
    pub kappa_beta: T,
    pub nu_star: T,
    pub nu_sv: T,
    pub nu_of_p: T,
    pub gamma_of_nu: T,
}

/// All constants for one parameter set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConstantsTable<T: Real> {
    pub params: Params<T>,
    pub kappa_beta: T,
    pub nu_star: T,
    pub nu_sv: T,
    pub nu_of_p: T,
    /// `None` when ν ≥ ν⋆.
    pub gamma_of_nu: Option<T>,
    pub residuals: Residuals<T>,
}

impl<T: Real> ConstantsTable<T> {
    /// Evaluates every constant from `params` alone.
    ///
    /// Residuals: κ_β and ν⋆ are checked against the symmetry κ_β = κ_{d−α−β}
    /// and the closed form of lim ν(p); ν_SV against its defining limit at
    /// p = 10⁶; γ(ν) by plug-back.
    pub fn evaluate(params: &Params<T>) -> Result<Self> {
        params.validate()?;
        let Params { d, alpha, beta, p, nu } = *params;
        let gap = params.dim() - alpha;
        let kappa_beta = kappa(d, alpha, beta)?;
        let mirror = kappa(d, alpha, gap - beta).unwrap_or(T::zero());
        let star = nu_star(d, alpha)?;
        let sv = nu_sv(d, alpha)?;
        let nup = nu_of_p(d, alpha, p)?;
        let big_p = T::lit(1e6);
        let sv_limit = big_p / gap * sv_constant(big_p)? * kappa(d, alpha, gap / T::lit(2.0))?;
        let star_limit = nu_of_p(d, alpha, T::lit(1e12))?;
        let root = gamma_exponent(d, alpha, nu).ok();
        let rel = |a: T, b: T| {
            let s = a.abs().max(b.abs());
            if s == T::zero() { T::zero() } else { (a - b).abs() / s }
        };
        let residuals = Residuals {
            kappa_beta: if beta == T::zero() { T::zero() } else { rel(kappa_beta, mirror) },
            nu_star: rel(star, star_limit),
            nu_sv: rel(sv, sv_limit),
            nu_of_p: if nup <= star { T::zero() } else { rel(nup, star) },
            gamma_of_nu: root.map(|r| r.residual).unwrap_or(T::nan()),
        };
        Ok(Self {
            params: *params,
            kappa_beta,
            nu_star: star,
            nu_sv: sv,
            nu_of_p: nup,
            gamma_of_nu: root.map(|r| r.gamma),
            residuals,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(2, 2.0_f64).is_err());
        assert!(Params::new(3, 2.0_f64).is_ok());
        assert!(Params::new(2, 1.0_f64).is_err());
        assert!(Params::new(1, 1.5_f64).is_err());
        let p = Params::new(2, 1.5_f64).unwrap();
        assert!(p.with_beta(0.5).is_err());
        assert!(p.with_beta(0.49).is_ok());
        assert!(p.with_p(1.0).is_err());
        assert!(p.with_nu(-1.0).is_err());
    }

    #[test]
    fn kappa_zero_and_domain() {
        assert_eq!(kappa(3, 1.5_f64, 0.0).unwrap(), 0.0);
        assert!(kappa(3, 1.5_f64, 1.5).is_err());
        assert!(kappa(3, 1.5_f64, -0.1).is_err());
    }

    #[test]
    fn kappa_classical_value() {
        for d in 3..=6 {
            let b = (d as f64 - 2.0) / 2.0;
            assert!(rel(kappa(d, 2.0, b).unwrap(), b * b) < 1e-12);
        }
    }

    #[test]
    fn kappa_two_dim_example() {
        let g = |x: f64| gamma(x).unwrap();
        let expect = 2f64.powf(1.5) * (g(0.875) / g(0.125)).powi(2);
        assert!(rel(kappa(2, 1.5, 0.25).unwrap(), expect) < 1e-14);
    }

    #[test]
    fn kappa_symmetric_about_midpoint() {
        let gap = 0.5;
        for &b in &[0.05, 0.1, 0.2] {
            let a = kappa(2, 1.5_f64, b).unwrap();
            let m = kappa(2, 1.5_f64, gap - b).unwrap();
            assert!(rel(a, m) < 1e-13);
        }
    }

    #[test]
    fn nu_star_examples() {
        assert!(rel(nu_star(3, 2.0_f64).unwrap(), 1.0) < 1e-14);
        let g = |x: f64| gamma(x).unwrap();
        let expect = 2f64.sqrt() * g(0.75) / g(0.25);
        assert!(rel(nu_star(2, 1.5).unwrap(), expect) < 1e-14);
    }

    #[test]
    fn nu_sv_examples() {
        assert!(rel(nu_sv(4, 2.0_f64).unwrap(), 2.0) < 1e-14);
        assert!(nu_sv(2, 1.5_f64).unwrap() < nu_star(2, 1.5).unwrap());
        let p = 1e6;
        let lim = p / 0.5 * sv_constant(p).unwrap() * kappa(2, 1.5, 0.25).unwrap();
        assert!(rel(lim, nu_sv(2, 1.5).unwrap()) < 1e-5);
    }

    #[test]
    fn nu_of_p_examples() {
        for d in 3..=5 {
            let expect = (d as f64 - 2.0) / 2.0;
            assert!(rel(nu_of_p(d, 2.0, 2.0).unwrap(), expect) < 1e-13);
        }
        assert!(nu_of_p(2, 1.5_f64, 1.0).is_err());
    }

    #[test]
    fn sv_constant_values() {
        assert_eq!(sv_constant(2.0_f64).unwrap(), 1.0);
        assert_eq!(sv_constant(4.0_f64).unwrap(), 0.75);
        assert!(sv_constant(0.5_f64).is_err());
    }

    #[test]
    fn sv_route_strictly_worse_off_two() {
        let (d, a) = (2, 1.5_f64);
        let mid = kappa(d, a, 0.25).unwrap();
        for &p in &[1.5, 3.0, 4.0, 10.0, 100.0] {
            let lp = kappa(d, a, 0.5 / p).unwrap();
            assert!(sv_constant(p).unwrap() * mid < lp, "p={p}");
        }
    }

    #[test]
    fn gamma_exponent_endpoints() {
        let r = gamma_exponent(3, 1.5_f64, 0.0).unwrap();
        assert_eq!(r.gamma, 3.0);
        let star = nu_star(3, 1.5_f64).unwrap();
        assert!(gamma_exponent(3, 1.5, star).is_err());
        let r = gamma_exponent(3, 1.5, star * (1.0 - 1e-6)).unwrap();
        assert!((r.gamma - 1.5).abs() < 1e-3);
        let r = gamma_exponent(3, 1.5, 0.5 * star).unwrap();
        assert!(r.residual < 1e-12);
        assert!(r.gamma > 1.5 && r.gamma < 3.0);
    }

    #[test]
    fn exponent_coupling_limits() {
        let star = nu_star(2, 1.5_f64).unwrap();
        assert!(rel(exponent_coupling(2, 1.5, 1.5), star) < 1e-14);
        assert_eq!(exponent_coupling(2, 1.5_f64, 2.0), 0.0);
    }

    #[test]
    fn kernel_constant_matches_standard_form() {
        // α 2^{α-1} Γ((d+α)/2) / (π^{d/2} Γ(1-α/2))
        let (d, a) = (2usize, 1.5_f64);
        let std = a * 2f64.powf(a - 1.0) * gamma((d as f64 + a) / 2.0).unwrap()
            / (std::f64::consts::PI.powf(d as f64 / 2.0) * gamma(1.0 - a / 2.0).unwrap());
        assert!(rel(kernel_constant(d, a).unwrap(), std) < 1e-14);
        assert!(kernel_constant(3, 2.0_f64).is_err());
    }

    #[test]
    fn table_is_reproducible() {
        let p = Params::new(2, 1.5_f64).unwrap().with_beta(0.25).unwrap().with_p(4.0).unwrap().with_nu(0.2).unwrap();
        let a = ConstantsTable::evaluate(&p).unwrap();
        let b = ConstantsTable::evaluate(&p).unwrap();
        assert_eq!(a.kappa_beta, b.kappa_beta);
        let g = a.gamma_of_nu.unwrap();
        assert!(g > 1.5 && g <= 2.0);
        assert!(a.residuals.gamma_of_nu < 1e-12);
        assert!(a.residuals.nu_sv < 1e-5);
    }

    #[test]
    fn log_grid_endpoints() {
        let g: Vec<f64> = default_p_grid();
        assert_eq!(g.len(), 200);
        assert!((g[0] - 1.01).abs() < 1e-15);
        assert_eq!(g[199], 1e4);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
