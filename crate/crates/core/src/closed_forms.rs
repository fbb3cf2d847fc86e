//! Exact expected energies of the projective ensemble and of its sphere lift,
//! their large-`r` expansions, the bound constants for the sphere 2-energy,
//! and an independent quadrature route to the projective Riesz expectation.
//!
//! Gamma-function ratios are always formed in log space.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::kernel::KernelParams;
use crate::quadrature::{self, QuadOptions, QuadResult};
use crate::special::{self, beta, harmonic, ln_factorial, log_gamma};
use crate::{Error, Result};

pub use crate::special::{digamma, ln_beta};

/// Exact expectation plus the pieces of its asymptotic expansion.
///
/// `leading_term + fiber_term + second_order_term` is the truncated
/// expansion; `second_order_term` is `second_order_coefficient` times the
/// appropriate power of `r` (and of `k`, `ln r` where relevant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedEnergy {
    pub exact: f64,
    pub leading_term: f64,
    pub second_order_coefficient: f64,
    pub second_order_exponent: f64,
    /// Power of `ln r` multiplying the second-order term (1 for the log energy).
    pub second_order_log_power: u32,
    pub second_order_term: f64,
    /// `r k³ / 12`, present for the sphere 2-energy only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fiber_term: Option<f64>,
}

impl ExpectedEnergy {
    pub fn asymptotic(&self) -> f64 {
        self.leading_term + self.fiber_term.unwrap_or(0.0) + self.second_order_term
    }
}

/// Constants of the second-order term of the sphere 2-energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub d: usize,
    /// Minimiser `A_d` of the second-order coefficient `f(A)`.
    pub a_opt: f64,
    pub f_at_a_opt: f64,
    /// Lower bound on `limsup C_{2,2d+1,n}` from the lifted projective ensemble.
    pub projective_bound: f64,
    /// Corresponding bound from the harmonic ensemble.
    pub harmonic_bound: f64,
}

fn check_s(d: usize, s: f64) -> Result<()> {
    if !(s > 0.0 && s < 2.0 * d as f64) {
        return Err(Error::invalid(format!(
            "s must lie in (0, 2d) = (0, {}), got {s}",
            2 * d
        )));
    }
    Ok(())
}

fn params_with_positive_degree(d: usize, degree: usize) -> Result<KernelParams> {
    if degree == 0 {
        return Err(Error::invalid("expected energies need L >= 1"));
    }
    KernelParams::new(d, degree)
}

/// Continuous `s`-energy of the normalised surface measure on `S^dim`:
/// `2^{dim−s−1} Γ((dim+1)/2) Γ((dim−s)/2) / (√π Γ(dim − s/2))`.
pub fn continuous_sphere_energy(dim: usize, s: f64) -> Result<f64> {
    let n = dim as f64;
    if dim == 0 || !(s > 0.0 && s < n) {
        return Err(Error::invalid(format!(
            "continuous sphere energy needs 0 < s < dim = {dim}, got {s}"
        )));
    }
    let ln = (n - s - 1.0) * 2f64.ln() + log_gamma(0.5 * (n + 1.0))? + log_gamma(0.5 * (n - s))?
        - 0.5 * PI.ln()
        - log_gamma(n - 0.5 * s)?;
    Ok(ln.exp())
}

/// Continuous `s`-energy of the uniform measure on `CP^d`, `d / (d − s/2)`.
pub fn continuous_projective_energy(d: usize, s: f64) -> Result<f64> {
    check_s(d, s)?;
    Ok(d as f64 / (d as f64 - 0.5 * s))
}

/// `E[Σ_{i≠j} sin d(x_i, x_j)^{-s}] = d/(d−s/2) r² − r² d B(d − s/2, L + 1)`.
pub fn expected_projective_riesz(d: usize, degree: usize, s: f64) -> Result<ExpectedEnergy> {
    check_s(d, s)?;
    let params = params_with_positive_degree(d, degree)?;
    let r = params.rank() as f64;
    let df = d as f64;
    let a = df - 0.5 * s;
    let leading = df / a * r * r;
    let exact = leading - r * r * df * beta(a, degree as f64 + 1.0)?;
    let exponent = 1.0 + s / (2.0 * df);
    let coefficient = -(df.ln() + log_gamma(a)? - (1.0 - s / (2.0 * df)) * ln_factorial(d)).exp();
    Ok(ExpectedEnergy {
        exact,
        leading_term: leading,
        second_order_coefficient: coefficient,
        second_order_exponent: exponent,
        second_order_log_power: 0,
        second_order_term: coefficient * r.powf(exponent),
        fiber_term: None,
    })
}

/// `E[Σ_{i≠j} ln(1/sin d(x_i, x_j))] = r²/(2d) − (r² d/2) B(d, L+1) Σ_{j=0}^{L} 1/(d+j)`,
/// the derivative at `s = 0` of [`expected_projective_riesz`].
///
/// The correction is negative, like that of the Riesz energies: the ensemble
/// is more spread out than independent uniform points, whose expected log
/// energy is `r(r−1)/(2d)`.
pub fn expected_projective_log(d: usize, degree: usize) -> Result<ExpectedEnergy> {
    let params = params_with_positive_degree(d, degree)?;
    let r = params.rank() as f64;
    let df = d as f64;
    let tail: f64 = (0..=degree).map(|j| 1.0 / (df + j as f64)).sum();
    let leading = r * r / (2.0 * df);
    let exact = leading - 0.5 * r * r * df * beta(df, degree as f64 + 1.0)? * tail;
    let coefficient = -1.0 / (2.0 * df);
    Ok(ExpectedEnergy {
        exact,
        leading_term: leading,
        second_order_coefficient: coefficient,
        second_order_exponent: 1.0,
        second_order_log_power: 1,
        second_order_term: coefficient * r * r.ln(),
        fiber_term: None,
    })
}

/// Riesz 2-energy of the `k`-th roots of unity, `k(k² − 1)/12`.
pub fn roots_of_unity_2energy(k: usize) -> f64 {
    let k = k as f64;
    k * (k * k - 1.0) / 12.0
}

/// Expected Riesz 2-energy of the `n = k r` lifted points on `S^{2d+1}`:
/// `r k(k²−1)/12 + (k²/2) E[E_1^P]`, the fiber part being exact.
pub fn expected_sphere_2energy_exact(d: usize, degree: usize, k: usize) -> Result<ExpectedEnergy> {
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    sphere_2energy_with_real_k(d, degree, k as f64)
}

/// [`expected_sphere_2energy_exact`] with the same formula evaluated at a real
/// `k`, as needed when `k` is tied to `r` by `k = A r^{1/(2d)}`.
pub fn sphere_2energy_with_real_k(d: usize, degree: usize, k: f64) -> Result<ExpectedEnergy> {
    if k.is_nan() || k < 1.0 {
        return Err(Error::invalid(format!("k must be >= 1, got {k}")));
    }
    let projective = expected_projective_riesz(d, degree, 1.0)?;
    let r = KernelParams::new(d, degree)?.rank() as f64;
    let df = d as f64;
    let fiber_exact = r * k * (k * k - 1.0) / 12.0;
    let exact = fiber_exact + 0.5 * k * k * projective.exact;
    let exponent = 1.0 + 1.0 / (2.0 * df);
    let coefficient = 0.5 * projective.second_order_coefficient;
    Ok(ExpectedEnergy {
        exact,
        leading_term: df / (2.0 * df - 1.0) * (k * r) * (k * r),
        second_order_coefficient: coefficient,
        second_order_exponent: exponent,
        second_order_log_power: 0,
        second_order_term: coefficient * k * k * r.powf(exponent),
        fiber_term: Some(r * k * k * k / 12.0),
    })
}

/// Expected Green energy of the projective ensemble (`d ≥ 2`), composed from
/// the projective Riesz expectations at `s = 2d − 2k` and the log expectation.
///
/// The `r²` terms cancel, so `leading_term` is 0 and the expansion starts at
/// `−(d!)^{1−1/d} / (4π^d (d−1)) · r^{2−1/d}`.
pub fn expected_green_energy(d: usize, degree: usize) -> Result<ExpectedEnergy> {
    if d < 2 {
        return Err(Error::invalid(format!(
            "expected Green energy needs d >= 2, got d = {d}"
        )));
    }
    let params = params_with_positive_degree(d, degree)?;
    let r = params.rank() as f64;
    let df = d as f64;
    let ln_pi_d = df * PI.ln();
    let prefactor = (ln_factorial(d - 1) - ln_pi_d).exp() / 2.0;

    let mut bracket = expected_projective_log(d, degree)?.exact;
    for k in 1..d {
        let m = (d - k) as f64;
        bracket += expected_projective_riesz(d, degree, 2.0 * m)?.exact / (2.0 * m);
    }
    let constant_sum = 1.0 / df + 2.0 * harmonic(d - 1);
    let exact = prefactor * bracket - r * (r - 1.0) * 0.5 * prefactor * constant_sum;

    let exponent = 2.0 - 1.0 / df;
    let coefficient =
        -((1.0 - 1.0 / df) * ln_factorial(d) - (4.0f64).ln() - ln_pi_d - (df - 1.0).ln()).exp();
    Ok(ExpectedEnergy {
        exact,
        leading_term: 0.0,
        second_order_coefficient: coefficient,
        second_order_exponent: exponent,
        second_order_log_power: 0,
        second_order_term: coefficient * r.powf(exponent),
        fiber_term: None,
    })
}

/// Second-order coefficient `f(A)` of `n^{1+2/(2d+1)}` when `k = A r^{1/(2d)}`.
pub fn second_order_coefficient_f(d: usize, a: f64) -> Result<f64> {
    if d == 0 || a.is_nan() || a <= 0.0 {
        return Err(Error::invalid("f(A) needs d >= 1 and A > 0"));
    }
    let df = d as f64;
    let e = 2.0 / (2.0 * df + 1.0);
    let c = cross_coefficient(d)?;
    Ok(a.powf(2.0 - e) / 12.0 - c * a.powf(1.0 - e))
}

/// `d Γ(d − 1/2) / (2 (d!)^{1 − 1/(2d)})`.
fn cross_coefficient(d: usize) -> Result<f64> {
    let df = d as f64;
    Ok(
        (df.ln() + log_gamma(df - 0.5)? - 2f64.ln() - (1.0 - 1.0 / (2.0 * df)) * ln_factorial(d))
            .exp(),
    )
}

pub fn bound_constants(d: usize) -> Result<BoundConstants> {
    if d == 0 {
        return Err(Error::invalid("bound constants need d >= 1"));
    }
    let df = d as f64;
    let e = 2.0 / (2.0 * df + 1.0);
    let lg = log_gamma(df - 0.5)?;
    let lf = ln_factorial(d);
    let ln2 = 2f64.ln();

    let a_opt =
        (3f64.ln() + lg + (2.0 * df - 1.0).ln() - ln2 - (1.0 - 1.0 / (2.0 * df)) * lf).exp();
    let f_at_a_opt = second_order_coefficient_f(d, a_opt)?;

    let ln_projective = (1.0 - e) * 3f64.ln()
        + (1.0 - e) * (2.0 * df - 1.0).ln()
        + (2.0 * df + 1.0).ln()
        + (2.0 - e) * lg
        - (4.0 - e) * ln2
        - (2.0 - 2.0 * e) * lf;
    let ln_harmonic = (1.0 - e) * ln2 + e * ln_factorial(2 * d + 1)
        - (2.0 * df - 1.0).ln()
        - (2.0 * df + 3.0).ln();

    Ok(BoundConstants {
        d,
        a_opt,
        f_at_a_opt,
        projective_bound: ln_projective.exp(),
        harmonic_bound: ln_harmonic.exp(),
    })
}

/// Quadrature route to [`expected_projective_riesz`].
///
/// With `u = t²/(1+t²)` the radial integral
/// `2r²d ∫_0^∞ [1 − (1+t²)^{-L}] (1 − 1/(1+t²))^{-s/2} (1+t²)^{-(d+1)} t^{2d−1} dt`
/// becomes `r² d ∫_0^1 [1 − (1−u)^L] u^{d−1−s/2} du`, which is integrated
/// adaptively without using any Beta-function identity.
pub fn quadrature_expected_projective_riesz(d: usize, degree: usize, s: f64) -> Result<QuadResult> {
    check_s(d, s)?;
    let params = params_with_positive_degree(d, degree)?;
    let r = params.rank() as f64;
    let l = degree as f64;
    let exponent = d as f64 - 1.0 - 0.5 * s;
    let integrand = |u: f64| -(l * (-u).ln_1p()).exp_m1() * u.powf(exponent);
    let scale = r * r * d as f64;
    let res = quadrature::integrate(integrand, 0.0, 1.0, QuadOptions::default())?;
    Ok(QuadResult {
        value: scale * res.value,
        abs_error: scale * res.abs_error,
        intervals: res.intervals,
    })
}

/// Quadrature route to [`expected_projective_log`]:
/// `r² d ∫_0^1 [1 − (1−u)^L] u^{d−1} (−ln u / 2) du`.
pub fn quadrature_expected_projective_log(d: usize, degree: usize) -> Result<QuadResult> {
    let params = params_with_positive_degree(d, degree)?;
    let r = params.rank() as f64;
    let l = degree as f64;
    let exponent = d as f64 - 1.0;
    let integrand = |u: f64| -(l * (-u).ln_1p()).exp_m1() * u.powf(exponent) * (-0.5 * u.ln());
    let scale = r * r * d as f64;
    let res = quadrature::integrate(integrand, 0.0, 1.0, QuadOptions::default())?;
    Ok(QuadResult {
        value: scale * res.value,
        abs_error: scale * res.abs_error,
        intervals: res.intervals,
    })
}

/// `d/dt B(t, m) = −B(t, m) Σ_{j=0}^{m−1} 1/(t + j)` for integer `m ≥ 1`.
pub fn beta_derivative_first_arg(t: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("beta derivative needs m >= 1"));
    }
    let sum: f64 = (0..m).map(|j| 1.0 / (t + j as f64)).sum();
    Ok(-special::beta(t, m as f64)? * sum)
}
