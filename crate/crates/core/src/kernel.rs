//! The weighted monomial basis of degree `≤ L` on `C^d` and its reproducing kernel.
//!
//! Basis functions are
//!
//! ```text
//! φ_α(z) = sqrt(C_α) · z^α / (1 + ‖z‖²)^{(d+L+1)/2},
//! C_α    = (d+L)! / (π^d · α_1! ⋯ α_d! · (L − |α|)!)
//! ```
//!
//! for multi-indices with `|α| ≤ L`, ordered graded-lexicographically. They are
//! orthonormal in `L²(C^d)` and span a space of dimension `r = C(d+L, d)`; the
//! pushforward of the associated projection process through the affine chart
//! is the projective ensemble.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::projective::{self, ChartPoint, ProjectivePoint};
use crate::{special, Error, Result};

/// From this degree on, feature vectors are evaluated in log-magnitude/phase form.
pub const LOG_FORM_MIN_DEGREE: usize = 200;

/// Complex dimension `d`, degree `L` and rank `r = C(d+L, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct KernelParams {
    d: usize,
    degree: usize,
    rank: usize,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    d: usize,
    #[serde(rename = "L")]
    degree: usize,
}

impl TryFrom<RawParams> for KernelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        KernelParams::new(raw.d, raw.degree)
    }
}

impl From<KernelParams> for RawParams {
    fn from(p: KernelParams) -> Self {
        RawParams {
            d: p.d,
            degree: p.degree,
        }
    }
}

impl KernelParams {
    pub fn new(d: usize, degree: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d must be >= 1"));
        }
        let rank = binomial(d + degree, d)
            .ok_or_else(|| Error::invalid(format!("rank C({}, {d}) overflows", d + degree)))?;
        Ok(KernelParams { d, degree, rank })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The degree `L`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `r = C(d+L, d)`, the number of points of the ensemble.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `ln(r · d! / π^d)`, the log of the constant diagonal `K_*(p, p)`.
    pub fn ln_diagonal(&self) -> f64 {
        (self.rank as f64).ln() + special::ln_factorial(self.d)
            - self.d as f64 * std::f64::consts::PI.ln()
    }

    /// `r · d! / π^d = r / Vol(CP^d)`.
    pub fn diagonal(&self) -> f64 {
        self.ln_diagonal().exp()
    }
}

/// Exact `C(n, k)`, or `None` if it does not fit in `usize`.
pub fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc = C(n - k + i - 1, i - 1) here, so the division is exact.
        acc = acc.checked_mul(n as u128 - k as u128 + i)? / i;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Exponents `(α_1, …, α_d)` of a monomial in the affine chart.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn total_degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// All multi-indices of length `d` with `|α| ≤ L`, in graded-lexicographic
/// order: by total degree, then lexicographically descending within a degree.
pub fn enumerate_multi_indices(d: usize, degree: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0usize; d];
    for total in 0..=degree {
        compositions(total, 0, &mut current, &mut out);
    }
    out
}

fn compositions(remaining: usize, pos: usize, current: &mut [usize], out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for first in (0..=remaining).rev() {
        current[pos] = first;
        compositions(remaining - first, pos + 1, current, out);
    }
    current[pos] = 0;
}

fn check_alpha(alpha: &MultiIndex, params: &KernelParams) -> Result<()> {
    if alpha.len() != params.d {
        return Err(Error::DimensionMismatch {
            expected: params.d,
            found: alpha.len(),
        });
    }
    if alpha.total_degree() > params.degree {
        return Err(Error::invalid(format!(
            "multi-index degree {} exceeds L = {}",
            alpha.total_degree(),
            params.degree
        )));
    }
    Ok(())
}

/// `ln C_α`, evaluated through log-factorials.
pub fn ln_basis_coefficient(alpha: &MultiIndex, params: &KernelParams) -> Result<f64> {
    check_alpha(alpha, params)?;
    let d = params.d;
    let l = params.degree;
    let denom: f64 = alpha
        .0
        .iter()
        .map(|&a| special::ln_factorial(a))
        .sum::<f64>()
        + special::ln_factorial(l - alpha.total_degree());
    Ok(special::ln_factorial(d + l) - denom - d as f64 * std::f64::consts::PI.ln())
}

/// `C_α = (d+L)! / (π^d α! (L − |α|)!)`.
pub fn basis_coefficient(alpha: &MultiIndex, params: &KernelParams) -> Result<f64> {
    ln_basis_coefficient(alpha, params).map(f64::exp)
}

/// Values of all `r` basis functions at one point, in basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<Complex64>);

impl FeatureVector {
    pub fn norm_sqr(&self) -> f64 {
        projective::norm_sqr(&self.0)
    }

    /// `Σ v_i(z) · conj(v_i(w))`.
    pub fn gram(&self, other: &FeatureVector) -> Complex64 {
        projective::inner(&self.0, &other.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Precomputed basis tables for one `(d, L)`.
///
/// Monomials are built incrementally: every index after the constant one has
/// a parent (the same index with one unit removed from its first nonzero
/// entry) that appears earlier in the graded order.
#[derive(Debug, Clone)]
pub struct Basis {
    params: KernelParams,
    indices: Vec<MultiIndex>,
    half_ln_coeff: Vec<f64>,
    // (parent position, variable) for every index except the first.
    parents: Vec<(usize, usize)>,
}

impl Basis {
    pub fn new(params: KernelParams) -> Self {
        let indices = enumerate_multi_indices(params.d, params.degree);
        debug_assert_eq!(indices.len(), params.rank);
        let position: std::collections::HashMap<&MultiIndex, usize> =
            indices.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let half_ln_coeff = indices
            .iter()
            .map(|a| 0.5 * ln_basis_coefficient(a, &params).expect("enumerated index is valid"))
            .collect();
        let parents = indices
            .iter()
            .skip(1)
            .map(|a| {
                let var = a.0.iter().position(|&e| e > 0).expect("non-constant index");
                let mut parent = a.clone();
                parent.0[var] -= 1;
                (position[&parent], var)
            })
            .collect();
        Basis {
            params,
            indices,
            half_ln_coeff,
            parents,
        }
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    fn check_chart(&self, z: &ChartPoint) -> Result<()> {
        if z.dim() != self.params.d {
            return Err(Error::DimensionMismatch {
                expected: self.params.d,
                found: z.dim(),
            });
        }
        Ok(())
    }

    /// Chart monomials `z^α` in basis order.
    fn monomials(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut mono = Vec::with_capacity(self.indices.len());
        mono.push(Complex64::new(1.0, 0.0));
        for &(parent, var) in &self.parents {
            let next = mono[parent] * z[var];
            mono.push(next);
        }
        mono
    }

    /// Basis values at `z`; switches to log form for `L ≥` [`LOG_FORM_MIN_DEGREE`].
    pub fn feature_vector(&self, z: &ChartPoint) -> Result<FeatureVector> {
        if self.params.degree >= LOG_FORM_MIN_DEGREE {
            self.feature_vector_log(z)
        } else {
            self.feature_vector_direct(z)
        }
    }

    pub fn feature_vector_direct(&self, z: &ChartPoint) -> Result<FeatureVector> {
        self.check_chart(z)?;
        let exponent = -0.5 * (self.params.d + self.params.degree + 1) as f64;
        let damping = (1.0 + z.norm_sqr()).powf(exponent);
        let mono = self.monomials(z.coords());
        Ok(FeatureVector(
            mono.into_iter()
                .zip(&self.half_ln_coeff)
                .map(|(m, &h)| m * (h.exp() * damping))
                .collect(),
        ))
    }

    /// Same values as [`Basis::feature_vector_direct`], accumulated as
    /// `(ln|v_α|, arg v_α)` so that large `C_α` and tiny `|z|^α` never meet in
    /// floating point.
    pub fn feature_vector_log(&self, z: &ChartPoint) -> Result<FeatureVector> {
        self.check_chart(z)?;
        let ln_damping =
            -0.5 * (self.params.d + self.params.degree + 1) as f64 * z.norm_sqr().ln_1p();
        let logs: Vec<(f64, f64)> = z
            .coords()
            .iter()
            .map(|c| (c.norm().ln(), c.arg()))
            .collect();
        Ok(self.log_form(&logs, |_| 0.0, ln_damping))
    }

    fn log_form(
        &self,
        logs: &[(f64, f64)],
        extra: impl Fn(usize) -> f64,
        ln_scale: f64,
    ) -> FeatureVector {
        FeatureVector(
            self.indices
                .iter()
                .zip(&self.half_ln_coeff)
                .map(|(alpha, &h)| {
                    let mut ln_mag = h + ln_scale + extra(alpha.total_degree());
                    let mut phase = 0.0;
                    for (&e, &(ln_abs, arg)) in alpha.0.iter().zip(logs) {
                        if e > 0 {
                            ln_mag += e as f64 * ln_abs;
                            phase += e as f64 * arg;
                        }
                    }
                    Complex64::from_polar(ln_mag.exp(), phase)
                })
                .collect(),
        )
    }

    /// Basis values pulled back to `CP^d` through the chart, as homogeneous
    /// polynomials: `sqrt(C_α) · p_0^{L−|α|} · p_1^{α_1} ⋯ p_d^{α_d}`.
    ///
    /// For `p = ψ_d(z)` this equals `v(z) / sqrt(Jac ψ_d(z))`, and for any other
    /// representative it differs by a common unit phase. Its squared norm is
    /// the constant `r·d!/π^d`, and it stays finite on the hyperplane at
    /// infinity.
    pub fn projective_features(&self, p: &ProjectivePoint) -> Result<FeatureVector> {
        if p.dim() != self.params.d {
            return Err(Error::DimensionMismatch {
                expected: self.params.d,
                found: p.dim(),
            });
        }
        let l = self.params.degree;
        let coords = p.coords();
        if l >= LOG_FORM_MIN_DEGREE {
            let (ln0, arg0) = (coords[0].norm().ln(), coords[0].arg());
            let logs: Vec<(f64, f64)> = coords[1..]
                .iter()
                .map(|c| (c.norm().ln(), c.arg()))
                .collect();
            let mut v = self.log_form(
                &logs,
                |deg| {
                    if deg == l {
                        0.0
                    } else {
                        (l - deg) as f64 * ln0
                    }
                },
                0.0,
            );
            for (x, alpha) in v.0.iter_mut().zip(&self.indices) {
                *x *= Complex64::from_polar(1.0, (l - alpha.total_degree()) as f64 * arg0);
            }
            return Ok(v);
        }
        let mut head_pow = Vec::with_capacity(l + 1);
        head_pow.push(Complex64::new(1.0, 0.0));
        for m in 1..=l {
            head_pow.push(head_pow[m - 1] * coords[0]);
        }
        let mono = self.monomials(&coords[1..]);
        Ok(FeatureVector(
            mono.into_iter()
                .zip(&self.indices)
                .zip(&self.half_ln_coeff)
                .map(|((m, alpha), &h)| m * head_pow[l - alpha.total_degree()] * h.exp())
                .collect(),
        ))
    }
}

/// Convenience wrapper building the basis tables on every call.
pub fn feature_vector(z: &ChartPoint, params: &KernelParams) -> Result<FeatureVector> {
    Basis::new(*params).feature_vector(z)
}

/// Closed-form reproducing kernel
/// `K(z,w) = (r d!/π^d) (1 + ⟨z,w⟩)^L / ((1+‖z‖²)^{(d+L+1)/2} (1+‖w‖²)^{(d+L+1)/2})`.
pub fn kernel_eval(z: &ChartPoint, w: &ChartPoint, params: &KernelParams) -> Result<Complex64> {
    for p in [z, w] {
        if p.dim() != params.d {
            return Err(Error::DimensionMismatch {
                expected: params.d,
                found: p.dim(),
            });
        }
    }
    let l = params.degree as f64;
    let exponent = 0.5 * (params.d + params.degree + 1) as f64;
    let base = Complex64::new(1.0, 0.0) + projective::inner(z.coords(), w.coords());
    let ln_mag = params.ln_diagonal() + l * base.norm().ln()
        - exponent * (z.norm_sqr().ln_1p() + w.norm_sqr().ln_1p());
    let phase = if params.degree == 0 {
        0.0
    } else {
        l * base.arg()
    };
    Ok(Complex64::from_polar(ln_mag.exp(), phase))
}

fn check_pair(p: &ProjectivePoint, q: &ProjectivePoint, params: &KernelParams) -> Result<()> {
    for x in [p, q] {
        if x.dim() != params.d {
            return Err(Error::DimensionMismatch {
                expected: params.d,
                found: x.dim(),
            });
        }
    }
    Ok(())
}

/// `|K_*(p, q)| = (r d!/π^d) |⟨p, q⟩|^L` on unit representatives.
pub fn projective_kernel_magnitude(
    p: &ProjectivePoint,
    q: &ProjectivePoint,
    params: &KernelParams,
) -> Result<f64> {
    check_pair(p, q, params)?;
    let overlap = projective::inner(p.coords(), q.coords()).norm().min(1.0);
    Ok(params.diagonal() * overlap.powf(params.degree as f64))
}

/// Two-point intensity `K_*(p,p) K_*(q,q) − |K_*(p,q)|² = c² (1 − |⟨p,q⟩|^{2L})`.
///
/// `1 − |⟨p,q⟩|^{2L}` is evaluated as `−expm1(L · ln(1 − sin² d(p,q)))` so the
/// value vanishes exactly at coincidence and keeps relative accuracy nearby.
pub fn joint_intensity_2(
    p: &ProjectivePoint,
    q: &ProjectivePoint,
    params: &KernelParams,
) -> Result<f64> {
    check_pair(p, q, params)?;
    if params.degree == 0 {
        return Ok(0.0);
    }
    let sin_sqr = projective::sin_sqr_unchecked(p.coords(), q.coords());
    let gap = -(params.degree as f64 * (-sin_sqr).ln_1p()).exp_m1();
    let c = params.diagonal();
    Ok(c * c * gap.clamp(0.0, 1.0))
}
