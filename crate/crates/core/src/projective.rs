//! Complex projective space primitives.
//!
//! A point of `CP^d` is stored as a unit-norm representative in `C^{d+1}`.
//! The affine chart `ψ_d : C^d → CP^d, z ↦ (1, z)` and its Jacobian relate
//! Lebesgue measure on `C^d` to the Fubini–Study volume, whose total mass is
//! `π^d / d!`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{special, Error, Result};

/// Tolerance on `| ‖coords‖ − 1 |` under which a representative is kept verbatim.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-12;

/// Two points are projectively equal when `1 − |⟨p, q⟩| ≤ PROJECTIVE_EQUALITY_TOLERANCE`.
pub const PROJECTIVE_EQUALITY_TOLERANCE: f64 = 1e-9;

/// Below this value of `sin² d(p, q)` the direct formula `1 − |⟨p,q⟩|²` loses
/// too many digits and the Lagrange identity is used instead.
const CANCELLATION_THRESHOLD: f64 = 1e-2;

/// `⟨z, w⟩ = Σ z_i · conj(w_i)`, linear in the first argument.
pub fn inner(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm_sqr(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

/// Unit-norm representative of a point in `CP^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct ProjectivePoint {
    coords: Vec<Complex64>,
}

impl ProjectivePoint {
    /// Builds a point from any nonzero representative.
    ///
    /// Representatives that are already unit-norm within
    /// [`UNIT_NORM_TOLERANCE`] are stored unchanged so that serialized samples
    /// round-trip exactly; anything else is rescaled.
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid(format!(
                "a projective point needs at least 2 homogeneous coordinates, got {}",
                coords.len()
            )));
        }
        if coords
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::invalid("projective coordinates must be finite"));
        }
        let norm = norm_sqr(&coords).sqrt();
        if norm == 0.0 {
            return Err(Error::invalid(
                "the zero vector does not represent a projective point",
            ));
        }
        if (norm - 1.0).abs() <= UNIT_NORM_TOLERANCE {
            return Ok(ProjectivePoint { coords });
        }
        let scale = 1.0 / norm;
        Ok(ProjectivePoint {
            coords: coords.into_iter().map(|c| c * scale).collect(),
        })
    }

    /// The `i`-th standard basis vector of `C^{d+1}`.
    pub fn basis(d: usize, i: usize) -> Self {
        assert!(d >= 1 && i <= d, "basis index out of range");
        let mut coords = vec![Complex64::new(0.0, 0.0); d + 1];
        coords[i] = Complex64::new(1.0, 0.0);
        ProjectivePoint { coords }
    }

    /// Complex dimension `d` of the ambient `CP^d`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.coords
    }

    /// The same projective point with its representative multiplied by `e^{iθ}`.
    pub fn with_phase(&self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        ProjectivePoint {
            coords: self.coords.iter().map(|c| c * phase).collect(),
        }
    }

    pub fn is_projectively_equal(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && 1.0 - inner(&self.coords, &other.coords).norm() <= PROJECTIVE_EQUALITY_TOLERANCE
    }
}

impl TryFrom<Vec<Complex64>> for ProjectivePoint {
    type Error = Error;

    fn try_from(coords: Vec<Complex64>) -> Result<Self> {
        ProjectivePoint::new(coords)
    }
}

impl From<ProjectivePoint> for Vec<Complex64> {
    fn from(p: ProjectivePoint) -> Self {
        p.coords
    }
}

/// A point `z` of the affine chart `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    z: Vec<Complex64>,
}

impl ChartPoint {
    pub fn new(z: Vec<Complex64>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::invalid("chart points need d >= 1 coordinates"));
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("chart coordinates must be finite"));
        }
        Ok(ChartPoint { z })
    }

    pub fn origin(d: usize) -> Self {
        assert!(d >= 1);
        ChartPoint {
            z: vec![Complex64::new(0.0, 0.0); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.z
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.z)
    }
}

fn check_same_dim(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    Ok(())
}

/// `sin² d(p, q) = 1 − |⟨p, q⟩|²` for unit representatives, in `[0, 1]`.
///
/// Close to coincidence the value is recomputed through the Lagrange identity
/// `‖p‖²‖q‖² − |⟨p,q⟩|² = Σ_{i<j} |p_i q_j − p_j q_i|²`, which has no
/// cancellation and is exactly zero for identical representatives.
pub fn fubini_sin_distance_sqr(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<f64> {
    check_same_dim(p, q)?;
    Ok(sin_sqr_unchecked(p.coords(), q.coords()))
}

pub(crate) fn sin_sqr_unchecked(p: &[Complex64], q: &[Complex64]) -> f64 {
    let direct = 1.0 - inner(p, q).norm_sqr();
    if direct > CANCELLATION_THRESHOLD {
        return direct.min(1.0);
    }
    let mut acc = 0.0;
    for i in 0..p.len() {
        for j in (i + 1)..p.len() {
            acc += (p[i] * q[j] - p[j] * q[i]).norm_sqr();
        }
    }
    acc.clamp(0.0, 1.0)
}

/// Sine of the Fubini–Study distance, `sqrt(1 − |⟨p, q⟩|²)`.
pub fn fubini_sin_distance(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<f64> {
    fubini_sin_distance_sqr(p, q).map(f64::sqrt)
}

/// `ψ_d(z) = (1, z) / sqrt(1 + ‖z‖²)`.
pub fn chart_to_projective(z: &ChartPoint) -> ProjectivePoint {
    let scale = 1.0 / (1.0 + z.norm_sqr()).sqrt();
    let mut coords = Vec::with_capacity(z.dim() + 1);
    coords.push(Complex64::new(scale, 0.0));
    coords.extend(z.coords().iter().map(|c| c * scale));
    ProjectivePoint { coords }
}

/// Inverse of [`chart_to_projective`]: `(p_1/p_0, …, p_d/p_0)`.
pub fn projective_to_chart(p: &ProjectivePoint) -> Result<ChartPoint> {
    let head = p.coords[0];
    if head.norm() <= PROJECTIVE_EQUALITY_TOLERANCE {
        return Err(Error::PointAtInfinity);
    }
    ChartPoint::new(p.coords[1..].iter().map(|c| c / head).collect())
}

/// Jacobian of `ψ_d` at `z`: `(1 + ‖z‖²)^{-(d+1)}`.
pub fn chart_jacobian(z: &ChartPoint) -> f64 {
    chart_jacobian_radial(z.norm_sqr(), z.dim())
}

/// [`chart_jacobian`] as a function of `‖z‖²`.
pub fn chart_jacobian_radial(norm_sqr: f64, d: usize) -> f64 {
    (1.0 + norm_sqr).powi(-(d as i32 + 1))
}

/// Fubini–Study volume of `CP^d`, `π^d / d!`.
pub fn volume(d: usize) -> f64 {
    (d as f64 * std::f64::consts::PI.ln() - special::ln_factorial(d)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sin_distance_examples() {
        let e1 = ProjectivePoint::basis(1, 0);
        let e2 = ProjectivePoint::basis(1, 1);
        assert_eq!(fubini_sin_distance(&e1, &e2).unwrap(), 1.0);
        assert_eq!(fubini_sin_distance(&e1, &e1).unwrap(), 0.0);

        let q = ProjectivePoint::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_relative_eq!(
            fubini_sin_distance(&e1, &q).unwrap(),
            0.5f64.sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn sin_distance_rejects_dimension_mismatch() {
        let p = ProjectivePoint::basis(1, 0);
        let q = ProjectivePoint::basis(2, 0);
        assert!(matches!(
            fubini_sin_distance(&p, &q),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sin_distance_near_coincidence_keeps_digits() {
        // Points separated by an angle of 1e-10 have sin distance 1e-10; the
        // direct formula would return 0 or ~1e-8 garbage.
        let eps: f64 = 1e-10;
        let p = ProjectivePoint::basis(2, 0);
        let q =
            ProjectivePoint::new(vec![c(eps.cos(), 0.0), c(0.0, eps.sin()), c(0.0, 0.0)]).unwrap();
        assert_relative_eq!(
            fubini_sin_distance(&p, &q).unwrap(),
            eps,
            max_relative = 1e-12
        );
    }

    #[test]
    fn chart_examples() {
        let origin = ChartPoint::origin(2);
        assert_eq!(chart_to_projective(&origin), ProjectivePoint::basis(2, 0));

        let one = ChartPoint::new(vec![c(1.0, 0.0)]).unwrap();
        let p = chart_to_projective(&one);
        let h = 0.5f64.sqrt();
        assert_relative_eq!(p.coords()[0].re, h, max_relative = 1e-15);
        assert_relative_eq!(p.coords()[1].re, h, max_relative = 1e-15);

        let back = projective_to_chart(&p).unwrap();
        assert_relative_eq!(back.coords()[0].re, 1.0, max_relative = 1e-15);
        assert_eq!(
            projective_to_chart(&ProjectivePoint::basis(2, 0)).unwrap(),
            ChartPoint::origin(2)
        );
    }

    #[test]
    fn point_at_infinity() {
        let p = ProjectivePoint::basis(1, 1);
        assert!(matches!(
            projective_to_chart(&p),
            Err(Error::PointAtInfinity)
        ));
    }

    #[test]
    fn jacobian_examples() {
        for d in 1..5 {
            assert_eq!(chart_jacobian(&ChartPoint::origin(d)), 1.0);
        }
        let z = ChartPoint::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert_relative_eq!(chart_jacobian(&z), 0.125, max_relative = 1e-15);
    }

    #[test]
    fn construction_normalizes() {
        let p = ProjectivePoint::new(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert_relative_eq!(norm_sqr(p.coords()), 1.0, max_relative = 1e-15);
        assert!(ProjectivePoint::new(vec![c(0.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(ProjectivePoint::new(vec![c(1.0, 0.0)]).is_err());
        assert!(ChartPoint::new(vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn projective_equality_ignores_phase() {
        let p = ProjectivePoint::new(vec![c(0.3, 0.1), c(-0.2, 0.9), c(0.1, 0.1)]).unwrap();
        assert!(p.is_projectively_equal(&p.with_phase(2.1)));
        assert!(!p.is_projectively_equal(&ProjectivePoint::basis(2, 0)));
    }

    #[test]
    fn volume_values() {
        assert_relative_eq!(volume(1), std::f64::consts::PI, max_relative = 1e-14);
        assert_relative_eq!(
            volume(3),
            std::f64::consts::PI.powi(3) / 6.0,
            max_relative = 1e-14
        );
    }
}
