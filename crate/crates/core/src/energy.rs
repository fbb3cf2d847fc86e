//! Discrete energies of point configurations.
//!
//! All energies sum a pair kernel over ordered pairs `i ≠ j`, so every
//! unordered pair contributes twice. Configurations with two coincident
//! points (distance below [`COINCIDENCE_FLOOR`]) are not an error: the report
//! carries `value = +∞` and `coincident = true`.

use rayon::prelude::*;
use serde::Serialize;

use crate::projective::{self, ProjectivePoint};
use crate::stats::CompensatedSum;
use crate::{special, Error, Result};

/// Euclidean or sine distances below this value count as coincident.
pub const COINCIDENCE_FLOOR: f64 = 1e-15;

/// Configurations of at least this many points are summed row-parallel.
const PARALLEL_MIN_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyKind {
    Riesz,
    Log,
    ProjectiveRiesz,
    ProjectiveLog,
    Green,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub kind: EnergyKind,
    /// Riesz exponent; 0 for the logarithmic and Green energies.
    pub s: f64,
    /// Serialized as `null` when infinite.
    pub value: f64,
    pub coincident: bool,
    pub n_points: usize,
    /// Matching closed-form expectation, when the caller knows one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
}

impl EnergyReport {
    fn new(kind: EnergyKind, s: f64, n_points: usize, sum: PairSum) -> Self {
        let (value, coincident) = match sum {
            PairSum::Finite(v) => (v, false),
            PairSum::Coincident => (f64::INFINITY, true),
        };
        EnergyReport {
            kind,
            s,
            value,
            coincident,
            n_points,
            expected: None,
        }
    }

    pub fn with_expected(mut self, expected: Option<f64>) -> Self {
        self.expected = expected;
        self
    }

    /// The value, or `None` for coincident configurations.
    pub fn finite_value(&self) -> Option<f64> {
        (!self.coincident).then_some(self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PairSum {
    Finite(f64),
    Coincident,
}

/// `Σ_{i≠j} f(i, j)` for a symmetric `f`; `None` from `f` marks coincidence.
///
/// Row sums over `j > i` are formed independently (possibly in parallel) and
/// then folded in row order, so the result does not depend on scheduling.
fn pair_sum<F>(n: usize, f: F) -> PairSum
where
    F: Fn(usize, usize) -> Option<f64> + Sync,
{
    let row = |i: usize| -> Option<f64> {
        let mut acc = CompensatedSum::new();
        for j in (i + 1)..n {
            acc.add(f(i, j)?);
        }
        Some(acc.value())
    };
    let rows: Vec<Option<f64>> = if n >= PARALLEL_MIN_POINTS {
        (0..n).into_par_iter().map(row).collect()
    } else {
        (0..n).map(row).collect()
    };
    let mut total = CompensatedSum::new();
    for r in rows {
        match r {
            Some(v) => total.add(v),
            None => return PairSum::Coincident,
        }
    }
    PairSum::Finite(2.0 * total.value())
}

fn check_euclidean(points: &[Vec<f64>]) -> Result<()> {
    let Some(first) = points.first() else {
        return Err(Error::invalid("energy needs at least one point"));
    };
    if let Some(bad) = points.iter().find(|p| p.len() != first.len()) {
        return Err(Error::DimensionMismatch {
            expected: first.len(),
            found: bad.len(),
        });
    }
    Ok(())
}

fn check_projective(points: &[ProjectivePoint]) -> Result<usize> {
    let Some(first) = points.first() else {
        return Err(Error::invalid("energy needs at least one point"));
    };
    let d = first.dim();
    if let Some(bad) = points.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.dim(),
        });
    }
    Ok(d)
}

fn dist_sqr(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

const FLOOR_SQR: f64 = COINCIDENCE_FLOOR * COINCIDENCE_FLOOR;

/// Riesz `s`-energy `Σ_{i≠j} ‖x_i − x_j‖^{-s}`.
pub fn riesz_energy(points: &[Vec<f64>], s: f64) -> Result<EnergyReport> {
    check_euclidean(points)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid(format!("Riesz energy needs s > 0, got {s}")));
    }
    let half = -0.5 * s;
    let sum = pair_sum(points.len(), |i, j| {
        let r2 = dist_sqr(&points[i], &points[j]);
        (r2 >= FLOOR_SQR).then(|| r2.powf(half))
    });
    Ok(EnergyReport::new(EnergyKind::Riesz, s, points.len(), sum))
}

/// Logarithmic energy `Σ_{i≠j} ln ‖x_i − x_j‖^{-1}`.
pub fn log_energy(points: &[Vec<f64>]) -> Result<EnergyReport> {
    check_euclidean(points)?;
    let sum = pair_sum(points.len(), |i, j| {
        let r2 = dist_sqr(&points[i], &points[j]);
        (r2 >= FLOOR_SQR).then(|| -0.5 * r2.ln())
    });
    Ok(EnergyReport::new(EnergyKind::Log, 0.0, points.len(), sum))
}

fn sin_sqr_pair(points: &[ProjectivePoint], i: usize, j: usize) -> Option<f64> {
    let s2 = projective::sin_sqr_unchecked(points[i].coords(), points[j].coords());
    (s2 >= FLOOR_SQR).then_some(s2)
}

/// `Σ_{i≠j} sin(d(x_i, x_j))^{-s}` for `0 < s < 2d`.
pub fn projective_riesz_energy(points: &[ProjectivePoint], s: f64) -> Result<EnergyReport> {
    let d = check_projective(points)?;
    if !(s > 0.0 && s < 2.0 * d as f64) {
        return Err(Error::invalid(format!(
            "projective Riesz energy needs 0 < s < 2d = {}, got {s}",
            2 * d
        )));
    }
    let half = -0.5 * s;
    let sum = pair_sum(points.len(), |i, j| {
        sin_sqr_pair(points, i, j).map(|s2| s2.powf(half))
    });
    Ok(EnergyReport::new(
        EnergyKind::ProjectiveRiesz,
        s,
        points.len(),
        sum,
    ))
}

/// `Σ_{i≠j} ln(1 / sin d(x_i, x_j))`.
pub fn projective_log_energy(points: &[ProjectivePoint]) -> Result<EnergyReport> {
    check_projective(points)?;
    let sum = pair_sum(points.len(), |i, j| {
        sin_sqr_pair(points, i, j).map(|s2| -0.5 * s2.ln())
    });
    Ok(EnergyReport::new(
        EnergyKind::ProjectiveLog,
        0.0,
        points.len(),
        sum,
    ))
}

fn check_green_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::invalid(format!(
            "the Green function is only provided for d >= 2, got d = {d}"
        )));
    }
    Ok(())
}

/// Additive constant making the Green function zero-mean:
/// `−((d−1)!/(4π^d)) (1/d + 2 Σ_{k=1}^{d−1} 1/k)`.
pub fn green_constant(d: usize) -> Result<f64> {
    check_green_dim(d)?;
    let prefactor = green_prefactor(d);
    Ok(-0.5 * prefactor * (1.0 / d as f64 + 2.0 * special::harmonic(d - 1)))
}

/// `(d−1)! / (2π^d)`.
fn green_prefactor(d: usize) -> f64 {
    (special::ln_factorial(d - 1) - d as f64 * std::f64::consts::PI.ln()).exp() / 2.0
}

/// Radial profile of the Green function of `CP^d` in terms of `sin² r`:
/// `((d−1)!/(2π^d)) [½ Σ_{k=1}^{d−1} 1/((d−k) sin^{2d−2k} r) − ln sin r] + C`.
pub fn green_profile(d: usize, sin_sqr: f64) -> Result<f64> {
    check_green_dim(d)?;
    if !(sin_sqr > 0.0 && sin_sqr <= 1.0) {
        return Err(Error::invalid(format!(
            "green_profile needs sin² r in (0, 1], got {sin_sqr}"
        )));
    }
    Ok(green_profile_unchecked(
        d,
        sin_sqr,
        green_prefactor(d),
        green_constant(d)?,
    ))
}

fn green_profile_unchecked(d: usize, sin_sqr: f64, prefactor: f64, constant: f64) -> f64 {
    let mut singular = 0.0;
    for m in 1..d {
        // m = d − k runs over 1..d−1
        singular += 1.0 / (m as f64 * sin_sqr.powi(m as i32));
    }
    prefactor * (0.5 * singular - 0.5 * sin_sqr.ln()) + constant
}

/// Green function `G(p, q)` of `CP^d`, `d ≥ 2`; `+∞` at coincidence.
pub fn green_function(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<f64> {
    let d = p.dim();
    check_green_dim(d)?;
    let s2 = projective::fubini_sin_distance_sqr(p, q)?;
    if s2 < FLOOR_SQR {
        return Ok(f64::INFINITY);
    }
    Ok(green_profile_unchecked(
        d,
        s2,
        green_prefactor(d),
        green_constant(d)?,
    ))
}

/// Green energy `Σ_{i≠j} G(x_i, x_j)`.
pub fn green_energy(points: &[ProjectivePoint]) -> Result<EnergyReport> {
    let d = check_projective(points)?;
    check_green_dim(d)?;
    let prefactor = green_prefactor(d);
    let constant = green_constant(d)?;
    let sum = pair_sum(points.len(), |i, j| {
        sin_sqr_pair(points, i, j).map(|s2| green_profile_unchecked(d, s2, prefactor, constant))
    });
    Ok(EnergyReport::new(EnergyKind::Green, 0.0, points.len(), sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn roots_of_unity(k: usize) -> Vec<Vec<f64>> {
        (0..k)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / k as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()
    }

    #[test]
    fn riesz_examples() {
        assert_eq!(riesz_energy(&[vec![1.0, 0.0]], 2.0).unwrap().value, 0.0);
        let antipodal = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        assert_relative_eq!(
            riesz_energy(&antipodal, 2.0).unwrap().value,
            0.5,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            riesz_energy(&roots_of_unity(3), 2.0).unwrap().value,
            2.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn log_examples() {
        let unit = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        assert_eq!(log_energy(&unit).unwrap().value, 0.0);
        let e = vec![vec![0.0], vec![std::f64::consts::E]];
        assert_relative_eq!(log_energy(&e).unwrap().value, -2.0, max_relative = 1e-15);
        for k in 2..10 {
            let v = log_energy(&roots_of_unity(k)).unwrap().value;
            assert_relative_eq!(v, -(k as f64) * (k as f64).ln(), max_relative = 1e-12);
        }
    }

    #[test]
    fn coincident_points_are_flagged() {
        let pts = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = riesz_energy(&pts, 1.0).unwrap();
        assert!(r.coincident);
        assert_eq!(r.value, f64::INFINITY);
        assert_eq!(r.finite_value(), None);
        assert!(log_energy(&pts).unwrap().coincident);

        let p = ProjectivePoint::basis(2, 1);
        let q = p.with_phase(0.7);
        assert!(
            projective_riesz_energy(&[p.clone(), q.clone()], 1.0)
                .unwrap()
                .coincident
        );
        assert!(
            projective_log_energy(&[p.clone(), q.clone()])
                .unwrap()
                .coincident
        );
        assert!(green_energy(&[p.clone(), q.clone()]).unwrap().coincident);
        assert_eq!(green_function(&p, &q).unwrap(), f64::INFINITY);
    }

    #[test]
    fn input_validation() {
        assert!(riesz_energy(&[], 1.0).is_err());
        assert!(riesz_energy(&[vec![1.0], vec![1.0, 2.0]], 1.0).is_err());
        assert!(riesz_energy(&[vec![1.0]], 0.0).is_err());
        let pts = [ProjectivePoint::basis(1, 0), ProjectivePoint::basis(1, 1)];
        assert!(projective_riesz_energy(&pts, 2.0).is_err());
        assert!(projective_riesz_energy(&pts, 0.0).is_err());
        assert!(green_energy(&pts).is_err());
        assert!(green_constant(1).is_err());
        let mixed = [ProjectivePoint::basis(1, 0), ProjectivePoint::basis(2, 1)];
        assert!(projective_log_energy(&mixed).is_err());
    }

    #[test]
    fn projective_examples() {
        let e0 = ProjectivePoint::basis(2, 0);
        let e1 = ProjectivePoint::basis(2, 1);
        for s in [0.5, 1.0, 3.5] {
            assert_eq!(
                projective_riesz_energy(&[e0.clone(), e1.clone()], s)
                    .unwrap()
                    .value,
                2.0
            );
        }
        let h = 0.5f64.sqrt();
        let q = ProjectivePoint::new(vec![c(h, 0.0), c(0.0, h), c(0.0, 0.0)]).unwrap();
        assert_relative_eq!(
            projective_riesz_energy(&[e0.clone(), q], 2.0)
                .unwrap()
                .value,
            4.0,
            max_relative = 1e-14
        );
        assert_eq!(
            projective_riesz_energy(std::slice::from_ref(&e0), 1.0)
                .unwrap()
                .value,
            0.0
        );

        assert_eq!(
            projective_log_energy(&[e0.clone(), e1.clone()])
                .unwrap()
                .value,
            0.0
        );
        // sin d = 1/2  <=>  |⟨p, q⟩|² = 3/4
        let q =
            ProjectivePoint::new(vec![c(0.75f64.sqrt(), 0.0), c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        assert_relative_eq!(
            projective_log_energy(&[e0.clone(), q]).unwrap().value,
            2.0 * 2f64.ln(),
            max_relative = 1e-13
        );
        assert_eq!(projective_log_energy(&[e0]).unwrap().value, 0.0);
    }

    #[test]
    fn green_examples() {
        assert_relative_eq!(
            green_constant(2).unwrap(),
            -5.0 / (8.0 * PI * PI),
            max_relative = 1e-14
        );
        let e0 = ProjectivePoint::basis(2, 0);
        let e1 = ProjectivePoint::basis(2, 1);
        assert_relative_eq!(
            green_function(&e0, &e1).unwrap(),
            -3.0 / (8.0 * PI * PI),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            green_energy(&[e0.clone(), e1]).unwrap().value,
            -3.0 / (4.0 * PI * PI),
            max_relative = 1e-14
        );
        assert_eq!(green_energy(&[e0]).unwrap().value, 0.0);
    }

    #[test]
    fn green_is_exactly_symmetric() {
        let p = ProjectivePoint::new(vec![c(0.3, 0.2), c(-0.5, 0.1), c(0.2, 0.7), c(0.1, -0.1)])
            .unwrap();
        let q = ProjectivePoint::new(vec![c(0.1, -0.6), c(0.4, 0.4), c(0.0, 0.2), c(-0.3, 0.3)])
            .unwrap();
        assert_eq!(
            green_function(&p, &q).unwrap(),
            green_function(&q, &p).unwrap()
        );
    }

    #[test]
    fn homothety_covariance() {
        let pts: Vec<Vec<f64>> = (0..7)
            .map(|i| {
                vec![
                    (i as f64 * 0.7).sin(),
                    (i as f64 * 1.3).cos(),
                    i as f64 * 0.1,
                ]
            })
            .collect();
        let scaled: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| p.iter().map(|x| 2.0 * x).collect())
            .collect();
        for s in [0.5, 1.0, 2.0, 3.3] {
            let a = riesz_energy(&pts, s).unwrap().value;
            let b = riesz_energy(&scaled, s).unwrap().value;
            assert_relative_eq!(b, a * 2f64.powf(-s), max_relative = 1e-12);
        }
    }

    #[test]
    fn parallel_and_serial_paths_agree() {
        // Above the parallel threshold the row sums are computed on the pool;
        // the fold order is the same as the serial loop.
        let n = PARALLEL_MIN_POINTS + 10;
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![(i as f64).sin(), (i as f64 * 0.37).cos(), i as f64 * 1e-3])
            .collect();
        let parallel = riesz_energy(&pts, 1.5).unwrap().value;
        let serial = {
            let mut total = CompensatedSum::new();
            for i in 0..n {
                let mut row = CompensatedSum::new();
                for j in (i + 1)..n {
                    row.add(dist_sqr(&pts[i], &pts[j]).powf(-0.75));
                }
                total.add(row.value());
            }
            2.0 * total.value()
        };
        assert_eq!(parallel, serial);
    }
}
