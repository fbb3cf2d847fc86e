//! Lifting projective samples to the odd-dimensional sphere `S^{2d+1}`.
//!
//! Each projective point `x_i` becomes the `k` unit vectors
//! `y_i^j = e^{i(θ_i + 2πj/k)} x_i`, `j = 0..k`, with one uniform phase `θ_i`
//! per point.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use crate::kernel::KernelParams;
use crate::sampler::ProjectiveSample;
use crate::{Error, Result};

/// `n = k·r` unit vectors of `C^{d+1}`, stored fiber by fiber: the `k` lifts
/// of the first projective point, then the `k` lifts of the second, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereConfiguration {
    pub points: Vec<Vec<Complex64>>,
    pub k: usize,
    pub phases: Vec<f64>,
    pub source_params: KernelParams,
    pub source_seed: Option<u64>,
}

impl SphereConfiguration {
    /// The `k` points lifted from projective point `i`.
    pub fn fiber(&self, i: usize) -> &[Vec<Complex64>] {
        &self.points[i * self.k..(i + 1) * self.k]
    }

    pub fn fiber_count(&self) -> usize {
        self.phases.len()
    }

    /// Complex dimension `d` (points live in `C^{d+1}`).
    pub fn d(&self) -> usize {
        self.source_params.d()
    }
}

/// Lifts every point of `sample` to `k` equally phase-spaced representatives.
///
/// Phases are drawn from `rng` in point order, one uniform draw per point.
pub fn lift_to_sphere<R: Rng + ?Sized>(
    sample: &ProjectiveSample,
    k: usize,
    rng: &mut R,
) -> Result<SphereConfiguration> {
    if k == 0 {
        return Err(Error::invalid("lift needs k >= 1"));
    }
    let mut points = Vec::with_capacity(sample.points.len() * k);
    let mut phases = Vec::with_capacity(sample.points.len());
    for x in &sample.points {
        let mut theta = rng.random::<f64>() * TAU;
        if theta >= TAU {
            theta = 0.0;
        }
        phases.push(theta);
        for j in 0..k {
            let rot = Complex64::from_polar(1.0, theta + TAU * j as f64 / k as f64);
            points.push(x.coords().iter().map(|c| c * rot).collect());
        }
    }
    Ok(SphereConfiguration {
        points,
        k,
        phases,
        source_params: sample.params,
        source_seed: sample.seed,
    })
}

/// `(z_0, …, z_d) ↦ (Re z_0, Im z_0, …, Re z_d, Im z_d)`.
pub fn realify_vector(v: &[Complex64]) -> Vec<f64> {
    v.iter().flat_map(|c| [c.re, c.im]).collect()
}

/// Identifies the unit sphere of `C^{d+1}` with `S^{2d+1} ⊂ R^{2d+2}`.
pub fn realify(config: &SphereConfiguration) -> Vec<Vec<f64>> {
    config.points.iter().map(|p| realify_vector(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::{self, ProjectivePoint};
    use crate::sampler::{derive_trial_rng, sample_projective_ensemble, SamplerConfig};
    use approx::assert_relative_eq;

    fn euclid(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn sample(d: usize, l: usize, seed: u64) -> ProjectiveSample {
        sample_projective_ensemble(&SamplerConfig::new(KernelParams::new(d, l).unwrap(), seed))
            .unwrap()
    }

    #[test]
    fn single_point_single_lift() {
        let s = sample(2, 0, 4);
        let mut rng = derive_trial_rng(4, 1);
        let lifted = lift_to_sphere(&s, 1, &mut rng).unwrap();
        assert_eq!(lifted.points.len(), 1);
        assert_relative_eq!(
            projective::norm_sqr(&lifted.points[0]),
            1.0,
            max_relative = 1e-12
        );
        let p = ProjectivePoint::new(lifted.points[0].clone()).unwrap();
        assert!(p.is_projectively_equal(&s.points[0]));
    }

    #[test]
    fn lift_structure() {
        let s = sample(2, 2, 11);
        let mut rng = derive_trial_rng(11, 1);
        let k = 5;
        let lifted = lift_to_sphere(&s, k, &mut rng).unwrap();
        assert_eq!(lifted.points.len(), k * s.points.len());
        assert_eq!(lifted.fiber_count(), s.points.len());
        for (i, x) in s.points.iter().enumerate() {
            let theta = lifted.phases[i];
            assert!((0.0..TAU).contains(&theta));
            for (j, y) in lifted.fiber(i).iter().enumerate() {
                let rot = Complex64::from_polar(1.0, theta + TAU * j as f64 / k as f64);
                let expected: Vec<Complex64> = x.coords().iter().map(|c| c * rot).collect();
                assert!(euclid(y, &expected) < 1e-14);
                assert_relative_eq!(projective::norm_sqr(y), 1.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn within_fiber_distances_for_k4() {
        let s = sample(1, 1, 2);
        let mut rng = derive_trial_rng(2, 1);
        let lifted = lift_to_sphere(&s, 4, &mut rng).unwrap();
        let fiber = lifted.fiber(0);
        let r2 = 2f64.sqrt();
        assert_relative_eq!(euclid(&fiber[0], &fiber[1]), r2, epsilon = 1e-12);
        assert_relative_eq!(euclid(&fiber[0], &fiber[2]), 2.0, epsilon = 1e-12);
        assert_relative_eq!(euclid(&fiber[0], &fiber[3]), r2, epsilon = 1e-12);
        for j1 in 0..4 {
            for j2 in 0..4 {
                let expected = 2.0
                    * (std::f64::consts::PI * (j1 as f64 - j2 as f64) / 4.0)
                        .sin()
                        .abs();
                assert_relative_eq!(euclid(&fiber[j1], &fiber[j2]), expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn inter_fiber_overlaps_do_not_depend_on_j() {
        let s = sample(2, 1, 8);
        let mut rng = derive_trial_rng(8, 1);
        let lifted = lift_to_sphere(&s, 6, &mut rng).unwrap();
        let reference = projective::inner(&lifted.fiber(0)[0], &lifted.fiber(1)[0]).norm();
        for a in lifted.fiber(0) {
            for b in lifted.fiber(1) {
                assert_relative_eq!(
                    projective::inner(a, b).norm(),
                    reference,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn realify_examples() {
        let one = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        assert_eq!(realify_vector(&one), vec![1.0, 0.0, 0.0, 0.0]);
        let i = vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)];
        assert_eq!(realify_vector(&i), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn realify_preserves_norms() {
        let s = sample(3, 1, 6);
        let mut rng = derive_trial_rng(6, 1);
        let lifted = lift_to_sphere(&s, 3, &mut rng).unwrap();
        for (c, r) in lifted.points.iter().zip(realify(&lifted)) {
            assert_eq!(r.len(), 2 * c.len());
            let rn: f64 = r.iter().map(|x| x * x).sum();
            assert_relative_eq!(rn, projective::norm_sqr(c), max_relative = 1e-15);
        }
    }

    #[test]
    fn zero_k_rejected() {
        let s = sample(1, 1, 1);
        assert!(lift_to_sphere(&s, 0, &mut derive_trial_rng(1, 0)).is_err());
    }
}
