//! Exact sampling of the projective ensemble.
//!
//! The ensemble is a projection determinantal process of rank `r`, so it can
//! be drawn one point at a time: given the span `U` of the feature vectors of
//! the points already chosen, the next point has density proportional to
//! `‖v(x) − P_U v(x)‖²`. Because `‖v(x)‖² = K_*(x, x)` is constant on `CP^d`,
//! uniform proposals accepted with probability `‖v − P_U v‖² / ‖v‖²` realise
//! that density exactly, and the acceptance rate at step `i` is `(r − i)/r`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::kernel::{Basis, KernelParams};
use crate::projective::{self, ProjectivePoint};
use crate::{Error, Result};

pub const DEFAULT_MAX_REJECTIONS: u64 = 10_000_000;

/// Per-trial random stream.
pub type TrialRng = ChaCha20Rng;

/// Independent stream for trial `trial_index` of an experiment seeded with
/// `master_seed`.
///
/// The master seed selects the ChaCha key and the trial index selects the
/// stream, so distinct indices never share keystream and the result does not
/// depend on which thread runs the trial or in which order.
pub fn derive_trial_rng(master_seed: u64, trial_index: u64) -> TrialRng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub params: KernelParams,
    pub seed: u64,
    pub max_rejections_per_point: u64,
}

impl SamplerConfig {
    pub fn new(params: KernelParams, seed: u64) -> Self {
        SamplerConfig {
            params,
            seed,
            max_rejections_per_point: DEFAULT_MAX_REJECTIONS,
        }
    }
}

/// `r` points of `CP^d` drawn from the projective ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveSample {
    pub points: Vec<ProjectivePoint>,
    pub params: KernelParams,
    pub seed: Option<u64>,
}

/// Number of proposals consumed for each accepted point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SamplerStats {
    pub proposals: Vec<u64>,
}

/// Uniform point of `CP^d` (normalised Fubini–Study volume): a standard
/// complex Gaussian vector in `C^{d+1}`, normalised.
pub fn sample_uniform_cp<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ProjectivePoint {
    assert!(d >= 1, "CP^d needs d >= 1");
    loop {
        let coords: Vec<Complex64> = (0..=d)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        // The all-zero draw has probability zero; retry rather than fail.
        if let Ok(p) = ProjectivePoint::new(coords) {
            return p;
        }
    }
}

/// Draws one sample with the stream `derive_trial_rng(config.seed, 0)`.
pub fn sample_projective_ensemble(config: &SamplerConfig) -> Result<ProjectiveSample> {
    let basis = Basis::new(config.params);
    let mut rng = derive_trial_rng(config.seed, 0);
    let (points, _) = sample_with_basis(&basis, config.max_rejections_per_point, &mut rng)?;
    Ok(ProjectiveSample {
        points,
        params: config.params,
        seed: Some(config.seed),
    })
}

/// Sequential sampler on a caller-provided stream, also reporting how many
/// proposals each point consumed.
pub fn sample_with_basis<R: Rng + ?Sized>(
    basis: &Basis,
    max_rejections_per_point: u64,
    rng: &mut R,
) -> Result<(Vec<ProjectivePoint>, SamplerStats)> {
    let params = basis.params();
    let r = params.rank();
    let d = params.d();
    let mut span = OrthonormalSpan::with_capacity(r);
    let mut points = Vec::with_capacity(r);
    let mut stats = SamplerStats {
        proposals: Vec::with_capacity(r),
    };

    for point_index in 0..r {
        let mut proposals = 0u64;
        loop {
            if proposals > max_rejections_per_point {
                return Err(Error::RejectionBudgetExceeded {
                    point_index,
                    budget: max_rejections_per_point,
                });
            }
            proposals += 1;
            let candidate = sample_uniform_cp(d, rng);
            let features = basis.projective_features(&candidate)?;
            let total = features.norm_sqr();
            let residual = span.residual(features.0);
            let residual_sqr = projective::norm_sqr(&residual);
            let accept_prob = (residual_sqr / total).min(1.0);
            let u: f64 = rng.random();
            if u < accept_prob {
                span.push_normalized(residual, residual_sqr.sqrt());
                points.push(candidate);
                stats.proposals.push(proposals);
                break;
            }
        }
    }

    debug_assert!(
        points.iter().enumerate().all(|(i, p)| points[..i]
            .iter()
            .all(|q| 1.0 - projective::inner(p.coords(), q.coords()).norm() > 1e-12)),
        "sampler produced projectively coincident points"
    );
    Ok((points, stats))
}

/// Orthonormal family in `C^r` maintained by modified Gram–Schmidt.
struct OrthonormalSpan {
    vectors: Vec<Vec<Complex64>>,
}

impl OrthonormalSpan {
    fn with_capacity(r: usize) -> Self {
        OrthonormalSpan {
            vectors: Vec::with_capacity(r),
        }
    }

    fn project_out(&self, v: &mut [Complex64]) {
        for u in &self.vectors {
            let coeff = projective::inner(v, u);
            for (x, b) in v.iter_mut().zip(u) {
                *x -= coeff * b;
            }
        }
    }

    /// `v − P_U v`, with a second pass when more than half of the squared
    /// norm was removed (the residual then carries amplified rounding).
    fn residual(&self, mut v: Vec<Complex64>) -> Vec<Complex64> {
        if self.vectors.is_empty() {
            return v;
        }
        let before = projective::norm_sqr(&v);
        self.project_out(&mut v);
        let after = projective::norm_sqr(&v);
        if after < 0.5 * before {
            self.project_out(&mut v);
        }
        v
    }

    fn push_normalized(&mut self, mut v: Vec<Complex64>, norm: f64) {
        let scale = 1.0 / norm;
        for x in &mut v {
            *x *= scale;
        }
        self.vectors.push(v);
    }
}
