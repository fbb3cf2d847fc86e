//! Seeded, parallel Monte Carlo estimation of expected energies.
//!
//! Trial `t` draws everything from `derive_trial_rng(master_seed, t)`: first
//! the projective sample, then (when `k ≥ 1`) the lift phases. Results are
//! gathered by trial index before any reduction, so reports do not depend on
//! the number of worker threads.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_forms::{self, BoundConstants};
use crate::energy::{self, EnergyReport};
use crate::kernel::{Basis, KernelParams};
use crate::lift::{self, SphereConfiguration};
use crate::sampler::{self, derive_trial_rng, ProjectiveSample, DEFAULT_MAX_REJECTIONS};
use crate::stats;
use crate::{Error, Result};

pub const DEFAULT_MOM_BLOCKS: usize = 20;
pub const DEFAULT_Z_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnergySpec {
    ProjectiveRiesz {
        s: f64,
    },
    ProjectiveLog,
    Green,
    /// Riesz `s`-energy of the lifted points in `R^{2d+2}`.
    SphereRiesz {
        s: f64,
    },
    SphereLog,
}

impl EnergySpec {
    fn needs_lift(&self) -> bool {
        matches!(self, EnergySpec::SphereRiesz { .. } | EnergySpec::SphereLog)
    }

    /// Median-of-means for projective Riesz energies with `s > d`, where the
    /// summands are heavy-tailed; the plain mean otherwise.
    pub fn default_estimator(&self, d: usize) -> Estimator {
        match *self {
            EnergySpec::ProjectiveRiesz { s } if s > d as f64 => Estimator::MedianOfMeans {
                blocks: DEFAULT_MOM_BLOCKS,
            },
            _ => Estimator::Mean,
        }
    }

    fn validate(&self, d: usize, k: usize) -> Result<()> {
        match *self {
            EnergySpec::ProjectiveRiesz { s } if !(s > 0.0 && s < 2.0 * d as f64) => {
                Err(Error::invalid(format!(
                    "projective Riesz energy needs s in (0, 2d) = (0, {}), got {s}",
                    2 * d
                )))
            }
            EnergySpec::Green if d < 2 => Err(Error::invalid("Green energy needs d >= 2")),
            EnergySpec::SphereRiesz { s } if !(s > 0.0 && s.is_finite()) => Err(Error::invalid(
                format!("sphere Riesz energy needs s > 0, got {s}"),
            )),
            spec if spec.needs_lift() && k == 0 => {
                Err(Error::invalid("sphere energies need k >= 1"))
            }
            _ => Ok(()),
        }
    }

    fn closed_form(&self, d: usize, degree: usize, k: usize) -> Option<f64> {
        if degree == 0 {
            return None;
        }
        match *self {
            EnergySpec::ProjectiveRiesz { s } => {
                closed_forms::expected_projective_riesz(d, degree, s).ok()
            }
            EnergySpec::ProjectiveLog => closed_forms::expected_projective_log(d, degree).ok(),
            EnergySpec::Green => closed_forms::expected_green_energy(d, degree).ok(),
            EnergySpec::SphereRiesz { s: 2.0 } => {
                closed_forms::expected_sphere_2energy_exact(d, degree, k).ok()
            }
            _ => None,
        }
        .map(|e| e.exact)
    }

    fn evaluate(
        &self,
        sample: &ProjectiveSample,
        lifted: Option<&[Vec<f64>]>,
    ) -> Result<EnergyReport> {
        match *self {
            EnergySpec::ProjectiveRiesz { s } => energy::projective_riesz_energy(&sample.points, s),
            EnergySpec::ProjectiveLog => energy::projective_log_energy(&sample.points),
            EnergySpec::Green => energy::green_energy(&sample.points),
            EnergySpec::SphereRiesz { s } => {
                energy::riesz_energy(lifted.expect("lift computed"), s)
            }
            EnergySpec::SphereLog => energy::log_energy(lifted.expect("lift computed")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Estimator {
    Mean,
    MedianOfMeans { blocks: usize },
}

impl Estimator {
    /// Point estimate and its standard error.
    ///
    /// For median-of-means the error is the normal-theory value
    /// `std(block means)·√(π/(2b))`.
    fn estimate(&self, xs: &[f64]) -> (f64, f64) {
        match *self {
            Estimator::Mean => (
                stats::mean(xs),
                stats::sample_std(xs) / (xs.len() as f64).sqrt(),
            ),
            Estimator::MedianOfMeans { blocks } => {
                let means = stats::block_means(xs, blocks);
                let b = means.len() as f64;
                let se = stats::sample_std(&means) * (std::f64::consts::PI / (2.0 * b)).sqrt();
                (stats::median(&means), se)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d: usize,
    #[serde(rename = "L")]
    pub degree: usize,
    /// Number of lifts per projective point; 0 for projective-only runs.
    pub k: usize,
    pub energies: Vec<EnergySpec>,
    pub trials: usize,
    pub master_seed: u64,
    /// Overrides the per-energy default estimator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<Estimator>,
    /// Worker count; `None` uses the global rayon pool. Not serialised, as
    /// it cannot affect the report.
    #[serde(skip)]
    pub threads: Option<usize>,
    pub max_rejections_per_point: u64,
}

impl ExperimentConfig {
    pub fn new(
        d: usize,
        degree: usize,
        k: usize,
        energies: Vec<EnergySpec>,
        trials: usize,
        master_seed: u64,
    ) -> Self {
        ExperimentConfig {
            d,
            degree,
            k,
            energies,
            trials,
            master_seed,
            estimator: None,
            threads: None,
            max_rejections_per_point: DEFAULT_MAX_REJECTIONS,
        }
    }

    /// Every energy with a closed form at these parameters: `E_s^P` at `s = d`,
    /// the projective log energy, the Green energy when `d ≥ 2`, and the sphere
    /// 2-energy when `k ≥ 1`.
    pub fn default_energies(d: usize, k: usize) -> Vec<EnergySpec> {
        let mut out = vec![
            EnergySpec::ProjectiveRiesz { s: d as f64 },
            EnergySpec::ProjectiveLog,
        ];
        if d >= 2 {
            out.push(EnergySpec::Green);
        }
        if k >= 1 {
            out.push(EnergySpec::SphereRiesz { s: 2.0 });
        }
        out
    }

    pub fn validate(&self) -> Result<KernelParams> {
        let params = KernelParams::new(self.d, self.degree)?;
        if self.trials < 2 {
            return Err(Error::invalid(format!(
                "trials must be >= 2, got {}",
                self.trials
            )));
        }
        if self.energies.is_empty() {
            return Err(Error::invalid("at least one energy is required"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads must be >= 1"));
        }
        if let Some(Estimator::MedianOfMeans { blocks }) = self.estimator {
            if blocks < 2 || blocks > self.trials {
                return Err(Error::invalid(format!(
                    "median-of-means needs 2 <= blocks <= trials, got {blocks}"
                )));
            }
        }
        for e in &self.energies {
            e.validate(self.d, self.k)?;
        }
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub energy: EnergySpec,
    pub estimator: Estimator,
    pub retained_trials: usize,
    pub sample_mean: f64,
    pub sample_std: f64,
    /// Location estimate used for the z-score (the median of block means
    /// under median-of-means, otherwise equal to `sample_mean`).
    pub estimate: f64,
    pub standard_error: f64,
    pub closed_form_exact: Option<f64>,
    pub z_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub estimates: Vec<EnergyEstimate>,
    pub trials_discarded: usize,
    /// Not serialised, so that reports are reproducible byte for byte.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExperimentReport {
    pub fn max_abs_z(&self) -> Option<f64> {
        self.estimates
            .iter()
            .filter_map(|e| e.z_score)
            .map(f64::abs)
            .reduce(f64::max)
    }

    /// True when every defined z-score satisfies `|z| ≤ threshold`.
    pub fn passes(&self, threshold: f64) -> bool {
        self.estimates
            .iter()
            .filter_map(|e| e.z_score)
            .all(|z| z.abs() <= threshold)
    }
}

struct TrialOutcome {
    values: Vec<f64>,
    coincident: bool,
}

fn run_trial(
    config: &ExperimentConfig,
    basis: &Basis,
    needs_lift: bool,
    index: usize,
) -> Result<TrialOutcome> {
    let mut rng = derive_trial_rng(config.master_seed, index as u64);
    let (points, _) = sampler::sample_with_basis(basis, config.max_rejections_per_point, &mut rng)?;
    let sample = ProjectiveSample {
        points,
        params: *basis.params(),
        seed: None,
    };
    let lifted = if needs_lift {
        let config: SphereConfiguration = lift::lift_to_sphere(&sample, config.k, &mut rng)?;
        Some(lift::realify(&config))
    } else {
        None
    };
    let mut values = Vec::with_capacity(config.energies.len());
    let mut coincident = false;
    for spec in &config.energies {
        let report = spec.evaluate(&sample, lifted.as_deref())?;
        coincident |= report.coincident;
        values.push(report.value);
    }
    Ok(TrialOutcome { values, coincident })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let params = config.validate()?;
    let start = Instant::now();
    let basis = Basis::new(params);
    let needs_lift = config.energies.iter().any(EnergySpec::needs_lift);

    let run = || -> Result<Vec<TrialOutcome>> {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, &basis, needs_lift, t))
            .collect()
    };
    let outcomes = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let retained: Vec<&TrialOutcome> = outcomes.iter().filter(|o| !o.coincident).collect();
    let trials_discarded = outcomes.len() - retained.len();
    if retained.is_empty() {
        return Err(Error::AllTrialsDiscarded {
            trials: config.trials,
        });
    }

    let estimates = config
        .energies
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let xs: Vec<f64> = retained.iter().map(|o| o.values[i]).collect();
            let estimator = config
                .estimator
                .unwrap_or_else(|| spec.default_estimator(config.d));
            let estimator = match estimator {
                Estimator::MedianOfMeans { blocks } if blocks > xs.len() => Estimator::Mean,
                e => e,
            };
            let (estimate, standard_error) = if xs.len() >= 2 {
                estimator.estimate(&xs)
            } else {
                (xs[0], f64::NAN)
            };
            let closed_form_exact = spec.closed_form(config.d, config.degree, config.k);
            let z_score = closed_form_exact.map(|exact| z_score(estimate, exact, standard_error));
            EnergyEstimate {
                energy: *spec,
                estimator,
                retained_trials: xs.len(),
                sample_mean: stats::mean(&xs),
                sample_std: stats::sample_std(&xs),
                estimate,
                standard_error,
                closed_form_exact,
                z_score,
            }
        })
        .collect();

    Ok(ExperimentReport {
        config: config.clone(),
        estimates,
        trials_discarded,
        wall_time: start.elapsed(),
    })
}

/// `(estimate − exact)/se`; a vanishing standard error (deterministic energy)
/// gives 0 when the estimate matches to rounding and ±∞ otherwise.
fn z_score(estimate: f64, exact: f64, se: f64) -> f64 {
    let diff = estimate - exact;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 * exact.abs().max(1.0) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure1Row {
    pub d: usize,
    pub projective_bound: f64,
    pub harmonic_bound: f64,
}

impl From<BoundConstants> for Figure1Row {
    fn from(b: BoundConstants) -> Self {
        Figure1Row {
            d: b.d,
            projective_bound: b.projective_bound,
            harmonic_bound: b.harmonic_bound,
        }
    }
}

/// Bound constants of both ensembles for `d = 1..=d_max`.
pub fn emit_figure1_data(d_max: usize) -> Result<Vec<Figure1Row>> {
    if d_max == 0 {
        return Err(Error::invalid("d_max must be >= 1"));
    }
    (1..=d_max)
        .map(|d| closed_forms::bound_constants(d).map(Figure1Row::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_configs() {
        let base = ExperimentConfig::new(2, 1, 0, vec![EnergySpec::ProjectiveLog], 10, 1);
        assert!(base.validate().is_ok());
        let mut c = base.clone();
        c.trials = 1;
        assert!(run_experiment(&c).is_err());
        let mut c = base.clone();
        c.energies = vec![EnergySpec::ProjectiveRiesz { s: 4.0 }];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.energies = vec![EnergySpec::SphereRiesz { s: 2.0 }];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.d = 1;
        c.energies = vec![EnergySpec::Green];
        assert!(c.validate().is_err());
        let mut c = base;
        c.energies.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn two_trials_are_reproducible() {
        let config =
            ExperimentConfig::new(2, 2, 3, ExperimentConfig::default_energies(2, 3), 2, 77);
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        assert_eq!(a.estimates, b.estimates);
        assert_eq!(a.trials_discarded, 0);
    }

    #[test]
    fn thread_count_does_not_change_report() {
        let mut config =
            ExperimentConfig::new(2, 2, 2, ExperimentConfig::default_energies(2, 2), 64, 5);
        config.threads = Some(1);
        let one = run_experiment(&config).unwrap();
        config.threads = Some(4);
        let four = run_experiment(&config).unwrap();
        assert_eq!(one.estimates, four.estimates);
    }

    #[test]
    fn default_estimator_switches_above_d() {
        assert_eq!(
            EnergySpec::ProjectiveRiesz { s: 2.0 }.default_estimator(2),
            Estimator::Mean
        );
        assert_eq!(
            EnergySpec::ProjectiveRiesz { s: 3.0 }.default_estimator(2),
            Estimator::MedianOfMeans { blocks: 20 }
        );
        assert_eq!(EnergySpec::Green.default_estimator(2), Estimator::Mean);
    }

    #[test]
    fn median_of_means_standard_error() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let (est, se) = Estimator::MedianOfMeans { blocks: 4 }.estimate(&xs);
        // Block means 4.5, 14.5, 24.5, 34.5.
        assert_eq!(est, 19.5);
        let std = stats::sample_std(&[4.5, 14.5, 24.5, 34.5]);
        assert!((se - std * (std::f64::consts::PI / 8.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn z_score_edge_cases() {
        assert_eq!(z_score(1.0, 1.0, 0.0), 0.0);
        assert_eq!(z_score(2.0, 1.0, 0.0), f64::INFINITY);
        assert_eq!(z_score(3.0, 1.0, 0.5), 4.0);
    }

    #[test]
    fn figure1_rows() {
        let rows = emit_figure1_data(5).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].d, 1);
        assert!(rows.iter().all(|r| r.projective_bound > r.harmonic_bound));
        assert!(emit_figure1_data(0).is_err());
    }
}
