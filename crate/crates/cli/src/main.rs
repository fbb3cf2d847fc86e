//! `pensemble`: sample the projective ensemble, lift it to the sphere,
//! evaluate energies and their closed forms, and run validation experiments.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use pensemble::closed_forms;
use pensemble::energy::{self, EnergyReport};
use pensemble::io::{self as pio, PointSetFile, Space};
use pensemble::kernel::KernelParams;
use pensemble::lift;
use pensemble::montecarlo::{self, ExperimentConfig, DEFAULT_Z_THRESHOLD};
use pensemble::sampler::{self, SamplerConfig};

/// Stream for the lift phases, kept apart from stream 0 used by `sample` so
/// that equal seeds do not reuse keystream.
const LIFT_STREAM: u64 = u64::MAX;

#[derive(Parser)]
#[command(
    name = "pensemble",
    version,
    about = "Projective ensemble sampler and energy toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one sample of the projective ensemble on CP^d.
    Sample {
        #[arg(long)]
        d: usize,
        #[arg(long = "L")]
        degree: usize,
        #[arg(long, env = "PENSEMBLE_SEED")]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lift a projective sample to k phase-spaced points per fiber on S^{2d+1}.
    Lift {
        #[arg(long)]
        k: usize,
        #[arg(long, env = "PENSEMBLE_SEED")]
        seed: u64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy of a point-set file.
    Energy {
        #[arg(long, value_enum)]
        kind: EnergyKindArg,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Exact expected energy and its asymptotic expansion.
    Expected {
        #[arg(long, value_enum)]
        which: ExpectedArg,
        #[arg(long)]
        d: usize,
        #[arg(long = "L")]
        degree: usize,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Bound constants of the projective and harmonic ensembles.
    Constants {
        #[arg(long)]
        d: usize,
    },
    /// Monte Carlo check of sample means against the closed forms.
    Validate {
        #[arg(long)]
        d: usize,
        #[arg(long = "L")]
        degree: usize,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, env = "PENSEMBLE_SEED")]
        seed: u64,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Largest accepted |z|.
        #[arg(long, default_value_t = DEFAULT_Z_THRESHOLD)]
        z_threshold: f64,
    },
    /// Bound constants for d = 1..=d-max as CSV.
    Figure1 {
        #[arg(long)]
        d_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EnergyKindArg {
    Riesz,
    Log,
    Projective,
    ProjectiveLog,
    Green,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpectedArg {
    Projective,
    ProjectiveLog,
    Sphere2,
    Green,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_points(path: &Path) -> Result<PointSetFile> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    PointSetFile::read(BufReader::new(file))
        .with_context(|| format!("cannot parse point set {}", path.display()))
}

fn require_s(s: Option<f64>, what: &str) -> Result<f64> {
    s.with_context(|| format!("--s is required for {what}"))
}

fn finish(mut w: Box<dyn Write>) -> Result<()> {
    w.flush()?;
    Ok(())
}

fn energy_report(kind: EnergyKindArg, s: Option<f64>, file: &PointSetFile) -> Result<EnergyReport> {
    let degree = file.degree.filter(|&l| l >= 1);
    let report = match kind {
        EnergyKindArg::Riesz | EnergyKindArg::Log => {
            if file.space != Space::Sphere {
                bail!("riesz and log energies need a sphere (S) point set");
            }
            let points = file.sphere_points()?;
            if let EnergyKindArg::Riesz = kind {
                let s = require_s(s, "riesz")?;
                let report = energy::riesz_energy(&points, s)?;
                match (s == 2.0, degree, file.k) {
                    (true, Some(l), Some(k)) => report.with_expected(Some(
                        closed_forms::expected_sphere_2energy_exact(file.d, l, k)?.exact,
                    )),
                    _ => report,
                }
            } else {
                energy::log_energy(&points)?
            }
        }
        EnergyKindArg::Projective | EnergyKindArg::ProjectiveLog | EnergyKindArg::Green => {
            if file.space != Space::Projective {
                bail!("projective and green energies need a projective (CP) point set");
            }
            let points = file.projective_points()?;
            let (report, expected) = match kind {
                EnergyKindArg::Projective => {
                    let s = require_s(s, "projective")?;
                    let report = energy::projective_riesz_energy(&points, s)?;
                    (
                        report,
                        degree.map(|l| closed_forms::expected_projective_riesz(file.d, l, s)),
                    )
                }
                EnergyKindArg::ProjectiveLog => (
                    energy::projective_log_energy(&points)?,
                    degree.map(|l| closed_forms::expected_projective_log(file.d, l)),
                ),
                _ => (
                    energy::green_energy(&points)?,
                    degree.map(|l| closed_forms::expected_green_energy(file.d, l)),
                ),
            };
            match expected {
                Some(e) => report.with_expected(Some(e?.exact)),
                None => report,
            }
        }
    };
    Ok(report)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sample {
            d,
            degree,
            seed,
            out,
        } => {
            let params = KernelParams::new(d, degree)?;
            let sample = sampler::sample_projective_ensemble(&SamplerConfig::new(params, seed))?;
            let mut w = output(out.as_deref())?;
            PointSetFile::from_sample(&sample).write(&mut w)?;
            finish(w)?;
        }
        Command::Lift {
            k,
            seed,
            input,
            out,
        } => {
            if k == 0 {
                bail!("--k must be >= 1");
            }
            let sample = read_points(&input)?.to_sample()?;
            let mut rng = sampler::derive_trial_rng(seed, LIFT_STREAM);
            let config = lift::lift_to_sphere(&sample, k, &mut rng)?;
            let mut w = output(out.as_deref())?;
            PointSetFile::from_sphere(&config).write(&mut w)?;
            finish(w)?;
        }
        Command::Energy { kind, s, input } => {
            let file = read_points(&input)?;
            let report = energy_report(kind, s, &file)?;
            let mut w = output(None)?;
            pio::write_json_pretty(&mut w, &report)?;
            finish(w)?;
        }
        Command::Expected {
            which,
            d,
            degree,
            s,
            k,
        } => {
            let expected = match which {
                ExpectedArg::Projective => closed_forms::expected_projective_riesz(
                    d,
                    degree,
                    require_s(s, "--which projective")?,
                )?,
                ExpectedArg::ProjectiveLog => closed_forms::expected_projective_log(d, degree)?,
                ExpectedArg::Sphere2 => {
                    let k = k.context("--k is required for --which sphere2")?;
                    closed_forms::expected_sphere_2energy_exact(d, degree, k)?
                }
                ExpectedArg::Green => closed_forms::expected_green_energy(d, degree)?,
            };
            let mut w = output(None)?;
            pio::write_json_pretty(&mut w, &expected)?;
            finish(w)?;
        }
        Command::Constants { d } => {
            let mut w = output(None)?;
            pio::write_json_pretty(&mut w, &closed_forms::bound_constants(d)?)?;
            finish(w)?;
        }
        Command::Validate {
            d,
            degree,
            k,
            trials,
            seed,
            threads,
            z_threshold,
        } => {
            if z_threshold.is_nan() || z_threshold <= 0.0 {
                bail!("--z-threshold must be positive");
            }
            let mut config = ExperimentConfig::new(
                d,
                degree,
                k,
                ExperimentConfig::default_energies(d, k),
                trials,
                seed,
            );
            config.threads = threads;
            let report = montecarlo::run_experiment(&config)?;
            eprintln!("wall time: {:.3} s", report.wall_time.as_secs_f64());
            let mut w = output(None)?;
            pio::write_json_pretty(&mut w, &report)?;
            finish(w)?;
            if !report.passes(z_threshold) {
                eprintln!(
                    "validation failed: max |z| = {:.3} > {z_threshold}",
                    report.max_abs_z().unwrap_or(f64::NAN)
                );
                return Ok(ExitCode::from(1));
            }
        }
        Command::Figure1 { d_max, out } => {
            let rows = montecarlo::emit_figure1_data(d_max)?;
            let mut w = output(out.as_deref())?;
            pio::write_figure1_csv(&mut w, &rows)?;
            finish(w)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
