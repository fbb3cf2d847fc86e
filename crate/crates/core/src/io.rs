//! Point-set files, JSON output with 17 significant digits, and the
//! Figure-1 CSV table.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::kernel::KernelParams;
use crate::lift::SphereConfiguration;
use crate::montecarlo::Figure1Row;
use crate::projective::{ProjectivePoint, UNIT_NORM_TOLERANCE};
use crate::sampler::ProjectiveSample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, SerializeDerive, Deserialize)]
pub enum Space {
    #[serde(rename = "CP")]
    Projective,
    #[serde(rename = "S")]
    Sphere,
}

/// On-disk point set. Each point is a list of `[re, im]` pairs.
///
/// Sphere files keep the degree `L` of their source sample when known.
#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct PointSetFile {
    pub space: Space,
    pub d: usize,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub points: Vec<Vec<[f64; 2]>>,
}

fn encode(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn decode(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

impl PointSetFile {
    pub fn from_sample(sample: &ProjectiveSample) -> Self {
        PointSetFile {
            space: Space::Projective,
            d: sample.params.d(),
            degree: Some(sample.params.degree()),
            k: None,
            seed: sample.seed,
            points: sample.points.iter().map(|p| encode(p.coords())).collect(),
        }
    }

    pub fn from_sphere(config: &SphereConfiguration) -> Self {
        PointSetFile {
            space: Space::Sphere,
            d: config.d(),
            degree: Some(config.source_params.degree()),
            k: Some(config.k),
            seed: config.source_seed,
            points: config.points.iter().map(|p| encode(p)).collect(),
        }
    }

    fn check(&self, space: Space) -> Result<()> {
        if self.space != space {
            return Err(Error::invalid(format!(
                "expected a {space:?} point set, found {:?}",
                self.space
            )));
        }
        if self.d == 0 {
            return Err(Error::invalid("point set needs d >= 1"));
        }
        if self.points.is_empty() {
            return Err(Error::invalid("point set is empty"));
        }
        for p in &self.points {
            if p.len() != self.d + 1 {
                return Err(Error::DimensionMismatch {
                    expected: self.d + 1,
                    found: p.len(),
                });
            }
        }
        Ok(())
    }

    /// Projective points of a `CP` file, normalised if not already unit-norm.
    pub fn projective_points(&self) -> Result<Vec<ProjectivePoint>> {
        self.check(Space::Projective)?;
        self.points
            .iter()
            .map(|p| ProjectivePoint::new(decode(p)))
            .collect()
    }

    /// Reconstructs an ensemble sample; the point count must equal the rank.
    pub fn to_sample(&self) -> Result<ProjectiveSample> {
        let points = self.projective_points()?;
        let degree = self
            .degree
            .ok_or_else(|| Error::invalid("CP point set has no L"))?;
        let params = KernelParams::new(self.d, degree)?;
        if points.len() != params.rank() {
            return Err(Error::invalid(format!(
                "a sample with d = {}, L = {degree} has {} points, file has {}",
                self.d,
                params.rank(),
                points.len()
            )));
        }
        Ok(ProjectiveSample {
            points,
            params,
            seed: self.seed,
        })
    }

    /// Points of an `S` file as real unit vectors of `R^{2d+2}`.
    pub fn sphere_points(&self) -> Result<Vec<Vec<f64>>> {
        self.check(Space::Sphere)?;
        self.points
            .iter()
            .map(|p| {
                let v: Vec<f64> = p.iter().flat_map(|&[re, im]| [re, im]).collect();
                let n: f64 = v.iter().map(|x| x * x).sum();
                if !v.iter().all(|x| x.is_finite()) || (n - 1.0).abs() > 1e3 * UNIT_NORM_TOLERANCE {
                    return Err(Error::invalid("sphere points must be finite and unit-norm"));
                }
                Ok(v)
            })
            .collect()
    }

    pub fn read<R: io::Read>(reader: R) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<()> {
        write_json_compact(writer, self)
    }
}

/// Writes every `f64` in scientific notation with 17 significant digits,
/// which round-trips exactly; non-finite values become `null`.
pub struct Digits17<F>(pub F);

impl<F: Formatter> Formatter for Digits17<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn end_object_key<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_key(writer)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

fn write_with<W: Write, F: Formatter, T: Serialize + ?Sized>(
    mut writer: W,
    formatter: F,
    value: &T,
) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut writer, Digits17(formatter));
    value.serialize(&mut ser)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn write_json_compact<W: Write, T: Serialize + ?Sized>(writer: W, value: &T) -> Result<()> {
    write_with(writer, CompactFormatter, value)
}

pub fn write_json_pretty<W: Write, T: Serialize + ?Sized>(writer: W, value: &T) -> Result<()> {
    write_with(writer, PrettyFormatter::new(), value)
}

pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    write_json_pretty(&mut buf, value)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// CSV with header `d,projective_bound,harmonic_bound`.
pub fn write_figure1_csv<W: Write>(writer: W, rows: &[Figure1Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["d", "projective_bound", "harmonic_bound"])?;
    for row in rows {
        w.write_record([
            row.d.to_string(),
            format!("{:.16e}", row.projective_bound),
            format!("{:.16e}", row.harmonic_bound),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_figure1_csv<R: io::Read>(reader: R) -> Result<Vec<Figure1Row>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::emit_figure1_data;
    use crate::sampler::{sample_projective_ensemble, SamplerConfig};
    use proptest::prelude::*;

    #[test]
    fn seventeen_digits() {
        let mut buf = Vec::new();
        write_json_compact(&mut buf, &[0.1f64, -1.0 / 3.0, f64::INFINITY]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,-3.3333333333333331e-1,null]\n");
    }

    #[test]
    fn pretty_output_keeps_layout() {
        #[derive(SerializeDerive)]
        struct T {
            a: f64,
            b: Vec<u32>,
        }
        let s = to_json_pretty(&T {
            a: 9.0,
            b: vec![1, 2],
        })
        .unwrap();
        assert_eq!(
            s,
            "{\n  \"a\": 9.0000000000000000e0,\n  \"b\": [\n    1,\n    2\n  ]\n}\n"
        );
    }

    #[test]
    fn sample_file_round_trip() {
        let params = KernelParams::new(2, 3).unwrap();
        let sample = sample_projective_ensemble(&SamplerConfig::new(params, 12)).unwrap();
        let file = PointSetFile::from_sample(&sample);
        let mut buf = Vec::new();
        file.write(&mut buf).unwrap();
        let back = PointSetFile::read(buf.as_slice()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_sample().unwrap(), sample);
    }

    #[test]
    fn wrong_space_and_dimension_rejected() {
        let file = PointSetFile {
            space: Space::Sphere,
            d: 1,
            degree: None,
            k: Some(1),
            seed: None,
            points: vec![vec![[1.0, 0.0], [0.0, 0.0]]],
        };
        assert!(file.projective_points().is_err());
        assert!(file.sphere_points().is_ok());
        let mut bad = file.clone();
        bad.points[0].push([0.0, 0.0]);
        assert!(matches!(
            bad.sphere_points(),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn figure1_csv_round_trip() {
        let rows = emit_figure1_data(10).unwrap();
        let mut buf = Vec::new();
        write_figure1_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("d,projective_bound,harmonic_bound\n1,"));
        assert_eq!(read_figure1_csv(buf.as_slice()).unwrap(), rows);
    }

    proptest! {
        #[test]
        fn json_round_trip_is_lossless(values in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..32)) {
            let points = vec![values.iter().map(|&x| [x, -x]).collect::<Vec<_>>()];
            let file = PointSetFile { space: Space::Sphere, d: values.len(), degree: None, k: Some(1), seed: Some(3), points };
            let mut buf = Vec::new();
            file.write(&mut buf).unwrap();
            let back = PointSetFile::read(buf.as_slice()).unwrap();
            for (a, b) in file.points[0].iter().zip(&back.points[0]) {
                prop_assert_eq!(a[0].to_bits(), b[0].to_bits());
                prop_assert_eq!(a[1].to_bits(), b[1].to_bits());
            }
        }
    }
}
