//! Learning-curve CSV files.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a value
//! read back parses to the identical `f64`.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use super::bias::BiasReport;
use crate::error::{Error, Result};

pub const CURVE_HEADER: &str = "seed,step,eval_return_mean,eval_return_std,wall_ms";
pub const AGGREGATE_HEADER: &str = "step,eval_return_mean,eval_return_std,n_seeds";
pub const BIAS_HEADER: &str = "seed,step,mean_normalized_bias,std_normalized_bias,n_samples";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub seed: u64,
    pub step: u64,
    pub eval_return_mean: f64,
    pub eval_return_std: f64,
    pub wall_ms: u64,
}

impl CurvePoint {
    fn to_record(self) -> [String; 5] {
        [
            self.seed.to_string(),
            self.step.to_string(),
            self.eval_return_mean.to_string(),
            self.eval_return_std.to_string(),
            self.wall_ms.to_string(),
        ]
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config(format!("{}: {other:?}", path.display())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregatePoint {
    pub step: u64,
    pub mean: f64,
    pub std: f64,
    pub n_seeds: usize,
}

/// Appends curve rows to a per-seed file as they arrive.
pub struct CurveWriter {
    path: PathBuf,
    writer: csv::Writer<File>,
    last_step: Option<u64>,
}

impl CurveWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        writer
            .write_record(CURVE_HEADER.split(','))
            .and_then(|_| writer.flush().map_err(Into::into))
            .map_err(|e| csv_error(path, e))?;
        Ok(CurveWriter {
            path: path.to_path_buf(),
            writer,
            last_step: None,
        })
    }

    pub fn append(&mut self, point: &CurvePoint) -> Result<()> {
        if self.last_step.is_some_and(|s| point.step <= s) {
            return Err(Error::invalid(format!(
                "curve steps must increase: {} after {:?}",
                point.step, self.last_step
            )));
        }
        if point.eval_return_std.is_nan() || point.eval_return_std < 0.0 {
            return Err(Error::invalid(format!("negative std {}", point.eval_return_std)));
        }
        self.writer
            .write_record(point.to_record())
            .map_err(|e| csv_error(&self.path, e))?;
        self.writer.flush().map_err(|e| Error::io(&self.path, e))?;
        self.last_step = Some(point.step);
        Ok(())
    }
}

pub fn read_curve(path: &Path) -> Result<Vec<CurvePoint>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != CURVE_HEADER {
        return Err(Error::Config(format!(
            "{}: unexpected header {header:?}",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let bad = || Error::Config(format!("{}: malformed row {}", path.display(), i + 2));
        let field = |k: usize| record.get(k).ok_or_else(bad);
        out.push(CurvePoint {
            seed: field(0)?.parse().map_err(|_| bad())?,
            step: field(1)?.parse().map_err(|_| bad())?,
            eval_return_mean: field(2)?.parse().map_err(|_| bad())?,
            eval_return_std: field(3)?.parse().map_err(|_| bad())?,
            wall_ms: field(4)?.parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

/// Mean and population std across seeds of `eval_return_mean` at each step.
/// Steps missing from some seeds (e.g. early stop) aggregate over the seeds
/// that have them.
pub fn aggregate(curves: &[Vec<CurvePoint>]) -> Vec<AggregatePoint> {
    let mut by_step: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for curve in curves {
        for p in curve {
            by_step.entry(p.step).or_default().push(p.eval_return_mean);
        }
    }
    by_step
        .into_iter()
        .map(|(step, xs)| {
            let (mean, std) = crate::tabular::mean_std(&xs);
            AggregatePoint {
                step,
                mean,
                std,
                n_seeds: xs.len(),
            }
        })
        .collect()
}

pub fn write_aggregate(path: &Path, points: &[AggregatePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut write = || -> std::result::Result<(), csv::Error> {
        w.write_record(AGGREGATE_HEADER.split(','))?;
        for p in points {
            w.write_record([
                p.step.to_string(),
                p.mean.to_string(),
                p.std.to_string(),
                p.n_seeds.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    write().map_err(|e| csv_error(path, e))
}

pub fn write_bias(path: &Path, seed: u64, reports: &[BiasReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut write = || -> std::result::Result<(), csv::Error> {
        w.write_record(BIAS_HEADER.split(','))?;
        for r in reports {
            w.write_record([
                seed.to_string(),
                r.step.to_string(),
                r.mean_normalized_bias.to_string(),
                r.std_normalized_bias.to_string(),
                r.n_samples.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    write().map_err(|e| csv_error(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writer_round_trips_and_enforces_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seed_3.csv");
        let mut w = CurveWriter::create(&path).unwrap();
        let pts = [
            CurvePoint {
                seed: 3,
                step: 1,
                eval_return_mean: -100.25,
                eval_return_std: 0.0,
                wall_ms: 0,
            },
            CurvePoint {
                seed: 3,
                step: 2,
                eval_return_mean: 0.1 + 0.2,
                eval_return_std: 1e-17,
                wall_ms: 5,
            },
        ];
        for p in &pts {
            w.append(p).unwrap();
        }
        assert!(w.append(&pts[0]).is_err());
        drop(w);
        assert_eq!(read_curve(&path).unwrap(), pts.to_vec());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("seed,step,eval_return_mean,eval_return_std,wall_ms\n"));
    }

    #[test]
    fn aggregate_is_mean_over_seeds() {
        let c = |seed, vals: &[f64]| {
            vals.iter()
                .enumerate()
                .map(|(i, &v)| CurvePoint {
                    seed,
                    step: i as u64 + 1,
                    eval_return_mean: v,
                    eval_return_std: 0.0,
                    wall_ms: 0,
                })
                .collect::<Vec<_>>()
        };
        let agg = aggregate(&[c(0, &[1.0, 2.0]), c(1, &[3.0]), c(2, &[5.0, 4.0])]);
        assert_eq!(agg.len(), 2);
        assert_eq!((agg[0].mean, agg[0].n_seeds), (3.0, 3));
        assert_eq!((agg[1].mean, agg[1].std, agg[1].n_seeds), (3.0, 1.0, 2));
    }
}
