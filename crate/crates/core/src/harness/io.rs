//! Text formats. A point cloud file starts with a `dim=N,norm=l2` header
//! followed by one comma-separated point per line; a distance matrix is a
//! headerless square block of comma-separated reals.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, Norm, PointCloud};

use super::Dataset;

fn records(text: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

fn number(line: usize, field: &str) -> Result<f64> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("'{field}' is not a number"),
    })
}

pub fn parse_cloud(text: &str) -> Result<PointCloud> {
    let recs = records(text)?;
    let (line, header) = recs.first().ok_or(Error::EmptyCloud)?;
    let (mut dim, mut norm) = (None, None);
    for field in header {
        match field.split_once('=') {
            Some(("dim", v)) => dim = Some(v.trim().parse::<usize>().map_err(|_| Error::Parse {
                line: *line,
                message: format!("bad dimension '{v}'"),
            })?),
            Some(("norm", v)) => norm = Some(v.parse::<Norm>()?),
            _ => {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("unexpected header field '{field}'"),
                })
            }
        }
    }
    let (Some(dim), Some(norm)) = (dim, norm) else {
        return Err(Error::Parse {
            line: *line,
            message: "header must be dim=N,norm=l2|linf|l1".into(),
        });
    };
    let mut points = Vec::with_capacity(recs.len() - 1);
    for (line, rec) in &recs[1..] {
        if rec.len() != dim {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected {dim} coordinates, found {}", rec.len()),
            });
        }
        points.push(rec.iter().map(|f| number(*line, f)).collect::<Result<Vec<f64>>>()?);
    }
    PointCloud::new(points, norm)
}

pub fn parse_metric(text: &str) -> Result<FiniteMetricSpace> {
    let rows = records(text)?
        .iter()
        .map(|(line, rec)| rec.iter().map(|f| number(*line, f)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    FiniteMetricSpace::from_rows(rows)
}

/// A cloud if the first line is a `dim=` header, a distance matrix
/// otherwise.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'));
    match first {
        Some(l) if l.starts_with("dim=") => parse_cloud(text).map(Dataset::Cloud),
        Some(_) => parse_metric(text).map(Dataset::Metric),
        None => Err(Error::EmptyCloud),
    }
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(&fs::read_to_string(path)?)
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

pub fn cloud_to_csv(cloud: &PointCloud) -> String {
    let mut out = format!("dim={},norm={}\n", cloud.dim(), cloud.norm());
    for p in cloud.points() {
        let _ = writeln!(out, "{}", join(p));
    }
    out
}

pub fn metric_to_csv(ms: &FiniteMetricSpace) -> String {
    let mut out = String::new();
    for i in 0..ms.len() {
        let _ = writeln!(out, "{}", join(ms.row(i)));
    }
    out
}

pub fn dataset_to_csv(data: &Dataset) -> String {
    match data {
        Dataset::Cloud(c) => cloud_to_csv(c),
        Dataset::Metric(m) => metric_to_csv(m),
    }
}
