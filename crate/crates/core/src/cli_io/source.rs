//! Field sources: grid-ordered CSV files and analytic families.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::body::{forward_f, support_function, AnalyticBody};
use crate::error::{Error, Result};
use crate::harmonics::{HarmonicCoeffs, SphericalField};
use crate::sphere::SphereGrid;

/// Analytic test families accepted as `family:<name>:<params>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Family {
    Constant { c: f64 },
    /// Sum of principal radii of the ellipsoid with these semi-axes.
    Ellipsoid { a: f64, b: f64, c: f64 },
    Harmonic { l: usize, m: i64, eps: f64, base: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSource {
    File { path: String },
    Family(Family),
}

fn params(s: &str) -> Result<Vec<(String, f64)>> {
    s.split(',')
        .filter(|kv| !kv.trim().is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{kv}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("`{v}` is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn take(ps: &[(String, f64)], key: &str) -> Result<f64> {
    ps.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::InvalidParameter(format!("missing parameter `{key}`")))
}

fn check_keys(ps: &[(String, f64)], allowed: &[&str]) -> Result<()> {
    for (k, _) in ps {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::InvalidParameter(format!("unknown parameter `{k}`")));
        }
    }
    Ok(())
}

fn integer(v: f64, key: &str) -> Result<i64> {
    if v.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!("`{key}` must be an integer, got {v}")));
    }
    Ok(v as i64)
}

impl std::str::FromStr for FieldSource {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        if let Some(path) = input.strip_prefix("file:") {
            return Ok(FieldSource::File { path: path.to_string() });
        }
        let rest = input
            .strip_prefix("family:")
            .ok_or_else(|| Error::InvalidParameter(format!("field source `{input}` must start with file: or family:")))?;
        let (name, ps) = rest.split_once(':').unwrap_or((rest, ""));
        let ps = params(ps)?;
        let fam = match name {
            "constant" => {
                check_keys(&ps, &["c"])?;
                Family::Constant { c: take(&ps, "c")? }
            }
            "ellipsoid" => {
                check_keys(&ps, &["a", "b", "c"])?;
                Family::Ellipsoid { a: take(&ps, "a")?, b: take(&ps, "b")?, c: take(&ps, "c")? }
            }
            "harmonic" => {
                check_keys(&ps, &["l", "m", "eps", "base"])?;
                let l = integer(take(&ps, "l")?, "l")?;
                let m = integer(take(&ps, "m")?, "m")?;
                if l < 0 || m.abs() > l {
                    return Err(Error::InvalidParameter(format!("need |m| ≤ l, got l = {l}, m = {m}")));
                }
                Family::Harmonic { l: l as usize, m, eps: take(&ps, "eps")?, base: take(&ps, "base")? }
            }
            other => return Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
        };
        Ok(FieldSource::Family(fam))
    }
}

/// A field read from a source, analyzed at the requested band limit.
#[derive(Debug, Clone)]
pub struct LoadedField {
    pub field: SphericalField,
    pub source: FieldSource,
    /// Largest nodal change caused by band-limiting file input.
    pub truncation_error: Option<f64>,
}

/// Builds the positive field described by `input` on `grid`, analyzed at
/// band limit `l_max`.
pub fn parse_field_source(input: &str, grid: &Arc<SphereGrid>, l_max: usize) -> Result<LoadedField> {
    let source: FieldSource = input.parse()?;
    let (field, truncation_error) = match &source {
        FieldSource::File { path } => {
            let raw = read_field_csv_path(Path::new(path), grid)?;
            raw.ensure_positive()?;
            let f = raw.analyzed(l_max)?;
            let err = f.consistency_error();
            (crate::harmonics::synthesize(f.coeffs().expect("analyzed"), grid), err)
        }
        FieldSource::Family(fam) => (family_field(fam, grid, l_max)?, None),
    };
    field.ensure_positive()?;
    Ok(LoadedField { field, source, truncation_error })
}

fn family_field(fam: &Family, grid: &Arc<SphereGrid>, l_max: usize) -> Result<SphericalField> {
    let four_pi_sqrt = (4.0 * std::f64::consts::PI).sqrt();
    match *fam {
        Family::Constant { c } => {
            let mut co = HarmonicCoeffs::zeros(l_max);
            co.set(0, 0, c * four_pi_sqrt);
            Ok(SphericalField::from_coeffs(grid.clone(), co))
        }
        Family::Ellipsoid { a, b, c } => {
            let u = support_function(&AnalyticBody::Ellipsoid { a, b, c }, grid)?.analyzed(l_max)?;
            forward_f(&u)
        }
        Family::Harmonic { l, m, eps, base } => {
            if l > l_max {
                return Err(Error::InvalidParameter(format!("degree {l} exceeds L_max = {l_max}")));
            }
            let mut co = HarmonicCoeffs::zeros(l_max);
            co.set(0, 0, base * four_pi_sqrt);
            co.set(l, m, co.get(l, m) + eps);
            Ok(SphericalField::from_coeffs(grid.clone(), co))
        }
    }
}

/// Angular tolerance when matching CSV rows to grid nodes.
pub const NODE_TOL: f64 = 1e-9;

/// Reads a `theta,phi,value` CSV whose rows follow the grid order.
pub fn read_field_csv<R: Read>(r: R, grid: &Arc<SphereGrid>) -> Result<SphericalField> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = rdr.headers().map_err(|e| Error::ParseError { line: 1, msg: e.to_string() })?;
    let names: Vec<&str> = header.iter().collect();
    if names != ["theta", "phi", "value"] {
        return Err(Error::ParseError { line: 1, msg: format!("expected header theta,phi,value, got {}", names.join(",")) });
    }
    let mut values = Vec::with_capacity(grid.len());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::ParseError {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 3 {
            return Err(Error::ParseError { line, msg: format!("expected 3 columns, got {}", rec.len()) });
        }
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| Error::ParseError { line, msg: format!("`{}` is not a number", &rec[i]) })
        };
        let (theta, phi, value) = (num(0)?, num(1)?, num(2)?);
        let k = values.len();
        if k >= grid.len() {
            return Err(Error::GridMismatch(format!("more than {} rows", grid.len())));
        }
        let (i, j) = (k / grid.azimuth_count(), k % grid.azimuth_count());
        let dphi = (phi - grid.phi(j)).abs();
        if (theta - grid.thetas()[i]).abs() > NODE_TOL || dphi.min(2.0 * std::f64::consts::PI - dphi) > NODE_TOL {
            return Err(Error::GridMismatch(format!(
                "row at line {line} is ({theta}, {phi}), expected node ({}, {})",
                grid.thetas()[i],
                grid.phi(j)
            )));
        }
        values.push(value);
    }
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(format!("{} rows for a grid of {} nodes", values.len(), grid.len())));
    }
    SphericalField::from_values(grid.clone(), values)
}

pub fn read_field_csv_path(path: &Path, grid: &Arc<SphereGrid>) -> Result<SphericalField> {
    read_field_csv(std::fs::File::open(path)?, grid)
}

/// Writes `theta,phi,value` rows in grid order with round-trip precision.
pub fn write_field_csv<W: Write>(f: &SphericalField, w: W) -> Result<()> {
    let grid = f.grid();
    let mut wtr = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    wtr.write_record(["theta", "phi", "value"]).map_err(csv_err)?;
    for i in 0..grid.resolution() {
        for j in 0..grid.azimuth_count() {
            let v = f.values()[grid.index(i, j)];
            wtr.write_record([grid.thetas()[i].to_string(), grid.phi(j).to_string(), v.to_string()])
                .map_err(csv_err)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_field_csv_path(f: &SphericalField, path: &Path) -> Result<()> {
    write_field_csv(f, std::io::BufWriter::new(std::fs::File::create(path)?))
}
