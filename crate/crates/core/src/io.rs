//! File formats: JSON-lines path datasets, JSON checkpoints and
//! headerless CSV observation tables. Floats are written in Rust's
//! shortest round-trip form, so re-reading reproduces values bit-exactly.

use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldId, Point};
use crate::net::Checkpoint;
use crate::sampler::{DatasetRecord, PathDataset};
use crate::scalar::Scalar;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

/// One dataset line: coordinates are in the chart of `y`; `anchor_y`
/// appears only for manifolds with anchored charts.
#[derive(Debug, Serialize, Deserialize)]
struct RecordLine {
    x0: Vec<f64>,
    y: Vec<f64>,
    prev: Vec<f64>,
    t: f64,
    dt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    anchor_y: Option<Vec<f64>>,
}

fn vec_of<T: Scalar>(v: &DVector<T>) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

fn dvector_from<T: Scalar>(v: &[f64]) -> DVector<T> {
    DVector::from_iterator(v.len(), v.iter().map(|x| T::of(*x)))
}

/// Write a dataset as JSON lines, one record per line.
pub fn write_dataset<T: Scalar>(path: &Path, dataset: &PathDataset<T>) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    for rec in &dataset.records {
        let line = RecordLine {
            x0: vec_of(&rec.x0.coords),
            y: vec_of(&rec.y.coords),
            prev: vec_of(&rec.prev.coords),
            t: rec.t.as_f64(),
            dt: rec.dt.as_f64(),
            anchor_y: rec.y.anchor.as_ref().map(vec_of),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a dataset written by [`write_dataset`]; the manifold and seed are
/// supplied by the caller (they are CLI-level metadata).
pub fn read_dataset<T: Scalar>(
    path: &Path,
    manifold: ManifoldId,
    seed: u64,
) -> Result<PathDataset<T>> {
    let d = manifold.dim();
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RecordLine = serde_json::from_str(&line).map_err(|e| {
            Error::InvalidInput(format!("dataset line {}: {e}", lineno + 1))
        })?;
        if rec.x0.len() != d || rec.y.len() != d || rec.prev.len() != d {
            return Err(Error::InvalidInput(format!(
                "dataset line {}: expected {d} coordinates for manifold {manifold}",
                lineno + 1
            )));
        }
        if rec.dt <= 0.0 || rec.t <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "dataset line {}: non-positive time fields",
                lineno + 1
            )));
        }
        let anchor = rec.anchor_y.as_ref().map(|a| dvector_from::<T>(a));
        records.push(DatasetRecord {
            x0: Point {
                coords: dvector_from(&rec.x0),
                anchor: anchor.clone(),
            },
            y: Point {
                coords: dvector_from(&rec.y),
                anchor: anchor.clone(),
            },
            prev: Point {
                coords: dvector_from(&rec.prev),
                anchor,
            },
            t: T::of(rec.t),
            dt: T::of(rec.dt),
        });
    }
    if records.is_empty() {
        return Err(Error::InvalidInput(format!(
            "dataset {} has no records",
            path.display()
        )));
    }
    Ok(PathDataset {
        manifold,
        seed,
        records,
    })
}

/// Write a checkpoint as pretty JSON.
pub fn write_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, ckpt)?;
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let file = std::fs::File::open(path)?;
    let ckpt: Checkpoint = serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| Error::InvalidInput(format!("checkpoint {}: {e}", path.display())))?;
    let expected = Checkpoint::parameter_count(&ckpt.layer_dims);
    if ckpt.params.len() != expected {
        return Err(Error::InvalidInput(format!(
            "checkpoint {}: parameter count {} does not match layer dims {:?}",
            path.display(),
            ckpt.params.len(),
            ckpt.layer_dims
        )));
    }
    Ok(ckpt)
}

/// Write observation points as headerless CSV rows: `d` chart coordinates,
/// plus the anchor columns for anchored charts.
pub fn write_points_csv<T: Scalar>(path: &Path, points: &[Point<T>]) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    for p in points {
        let mut fields: Vec<String> = p.coords.iter().map(|v| format!("{}", v.as_f64())).collect();
        if let Some(a) = &p.anchor {
            fields.extend(a.iter().map(|v| format!("{}", v.as_f64())));
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Read observation points for a manifold: rows of `d` values, or
/// `d + ambient` values when an anchor is attached.
pub fn read_points_csv<T: Scalar>(path: &Path, manifold: ManifoldId) -> Result<Vec<Point<T>>> {
    let d = manifold.dim();
    let amb = manifold.ambient_dim();
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut points = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!(
                        "observations line {}: field `{}` is not a number",
                        lineno + 1,
                        f.trim()
                    ))
                })
            })
            .collect::<Result<_>>()?;
        let point = if values.len() == d {
            Point::new(dvector_from(&values))
        } else if values.len() == d + amb {
            Point {
                coords: dvector_from(&values[..d]),
                anchor: Some(dvector_from(&values[d..])),
            }
        } else {
            return Err(Error::InvalidInput(format!(
                "observations line {}: expected {d} or {} fields for manifold {manifold}, got {}",
                lineno + 1,
                d + amb,
                values.len()
            )));
        };
        points.push(point);
    }
    if points.is_empty() {
        return Err(Error::InvalidInput(format!(
            "observation file {} is empty",
            path.display()
        )));
    }
    Ok(points)
}

/// Validate loaded observations against a manifold.
pub fn check_points<T: Scalar>(m: &dyn Manifold<T>, points: &[Point<T>]) -> Result<()> {
    for p in points {
        m.check_point(p)?;
    }
    Ok(())
}
