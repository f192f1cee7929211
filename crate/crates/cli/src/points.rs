//! Point arguments: named sphere points, JSON coordinate arrays, or JSON
//! objects with an explicit anchor.

use nalgebra::DVector;
use scoremeans::manifold::{ManifoldId, Point, Sphere};
use scoremeans::{Error, Result};

/// Parse `--x`/`--y`-style point arguments.
///
/// Accepted forms: `north` / `south` / `equator` (spheres), `origin`
/// (any family: the canonical basepoint), a JSON array of chart
/// coordinates, or a JSON object `{"coords": [...], "anchor": [...]}`.
pub fn parse_point(arg: &str, manifold: ManifoldId) -> Result<Point<f64>> {
    let d = manifold.dim();
    match arg {
        "origin" => return Ok(scoremeans::manifold::canonical_basepoint(manifold)),
        "north" | "south" | "equator" => {
            let ManifoldId::Sphere(n) = manifold else {
                return Err(Error::InvalidInput(format!(
                    "named point `{arg}` only exists on spheres, not {manifold}"
                )));
            };
            let sphere = Sphere::new(n);
            let north = sphere.north_point::<f64>();
            return Ok(match arg {
                "north" => north,
                "south" => {
                    let mut anchor = DVector::zeros(n + 1);
                    anchor[n] = -1.0;
                    Point::with_anchor(DVector::zeros(n), anchor)
                }
                _ => {
                    // First ambient axis, expressed in the north chart.
                    let mut coords = DVector::zeros(n);
                    coords[0] = 1.0;
                    Point::with_anchor(coords, north.anchor.unwrap())
                }
            });
        }
        _ => {}
    }
    let value: serde_json::Value = serde_json::from_str(arg)
        .map_err(|e| Error::InvalidInput(format!("point `{arg}`: {e}")))?;
    let as_vec = |v: &serde_json::Value, what: &str| -> Result<DVector<f64>> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::InvalidInput(format!("point `{arg}`: {what} must be an array")))?;
        let vals: Result<Vec<f64>> = arr
            .iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| Error::InvalidInput(format!("point `{arg}`: non-numeric entry")))
            })
            .collect();
        Ok(DVector::from_vec(vals?))
    };
    let point = match &value {
        serde_json::Value::Array(_) => Point::new(as_vec(&value, "coordinates")?),
        serde_json::Value::Object(map) => {
            let coords = as_vec(
                map.get("coords")
                    .ok_or_else(|| Error::InvalidInput(format!("point `{arg}`: missing `coords`")))?,
                "coords",
            )?;
            let anchor = map.get("anchor").map(|a| as_vec(a, "anchor")).transpose()?;
            Point { coords, anchor }
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "point `{arg}`: expected a JSON array or object"
            )))
        }
    };
    if point.dim() != d {
        return Err(Error::InvalidInput(format!(
            "point `{arg}` has {} coordinates, manifold {manifold} needs {d}",
            point.dim()
        )));
    }
    Ok(point)
}

/// JSON value for a point (coords plus optional anchor).
pub fn point_json(p: &Point<f64>) -> serde_json::Value {
    let mut obj = serde_json::Map::new();
    obj.insert(
        "coords".into(),
        serde_json::json!(p.coords.iter().copied().collect::<Vec<f64>>()),
    );
    if let Some(a) = &p.anchor {
        obj.insert(
            "anchor".into(),
            serde_json::json!(a.iter().copied().collect::<Vec<f64>>()),
        );
    }
    serde_json::Value::Object(obj)
}
