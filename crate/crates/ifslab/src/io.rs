//! File formats: point-cloud CSV with an epsilon header comment, and orbit
//! summary CSV. Numbers are serialized with 17 significant digits so doubles
//! round-trip exactly and reruns are byte-identical.

use crate::error::{IfsError, Result};
use crate::hutchinson::OrbitRecord;
use crate::sets::SetApprox;
use crate::space::{Point, Space};
use std::io::{BufRead, Write};

/// 17 significant digits: exact round trip for f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a point cloud as CSV: a `# epsilon=<val>` comment, the header
/// `x,flag` (or `x,y,flag` on plane charts), one point per row. The flag
/// column marks the point at infinity.
pub fn write_point_cloud(w: &mut impl Write, set: &SetApprox) -> Result<()> {
    writeln!(w, "# epsilon={}", fmt_f64(set.resolution()))?;
    let two_d = set.space().dim() == 2;
    if two_d {
        writeln!(w, "x,y,flag")?;
    } else {
        writeln!(w, "x,flag")?;
    }
    for p in set.points() {
        match p {
            Point::Plane(x, y) => writeln!(w, "{},{},0", fmt_f64(*x), fmt_f64(*y))?,
            Point::Infinity => writeln!(w, "{},1", fmt_f64(0.0))?,
            Point::Line(x) => writeln!(w, "{},0", fmt_f64(*x))?,
            Point::Angle(t) => writeln!(w, "{},0", fmt_f64(*t))?,
        }
    }
    Ok(())
}

/// Read a point cloud written by [`write_point_cloud`] back onto a space.
pub fn read_point_cloud(r: &mut impl BufRead, space: &Space) -> Result<SetApprox> {
    let mut eps = None;
    let mut pts = Vec::new();
    let mut saw_header = false;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("epsilon=") {
                eps = Some(v.trim().parse::<f64>().map_err(|e| {
                    IfsError::Parse(format!("bad epsilon comment: {e}"))
                })?);
            }
            continue;
        }
        if !saw_header {
            if !(line == "x,flag" || line == "x,y,flag") {
                return Err(IfsError::Parse(format!(
                    "expected point-cloud header, got `{line}`"
                )));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| IfsError::Parse(format!("bad number `{s}`: {e}")))
        };
        let p = match fields.as_slice() {
            [x, flag] => {
                if flag.trim() == "1" {
                    Point::Infinity
                } else {
                    match space.kind() {
                        crate::space::SpaceKind::Circle => Point::angle(parse(x)?),
                        _ => Point::Line(parse(x)?),
                    }
                }
            }
            [x, y, _flag] => Point::Plane(parse(x)?, parse(y)?),
            _ => {
                return Err(IfsError::Parse(format!(
                    "point row must have 2 or 3 fields, got `{line}`"
                )))
            }
        };
        pts.push(p);
    }
    let eps = eps.ok_or_else(|| IfsError::Parse("missing `# epsilon=` comment".into()))?;
    SetApprox::new(space.clone(), pts, eps)
}

/// Orbit summary: one row per step with the point count and (when a target
/// is attached) the Hausdorff distance to it.
pub fn write_orbit_csv(w: &mut impl Write, orbit: &OrbitRecord) -> Result<()> {
    writeln!(w, "step,point_count,distance_to_target")?;
    for (i, step) in orbit.steps.iter().enumerate() {
        let d = orbit
            .distances_to_target
            .as_ref()
            .map(|ds| fmt_f64(ds[i]))
            .unwrap_or_default();
        writeln!(w, "{},{},{}", i, step.len(), d)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Space;

    #[test]
    fn point_cloud_round_trip() {
        let sp = Space::compactified_line();
        let set = SetApprox::new(
            sp.clone(),
            vec![Point::Line(-5.0), Point::Line(0.25), Point::Infinity],
            1e-3,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_point_cloud(&mut buf, &set).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# epsilon="));
        assert!(text.contains("x,flag"));
        let back = read_point_cloud(&mut &buf[..], &sp).unwrap();
        assert_eq!(back.points(), set.points());
        assert_eq!(back.resolution(), set.resolution());
    }

    #[test]
    fn plane_cloud_round_trip() {
        let sp = Space::plane_region([0.0, 0.0], [1.0, 1.0]);
        let set = SetApprox::new(
            sp.clone(),
            vec![Point::Plane(0.125, 0.5), Point::Plane(1.0 / 3.0, 0.9)],
            1e-6,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_point_cloud(&mut buf, &set).unwrap();
        let back = read_point_cloud(&mut &buf[..], &sp).unwrap();
        assert_eq!(back.points(), set.points());
    }

    #[test]
    fn fmt_round_trips_exactly() {
        for v in [1.0 / 3.0, 2.0_f64.powi(-40), std::f64::consts::PI, 1e-300] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }
}
