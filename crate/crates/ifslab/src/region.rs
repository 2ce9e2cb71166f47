//! Region descriptors: the shapes sets are sampled from, retractions map
//! onto, and piecewise maps are glued along.

use crate::error::{IfsError, Result};
use crate::space::{wrap_angle, Point, Space, SpaceKind};
use std::f64::consts::TAU;
use std::fmt;

/// An interval, arc, box, disc, triangle, or explicit point list.
///
/// Intervals live in the 1-D charts (the real coordinate; infinite endpoints
/// are allowed for map pieces). Arcs run counterclockwise from `from` to
/// `to`; `from == to` denotes the full circle.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Interval { lo: f64, hi: f64 },
    Arc { from: f64, to: f64 },
    Rect { min: [f64; 2], max: [f64; 2] },
    Disc { center: [f64; 2], radius: f64 },
    Triangle { v: [[f64; 2]; 3] },
    Singleton { point: Point },
    Points { points: Vec<Point> },
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Interval { lo, hi } => write!(f, "interval[{lo}, {hi}]"),
            Region::Arc { from, to } => write!(f, "arc[{from} -> {to}]"),
            Region::Rect { min, max } => {
                write!(f, "rect[({}, {}), ({}, {})]", min[0], min[1], max[0], max[1])
            }
            Region::Disc { center, radius } => {
                write!(f, "disc[({}, {}), r={radius}]", center[0], center[1])
            }
            Region::Triangle { v } => write!(
                f,
                "triangle[({}, {}), ({}, {}), ({}, {})]",
                v[0][0], v[0][1], v[1][0], v[1][1], v[2][0], v[2][1]
            ),
            Region::Singleton { point } => write!(f, "point[{point}]"),
            Region::Points { points } => write!(f, "points[{}]", points.len()),
        }
    }
}

/// Arc length of the counterclockwise arc `from -> to`; the full circle when
/// the endpoints coincide.
pub(crate) fn arc_length(from: f64, to: f64) -> f64 {
    if from == to {
        TAU
    } else {
        let l = wrap_angle(to - from);
        if l == 0.0 {
            TAU
        } else {
            l
        }
    }
}

fn tri_barycentric(v: &[[f64; 2]; 3], p: [f64; 2]) -> Option<[f64; 3]> {
    let d = (v[1][1] - v[2][1]) * (v[0][0] - v[2][0]) + (v[2][0] - v[1][0]) * (v[0][1] - v[2][1]);
    if d.abs() < 1e-300 {
        return None;
    }
    let l0 = ((v[1][1] - v[2][1]) * (p[0] - v[2][0]) + (v[2][0] - v[1][0]) * (p[1] - v[2][1])) / d;
    let l1 = ((v[2][1] - v[0][1]) * (p[0] - v[2][0]) + (v[0][0] - v[2][0]) * (p[1] - v[2][1])) / d;
    Some([l0, l1, 1.0 - l0 - l1])
}

pub(crate) fn nearest_on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> [f64; 2] {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return a;
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    [a[0] + t * ab[0], a[1] + t * ab[1]]
}

impl Region {
    /// Whether the region is meaningful on the given space.
    pub fn compatible_with(&self, space: &Space) -> bool {
        match self {
            Region::Interval { .. } => {
                matches!(space.kind(), SpaceKind::RealLine | SpaceKind::CompactifiedLine)
            }
            Region::Arc { .. } => space.kind() == SpaceKind::Circle,
            Region::Rect { .. } | Region::Disc { .. } | Region::Triangle { .. } => {
                space.dim() == 2
            }
            Region::Singleton { point } => space.admits(point),
            Region::Points { points } => points.iter().all(|p| space.admits(p)),
        }
    }

    /// Membership with a metric tolerance.
    pub fn contains(&self, space: &Space, p: &Point, tol: f64) -> bool {
        match self {
            Region::Interval { lo, hi } => match p {
                Point::Line(x) => *x >= lo - tol && *x <= hi + tol,
                Point::Infinity => *hi == f64::INFINITY || *lo == f64::NEG_INFINITY,
                _ => false,
            },
            Region::Arc { from, to } => match p {
                Point::Angle(theta) => {
                    let len = arc_length(*from, *to);
                    if len >= TAU {
                        return true;
                    }
                    let t = wrap_angle(theta - from);
                    t <= len + tol || t >= TAU - tol
                }
                _ => false,
            },
            Region::Rect { min, max } => match p {
                Point::Plane(x, y) => {
                    *x >= min[0] - tol && *x <= max[0] + tol && *y >= min[1] - tol
                        && *y <= max[1] + tol
                }
                _ => false,
            },
            Region::Disc { center, radius } => match p {
                Point::Plane(x, y) => {
                    (x - center[0]).hypot(y - center[1]) <= radius + tol
                }
                _ => false,
            },
            Region::Triangle { v } => match p {
                Point::Plane(x, y) => {
                    // Tolerance scaled by the triangle size via the edges.
                    match tri_barycentric(v, [*x, *y]) {
                        Some(l) => {
                            let side = (v[1][0] - v[0][0]).hypot(v[1][1] - v[0][1]).max(1e-30);
                            l.iter().all(|li| *li >= -tol / side)
                        }
                        None => false,
                    }
                }
                _ => false,
            },
            Region::Singleton { point } => space.distance(point, p) <= tol,
            Region::Points { points } => points.iter().any(|q| space.distance(q, p) <= tol),
        }
    }

    /// A rough gap measure used to re-home floating-point strays when a
    /// point falls in no declared piece: 0 inside, otherwise a distance-like
    /// value. Only relative order matters.
    pub(crate) fn gap(&self, space: &Space, p: &Point) -> f64 {
        match self {
            Region::Interval { lo, hi } => {
                let x = match p {
                    Point::Line(x) => *x,
                    Point::Infinity => return 0.0,
                    _ => return f64::INFINITY,
                };
                if x < *lo {
                    lo - x
                } else if x > *hi {
                    x - hi
                } else {
                    0.0
                }
            }
            Region::Arc { from, to } => match p {
                Point::Angle(theta) => {
                    let len = arc_length(*from, *to);
                    let t = wrap_angle(theta - from);
                    if t <= len {
                        0.0
                    } else {
                        (t - len).min(TAU - t)
                    }
                }
                _ => f64::INFINITY,
            },
            Region::Rect { min, max } => match p {
                Point::Plane(x, y) => {
                    let dx = (min[0] - x).max(0.0).max(x - max[0]);
                    let dy = (min[1] - y).max(0.0).max(y - max[1]);
                    dx.hypot(dy)
                }
                _ => f64::INFINITY,
            },
            Region::Disc { center, radius } => match p {
                Point::Plane(x, y) => {
                    ((x - center[0]).hypot(y - center[1]) - radius).max(0.0)
                }
                _ => f64::INFINITY,
            },
            Region::Triangle { v } => match p {
                Point::Plane(x, y) => {
                    if self.contains(space, p, 0.0) {
                        0.0
                    } else {
                        let q = [*x, *y];
                        let mut best = f64::INFINITY;
                        for k in 0..3 {
                            let n = nearest_on_segment(v[k], v[(k + 1) % 3], q);
                            best = best.min((n[0] - q[0]).hypot(n[1] - q[1]));
                        }
                        best
                    }
                }
                _ => f64::INFINITY,
            },
            Region::Singleton { point } => space.distance(point, p),
            Region::Points { points } => points
                .iter()
                .map(|q| space.distance(q, p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Characteristic boundary points (interval/arc endpoints, polygon
    /// vertices, cardinal disc points, the points themselves). Piecewise-map
    /// validation includes these since random sampling misses shared edges.
    pub(crate) fn corner_points(&self) -> Vec<Point> {
        match self {
            Region::Interval { lo, hi } => {
                let mut out = Vec::new();
                if lo.is_finite() {
                    out.push(Point::Line(*lo));
                }
                if hi.is_finite() {
                    out.push(Point::Line(*hi));
                }
                out
            }
            Region::Arc { from, to } => vec![Point::angle(*from), Point::angle(*to)],
            Region::Rect { min, max } => vec![
                Point::Plane(min[0], min[1]),
                Point::Plane(max[0], min[1]),
                Point::Plane(max[0], max[1]),
                Point::Plane(min[0], max[1]),
            ],
            Region::Disc { center, radius } => vec![
                Point::Plane(center[0] + radius, center[1]),
                Point::Plane(center[0] - radius, center[1]),
                Point::Plane(center[0], center[1] + radius),
                Point::Plane(center[0], center[1] - radius),
            ],
            Region::Triangle { v } => {
                v.iter().map(|c| Point::Plane(c[0], c[1])).collect()
            }
            Region::Singleton { point } => vec![*point],
            Region::Points { points } => points.clone(),
        }
    }

    /// Nearest point of the region, the retraction image. Errors on shapes
    /// with no supported projection.
    pub fn nearest_point(&self, space: &Space, p: &Point) -> Result<Point> {
        match self {
            Region::Interval { lo, hi } => match p {
                Point::Line(x) => Ok(Point::Line(x.clamp(*lo, *hi))),
                Point::Infinity => {
                    // Clamp in the projected chart: pick the endpoint nearer
                    // to the point at infinity.
                    if !lo.is_finite() || !hi.is_finite() {
                        return Ok(Point::Infinity);
                    }
                    let d_lo = space.distance(&Point::Line(*lo), &Point::Infinity);
                    let d_hi = space.distance(&Point::Line(*hi), &Point::Infinity);
                    Ok(Point::Line(if d_hi <= d_lo { *hi } else { *lo }))
                }
                _ => Err(IfsError::UnsupportedRegion(self.to_string())),
            },
            Region::Arc { from, to } => match p {
                Point::Angle(theta) => {
                    let len = arc_length(*from, *to);
                    if len >= TAU {
                        return Ok(*p);
                    }
                    let t = wrap_angle(theta - from);
                    if t <= len {
                        Ok(*p)
                    } else if t - len <= TAU - t {
                        Ok(Point::angle(*to))
                    } else {
                        Ok(Point::angle(*from))
                    }
                }
                _ => Err(IfsError::UnsupportedRegion(self.to_string())),
            },
            Region::Rect { min, max } => match p {
                Point::Plane(x, y) => Ok(Point::Plane(
                    x.clamp(min[0], max[0]),
                    y.clamp(min[1], max[1]),
                )),
                _ => Err(IfsError::UnsupportedRegion(self.to_string())),
            },
            Region::Disc { center, radius } => match p {
                Point::Plane(x, y) => {
                    let dx = x - center[0];
                    let dy = y - center[1];
                    let r = dx.hypot(dy);
                    if r <= *radius {
                        Ok(*p)
                    } else {
                        Ok(Point::Plane(
                            center[0] + dx * radius / r,
                            center[1] + dy * radius / r,
                        ))
                    }
                }
                _ => Err(IfsError::UnsupportedRegion(self.to_string())),
            },
            Region::Triangle { v } => match p {
                Point::Plane(x, y) => {
                    let q = [*x, *y];
                    if self.contains(space, p, 0.0) {
                        return Ok(*p);
                    }
                    let mut best = [f64::NAN, f64::NAN];
                    let mut best_d = f64::INFINITY;
                    for k in 0..3 {
                        let n = nearest_on_segment(v[k], v[(k + 1) % 3], q);
                        let d = (n[0] - q[0]).hypot(n[1] - q[1]);
                        if d < best_d {
                            best_d = d;
                            best = n;
                        }
                    }
                    Ok(Point::Plane(best[0], best[1]))
                }
                _ => Err(IfsError::UnsupportedRegion(self.to_string())),
            },
            Region::Singleton { point } => Ok(*point),
            Region::Points { points } => {
                let mut best = points[0];
                let mut best_d = f64::INFINITY;
                for q in points {
                    let d = space.distance(q, p);
                    if d < best_d {
                        best_d = d;
                        best = *q;
                    }
                }
                Ok(best)
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Region::Interval { lo, hi } => lo > hi,
            Region::Rect { min, max } => min[0] > max[0] || min[1] > max[1],
            Region::Disc { radius, .. } => *radius < 0.0,
            Region::Points { points } => points.is_empty(),
            _ => false,
        }
    }
}
