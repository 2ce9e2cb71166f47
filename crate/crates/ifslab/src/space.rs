//! Metric charts the library works on.
//!
//! Every space here is a concrete chart with an explicit distance function:
//! the real line, the one-point compactification of the line (projected onto
//! a circle of circumference 2*pi), the unit circle, the closed unit disc and
//! an axis-aligned plane region. Points carry their chart coordinates; the
//! compactified line has a dedicated point at infinity.

use crate::error::{IfsError, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::fmt;

/// Wrap an angle into `[0, 2*pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t < 0.0 {
        t += TAU;
    }
    if t >= TAU {
        t = 0.0;
    }
    t
}

/// Distance between two angles on a circle of circumference `2*pi`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % TAU;
    d.min(TAU - d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    RealLine,
    CompactifiedLine,
    Circle,
    UnitDisc,
    PlaneRegion,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SpaceKind::RealLine => "real-line",
            SpaceKind::CompactifiedLine => "compactified-line",
            SpaceKind::Circle => "circle",
            SpaceKind::UnitDisc => "unit-disc",
            SpaceKind::PlaneRegion => "plane-region",
        };
        f.write_str(s)
    }
}

/// A point in one of the supported charts.
///
/// `Line` carries the real coordinate (also used for the finite part of the
/// compactified line), `Angle` a circle coordinate in `[0, 2*pi)`, `Plane` a
/// pair of plane coordinates. `Infinity` is the extra point of the
/// compactified line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Line(f64),
    Infinity,
    Angle(f64),
    Plane(f64, f64),
}

impl Point {
    /// Circle point with the angle wrapped into `[0, 2*pi)`.
    pub fn angle(theta: f64) -> Point {
        Point::Angle(wrap_angle(theta))
    }

    pub fn plane(x: f64, y: f64) -> Point {
        Point::Plane(x, y)
    }

    pub fn line(x: f64) -> Point {
        Point::Line(x)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    /// First chart coordinate (the angle for circle points, `pi` for
    /// infinity).
    pub fn coord_x(&self) -> f64 {
        match *self {
            Point::Line(x) => x,
            Point::Angle(t) => t,
            Point::Plane(x, _) => x,
            Point::Infinity => PI,
        }
    }

    pub fn coord_y(&self) -> Option<f64> {
        match *self {
            Point::Plane(_, y) => Some(y),
            _ => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Point::Line(x) => write!(f, "{x}"),
            Point::Infinity => write!(f, "inf"),
            Point::Angle(t) => write!(f, "angle({t})"),
            Point::Plane(x, y) => write!(f, "({x}, {y})"),
        }
    }
}

/// Chart bounds used for sampling and rendering.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bounds {
    Interval(f64, f64),
    Rect([f64; 2], [f64; 2]),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Space {
    kind: SpaceKind,
    bounds: Option<Bounds>,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)
    }
}

impl Space {
    pub fn real_line() -> Space {
        Space {
            kind: SpaceKind::RealLine,
            bounds: Some(Bounds::Interval(-8.0, 8.0)),
        }
    }

    pub fn real_line_bounded(lo: f64, hi: f64) -> Space {
        Space {
            kind: SpaceKind::RealLine,
            bounds: Some(Bounds::Interval(lo, hi)),
        }
    }

    pub fn compactified_line() -> Space {
        Space {
            kind: SpaceKind::CompactifiedLine,
            bounds: None,
        }
    }

    pub fn circle() -> Space {
        Space {
            kind: SpaceKind::Circle,
            bounds: None,
        }
    }

    pub fn unit_disc() -> Space {
        Space {
            kind: SpaceKind::UnitDisc,
            bounds: Some(Bounds::Rect([-1.0, -1.0], [1.0, 1.0])),
        }
    }

    pub fn plane_region(min: [f64; 2], max: [f64; 2]) -> Space {
        Space {
            kind: SpaceKind::PlaneRegion,
            bounds: Some(Bounds::Rect(min, max)),
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn bounds(&self) -> Option<Bounds> {
        self.bounds
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            SpaceKind::UnitDisc | SpaceKind::PlaneRegion => 2,
            _ => 1,
        }
    }

    /// Chart period for the 1-D wrap-around charts.
    pub(crate) fn chart_period(&self) -> Option<f64> {
        match self.kind {
            SpaceKind::Circle | SpaceKind::CompactifiedLine => Some(TAU),
            _ => None,
        }
    }

    /// Chart coordinates for grid hashing and rendering. For the
    /// compactified line this is the projected angle `2*atan(x)` with
    /// infinity at `pi`; the metric equals the chart metric in every case.
    pub(crate) fn chart(&self, p: &Point) -> [f64; 2] {
        match (self.kind, p) {
            (SpaceKind::RealLine, Point::Line(x)) => [*x, 0.0],
            (SpaceKind::CompactifiedLine, Point::Line(x)) => [2.0 * x.atan(), 0.0],
            (SpaceKind::CompactifiedLine, Point::Infinity) => [PI, 0.0],
            (SpaceKind::Circle, Point::Angle(t)) => [*t, 0.0],
            (SpaceKind::UnitDisc | SpaceKind::PlaneRegion, Point::Plane(x, y)) => [*x, *y],
            _ => panic!("point {p} does not belong to a {} space", self.kind),
        }
    }

    /// Whether the point belongs to this chart (variant plus, for the disc,
    /// the unit-ball inequality). Declared bounds are sampling metadata, not
    /// containment constraints.
    pub fn admits(&self, p: &Point) -> bool {
        match (self.kind, p) {
            (SpaceKind::RealLine, Point::Line(x)) => x.is_finite(),
            (SpaceKind::CompactifiedLine, Point::Line(x)) => x.is_finite(),
            (SpaceKind::CompactifiedLine, Point::Infinity) => true,
            (SpaceKind::Circle, Point::Angle(t)) => (0.0..TAU).contains(t),
            (SpaceKind::UnitDisc, Point::Plane(x, y)) => x * x + y * y <= 1.0 + 1e-9,
            (SpaceKind::PlaneRegion, Point::Plane(x, y)) => x.is_finite() && y.is_finite(),
            _ => false,
        }
    }

    /// Metric of the space. Panics if either point is foreign to the chart;
    /// set and system constructors validate membership up front so the hot
    /// paths stay check-free.
    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        match self.kind {
            SpaceKind::RealLine => (a.coord_x() - b.coord_x()).abs(),
            SpaceKind::CompactifiedLine | SpaceKind::Circle => {
                angular_distance(self.chart(a)[0], self.chart(b)[0])
            }
            SpaceKind::UnitDisc | SpaceKind::PlaneRegion => {
                let ca = self.chart(a);
                let cb = self.chart(b);
                (ca[0] - cb[0]).hypot(ca[1] - cb[1])
            }
        }
    }

    /// Deterministic sample of chart points, used by construction-time
    /// checks. The compactified line mixes in the point at infinity.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let p = match self.kind {
                SpaceKind::RealLine => {
                    let (lo, hi) = match self.bounds {
                        Some(Bounds::Interval(lo, hi)) => (lo, hi),
                        _ => (-8.0, 8.0),
                    };
                    Point::Line(rng.random_range(lo..hi))
                }
                SpaceKind::CompactifiedLine => {
                    if i % 64 == 63 {
                        Point::Infinity
                    } else {
                        let t: f64 = rng.random_range(-PI + 1e-6..PI - 1e-6);
                        Point::Line((t / 2.0).tan())
                    }
                }
                SpaceKind::Circle => Point::Angle(rng.random_range(0.0..TAU)),
                SpaceKind::UnitDisc => {
                    let r = rng.random::<f64>().sqrt();
                    let t: f64 = rng.random_range(0.0..TAU);
                    Point::Plane(r * t.cos(), r * t.sin())
                }
                SpaceKind::PlaneRegion => {
                    let (min, max) = match self.bounds {
                        Some(Bounds::Rect(min, max)) => (min, max),
                        _ => ([0.0, 0.0], [1.0, 1.0]),
                    };
                    Point::Plane(
                        rng.random_range(min[0]..max[0]),
                        rng.random_range(min[1]..max[1]),
                    )
                }
            };
            out.push(p);
        }
        out
    }

    pub(crate) fn expect_same(&self, other: &Space) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(IfsError::SpaceMismatch(
                self.to_string(),
                other.to_string(),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(TAU), 0.0);
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!(wrap_angle(-1e-17) < TAU);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn compactified_metric_matches_projection() {
        let sp = Space::compactified_line();
        // x + 1 walks toward infinity in the chart metric.
        let mut last = sp.distance(&Point::Line(0.0), &Point::Infinity);
        for n in 1..50 {
            let d = sp.distance(&Point::Line(n as f64), &Point::Infinity);
            assert!(d < last, "distance to infinity must decrease");
            last = d;
        }
        assert!(last < 0.05);
        // Negative points approach infinity from the other side.
        let d = sp.distance(&Point::Line(-1e9), &Point::Infinity);
        assert!(d < 1e-8);
    }

    #[test]
    fn metric_axioms_on_samples() {
        for sp in [
            Space::real_line(),
            Space::compactified_line(),
            Space::circle(),
            Space::unit_disc(),
            Space::plane_region([0.0, 0.0], [1.0, 1.0]),
        ] {
            let pts = sp.sample(60, 7);
            for a in &pts {
                assert!(sp.distance(a, a) <= 1e-15, "zero on the diagonal");
            }
            for a in &pts {
                for b in &pts {
                    let dab = sp.distance(a, b);
                    assert!((dab - sp.distance(b, a)).abs() <= 1e-15, "symmetry");
                    for c in &pts {
                        assert!(
                            dab <= sp.distance(a, c) + sp.distance(c, b) + 1e-12,
                            "triangle inequality in {sp}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn circle_distance_wraps() {
        let sp = Space::circle();
        let d = sp.distance(&Point::angle(0.1), &Point::angle(TAU - 0.1));
        assert!((d - 0.2).abs() < 1e-12);
    }
}
