//! The continuous-map algebra: evaluable self-maps with optional metadata
//! (declared fixed sets, monotone branches, explicit inverses), the concrete
//! attracting-maps-with-local-repellor (ALR) constructors on intervals, arcs
//! and the disc, plus unions, conjugation, retractions and composition.

use crate::error::{IfsError, Result};
use crate::region::Region;
use crate::sets::SetApprox;
use crate::space::{wrap_angle, Point, Space, SpaceKind};
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

/// Sampling seed for construction-time checks; fixed so failures are
/// reproducible and reported at the lowest offending sample index.
const CHECK_SEED: u64 = 0x1f5_1ab;

/// Number of containment samples for the self-map check.
const SELF_MAP_SAMPLES: usize = 10_000;

/// Tolerance for declared-fixed-set and overlap checks.
pub const FIX_TOL: f64 = 1e-9;

type EvalFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;

/// Interval on which a map is strictly monotone in the 1-D chart, enabling
/// preimage solving by bisection. Circle branches are parametrized by the
/// lifted angle in `[lo, lo + 2*pi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotoneBranch {
    pub lo: f64,
    pub hi: f64,
    pub direction: Direction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl MonotoneBranch {
    pub fn increasing(lo: f64, hi: f64) -> MonotoneBranch {
        MonotoneBranch {
            lo,
            hi,
            direction: Direction::Increasing,
        }
    }

    /// Branch parameter of a point; `None` for points without a 1-D chart
    /// position (the point at infinity, plane points).
    pub(crate) fn param_of(&self, space: &Space, p: &Point) -> Option<f64> {
        match (space.kind(), p) {
            (SpaceKind::RealLine | SpaceKind::CompactifiedLine, Point::Line(x)) => Some(*x),
            (SpaceKind::Circle, Point::Angle(t)) => {
                let mut u = self.lo + wrap_angle(t - self.lo);
                // Values a hair below `lo` wrap to the far end; fold them back.
                if u > self.hi && u - TAU >= self.lo - 1e-9 {
                    u = self.lo;
                }
                Some(u)
            }
            _ => None,
        }
    }

    pub(crate) fn point_at(&self, space: &Space, u: f64) -> Point {
        match space.kind() {
            SpaceKind::RealLine | SpaceKind::CompactifiedLine => Point::Line(u),
            SpaceKind::Circle => Point::angle(u),
            _ => panic!("monotone branches require a 1-D chart"),
        }
    }

    pub fn contains_param(&self, u: f64, tol: f64) -> bool {
        u >= self.lo - tol && u <= self.hi + tol
    }
}

/// An evaluable continuous self-map of a space.
///
/// Handles are closures with metadata, shared by `Arc` and safe to evaluate
/// from any thread. Map equality is never tested, only pointwise agreement.
#[derive(Clone)]
pub struct MapHandle {
    space: Space,
    label: String,
    eval_fn: EvalFn,
    inverse_fn: Option<EvalFn>,
    fixed_set: Option<SetApprox>,
    branches: Vec<MonotoneBranch>,
}

impl fmt::Debug for MapHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapHandle")
            .field("space", &self.space.to_string())
            .field("label", &self.label)
            .field("branches", &self.branches.len())
            .finish()
    }
}

impl MapHandle {
    /// Raw handle from a closure. Use the `with_*` builders to attach
    /// metadata; named constructors run the published validation checks.
    pub fn from_fn(
        space: Space,
        label: impl Into<String>,
        f: impl Fn(&Point) -> Point + Send + Sync + 'static,
    ) -> MapHandle {
        MapHandle {
            space,
            label: label.into(),
            eval_fn: Arc::new(f),
            inverse_fn: None,
            fixed_set: None,
            branches: Vec::new(),
        }
    }

    pub fn eval(&self, p: &Point) -> Point {
        (self.eval_fn)(p)
    }

    pub fn inverse_eval(&self, p: &Point) -> Option<Point> {
        self.inverse_fn.as_ref().map(|f| f(p))
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse_fn.is_some()
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn fixed_set(&self) -> Option<&SetApprox> {
        self.fixed_set.as_ref()
    }

    pub fn branches(&self) -> &[MonotoneBranch] {
        &self.branches
    }

    pub fn with_inverse(
        mut self,
        f: impl Fn(&Point) -> Point + Send + Sync + 'static,
    ) -> MapHandle {
        self.inverse_fn = Some(Arc::new(f));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> MapHandle {
        self.label = label.into();
        self
    }

    /// Attach the declared fixed set; every declared point must satisfy
    /// `d(eval(p), p) <= 1e-9`.
    pub fn with_fixed_set(mut self, set: SetApprox) -> Result<MapHandle> {
        self.space.expect_same(set.space())?;
        for (i, p) in set.points().iter().enumerate() {
            let moved = self.space.distance(&self.eval(p), p);
            if moved > FIX_TOL {
                return Err(IfsError::Invalid(format!(
                    "declared fixed point #{i} ({p}) moves by {moved:.3e}"
                )));
            }
        }
        self.fixed_set = Some(set);
        Ok(self)
    }

    /// Attach monotone branches; each is checked for strict monotonicity on
    /// 100 ordered sample pairs.
    pub fn with_branches(mut self, branches: Vec<MonotoneBranch>) -> Result<MapHandle> {
        for b in &branches {
            if b.lo.is_nan() || b.hi.is_nan() || b.lo >= b.hi {
                return Err(IfsError::BadInterval(b.lo, b.hi));
            }
            let mut prev: Option<f64> = None;
            for k in 0..=100 {
                let u = b.lo + (b.hi - b.lo) * k as f64 / 100.0;
                let out = self.eval(&b.point_at(&self.space, u));
                let v = b
                    .param_of(&self.space, &out)
                    .ok_or_else(|| IfsError::Invalid("branch image left the chart".into()))?;
                if let Some(pv) = prev {
                    let ok = match b.direction {
                        Direction::Increasing => v > pv,
                        Direction::Decreasing => v < pv,
                    };
                    if !ok {
                        return Err(IfsError::Invalid(format!(
                            "branch [{}, {}] is not strictly monotone near u={u}",
                            b.lo, b.hi
                        )));
                    }
                }
                prev = Some(v);
            }
        }
        self.branches = branches;
        Ok(self)
    }

    /// Containment check: 10^4 sampled points must map back into the chart.
    /// Failures report the lowest offending sample.
    pub fn validate_self_map(&self) -> Result<()> {
        let samples = self.space.sample(SELF_MAP_SAMPLES, CHECK_SEED);
        for (i, p) in samples.iter().enumerate() {
            let q = self.eval(p);
            if !self.space.admits(&q) {
                return Err(IfsError::Invalid(format!(
                    "sample #{i} ({p}) maps to {q}, outside the {} chart",
                    self.space
                )));
            }
        }
        Ok(())
    }

    /// First branch whose domain contains the parameter of `p`.
    pub fn branch_containing(&self, p: &Point, tol: f64) -> Option<&MonotoneBranch> {
        self.branches.iter().find(|b| {
            b.param_of(&self.space, p)
                .map(|u| b.contains_param(u, tol))
                .unwrap_or(false)
        })
    }
}

/// A finite family of maps on one space, optionally with a designated
/// candidate attractor.
#[derive(Clone, Debug)]
pub struct IfsSystem {
    space: Space,
    maps: Vec<MapHandle>,
    target: Option<SetApprox>,
}

impl IfsSystem {
    pub fn new(maps: Vec<MapHandle>) -> Result<IfsSystem> {
        let first = maps.first().ok_or(IfsError::EmptySet)?;
        let space = first.space().clone();
        for m in &maps {
            space.expect_same(m.space())?;
        }
        Ok(IfsSystem {
            space,
            maps,
            target: None,
        })
    }

    pub fn with_target(mut self, target: SetApprox) -> Result<IfsSystem> {
        self.space.expect_same(target.space())?;
        self.target = Some(target);
        Ok(self)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn maps(&self) -> &[MapHandle] {
        &self.maps
    }

    pub fn target(&self) -> Option<&SetApprox> {
        self.target.as_ref()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.maps.iter().map(MapHandle::label).collect()
    }
}

// ---------------------------------------------------------------------------
// Elementary handles
// ---------------------------------------------------------------------------

pub fn identity(space: Space) -> MapHandle {
    MapHandle::from_fn(space, "id", |p| *p).with_inverse(|p| *p)
}

pub fn constant(space: Space, value: Point) -> Result<MapHandle> {
    if !space.admits(&value) {
        return Err(IfsError::Invalid(format!(
            "constant value {value} outside the {space} chart"
        )));
    }
    let label = format!("const({value})");
    let fixed = SetApprox::singleton(space.clone(), value, 1e-9)?;
    MapHandle::from_fn(space, label, move |_| value).with_fixed_set(fixed)
}

/// Affine map on a 1-D chart. On the compactified line the map extends
/// continuously with infinity fixed (scale must be nonzero there).
pub fn affine(space: Space, scale: f64, offset: f64) -> Result<MapHandle> {
    match space.kind() {
        SpaceKind::RealLine | SpaceKind::CompactifiedLine => {}
        _ => {
            return Err(IfsError::Invalid(
                "affine(scale, offset) needs a line chart".into(),
            ))
        }
    }
    let label = format!("affine({scale}, {offset})");
    let mut h = MapHandle::from_fn(space, label, move |p| match p {
        Point::Line(x) => Point::Line(scale * x + offset),
        Point::Infinity => Point::Infinity,
        _ => panic!("affine map applied to a non-line point"),
    });
    if scale != 0.0 {
        h = h.with_inverse(move |p| match p {
            Point::Line(y) => Point::Line((y - offset) / scale),
            Point::Infinity => Point::Infinity,
            _ => panic!("affine inverse applied to a non-line point"),
        });
    }
    Ok(h)
}

/// Plane homothety `p -> scale*p + offset`.
pub fn affine_plane(space: Space, scale: f64, offset: [f64; 2]) -> Result<MapHandle> {
    if space.dim() != 2 {
        return Err(IfsError::Invalid(
            "affine_plane needs a plane chart".into(),
        ));
    }
    let label = format!("affine2({scale}, [{}, {}])", offset[0], offset[1]);
    let mut h = MapHandle::from_fn(space, label, move |p| match p {
        Point::Plane(x, y) => Point::Plane(scale * x + offset[0], scale * y + offset[1]),
        _ => panic!("plane affine map applied to a non-plane point"),
    });
    if scale != 0.0 {
        h = h.with_inverse(move |p| match p {
            Point::Plane(x, y) => {
                Point::Plane((x - offset[0]) / scale, (y - offset[1]) / scale)
            }
            _ => panic!("plane affine inverse applied to a non-plane point"),
        });
    }
    Ok(h)
}

// ---------------------------------------------------------------------------
// ALR constructors
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlrVariant {
    /// `(x-a)^2/(b-a) + a`: drops below the diagonal, repellor at `b`.
    Square,
    /// `sqrt((x-a)(b-a)) + a`: rises above the diagonal, repellor at `a`.
    Sqrt,
}

pub(crate) fn interval_alr_eval(a: f64, b: f64, variant: AlrVariant, x: f64) -> f64 {
    let x = x.clamp(a, b);
    match variant {
        AlrVariant::Square => (x - a) * (x - a) / (b - a) + a,
        AlrVariant::Sqrt => ((x - a) * (b - a)).sqrt() + a,
    }
}

/// Attracting map with local repellor on `[a, b]`, extended to the line by
/// clamping. Fixes exactly `{a, b}`; the square variant stays strictly below
/// the diagonal on the open interval (repellor `b`), the sqrt variant
/// strictly above (repellor `a`).
pub fn make_interval_alr(a: f64, b: f64, variant: AlrVariant) -> Result<MapHandle> {
    interval_alr_on(Space::real_line(), a, b, variant)
}

pub fn interval_alr_on(
    space: Space,
    a: f64,
    b: f64,
    variant: AlrVariant,
) -> Result<MapHandle> {
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(IfsError::BadInterval(a, b));
    }
    let name = match variant {
        AlrVariant::Square => "square",
        AlrVariant::Sqrt => "sqrt",
    };
    let label = format!("alr-{name}[{a}, {b}]");
    let inv_variant = match variant {
        AlrVariant::Square => AlrVariant::Sqrt,
        AlrVariant::Sqrt => AlrVariant::Square,
    };
    let handle = MapHandle::from_fn(space.clone(), label, move |p| match p {
        Point::Line(x) => Point::Line(interval_alr_eval(a, b, variant, *x)),
        Point::Infinity => Point::Infinity,
        _ => panic!("interval map applied to a non-line point"),
    })
    .with_inverse(move |p| match p {
        Point::Line(y) => Point::Line(interval_alr_eval(a, b, inv_variant, *y)),
        Point::Infinity => Point::Infinity,
        _ => panic!("interval map inverse applied to a non-line point"),
    });
    let fixed = SetApprox::new(
        space,
        vec![Point::Line(a), Point::Line(b)],
        ((b - a) * 1e-9).max(1e-12),
    )?;
    let handle = handle
        .with_fixed_set(fixed)?
        .with_branches(vec![MonotoneBranch::increasing(a, b)])?;
    handle.validate_self_map()?;
    Ok(handle)
}

/// ALR map on the closed counterclockwise arc from `alpha` to `beta`
/// (`alpha == beta` encodes the full circle, with the arc length taken as
/// `2*pi`). In the arc parameter `t = (theta - alpha) mod 2*pi` the map is
/// `t -> t^2 / len`; it fixes exactly the endpoints and the repellor sits at
/// `beta`. Points off the arc clamp to the nearer endpoint first.
pub fn make_arc_alr(alpha: f64, beta: f64) -> Result<MapHandle> {
    if !(0.0..TAU).contains(&alpha) {
        return Err(IfsError::BadAngle(alpha));
    }
    if !(0.0..TAU).contains(&beta) {
        return Err(IfsError::BadAngle(beta));
    }
    let len = if alpha == beta {
        TAU
    } else {
        wrap_angle(beta - alpha)
    };
    let space = Space::circle();
    let clamp_t = move |t: f64| -> f64 {
        if t <= len {
            t
        } else if t - len <= TAU - t {
            len
        } else {
            0.0
        }
    };
    let label = format!("alr-arc[{alpha}, {beta}]");
    let handle = MapHandle::from_fn(space.clone(), label, move |p| match p {
        Point::Angle(theta) => {
            let t = clamp_t(wrap_angle(theta - alpha));
            Point::angle(alpha + t * t / len)
        }
        _ => panic!("arc map applied to a non-circle point"),
    })
    .with_inverse(move |p| match p {
        Point::Angle(theta) => {
            let t = clamp_t(wrap_angle(theta - alpha));
            Point::angle(alpha + (t * len).sqrt())
        }
        _ => panic!("arc map inverse applied to a non-circle point"),
    });
    let fixed_pts = if alpha == beta {
        vec![Point::angle(alpha)]
    } else {
        vec![Point::angle(alpha), Point::angle(beta)]
    };
    let fixed = SetApprox::new(space, fixed_pts, 1e-9)?;
    // A lifted parametrization of the full circle degenerates at the top
    // endpoint (alpha + 2*pi wraps back to alpha), so stop the branch a hair
    // short of it there.
    let branch_hi = if alpha == beta {
        alpha + TAU - 1e-9
    } else {
        alpha + len
    };
    let handle = handle
        .with_fixed_set(fixed)?
        .with_branches(vec![MonotoneBranch::increasing(alpha, branch_hi)])?;
    handle.validate_self_map()?;
    Ok(handle)
}

pub(crate) fn disc_chord(x: f64) -> f64 {
    (1.0 - x * x).max(0.0).sqrt()
}

fn disc_clamp(x: f64, y: f64) -> (f64, f64) {
    let r2 = x * x + y * y;
    if r2 > 1.0 {
        let r = r2.sqrt();
        (x / r, y / r)
    } else {
        (x, y)
    }
}

/// Disc ALR formula on raw unit-disc coordinates.
pub(crate) fn disc_alr_xy(px: f64, py: f64) -> (f64, f64) {
    let (x, y) = disc_clamp(px, py);
    let c = disc_chord(x);
    if c <= 1e-12 {
        return (x, y);
    }
    let m = (y + c) / (2.0 * c);
    (x, -c + m * (y + c))
}

/// Inverse of the disc ALR along its invariant chord.
pub(crate) fn disc_alr_inv_xy(px: f64, py: f64) -> (f64, f64) {
    let (x, y) = disc_clamp(px, py);
    let c = disc_chord(x);
    if c <= 1e-12 {
        return (x, y);
    }
    let s = ((y + c) / (2.0 * c)).clamp(0.0, 1.0);
    (x, c * (2.0 * s.sqrt() - 1.0))
}

/// ALR map on the closed unit disc, constant on the boundary circle. For
/// interior `z` the chord endpoints are `a(z) = x - i*sqrt(1-x^2)` and
/// `b(z) = x + i*sqrt(1-x^2)`; the map pulls `z` toward `a(z)` along the
/// vertical chord by the factor `|z - a| / |b - a|`, leaving `b(z)` a local
/// repellor. At `|x| = 1` the chord degenerates and the point stays fixed.
pub fn make_disc_alr() -> Result<MapHandle> {
    let space = Space::unit_disc();
    let handle = MapHandle::from_fn(space.clone(), "alr-disc", |p| match p {
        Point::Plane(px, py) => {
            let (x, y) = disc_alr_xy(*px, *py);
            Point::Plane(x, y)
        }
        _ => panic!("disc map applied to a non-plane point"),
    })
    .with_inverse(|p| match p {
        Point::Plane(px, py) => {
            let (x, y) = disc_alr_inv_xy(*px, *py);
            Point::Plane(x, y)
        }
        _ => panic!("disc map inverse applied to a non-plane point"),
    });
    let boundary: Vec<Point> = (0..512)
        .map(|k| {
            let t = TAU * k as f64 / 512.0;
            Point::Plane(t.cos(), t.sin())
        })
        .collect();
    let fixed = SetApprox::new(space, boundary, 2.0 * TAU / 512.0)?;
    let handle = handle.with_fixed_set(fixed)?;
    handle.validate_self_map()?;
    Ok(handle)
}

/// Chord endpoints `a(z)` and `b(z)` of the disc map.
pub fn disc_chord_endpoints(p: &Point) -> (Point, Point) {
    match p {
        Point::Plane(px, py) => {
            let (x, _) = disc_clamp(*px, *py);
            let c = disc_chord(x);
            (Point::Plane(x, -c), Point::Plane(x, c))
        }
        _ => panic!("disc chord endpoints need a plane point"),
    }
}

/// Closed form of the n-th iterate of the disc map along the invariant
/// chord: with `m = |z - a| / |b - a|`, the iterate is
/// `a + m^(2^n - 1) * (z - a)`.
pub fn disc_alr_power(p: &Point, n: u32) -> Point {
    assert!((1..=60).contains(&n), "exponent 2^n - 1 must fit in f64 powi");
    match p {
        Point::Plane(px, py) => {
            let (x, y) = disc_clamp(*px, *py);
            let c = disc_chord(x);
            if c <= 1e-12 {
                return Point::Plane(x, y);
            }
            let m = (y + c) / (2.0 * c);
            let e = (1u64 << n) - 1;
            let factor = m.powi(e as i32);
            Point::Plane(x, -c + factor * (y + c))
        }
        _ => panic!("disc closed form needs a plane point"),
    }
}

/// The translation `x -> x + 1` on the compactified line with infinity
/// fixed. Every orbit converges to infinity in the chart metric, and the
/// backward orbit of any finite point witnesses infinity as a local
/// repellor.
pub fn make_kwietniak_map() -> Result<MapHandle> {
    let space = Space::compactified_line();
    let handle = MapHandle::from_fn(space.clone(), "kwietniak", |p| match p {
        Point::Line(x) => Point::Line(x + 1.0),
        Point::Infinity => Point::Infinity,
        _ => panic!("kwietniak map applied off the compactified line"),
    })
    .with_inverse(|p| match p {
        Point::Line(x) => Point::Line(x - 1.0),
        Point::Infinity => Point::Infinity,
        _ => panic!("kwietniak inverse applied off the compactified line"),
    });
    let fixed = SetApprox::singleton(space, Point::Infinity, 1e-9)?;
    let handle = handle.with_fixed_set(fixed)?;
    handle.validate_self_map()?;
    Ok(handle)
}

// ---------------------------------------------------------------------------
// Combinators
// ---------------------------------------------------------------------------

/// Glue maps along covering regions. Preconditions checked on a sample of
/// the space plus every region corner: the regions cover the space, and any
/// point claimed by two pieces is fixed by both (so the union is well
/// defined and continuous across seams).
pub fn union_maps(pieces: Vec<(Region, MapHandle)>) -> Result<MapHandle> {
    let first = pieces.first().ok_or(IfsError::EmptySet)?;
    let space = first.1.space().clone();
    for (region, map) in &pieces {
        space.expect_same(map.space())?;
        if !region.compatible_with(&space) {
            return Err(IfsError::UnsupportedRegion(format!("{region} on {space}")));
        }
    }

    let mut probes = space.sample(SELF_MAP_SAMPLES, CHECK_SEED);
    for (region, _) in &pieces {
        probes.extend(region.corner_points());
    }
    for (i, p) in probes.iter().enumerate() {
        let owners: Vec<usize> = pieces
            .iter()
            .enumerate()
            .filter(|(_, (r, _))| r.contains(&space, p, FIX_TOL))
            .map(|(k, _)| k)
            .collect();
        if owners.is_empty() {
            return Err(IfsError::CoverageGap(format!("#{i} = {p}")));
        }
        if owners.len() > 1 {
            for k in owners {
                let (_, map) = &pieces[k];
                let moved = space.distance(&map.eval(p), p);
                if moved > FIX_TOL {
                    return Err(IfsError::OverlapNotFixed {
                        point: p.to_string(),
                        label: map.label().to_string(),
                        moved,
                    });
                }
            }
        }
    }

    let mut fixed_pts: Vec<Point> = Vec::new();
    let mut fixed_res: f64 = 0.0;
    for (_, map) in &pieces {
        if let Some(fs) = map.fixed_set() {
            fixed_pts.extend_from_slice(fs.points());
            fixed_res = fixed_res.max(fs.resolution());
        }
    }
    let fixed = if fixed_pts.is_empty() {
        None
    } else {
        Some(SetApprox::new(space.clone(), fixed_pts, fixed_res.max(1e-12))?)
    };

    let mut branches = Vec::new();
    for (_, map) in &pieces {
        branches.extend_from_slice(map.branches());
    }

    let labels: Vec<&str> = pieces.iter().map(|(_, m)| m.label()).collect();
    let label = format!("union({})", labels.join(" | "));

    let eval_pieces: Vec<(Region, MapHandle)> = pieces;
    let space_for_eval = space.clone();
    let mut handle = MapHandle::from_fn(space, label, move |p| {
        for (region, map) in &eval_pieces {
            if region.contains(&space_for_eval, p, FIX_TOL) {
                return map.eval(p);
            }
        }
        // Floating-point stray: hand it to the piece with the smallest gap.
        let mut best = 0usize;
        let mut best_gap = f64::INFINITY;
        for (k, (region, _)) in eval_pieces.iter().enumerate() {
            let g = region.gap(&space_for_eval, p);
            if g < best_gap {
                best_gap = g;
                best = k;
            }
        }
        eval_pieces[best].1.eval(p)
    });
    if let Some(fs) = fixed {
        handle = handle.with_fixed_set(fs)?;
    }
    handle.branches = branches;
    Ok(handle)
}

/// Conjugate `phi` by a homeomorphism pair `h : X -> Y`, `h_inv : Y -> X`.
/// The round trip is verified on 10^3 samples; the declared fixed set is
/// carried through `h`, and an explicit inverse (when present) is conjugated
/// alongside.
pub fn conjugate_map(
    phi: &MapHandle,
    h: impl Fn(&Point) -> Point + Send + Sync + 'static,
    h_inv: impl Fn(&Point) -> Point + Send + Sync + 'static,
    target_space: Space,
) -> Result<MapHandle> {
    let h = Arc::new(h);
    let h_inv = Arc::new(h_inv);
    let source = phi.space().clone();

    let mut probes = source.sample(1_000, CHECK_SEED ^ 0xc0);
    if let Some(fs) = phi.fixed_set() {
        probes.extend_from_slice(fs.points());
    }
    for p in &probes {
        let back = h_inv(&h(p));
        let err = source.distance(&back, p);
        if err > FIX_TOL {
            return Err(IfsError::RoundTrip {
                point: p.to_string(),
                err,
            });
        }
    }

    let label = format!("conj({})", phi.label());
    let phi_for_eval = phi.clone();
    let (h_e, hi_e) = (Arc::clone(&h), Arc::clone(&h_inv));
    let mut handle = MapHandle::from_fn(target_space.clone(), label, move |q| {
        h_e(&phi_for_eval.eval(&hi_e(q)))
    });
    if phi.has_inverse() {
        let phi_for_inv = phi.clone();
        let (h_i, hi_i) = (Arc::clone(&h), Arc::clone(&h_inv));
        handle = handle.with_inverse(move |q| {
            h_i(&phi_for_inv
                .inverse_eval(&hi_i(q))
                .expect("inverse checked above"))
        });
    }
    if let Some(fs) = phi.fixed_set() {
        let mapped: Vec<Point> = fs.points().iter().map(|p| h(p)).collect();
        let fixed = SetApprox::new(target_space, mapped, fs.resolution())?;
        handle = handle.with_fixed_set(fixed)?;
    }
    Ok(handle)
}

/// Nearest-point retraction onto a region: idempotent, fixes the region
/// pointwise, image inside the region.
pub fn make_retraction(space: Space, region: Region) -> Result<MapHandle> {
    if !region.compatible_with(&space) {
        return Err(IfsError::UnsupportedRegion(format!("{region} on {space}")));
    }
    if region.is_empty() {
        return Err(IfsError::EmptyRegion);
    }
    // Probe once so unsupported projections surface here, not mid-orbit.
    let probe = space.sample(8, CHECK_SEED ^ 0x7e7);
    for p in &probe {
        region.nearest_point(&space, p)?;
    }
    let label = format!("retract({region})");
    let sp = space.clone();
    let region_for_eval = region.clone();
    Ok(MapHandle::from_fn(space, label, move |p| {
        region_for_eval
            .nearest_point(&sp, p)
            .expect("retraction projection validated at construction")
    }))
}

/// `outer . inner` on a shared space.
pub fn compose(outer: &MapHandle, inner: &MapHandle) -> Result<MapHandle> {
    outer.space().expect_same(inner.space())?;
    let label = format!("{} . {}", outer.label(), inner.label());
    let (o, i) = (outer.clone(), inner.clone());
    let mut handle =
        MapHandle::from_fn(outer.space().clone(), label, move |p| o.eval(&i.eval(p)));
    if outer.has_inverse() && inner.has_inverse() {
        let (o2, i2) = (outer.clone(), inner.clone());
        handle = handle.with_inverse(move |q| {
            i2.inverse_eval(&o2.inverse_eval(q).expect("checked"))
                .expect("checked")
        });
    }
    Ok(handle)
}

/// Solve `phi(x) = y` on a monotone branch by bisection in the chart
/// parameter. `y` must be attained on the branch (an interior sign change or
/// an endpoint match); the result satisfies `d(phi(x), y) <= tol`.
pub fn preimage_on_branch(
    phi: &MapHandle,
    y: &Point,
    branch: &MonotoneBranch,
    tol: f64,
) -> Result<Point> {
    let space = phi.space();
    let at = |u: f64| branch.point_at(space, u);
    let image_param = |u: f64| -> Result<f64> {
        branch
            .param_of(space, &phi.eval(&at(u)))
            .ok_or_else(|| IfsError::Invalid("branch image left the chart".into()))
    };

    // Endpoint matches first.
    for u in [branch.lo, branch.hi] {
        if space.distance(&phi.eval(&at(u)), y) <= tol {
            return Ok(at(u));
        }
    }

    let ty = branch
        .param_of(space, y)
        .ok_or_else(|| IfsError::Invalid("target has no branch parameter".into()))?;
    let mut lo = branch.lo;
    let mut hi = branch.hi;
    let mut g_lo = image_param(lo)? - ty;
    let g_hi = image_param(hi)? - ty;
    if g_lo == 0.0 {
        return Ok(at(lo));
    }
    if g_hi == 0.0 {
        return Ok(at(hi));
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(IfsError::NotAttained);
    }

    let width_floor = 1e-12 * hi.abs().max(lo.abs()).max(1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= width_floor {
            break;
        }
        let g_mid = image_param(mid)? - ty;
        if g_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    let x = at(0.5 * (lo + hi));
    let residual = space.distance(&phi.eval(&x), y);
    if residual <= tol {
        Ok(x)
    } else {
        Err(IfsError::NotAttained)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn square_alr_examples() {
        let phi = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        assert_eq!(phi.eval(&Point::Line(0.5)), Point::Line(0.25));
        assert_eq!(phi.eval(&Point::Line(0.0)), Point::Line(0.0));
        assert_eq!(phi.eval(&Point::Line(1.0)), Point::Line(1.0));
    }

    #[test]
    fn sqrt_alr_example() {
        let phi = make_interval_alr(1.0, 4.0, AlrVariant::Sqrt).unwrap();
        let out = phi.eval(&Point::Line(2.0)).coord_x();
        assert!((out - (3.0_f64.sqrt() + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn interval_alr_rejects_degenerate() {
        assert!(make_interval_alr(1.0, 1.0, AlrVariant::Square).is_err());
        assert!(make_interval_alr(2.0, 1.0, AlrVariant::Square).is_err());
    }

    #[test]
    fn interval_alr_strict_inequalities() {
        let sq = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let rt = make_interval_alr(0.0, 1.0, AlrVariant::Sqrt).unwrap();
        for k in 1..1000 {
            let x = k as f64 / 1000.0;
            if x >= 1.0 {
                break;
            }
            assert!(sq.eval(&Point::Line(x)).coord_x() < x, "square below the diagonal");
            assert!(rt.eval(&Point::Line(x)).coord_x() > x, "sqrt above the diagonal");
        }
    }

    #[test]
    fn arc_alr_examples() {
        let phi = make_arc_alr(0.0, PI).unwrap();
        let out = phi.eval(&Point::angle(FRAC_PI_2)).coord_x();
        assert!((out - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(phi.eval(&Point::angle(0.0)), Point::angle(0.0));

        // alpha == beta encodes the full circle with divisor 2*pi.
        let full = make_arc_alr(0.0, 0.0).unwrap();
        let out = full.eval(&Point::angle(PI)).coord_x();
        assert!((out - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn arc_alr_range_check() {
        assert!(make_arc_alr(-0.1, 1.0).is_err());
        assert!(make_arc_alr(0.0, TAU).is_err());
    }

    #[test]
    fn disc_alr_examples() {
        let phi = make_disc_alr().unwrap();
        let out = phi.eval(&Point::Plane(0.0, 0.0));
        match out {
            Point::Plane(x, y) => {
                assert!(x.abs() < 1e-15 && (y + 0.5).abs() < 1e-15);
            }
            _ => panic!("disc output must be a plane point"),
        }
        // Boundary points stay fixed.
        for k in 0..32 {
            let t = TAU * k as f64 / 32.0;
            let p = Point::Plane(t.cos(), t.sin());
            assert!(phi.space().distance(&phi.eval(&p), &p) <= 1e-9);
        }
    }

    #[test]
    fn disc_alr_iterates_match_closed_form() {
        let phi = make_disc_alr().unwrap();
        let z0 = Point::Plane(0.3, 0.1);
        let mut z = z0;
        for _ in 0..5 {
            z = phi.eval(&z);
        }
        let closed = disc_alr_power(&z0, 5);
        assert!(phi.space().distance(&z, &closed) <= 1e-9);
    }

    #[test]
    fn disc_collinearity_and_chord_invariance() {
        let phi = make_disc_alr().unwrap();
        let samples = phi.space().sample(1000, 3);
        for z in samples {
            let (a, b) = disc_chord_endpoints(&z);
            let w = phi.eval(&z);
            // a, z, b collinear: cross product of (z - a) and (b - a).
            let (ax, ay) = (a.coord_x(), a.coord_y().unwrap());
            let (bx, by) = (b.coord_x(), b.coord_y().unwrap());
            let (zx, zy) = (z.coord_x(), z.coord_y().unwrap());
            let cross = (zx - ax) * (by - ay) - (zy - ay) * (bx - ax);
            assert!(cross.abs() <= 1e-12);
            let (a2, b2) = disc_chord_endpoints(&w);
            assert!(phi.space().distance(&a, &a2) <= 1e-12);
            assert!(phi.space().distance(&b, &b2) <= 1e-12);
        }
    }

    #[test]
    fn kwietniak_examples() {
        let phi = make_kwietniak_map().unwrap();
        assert_eq!(phi.eval(&Point::Line(0.0)), Point::Line(1.0));
        assert_eq!(phi.eval(&Point::Infinity), Point::Infinity);
        // Chart angle of phi(1) is 2*atan(2).
        let sp = phi.space();
        let d = sp.distance(&phi.eval(&Point::Line(1.0)), &Point::Infinity);
        assert!((d - (PI - 2.0 * 2.0_f64.atan())).abs() < 1e-12);
        // Distance to infinity is nonincreasing along forward orbits from
        // x >= 0 and tends to zero.
        let mut p = Point::Line(0.0);
        let mut last = sp.distance(&p, &Point::Infinity);
        for _ in 0..200 {
            p = phi.eval(&p);
            let d = sp.distance(&p, &Point::Infinity);
            assert!(d <= last + 1e-15);
            last = d;
        }
        assert!(last < 0.011);
    }

    #[test]
    fn union_piecewise_values() {
        let sq = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let idf = identity(Space::real_line());
        let u = union_maps(vec![
            (Region::Interval { lo: 0.0, hi: 1.0 }, sq.clone()),
            (Region::Interval { lo: 1.0, hi: 2.0 }, idf),
            (
                Region::Interval {
                    lo: f64::NEG_INFINITY,
                    hi: 0.0,
                },
                constant(Space::real_line(), Point::Line(0.0)).unwrap(),
            ),
            (
                Region::Interval {
                    lo: 2.0,
                    hi: f64::INFINITY,
                },
                constant(Space::real_line(), Point::Line(2.0)).unwrap(),
            ),
        ])
        .unwrap();
        assert_eq!(u.eval(&Point::Line(0.5)), Point::Line(0.25));
        assert_eq!(u.eval(&Point::Line(1.5)), Point::Line(1.5));
        assert_eq!(u.eval(&Point::Line(-4.0)), Point::Line(0.0));
    }

    #[test]
    fn union_single_piece_is_the_map() {
        let sq = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let u = union_maps(vec![(
            Region::Interval {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            },
            sq.clone(),
        )])
        .unwrap();
        for k in 0..50 {
            let x = Point::Line(-1.0 + 0.1 * k as f64);
            assert_eq!(u.eval(&x), sq.eval(&x));
        }
    }

    #[test]
    fn union_adjacent_alrs() {
        let a = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let b = make_interval_alr(1.0, 2.0, AlrVariant::Square).unwrap();
        let clamp_lo = constant(Space::real_line(), Point::Line(0.0)).unwrap();
        let clamp_hi = constant(Space::real_line(), Point::Line(2.0)).unwrap();
        let u = union_maps(vec![
            (Region::Interval { lo: 0.0, hi: 1.0 }, a),
            (Region::Interval { lo: 1.0, hi: 2.0 }, b),
            (
                Region::Interval {
                    lo: f64::NEG_INFINITY,
                    hi: 0.0,
                },
                clamp_lo,
            ),
            (
                Region::Interval {
                    lo: 2.0,
                    hi: f64::INFINITY,
                },
                clamp_hi,
            ),
        ])
        .unwrap();
        assert_eq!(u.eval(&Point::Line(1.5)), Point::Line(1.25));
        // Fixed set of the union is the union of the pieces' fixed sets.
        let fix = u.fixed_set().unwrap();
        for x in [0.0, 1.0, 2.0] {
            assert!(fix.min_distance_to(&Point::Line(x)) <= 1e-9);
        }
    }

    #[test]
    fn union_rejects_moving_overlap() {
        // Two pieces share x = 1 but the second moves it.
        let a = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let b = affine(Space::real_line(), 0.5, 0.0).unwrap();
        let err = union_maps(vec![
            (
                Region::Interval {
                    lo: f64::NEG_INFINITY,
                    hi: 1.0,
                },
                a,
            ),
            (
                Region::Interval {
                    lo: 1.0,
                    hi: f64::INFINITY,
                },
                b,
            ),
        ]);
        assert!(matches!(err, Err(IfsError::OverlapNotFixed { .. })));
    }

    #[test]
    fn conjugate_identity_and_scaling() {
        let sq = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let same = conjugate_map(&sq, |p| *p, |p| *p, Space::real_line()).unwrap();
        for k in 0..=10 {
            let x = Point::Line(k as f64 / 10.0);
            assert_eq!(same.eval(&x), sq.eval(&x));
        }
        // h(x) = 2x carries the unit-interval map to [0, 2].
        let scaled = conjugate_map(
            &sq,
            |p| Point::Line(2.0 * p.coord_x()),
            |p| Point::Line(p.coord_x() / 2.0),
            Space::real_line(),
        )
        .unwrap();
        assert_eq!(scaled.eval(&Point::Line(1.0)), Point::Line(0.5));
    }

    #[test]
    fn conjugate_onto_arc_matches_arc_alr() {
        let alpha = 0.0;
        let beta = PI;
        // h(x) = e^{ix} is invertible on [0, 2*pi); bound the source chart
        // accordingly so the round-trip precondition holds.
        let base = interval_alr_on(
            Space::real_line_bounded(0.0, TAU - 1e-6),
            alpha,
            beta,
            AlrVariant::Square,
        )
        .unwrap();
        let conj = conjugate_map(
            &base,
            |p| Point::angle(p.coord_x()),
            |p| Point::Line(p.coord_x()),
            Space::circle(),
        )
        .unwrap();
        let arc = make_arc_alr(alpha, beta).unwrap();
        for k in 0..=100 {
            let t = alpha + (beta - alpha) * k as f64 / 100.0;
            let q = Point::angle(t);
            let d = Space::circle().distance(&conj.eval(&q), &arc.eval(&q));
            assert!(d <= 1e-12, "deviation {d} at t={t}");
        }
    }

    #[test]
    fn conjugate_rejects_broken_round_trip() {
        let sq = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let err = conjugate_map(
            &sq,
            |p| Point::Line(p.coord_x() + 1.0),
            |p| *p,
            Space::real_line(),
        );
        assert!(matches!(err, Err(IfsError::RoundTrip { .. })));
    }

    #[test]
    fn retraction_examples() {
        let sp = Space::real_line();
        let clamp = make_retraction(sp.clone(), Region::Interval { lo: 0.0, hi: 1.0 }).unwrap();
        assert_eq!(clamp.eval(&Point::Line(-3.0)), Point::Line(0.0));
        assert_eq!(clamp.eval(&Point::Line(0.4)), Point::Line(0.4));
        assert_eq!(clamp.eval(&Point::Line(7.0)), Point::Line(1.0));

        let to_pt = make_retraction(
            sp.clone(),
            Region::Singleton {
                point: Point::Line(0.25),
            },
        )
        .unwrap();
        assert_eq!(to_pt.eval(&Point::Line(9.9)), Point::Line(0.25));

        let disc = make_retraction(
            Space::unit_disc(),
            Region::Disc {
                center: [0.0, 0.0],
                radius: 1.0,
            },
        );
        // The unit-disc chart cannot hold (2, 0); probe on the plane instead.
        assert!(disc.is_ok());
        let plane = Space::plane_region([-3.0, -3.0], [3.0, 3.0]);
        let disc = make_retraction(
            plane,
            Region::Disc {
                center: [0.0, 0.0],
                radius: 1.0,
            },
        )
        .unwrap();
        assert_eq!(disc.eval(&Point::Plane(2.0, 0.0)), Point::Plane(1.0, 0.0));

        // Idempotence on samples.
        for p in disc.space().sample(500, 12) {
            let once = disc.eval(&p);
            let twice = disc.eval(&once);
            assert!(disc.space().distance(&once, &twice) <= 1e-12);
        }
    }

    #[test]
    fn compose_examples() {
        let sp = Space::real_line();
        let f = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let idf = identity(sp.clone());
        let same = compose(&idf, &f).unwrap();
        for k in 0..=10 {
            let x = Point::Line(k as f64 / 10.0);
            assert_eq!(same.eval(&x), f.eval(&x));
        }
        let third = affine(sp.clone(), 1.0 / 3.0, 0.0).unwrap();
        let shift = affine(sp, 1.0 / 3.0, 2.0 / 3.0).unwrap();
        let comp = compose(&third, &shift).unwrap();
        assert!((comp.eval(&Point::Line(1.0)).coord_x() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn compose_space_mismatch() {
        let f = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let g = make_arc_alr(0.0, PI).unwrap();
        assert!(compose(&f, &g).is_err());
    }

    #[test]
    fn preimage_examples() {
        let phi = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let branch = phi.branches()[0];
        let x = preimage_on_branch(&phi, &Point::Line(0.25), &branch, 1e-12).unwrap();
        assert!((x.coord_x() - 0.5).abs() <= 1e-10);
        let x = preimage_on_branch(&phi, &Point::Line(1.0), &branch, 1e-12).unwrap();
        assert!((x.coord_x() - 1.0).abs() <= 1e-12);
        // Residual contract.
        let y = Point::Line(0.7);
        let x = preimage_on_branch(&phi, &y, &branch, 1e-12).unwrap();
        assert!(phi.space().distance(&phi.eval(&x), &y) <= 1e-12);
        // Unattainable target.
        assert!(matches!(
            preimage_on_branch(&phi, &Point::Line(1.5), &branch, 1e-12),
            Err(IfsError::NotAttained)
        ));
    }

    #[test]
    fn preimage_on_arc_branch() {
        let phi = make_arc_alr(0.0, PI).unwrap();
        let branch = phi.branches()[0];
        let y = Point::angle(FRAC_PI_4);
        let x = preimage_on_branch(&phi, &y, &branch, 1e-10).unwrap();
        assert!((x.coord_x() - FRAC_PI_2).abs() <= 1e-10);
    }
}
