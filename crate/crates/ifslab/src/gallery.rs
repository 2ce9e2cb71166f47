//! Ready-made systems: the gap-addressed fractal constructions (Cantor set,
//! Sierpinski triangle and carpet) where one added nonexpansive map breaks
//! strict attraction, and the piecewise circle/line assemblies.
//!
//! A gap system carries the standard similarity family `W` for the fractal
//! `A` inside its hull `D`, plus one map `phi` assembled gap by gap: the
//! identity on (a depth-limited approximation of) `A`, a conjugated copy of
//! a fixed hole ALR map `w_I ∘ phi0 ∘ w_I^{-1}` on the gap addressed by the
//! word `I`, and a retraction onto `D` outside. On `D` this `phi` commutes
//! with every `w ∈ W` because the affine gap addressing satisfies
//! `w_{w(I)} = w ∘ w_I`.

use crate::analysis::{witnessing_sequence_until, WitnessingSequence};
use crate::error::{IfsError, Result};
use crate::maps::{
    affine, compose, constant, disc_alr_inv_xy, disc_alr_xy, identity, interval_alr_eval,
    make_arc_alr, make_retraction, union_maps, AlrVariant, IfsSystem, MapHandle,
    MonotoneBranch,
};
use crate::region::{arc_length, Region};
use crate::sets::{epsilon_net, SetApprox};
use crate::space::{wrap_angle, Point, Space};
use std::f64::consts::TAU;

// ---------------------------------------------------------------------------
// Affine words
// ---------------------------------------------------------------------------

/// Orientation-preserving similarity `p -> scale * p + offset` in one or two
/// dimensions; the gap addressing composes and inverts these exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AffineMap {
    One { scale: f64, offset: f64 },
    Two { scale: f64, offset: [f64; 2] },
}

impl AffineMap {
    pub fn apply(&self, p: &Point) -> Point {
        match (self, p) {
            (AffineMap::One { scale, offset }, Point::Line(x)) => {
                Point::Line(scale * x + offset)
            }
            (AffineMap::One { .. }, Point::Infinity) => Point::Infinity,
            (AffineMap::Two { scale, offset }, Point::Plane(x, y)) => {
                Point::Plane(scale * x + offset[0], scale * y + offset[1])
            }
            _ => panic!("affine word applied to a point of the wrong arity"),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        match (self, inner) {
            (
                AffineMap::One { scale: s1, offset: o1 },
                AffineMap::One { scale: s2, offset: o2 },
            ) => AffineMap::One {
                scale: s1 * s2,
                offset: s1 * o2 + o1,
            },
            (
                AffineMap::Two { scale: s1, offset: o1 },
                AffineMap::Two { scale: s2, offset: o2 },
            ) => AffineMap::Two {
                scale: s1 * s2,
                offset: [s1 * o2[0] + o1[0], s1 * o2[1] + o1[1]],
            },
            _ => panic!("cannot compose affine words of different arity"),
        }
    }

    pub fn inverse(&self) -> AffineMap {
        match self {
            AffineMap::One { scale, offset } => AffineMap::One {
                scale: 1.0 / scale,
                offset: -offset / scale,
            },
            AffineMap::Two { scale, offset } => AffineMap::Two {
                scale: 1.0 / scale,
                offset: [-offset[0] / scale, -offset[1] / scale],
            },
        }
    }

    fn identity_like(&self) -> AffineMap {
        match self {
            AffineMap::One { .. } => AffineMap::One {
                scale: 1.0,
                offset: 0.0,
            },
            AffineMap::Two { .. } => AffineMap::Two {
                scale: 1.0,
                offset: [0.0, 0.0],
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Radial chart between the unit disc and a convex hole
// ---------------------------------------------------------------------------

/// Radial homeomorphism between the unit disc and a convex polygon, scaling
/// each ray from the polygon's center to its boundary. For a square hole
/// this is the sup-norm/Euclidean-norm rescaling; the same ray-cast form
/// covers the triangular holes.
#[derive(Clone, Debug)]
pub(crate) struct StarChart {
    center: [f64; 2],
    verts: Vec<[f64; 2]>,
}

impl StarChart {
    fn new(center: [f64; 2], verts: Vec<[f64; 2]>) -> StarChart {
        StarChart { center, verts }
    }

    fn boundary_radius(&self, dir: [f64; 2]) -> f64 {
        let n = self.verts.len();
        let mut best = f64::INFINITY;
        for k in 0..n {
            let a = self.verts[k];
            let b = self.verts[(k + 1) % n];
            let e = [b[0] - a[0], b[1] - a[1]];
            let det = dir[0] * (-e[1]) - dir[1] * (-e[0]);
            if det.abs() < 1e-300 {
                continue;
            }
            let rx = a[0] - self.center[0];
            let ry = a[1] - self.center[1];
            let t = (rx * (-e[1]) - ry * (-e[0])) / det;
            let s = (dir[0] * ry - dir[1] * rx) / det;
            if t > 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&s) {
                best = best.min(t);
            }
        }
        best
    }

    fn region_to_disc(&self, p: [f64; 2]) -> [f64; 2] {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let r = dx.hypot(dy);
        if r < 1e-300 {
            return [0.0, 0.0];
        }
        let dir = [dx / r, dy / r];
        let rho = self.boundary_radius(dir);
        [dir[0] * (r / rho), dir[1] * (r / rho)]
    }

    fn disc_to_region(&self, v: [f64; 2]) -> [f64; 2] {
        let r = v[0].hypot(v[1]);
        if r < 1e-300 {
            return self.center;
        }
        let dir = [v[0] / r, v[1] / r];
        let rho = self.boundary_radius(dir);
        [
            self.center[0] + dir[0] * (r * rho),
            self.center[1] + dir[1] * (r * rho),
        ]
    }
}

/// The ALR map installed on the closure of the central hole, in hull
/// coordinates.
#[derive(Clone, Debug)]
enum HoleAlr {
    Interval { a: f64, b: f64 },
    Star { chart: StarChart },
}

impl HoleAlr {
    fn eval(&self, p: &Point) -> Point {
        match (self, p) {
            (HoleAlr::Interval { a, b }, Point::Line(x)) => {
                Point::Line(interval_alr_eval(*a, *b, AlrVariant::Square, *x))
            }
            (HoleAlr::Star { chart }, Point::Plane(x, y)) => {
                let v = chart.region_to_disc([*x, *y]);
                let (wx, wy) = disc_alr_xy(v[0], v[1]);
                let q = chart.disc_to_region([wx, wy]);
                Point::Plane(q[0], q[1])
            }
            _ => panic!("hole map applied to a point of the wrong arity"),
        }
    }

    fn inverse(&self, p: &Point) -> Point {
        match (self, p) {
            (HoleAlr::Interval { a, b }, Point::Line(x)) => {
                Point::Line(interval_alr_eval(*a, *b, AlrVariant::Sqrt, *x))
            }
            (HoleAlr::Star { chart }, Point::Plane(x, y)) => {
                let v = chart.region_to_disc([*x, *y]);
                let (wx, wy) = disc_alr_inv_xy(v[0], v[1]);
                let q = chart.disc_to_region([wx, wy]);
                Point::Plane(q[0], q[1])
            }
            _ => panic!("hole map inverse applied to a point of the wrong arity"),
        }
    }

    /// The repellor of the hole map: the top of the invariant chord through
    /// the hole center.
    fn repellor(&self) -> Point {
        match self {
            HoleAlr::Interval { b, .. } => Point::Line(*b),
            HoleAlr::Star { chart } => {
                let q = chart.disc_to_region([0.0, 1.0]);
                Point::Plane(q[0], q[1])
            }
        }
    }

    fn center(&self) -> Point {
        match self {
            HoleAlr::Interval { a, b } => Point::Line(0.5 * (a + b)),
            HoleAlr::Star { chart } => Point::Plane(chart.center[0], chart.center[1]),
        }
    }
}

// ---------------------------------------------------------------------------
// Gap systems
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum GapKind {
    Cantor,
    Carpet,
    Triangle { verts: [[f64; 2]; 3] },
}

/// Address of a gap: the word of `W`-indices carrying the central gap onto
/// it; depth is the word length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapAddress {
    pub word: Vec<usize>,
}

impl GapAddress {
    pub fn depth(&self) -> usize {
        self.word.len()
    }
}

/// Result of locating a hull point: inside an addressed gap, or in the
/// depth-limited fractal approximation.
#[derive(Clone, Debug, PartialEq)]
pub enum Located {
    Gap(GapAddress),
    Fractal,
}

#[derive(Clone, Copy, Debug)]
pub struct GapOptions {
    /// Addressing depth beyond which points count as fractal members; the
    /// misclassification displaces `phi` by less than the subdivision scale
    /// at that depth.
    pub membership_depth: usize,
    /// Construction depth of the reference net for the fractal.
    pub ref_depth: usize,
    /// Recommended working resolution for orbits on this system.
    pub epsilon: f64,
    /// Install the simplified `phi0 ∘ r0` variant instead of the
    /// commuting gap-by-gap map.
    pub simplified_phi: bool,
}

impl GapOptions {
    pub fn cantor() -> GapOptions {
        GapOptions {
            // Deep enough that truncating the gap addressing perturbs the
            // commutativity identity by under 1e-10 (the defect of a gap
            // first seen past the cutoff is ~3^-(depth+1)).
            membership_depth: 21,
            ref_depth: 14,
            epsilon: 1e-4,
            simplified_phi: false,
        }
    }

    pub fn carpet() -> GapOptions {
        GapOptions {
            membership_depth: 8,
            ref_depth: 6,
            epsilon: 4e-3,
            simplified_phi: false,
        }
    }

    pub fn triangle() -> GapOptions {
        GapOptions {
            membership_depth: 12,
            ref_depth: 8,
            epsilon: 2e-3,
            simplified_phi: false,
        }
    }

    pub fn simplified(mut self) -> GapOptions {
        self.simplified_phi = true;
        self
    }
}

/// A fractal `A` in its hull `D` together with `W`, the gap-conjugated map
/// `phi`, and the assembled system `F = W ∪ {phi}`.
#[derive(Clone, Debug)]
pub struct GapSystem {
    space: Space,
    kind: GapKind,
    w_affine: Vec<AffineMap>,
    w_system: IfsSystem,
    system: IfsSystem,
    hull: Region,
    central_gap: Region,
    fractal_ref: SetApprox,
    phi: MapHandle,
    hole: HoleAlr,
    membership_depth: usize,
    simplified: bool,
    epsilon: f64,
    name: &'static str,
}

impl GapSystem {
    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn kind(&self) -> &GapKind {
        &self.kind
    }

    /// `F = W ∪ {phi}` with the fractal net as target.
    pub fn system(&self) -> &IfsSystem {
        &self.system
    }

    /// The similarity family alone, same target.
    pub fn w_system(&self) -> &IfsSystem {
        &self.w_system
    }

    pub fn phi(&self) -> &MapHandle {
        &self.phi
    }

    pub fn hull(&self) -> &Region {
        &self.hull
    }

    pub fn central_gap(&self) -> &Region {
        &self.central_gap
    }

    pub fn fractal_ref(&self) -> &SetApprox {
        &self.fractal_ref
    }

    pub fn membership_depth(&self) -> usize {
        self.membership_depth
    }

    pub fn simplified(&self) -> bool {
        self.simplified
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn w_affine(&self) -> &[AffineMap] {
        &self.w_affine
    }

    /// Affine word `w_I` carrying the central gap onto the addressed gap.
    pub fn word_map(&self, addr: &GapAddress) -> AffineMap {
        let mut acc = self.w_affine[0].identity_like();
        for &d in &addr.word {
            acc = acc.compose(&self.w_affine[d]);
        }
        acc
    }

    /// Carrier region of an addressed gap.
    pub fn gap_region(&self, addr: &GapAddress) -> Region {
        let w = self.word_map(addr);
        match &self.central_gap {
            Region::Interval { lo, hi } => {
                let a = w.apply(&Point::Line(*lo)).coord_x();
                let b = w.apply(&Point::Line(*hi)).coord_x();
                Region::Interval { lo: a, hi: b }
            }
            Region::Rect { min, max } => {
                let a = w.apply(&Point::Plane(min[0], min[1]));
                let b = w.apply(&Point::Plane(max[0], max[1]));
                Region::Rect {
                    min: [a.coord_x(), a.coord_y().unwrap()],
                    max: [b.coord_x(), b.coord_y().unwrap()],
                }
            }
            Region::Triangle { v } => {
                let mapped: Vec<[f64; 2]> = v
                    .iter()
                    .map(|c| {
                        let q = w.apply(&Point::Plane(c[0], c[1]));
                        [q.coord_x(), q.coord_y().unwrap()]
                    })
                    .collect();
                Region::Triangle {
                    v: [mapped[0], mapped[1], mapped[2]],
                }
            }
            other => other.clone(),
        }
    }

    /// All gap addresses up to and including `depth`.
    pub fn gaps_to_depth(&self, depth: usize) -> Vec<GapAddress> {
        let m = self.w_affine.len();
        let mut out = vec![GapAddress { word: Vec::new() }];
        let mut frontier = vec![Vec::new()];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(frontier.len() * m);
            for w in &frontier {
                for d in 0..m {
                    let mut v = w.clone();
                    v.push(d);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned().map(|word| GapAddress { word }));
            frontier = next;
        }
        out
    }

    /// Locate a hull point: the gap word read off the subdivision digits,
    /// or membership in the depth-limited fractal approximation.
    pub fn gap_address(&self, p: &Point) -> Result<Located> {
        if !self.hull.contains(&self.space, p, 0.0) {
            return Err(IfsError::OutsideHull(p.to_string()));
        }
        Ok(locate(&self.kind, self.membership_depth, p))
    }

    /// Seed for the canonical refutation witness: the hole center and the
    /// repellor of the hole map (both on the central gap).
    pub fn central_witness_seed(&self) -> (Point, Point) {
        (self.hole.center(), self.hole.repellor())
    }

    /// Build the canonical witnessing sequence in the central gap, extended
    /// into the `10*eps`-neighborhood of the repellor.
    pub fn central_witness(&self, eps: f64, tol: f64) -> Result<WitnessingSequence> {
        let (x0, repellor) = self.central_witness_seed();
        witnessing_sequence_until(&self.phi, x0, repellor, 10.0 * eps, 10_000, tol)
    }

    /// Max commutativity defect `d(phi(w(x)), w(phi(x)))` over the samples
    /// and all `w ∈ W`.
    pub fn commutativity_check(&self, samples: &SetApprox, tol: f64) -> Result<CommutReport> {
        for p in samples.points() {
            if !self.hull.contains(&self.space, p, 1e-12) {
                return Err(IfsError::OutsideHull(p.to_string()));
            }
        }
        let (max_defect, worst) =
            commutativity_defect(&self.w_system, &self.phi, samples)?;
        Ok(CommutReport {
            max_defect,
            worst,
            pass: max_defect <= tol,
        })
    }

    /// Check `w_{w(I)} = w ∘ w_I` on sampled gap addresses: the address of
    /// the image gap gains the map's index as a prefix, and the two affine
    /// words agree pointwise.
    pub fn conjugation_identity_check(
        &self,
        words: &[GapAddress],
        w_index: usize,
    ) -> Result<ConjugationReport> {
        let mut max_affine_dev: f64 = 0.0;
        let mut prefix_ok = true;
        let probes = self.hull_probe_points(100);
        for addr in words {
            let wu = self.word_map(addr);
            let mut expected = vec![w_index];
            expected.extend_from_slice(&addr.word);
            let expected = GapAddress { word: expected };

            // Address of the image gap, read off a point inside it.
            let center = self.gap_center(addr);
            let image_pt = self.w_affine[w_index].apply(&center);
            match self.gap_address(&image_pt)? {
                Located::Gap(got) if got == expected => {}
                _ => prefix_ok = false,
            }

            let lhs = self.w_affine[w_index].compose(&wu);
            let rhs = self.word_map(&expected);
            for p in &probes {
                let d = self.space.distance(&lhs.apply(p), &rhs.apply(p));
                max_affine_dev = max_affine_dev.max(d);
            }
        }
        Ok(ConjugationReport {
            prefix_ok,
            max_affine_dev,
            pass: prefix_ok && max_affine_dev <= 1e-12,
        })
    }

    /// `phi` maps each gap into itself: probe points inside every gap up to
    /// `depth` and measure the worst escape from the gap region.
    pub fn gap_invariance_check(&self, depth: usize, tol: f64) -> Result<GapInvarianceReport> {
        let mut worst: f64 = 0.0;
        let mut checked = 0usize;
        for addr in self.gaps_to_depth(depth) {
            let region = self.gap_region(&addr);
            for probe in self.gap_probes(&addr) {
                let image = self.phi.eval(&probe);
                let escape = region.gap(&self.space, &image);
                worst = worst.max(escape);
                checked += 1;
            }
        }
        Ok(GapInvarianceReport {
            max_escape: worst,
            probes: checked,
            pass: worst <= tol,
        })
    }

    /// `phi` sends the ambient chart into the hull: sampled containment
    /// defect.
    pub fn image_containment_check(&self, samples: usize, tol: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in self.space.sample(samples, 0x90a7) {
            let q = self.phi.eval(&p);
            worst = worst.max(self.hull.gap(&self.space, &q));
        }
        if worst <= tol {
            Ok(worst)
        } else {
            Err(IfsError::Invalid(format!(
                "phi image leaves the hull by {worst:.3e}"
            )))
        }
    }

    /// Interval-arithmetic finiteness check for the Cantor gaps: only the
    /// address prefixes of a gap meet it, and every deeper level of the
    /// construction keeps a half-gap-width berth from the gap center.
    pub fn gap_finiteness_check(&self, depth: usize) -> Result<bool> {
        if self.kind != GapKind::Cantor {
            return Err(IfsError::UnsupportedRegion(
                "interval-arithmetic finiteness check is specific to the Cantor system".into(),
            ));
        }
        for addr in self.gaps_to_depth(depth) {
            let (lo, hi) = match self.gap_region(&addr) {
                Region::Interval { lo, hi } => (lo, hi),
                _ => unreachable!("cantor gaps are intervals"),
            };
            let center = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let k = addr.depth();

            // Words of length <= k that meet the open gap are exactly the
            // address prefixes.
            let mut meets = 0usize;
            let mut words: Vec<Vec<usize>> = vec![Vec::new()];
            for len in 0..=k {
                for w in &words {
                    let m = self.word_map(&GapAddress { word: w.clone() });
                    let a = m.apply(&Point::Line(0.0)).coord_x();
                    let b = m.apply(&Point::Line(1.0)).coord_x();
                    if b > lo + 1e-12 && a < hi - 1e-12 {
                        meets += 1;
                        if w[..] != addr.word[..len.min(addr.word.len())] {
                            return Ok(false);
                        }
                    }
                }
                if len < k {
                    let mut next = Vec::with_capacity(words.len() * 2);
                    for w in &words {
                        for d in 0..2 {
                            let mut v = w.clone();
                            v.push(d);
                            next.push(v);
                        }
                    }
                    words = next;
                }
            }
            if meets != k + 1 {
                return Ok(false);
            }

            // Levels k+1 .. k+3 of the construction stay half a gap width
            // away from the gap center.
            let mut words: Vec<Vec<usize>> = vec![Vec::new()];
            for _ in 0..=(k + 3) {
                let len = words[0].len();
                if len > k {
                    for w in &words {
                        let m = self.word_map(&GapAddress { word: w.clone() });
                        let a = m.apply(&Point::Line(0.0)).coord_x();
                        let b = m.apply(&Point::Line(1.0)).coord_x();
                        let dist = if center < a {
                            a - center
                        } else if center > b {
                            center - b
                        } else {
                            0.0
                        };
                        if dist < half - 1e-12 {
                            return Ok(false);
                        }
                    }
                }
                let mut next = Vec::with_capacity(words.len() * 2);
                for w in &words {
                    for d in 0..2 {
                        let mut v = w.clone();
                        v.push(d);
                        next.push(v);
                    }
                }
                words = next;
            }
        }
        Ok(true)
    }

    fn gap_center(&self, addr: &GapAddress) -> Point {
        match self.gap_region(addr) {
            Region::Interval { lo, hi } => Point::Line(0.5 * (lo + hi)),
            Region::Rect { min, max } => {
                Point::Plane(0.5 * (min[0] + max[0]), 0.5 * (min[1] + max[1]))
            }
            Region::Triangle { v } => Point::Plane(
                (v[0][0] + v[1][0] + v[2][0]) / 3.0,
                (v[0][1] + v[1][1] + v[2][1]) / 3.0,
            ),
            _ => unreachable!("gap regions are intervals, rects or triangles"),
        }
    }

    fn gap_probes(&self, addr: &GapAddress) -> Vec<Point> {
        match self.gap_region(addr) {
            Region::Interval { lo, hi } => [0.25, 0.5, 0.75]
                .iter()
                .map(|t| Point::Line(lo + (hi - lo) * t))
                .collect(),
            Region::Rect { min, max } => {
                let c = [0.5 * (min[0] + max[0]), 0.5 * (min[1] + max[1])];
                let h = [0.25 * (max[0] - min[0]), 0.25 * (max[1] - min[1])];
                vec![
                    Point::Plane(c[0], c[1]),
                    Point::Plane(c[0] - h[0], c[1] - h[1]),
                    Point::Plane(c[0] + h[0], c[1] - h[1]),
                    Point::Plane(c[0] - h[0], c[1] + h[1]),
                    Point::Plane(c[0] + h[0], c[1] + h[1]),
                ]
            }
            Region::Triangle { v } => {
                let c = [
                    (v[0][0] + v[1][0] + v[2][0]) / 3.0,
                    (v[0][1] + v[1][1] + v[2][1]) / 3.0,
                ];
                let mut out = vec![Point::Plane(c[0], c[1])];
                for vert in v {
                    out.push(Point::Plane(
                        0.5 * (c[0] + vert[0]),
                        0.5 * (c[1] + vert[1]),
                    ));
                }
                out
            }
            _ => unreachable!("gap regions are intervals, rects or triangles"),
        }
    }

    fn hull_probe_points(&self, n: usize) -> Vec<Point> {
        match &self.hull {
            Region::Interval { lo, hi } => (0..n)
                .map(|k| Point::Line(lo + (hi - lo) * k as f64 / (n - 1) as f64))
                .collect(),
            _ => {
                let side = (n as f64).sqrt().ceil() as usize;
                let bb = hull_bbox(&self.hull);
                let mut out = Vec::new();
                for i in 0..side {
                    for j in 0..side {
                        let x = bb[0][0] + (bb[1][0] - bb[0][0]) * i as f64 / (side - 1) as f64;
                        let y = bb[0][1] + (bb[1][1] - bb[0][1]) * j as f64 / (side - 1) as f64;
                        out.push(Point::Plane(x, y));
                    }
                }
                out
            }
        }
    }
}

fn hull_bbox(hull: &Region) -> [[f64; 2]; 2] {
    match hull {
        Region::Rect { min, max } => [*min, *max],
        Region::Triangle { v } => {
            let minx = v.iter().map(|c| c[0]).fold(f64::INFINITY, f64::min);
            let maxx = v.iter().map(|c| c[0]).fold(f64::NEG_INFINITY, f64::max);
            let miny = v.iter().map(|c| c[1]).fold(f64::INFINITY, f64::min);
            let maxy = v.iter().map(|c| c[1]).fold(f64::NEG_INFINITY, f64::max);
            [[minx, miny], [maxx, maxy]]
        }
        _ => [[0.0, 0.0], [1.0, 1.0]],
    }
}

#[derive(Clone, Debug)]
pub struct CommutReport {
    pub max_defect: f64,
    pub worst: Option<Point>,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct ConjugationReport {
    pub prefix_ok: bool,
    pub max_affine_dev: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct GapInvarianceReport {
    pub max_escape: f64,
    pub probes: usize,
    pub pass: bool,
}

/// Max of `d(phi(w(x)), w(phi(x)))` over samples and `w ∈ W`.
pub fn commutativity_defect(
    w_system: &IfsSystem,
    phi: &MapHandle,
    samples: &SetApprox,
) -> Result<(f64, Option<Point>)> {
    w_system.space().expect_same(phi.space())?;
    w_system.space().expect_same(samples.space())?;
    let space = w_system.space();
    let mut max_defect: f64 = 0.0;
    let mut worst = None;
    for x in samples.points() {
        let phix = phi.eval(x);
        for w in w_system.maps() {
            let lhs = phi.eval(&w.eval(x));
            let rhs = w.eval(&phix);
            let d = space.distance(&lhs, &rhs);
            if d > max_defect {
                max_defect = d;
                worst = Some(*x);
            }
        }
    }
    Ok((max_defect, worst))
}

// ---------------------------------------------------------------------------
// Subdivision addressing
// ---------------------------------------------------------------------------

/// Walk the subdivision digits of a hull point, feeding each digit to the
/// sink; returns true when an open gap is reached before the depth runs
/// out. The sink sees exactly the digits preceding the gap.
fn walk_digits(
    kind: &GapKind,
    depth: usize,
    p: &Point,
    mut on_digit: impl FnMut(usize),
) -> bool {
    match kind {
        GapKind::Cantor => {
            let mut u = p.coord_x().clamp(0.0, 1.0);
            for _ in 0..depth {
                let v = 3.0 * u;
                if v > 1.0 && v < 2.0 {
                    return true;
                }
                if v <= 1.0 {
                    on_digit(0);
                    u = v;
                } else {
                    on_digit(1);
                    u = v - 2.0;
                }
                u = u.clamp(0.0, 1.0);
            }
            false
        }
        GapKind::Carpet => {
            let mut ux = p.coord_x().clamp(0.0, 1.0);
            let mut uy = p.coord_y().unwrap_or(0.0).clamp(0.0, 1.0);
            for _ in 0..depth {
                let vx = 3.0 * ux;
                let vy = 3.0 * uy;
                if vx > 1.0 && vx < 2.0 && vy > 1.0 && vy < 2.0 {
                    return true;
                }
                let (ix, nx) = ternary_digit(vx);
                let (iy, ny) = ternary_digit(vy);
                on_digit(carpet_index(ix, iy));
                ux = nx.clamp(0.0, 1.0);
                uy = ny.clamp(0.0, 1.0);
            }
            false
        }
        GapKind::Triangle { verts } => {
            let mut u = [p.coord_x(), p.coord_y().unwrap_or(0.0)];
            for _ in 0..depth {
                let l = triangle_barycentric(verts, u);
                if l.iter().all(|li| *li < 0.5) {
                    return true;
                }
                let k = (0..3).find(|&k| l[k] >= 0.5).expect("some coordinate >= 1/2");
                on_digit(k);
                u = [2.0 * u[0] - verts[k][0], 2.0 * u[1] - verts[k][1]];
            }
            false
        }
    }
}

fn locate(kind: &GapKind, depth: usize, p: &Point) -> Located {
    let mut word = Vec::new();
    if walk_digits(kind, depth, p, |d| word.push(d)) {
        Located::Gap(GapAddress { word })
    } else {
        Located::Fractal
    }
}

/// Composed affine word of the gap containing `p`, built digit by digit
/// with no allocation; `None` marks a fractal member at this depth.
fn locate_word_map(
    kind: &GapKind,
    w_affine: &[AffineMap],
    depth: usize,
    p: &Point,
) -> Option<AffineMap> {
    let mut acc = w_affine[0].identity_like();
    if walk_digits(kind, depth, p, |d| acc = acc.compose(&w_affine[d])) {
        Some(acc)
    } else {
        None
    }
}

/// Ternary digit of `v = 3u` with boundaries assigned to the fractal side.
fn ternary_digit(v: f64) -> (usize, f64) {
    if v <= 1.0 {
        (0, v)
    } else if v < 2.0 {
        (1, v - 1.0)
    } else {
        (2, v - 2.0)
    }
}

const CARPET_OFFSETS: [(usize, usize); 8] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (1, 0),
    (1, 2),
    (2, 0),
    (2, 1),
    (2, 2),
];

fn carpet_index(ix: usize, iy: usize) -> usize {
    CARPET_OFFSETS
        .iter()
        .position(|&(a, b)| a == ix && b == iy)
        .expect("the center cell is a gap, not a digit")
}

fn triangle_barycentric(v: &[[f64; 2]; 3], p: [f64; 2]) -> [f64; 3] {
    let d = (v[1][1] - v[2][1]) * (v[0][0] - v[2][0]) + (v[2][0] - v[1][0]) * (v[0][1] - v[2][1]);
    let l0 = ((v[1][1] - v[2][1]) * (p[0] - v[2][0]) + (v[2][0] - v[1][0]) * (p[1] - v[2][1])) / d;
    let l1 = ((v[2][1] - v[0][1]) * (p[0] - v[2][0]) + (v[0][0] - v[2][0]) * (p[1] - v[2][1])) / d;
    [l0, l1, 1.0 - l0 - l1]
}

// ---------------------------------------------------------------------------
// System constructors
// ---------------------------------------------------------------------------

struct GapParts {
    name: &'static str,
    space: Space,
    kind: GapKind,
    w_affine: Vec<AffineMap>,
    hull: Region,
    central_gap: Region,
    hole: HoleAlr,
    fractal_ref: SetApprox,
    hole_boundary: SetApprox,
    phi_branches: Vec<MonotoneBranch>,
}

fn build_gap_system(parts: GapParts, opts: GapOptions) -> Result<GapSystem> {
    let GapParts {
        name,
        space,
        kind,
        w_affine,
        hull,
        central_gap,
        hole,
        fractal_ref,
        hole_boundary,
        phi_branches,
    } = parts;
    let retraction = make_retraction(space.clone(), hull.clone())?;
    let membership_depth = opts.membership_depth;

    let label = if opts.simplified_phi {
        format!("phi0.r0[{name}]")
    } else {
        format!("phi[{name} d{membership_depth}]")
    };

    let phi = if opts.simplified_phi {
        let r0 = make_retraction(space.clone(), central_gap.clone())?;
        let hole_eval = hole.clone();
        let r0_eval = r0.clone();
        let handle = MapHandle::from_fn(space.clone(), label, move |p| {
            hole_eval.eval(&r0_eval.eval(p))
        });
        let hole_inv = hole.clone();
        let gap_for_inv = central_gap.clone();
        let space_for_inv = space.clone();
        let handle = handle.with_inverse(move |p| {
            if gap_for_inv.contains(&space_for_inv, p, 0.0) {
                hole_inv.inverse(p)
            } else {
                *p
            }
        });
        handle.with_fixed_set(hole_boundary)?
    } else {
        let kind_eval = kind.clone();
        let w_eval = w_affine.clone();
        let hole_eval = hole.clone();
        let hull_eval = hull.clone();
        let space_eval = space.clone();
        let ret_eval = retraction.clone();
        let handle = MapHandle::from_fn(space.clone(), label, move |p| {
            if !hull_eval.contains(&space_eval, p, 0.0) {
                return ret_eval.eval(p);
            }
            match locate_word_map(&kind_eval, &w_eval, membership_depth, p) {
                None => *p,
                Some(w) => w.apply(&hole_eval.eval(&w.inverse().apply(p))),
            }
        });
        let kind_inv = kind.clone();
        let w_inv = w_affine.clone();
        let hole_inv = hole.clone();
        let hull_inv = hull.clone();
        let space_inv = space.clone();
        let handle = handle.with_inverse(move |p| {
            if !hull_inv.contains(&space_inv, p, 0.0) {
                return *p;
            }
            match locate_word_map(&kind_inv, &w_inv, membership_depth, p) {
                None => *p,
                Some(w) => w.apply(&hole_inv.inverse(&w.inverse().apply(p))),
            }
        });
        handle.with_fixed_set(fractal_ref.clone())?
    };
    let phi = if phi_branches.is_empty() {
        phi
    } else {
        phi.with_branches(phi_branches)?
    };
    phi.validate_self_map()?;

    let mut w_handles = Vec::with_capacity(w_affine.len());
    for (i, a) in w_affine.iter().enumerate() {
        let fwd = *a;
        let inv = a.inverse();
        let handle = MapHandle::from_fn(space.clone(), format!("w{i}"), move |p| fwd.apply(p))
            .with_inverse(move |p| inv.apply(p));
        w_handles.push(handle);
    }

    let w_system = IfsSystem::new(w_handles.clone())?.with_target(fractal_ref.clone())?;
    let mut f_maps = w_handles;
    f_maps.push(phi.clone());
    let system = IfsSystem::new(f_maps)?.with_target(fractal_ref.clone())?;

    Ok(GapSystem {
        space,
        kind,
        w_affine,
        w_system,
        system,
        hull,
        central_gap,
        fractal_ref,
        phi,
        hole,
        membership_depth,
        simplified: opts.simplified_phi,
        epsilon: opts.epsilon,
        name,
    })
}

/// The ternary Cantor set with `W = {x/3, (x+2)/3}` on `D = [0, 1]`,
/// central gap `(1/3, 2/3)`, the square-variant hole map and a clamp
/// retraction outside the hull.
pub fn cantor_system() -> Result<GapSystem> {
    cantor_system_with(GapOptions::cantor())
}

pub fn cantor_system_with(opts: GapOptions) -> Result<GapSystem> {
    let space = Space::real_line_bounded(-0.5, 1.5);
    let w_affine = vec![
        AffineMap::One {
            scale: 1.0 / 3.0,
            offset: 0.0,
        },
        AffineMap::One {
            scale: 1.0 / 3.0,
            offset: 2.0 / 3.0,
        },
    ];

    let mut pts = vec![Point::Line(0.0), Point::Line(1.0)];
    for _ in 0..opts.ref_depth {
        let mut next = Vec::with_capacity(pts.len() * 2);
        for a in &w_affine {
            for p in &pts {
                next.push(a.apply(p));
            }
        }
        pts = next;
    }
    let fractal_ref = SetApprox::new(
        space.clone(),
        pts,
        3.0_f64.powi(-(opts.ref_depth as i32)),
    )?;

    let hole_boundary = SetApprox::new(
        space.clone(),
        vec![Point::Line(1.0 / 3.0), Point::Line(2.0 / 3.0)],
        1e-9,
    )?;

    build_gap_system(
        GapParts {
            name: "cantor",
            space,
            kind: GapKind::Cantor,
            w_affine,
            hull: Region::Interval { lo: 0.0, hi: 1.0 },
            central_gap: Region::Interval {
                lo: 1.0 / 3.0,
                hi: 2.0 / 3.0,
            },
            hole: HoleAlr::Interval {
                a: 1.0 / 3.0,
                b: 2.0 / 3.0,
            },
            fractal_ref,
            hole_boundary,
            phi_branches: vec![MonotoneBranch::increasing(1.0 / 3.0, 2.0 / 3.0)],
        },
        opts,
    )
}

/// The Sierpinski carpet: 8 similarity maps of ratio 1/3 on the unit
/// square, central hole `(1/3, 2/3)^2` carrying a disc ALR conjugated by
/// the radial square chart.
pub fn sierpinski_carpet_system() -> Result<GapSystem> {
    sierpinski_carpet_system_with(GapOptions::carpet())
}

pub fn sierpinski_carpet_system_with(opts: GapOptions) -> Result<GapSystem> {
    let space = Space::plane_region([-0.25, -0.25], [1.25, 1.25]);
    let w_affine: Vec<AffineMap> = CARPET_OFFSETS
        .iter()
        .map(|&(i, j)| AffineMap::Two {
            scale: 1.0 / 3.0,
            offset: [i as f64 / 3.0, j as f64 / 3.0],
        })
        .collect();

    let mut pts = vec![Point::Plane(0.0, 0.0)];
    for _ in 0..opts.ref_depth {
        let mut next = Vec::with_capacity(pts.len() * 8);
        for a in &w_affine {
            for p in &pts {
                next.push(a.apply(p));
            }
        }
        pts = next;
    }
    let fractal_ref = SetApprox::new(
        space.clone(),
        pts,
        2.0 * 3.0_f64.powi(-(opts.ref_depth as i32)),
    )?;

    let hole_verts = vec![
        [1.0 / 3.0, 1.0 / 3.0],
        [2.0 / 3.0, 1.0 / 3.0],
        [2.0 / 3.0, 2.0 / 3.0],
        [1.0 / 3.0, 2.0 / 3.0],
    ];
    let chart = StarChart::new([0.5, 0.5], hole_verts);
    let hole_boundary = {
        let mut pts = Vec::new();
        for k in 0..256 {
            let t = k as f64 / 256.0;
            let side = (4.0 * t) as usize % 4;
            let f = (4.0 * t).fract();
            let (a, b) = match side {
                0 => ([1.0 / 3.0, 1.0 / 3.0], [2.0 / 3.0, 1.0 / 3.0]),
                1 => ([2.0 / 3.0, 1.0 / 3.0], [2.0 / 3.0, 2.0 / 3.0]),
                2 => ([2.0 / 3.0, 2.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]),
                _ => ([1.0 / 3.0, 2.0 / 3.0], [1.0 / 3.0, 1.0 / 3.0]),
            };
            pts.push(Point::Plane(
                a[0] + (b[0] - a[0]) * f,
                a[1] + (b[1] - a[1]) * f,
            ));
        }
        SetApprox::new(space.clone(), pts, 1e-2)?
    };

    build_gap_system(
        GapParts {
            name: "sierpinski-carpet",
            space,
            kind: GapKind::Carpet,
            w_affine,
            hull: Region::Rect {
                min: [0.0, 0.0],
                max: [1.0, 1.0],
            },
            central_gap: Region::Rect {
                min: [1.0 / 3.0, 1.0 / 3.0],
                max: [2.0 / 3.0, 2.0 / 3.0],
            },
            hole: HoleAlr::Star { chart },
            fractal_ref,
            hole_boundary,
            phi_branches: Vec::new(),
        },
        opts,
    )
}

/// The Sierpinski triangle: 3 similarity maps of ratio 1/2 on the triangle
/// (0,0), (1,0), (1/2, sqrt(3)/2); the central inverted hole carries the
/// conjugated disc ALR.
pub fn sierpinski_triangle_system() -> Result<GapSystem> {
    sierpinski_triangle_system_with(GapOptions::triangle())
}

pub fn sierpinski_triangle_system_with(opts: GapOptions) -> Result<GapSystem> {
    let verts = [[0.0, 0.0], [1.0, 0.0], [0.5, 3.0_f64.sqrt() / 2.0]];
    let space = Space::plane_region([-0.25, -0.25], [1.25, 1.15]);
    let w_affine: Vec<AffineMap> = verts
        .iter()
        .map(|v| AffineMap::Two {
            scale: 0.5,
            offset: [v[0] / 2.0, v[1] / 2.0],
        })
        .collect();

    let mut pts: Vec<Point> = verts.iter().map(|v| Point::Plane(v[0], v[1])).collect();
    for _ in 0..opts.ref_depth {
        let mut next = Vec::with_capacity(pts.len() * 3);
        for a in &w_affine {
            for p in &pts {
                next.push(a.apply(p));
            }
        }
        pts = next;
    }
    let fractal_ref = SetApprox::new(
        space.clone(),
        pts,
        2.0_f64.powi(-(opts.ref_depth as i32)),
    )?;

    let m01 = [0.5 * (verts[0][0] + verts[1][0]), 0.5 * (verts[0][1] + verts[1][1])];
    let m12 = [0.5 * (verts[1][0] + verts[2][0]), 0.5 * (verts[1][1] + verts[2][1])];
    let m02 = [0.5 * (verts[0][0] + verts[2][0]), 0.5 * (verts[0][1] + verts[2][1])];
    let hole_verts = vec![m01, m12, m02];
    let center = [
        (m01[0] + m12[0] + m02[0]) / 3.0,
        (m01[1] + m12[1] + m02[1]) / 3.0,
    ];
    let chart = StarChart::new(center, hole_verts.clone());
    let hole_boundary = {
        let mut pts = Vec::new();
        for k in 0..3 {
            let a = hole_verts[k];
            let b = hole_verts[(k + 1) % 3];
            for t in 0..64 {
                let f = t as f64 / 64.0;
                pts.push(Point::Plane(
                    a[0] + (b[0] - a[0]) * f,
                    a[1] + (b[1] - a[1]) * f,
                ));
            }
        }
        SetApprox::new(space.clone(), pts, 1e-2)?
    };

    build_gap_system(
        GapParts {
            name: "sierpinski-triangle",
            space,
            kind: GapKind::Triangle { verts },
            w_affine,
            hull: Region::Triangle { v: verts },
            central_gap: Region::Triangle {
                v: [m01, m12, m02],
            },
            hole: HoleAlr::Star { chart },
            fractal_ref,
            hole_boundary,
            phi_branches: Vec::new(),
        },
        opts,
    )
}

// ---------------------------------------------------------------------------
// Kwietniak system
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct KwietniakExample {
    pub system: IfsSystem,
    pub phi: MapHandle,
    pub target: SetApprox,
}

/// The single-map system `{x + 1}` on the compactified line with target
/// `{infinity}`: a pointwise attractor that is not strict.
pub fn kwietniak_system(eps: f64) -> Result<KwietniakExample> {
    let phi = crate::maps::make_kwietniak_map()?;
    let target = SetApprox::singleton(Space::compactified_line(), Point::Infinity, eps)?;
    let system = IfsSystem::new(vec![phi.clone()])?.with_target(target.clone())?;
    Ok(KwietniakExample {
        system,
        phi,
        target,
    })
}

// ---------------------------------------------------------------------------
// Circle examples
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CircleComponent {
    /// A singleton at the given angle.
    Point(f64),
    /// Closed counterclockwise arc; `from == to` denotes the full circle.
    Arc { from: f64, to: f64 },
}

#[derive(Clone, Debug)]
pub struct TwoMapVariant {
    /// `psi = phi ∘ shift`.
    pub psi: MapHandle,
    /// The piecewise-linear gap-to-next-gap shift, ratio-preserving on each
    /// gap.
    pub shift: MapHandle,
    pub system: IfsSystem,
}

#[derive(Clone, Debug)]
pub struct CircleExample {
    pub system: IfsSystem,
    pub w_system: IfsSystem,
    pub phi: MapHandle,
    pub target: SetApprox,
    /// Complement arcs `(end of component k, start of component k+1)`.
    pub gaps: Vec<(f64, f64)>,
    /// Present for all-singleton targets: the two-map system `{phi, psi}`.
    pub two_map: Option<TwoMapVariant>,
}

fn circle_arc_contraction(from: f64, len: f64, upper: bool) -> MapHandle {
    let label = if upper {
        format!("arc-contract-hi[{from}]")
    } else {
        format!("arc-contract-lo[{from}]")
    };
    MapHandle::from_fn(Space::circle(), label, move |p| match p {
        Point::Angle(t) => {
            let u = wrap_angle(t - from).min(len);
            let v = if upper { (u + len) / 2.0 } else { u / 2.0 };
            Point::angle(from + v)
        }
        _ => panic!("arc contraction applied off the circle"),
    })
}

/// Assemble the circle example for a disjoint union of closed arcs and
/// singletons: `phi` glues an arc ALR onto every complement gap with the
/// identity on the target, and `W` retracts onto the components and
/// contracts within each arc. For an all-singleton target the two-map
/// variant `{phi, phi ∘ shift}` is built as well.
pub fn circle_example(components: &[CircleComponent], eps: f64) -> Result<CircleExample> {
    if components.is_empty() {
        return Err(IfsError::EmptyRegion);
    }
    let space = Space::circle();

    // Full-circle special case: phi is the identity and W carries the
    // circle as a pointwise attractor via an irrational rotation pair.
    if components.len() == 1 {
        if let CircleComponent::Arc { from, to } = components[0] {
            if from == to {
                let target = epsilon_net(&space, &Region::Arc { from: 0.0, to: 0.0 }, eps)?;
                let golden = TAU * (1.0 - 2.0 / (1.0 + 5.0_f64.sqrt()));
                let rot = MapHandle::from_fn(space.clone(), "rotate-golden", move |p| {
                    Point::angle(p.coord_x() + golden)
                });
                let w_system = IfsSystem::new(vec![identity(space.clone()), rot])?
                    .with_target(target.clone())?;
                let phi = identity(space);
                let system = w_system.clone();
                return Ok(CircleExample {
                    system,
                    w_system,
                    phi,
                    target,
                    gaps: Vec::new(),
                    two_map: None,
                });
            }
        }
    }

    // Sort by start angle and validate disjointness.
    let mut comps: Vec<(f64, f64)> = components
        .iter()
        .map(|c| match c {
            CircleComponent::Point(t) => {
                let t = wrap_angle(*t);
                (t, t)
            }
            CircleComponent::Arc { from, to } => (wrap_angle(*from), wrap_angle(*to)),
        })
        .collect();
    comps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let m = comps.len();
    let mut gaps = Vec::with_capacity(m);
    let mut total = 0.0;
    for k in 0..m {
        let (s, e) = comps[k];
        let comp_len = if s == e { 0.0 } else { arc_length(s, e) };
        let next_start = comps[(k + 1) % m].0;
        let gap_len = wrap_angle(next_start - e);
        if gap_len <= 0.0 || (k + 1 == m && gap_len == 0.0) {
            return Err(IfsError::Invalid(
                "circle components must be pairwise disjoint with nonempty gaps".into(),
            ));
        }
        total += comp_len + gap_len;
        gaps.push((e, next_start));
    }
    if (total - TAU).abs() > 1e-9 {
        return Err(IfsError::Invalid(
            "circle components overlap: lengths plus gaps must tile the circle".into(),
        ));
    }

    // Target net.
    let mut target_pts = Vec::new();
    for &(s, e) in &comps {
        if s == e {
            target_pts.push(Point::angle(s));
        } else {
            target_pts.extend_from_slice(
                epsilon_net(&space, &Region::Arc { from: s, to: e }, eps)?.points(),
            );
        }
    }
    let target = SetApprox::new(space.clone(), target_pts, eps)?;

    // phi: arc ALR on each gap, identity on each component.
    let mut pieces: Vec<(Region, MapHandle)> = Vec::new();
    for &(gs, ge) in &gaps {
        pieces.push((
            Region::Arc { from: gs, to: ge },
            make_arc_alr(gs, ge)?,
        ));
    }
    for &(s, e) in &comps {
        let region = if s == e {
            Region::Singleton {
                point: Point::angle(s),
            }
        } else {
            Region::Arc { from: s, to: e }
        };
        let fixed = epsilon_net(&space, &region, eps)?;
        pieces.push((region, identity(space.clone()).with_fixed_set(fixed)?));
    }
    let phi = union_maps(pieces)?;

    // W via the retraction construction.
    let mut parts = Vec::with_capacity(m);
    for &(s, e) in &comps {
        if s == e {
            let pt = Point::angle(s);
            parts.push(crate::analysis::RetractPart {
                target: SetApprox::singleton(space.clone(), pt, eps)?,
                retraction: constant(space.clone(), pt)?,
                maps: IfsSystem::new(vec![identity(space.clone())])?,
            });
        } else {
            let region = Region::Arc { from: s, to: e };
            let len = arc_length(s, e);
            parts.push(crate::analysis::RetractPart {
                target: epsilon_net(&space, &region, eps)?,
                retraction: make_retraction(space.clone(), region)?,
                maps: IfsSystem::new(vec![
                    circle_arc_contraction(s, len, false),
                    circle_arc_contraction(s, len, true),
                ])?,
            });
        }
    }
    let w_system = build_retract_ifs_local(&parts)?;

    let mut f_maps = w_system.maps().to_vec();
    f_maps.push(phi.clone());
    let system = IfsSystem::new(f_maps)?.with_target(target.clone())?;

    // Two-map variant for finite targets.
    let all_points = comps.iter().all(|(s, e)| s == e);
    let two_map = if all_points && m >= 2 {
        let starts: Vec<f64> = comps.iter().map(|c| c.0).collect();
        let lens: Vec<f64> = (0..m)
            .map(|k| wrap_angle(starts[(k + 1) % m] - starts[k]))
            .collect();
        let shift = {
            let starts = starts.clone();
            let lens = lens.clone();
            MapHandle::from_fn(space.clone(), "gap-shift", move |p| {
                let t = p.coord_x();
                // Gap containing t: the last start at or before t (wrap).
                let mut k = 0;
                let mut best = f64::INFINITY;
                for (i, s) in starts.iter().enumerate() {
                    let off = wrap_angle(t - s);
                    if off < best {
                        best = off;
                        k = i;
                    }
                }
                let next = (k + 1) % starts.len();
                Point::angle(starts[next] + best * lens[next] / lens[k])
            })
        };
        let psi = compose(&phi, &shift)?;
        let system = IfsSystem::new(vec![phi.clone(), psi.clone()])?
            .with_target(target.clone())?;
        Some(TwoMapVariant {
            psi,
            shift,
            system,
        })
    } else {
        None
    };

    Ok(CircleExample {
        system,
        w_system,
        phi,
        target,
        gaps,
        two_map,
    })
}

// build_retract_ifs lives in analysis; a thin local alias keeps the call
// sites here short.
fn build_retract_ifs_local(parts: &[crate::analysis::RetractPart]) -> Result<IfsSystem> {
    crate::analysis::build_retract_ifs(parts)
}

// ---------------------------------------------------------------------------
// Line examples
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinePart {
    Point(f64),
    Interval(f64, f64),
}

impl LinePart {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            LinePart::Point(x) => (x, x),
            LinePart::Interval(a, b) => (a, b),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LineExample {
    /// `W ∪ {phi}` with the piecewise map clamping both rays.
    pub system: IfsSystem,
    /// `W ∪ {phi_simplified}` with the first-gap-only variant.
    pub simplified_system: IfsSystem,
    pub phi: MapHandle,
    pub phi_simplified: MapHandle,
    pub target: SetApprox,
    /// First interior gap `(a1, b1)`; the canonical refutation witness
    /// lives here.
    pub first_gap: (f64, f64),
}

/// Assemble the line example for at least two sorted, disjoint parts:
/// `phi` clamps the two unbounded rays to the extreme endpoints, installs a
/// square-variant ALR on every bounded gap and fixes the parts; `W` retracts
/// and contracts onto the parts.
pub fn line_example(parts: &[LinePart], eps: f64) -> Result<LineExample> {
    if parts.len() < 2 {
        return Err(IfsError::Invalid(
            "the line example needs at least two parts".into(),
        ));
    }
    let mut sorted = parts.to_vec();
    sorted.sort_by(|a, b| a.bounds().0.total_cmp(&b.bounds().0));
    for w in sorted.windows(2) {
        let (_, e0) = w[0].bounds();
        let (s1, _) = w[1].bounds();
        if e0 >= s1 {
            return Err(IfsError::Invalid(format!(
                "line parts must be sorted and disjoint (found {e0} >= {s1})"
            )));
        }
    }
    let lo = sorted[0].bounds().0;
    let hi = sorted[sorted.len() - 1].bounds().1;
    let space = Space::real_line_bounded(lo - 2.0, hi + 2.0);

    let mut target_pts = Vec::new();
    for part in &sorted {
        match *part {
            LinePart::Point(x) => target_pts.push(Point::Line(x)),
            LinePart::Interval(a, b) => target_pts.extend_from_slice(
                epsilon_net(&space, &Region::Interval { lo: a, hi: b }, eps)?.points(),
            ),
        }
    }
    let target = SetApprox::new(space.clone(), target_pts, eps)?;

    // Interior gaps.
    let mut gaps = Vec::new();
    for w in sorted.windows(2) {
        let (_, e0) = w[0].bounds();
        let (s1, _) = w[1].bounds();
        gaps.push((e0, s1));
    }
    let first_gap = gaps[0];

    // Full piecewise phi.
    let mut pieces: Vec<(Region, MapHandle)> = Vec::new();
    pieces.push((
        Region::Interval {
            lo: f64::NEG_INFINITY,
            hi: lo,
        },
        constant(space.clone(), Point::Line(lo))?,
    ));
    pieces.push((
        Region::Interval {
            lo: hi,
            hi: f64::INFINITY,
        },
        constant(space.clone(), Point::Line(hi))?,
    ));
    for &(a, b) in &gaps {
        pieces.push((
            Region::Interval { lo: a, hi: b },
            crate::maps::interval_alr_on(space.clone(), a, b, AlrVariant::Square)?,
        ));
    }
    for part in &sorted {
        let (a, b) = part.bounds();
        let region = Region::Interval { lo: a, hi: b };
        let fixed = if a == b {
            SetApprox::singleton(space.clone(), Point::Line(a), eps)?
        } else {
            epsilon_net(&space, &region, eps)?
        };
        pieces.push((region, identity(space.clone()).with_fixed_set(fixed)?));
    }
    let phi = union_maps(pieces)?;

    // Simplified variant: hole map on the first gap composed with the clamp
    // onto its closure.
    let (a1, b1) = first_gap;
    let phi_simplified = {
        let alr = crate::maps::interval_alr_on(space.clone(), a1, b1, AlrVariant::Square)?;
        let clamp = make_retraction(space.clone(), Region::Interval { lo: a1, hi: b1 })?;
        let handle = compose(&alr, &clamp)?.with_label(format!("phi0.r0[{a1}, {b1}]"));
        let fixed = SetApprox::new(
            space.clone(),
            vec![Point::Line(a1), Point::Line(b1)],
            1e-9,
        )?;
        handle
            .with_fixed_set(fixed)?
            .with_branches(vec![MonotoneBranch::increasing(a1, b1)])?
    };

    // W: constants onto points, clamp + halving contractions onto
    // intervals.
    let mut retract_parts = Vec::new();
    for part in &sorted {
        match *part {
            LinePart::Point(x) => retract_parts.push(crate::analysis::RetractPart {
                target: SetApprox::singleton(space.clone(), Point::Line(x), eps)?,
                retraction: constant(space.clone(), Point::Line(x))?,
                maps: IfsSystem::new(vec![identity(space.clone())])?,
            }),
            LinePart::Interval(a, b) => retract_parts.push(crate::analysis::RetractPart {
                target: epsilon_net(&space, &Region::Interval { lo: a, hi: b }, eps)?,
                retraction: make_retraction(
                    space.clone(),
                    Region::Interval { lo: a, hi: b },
                )?,
                maps: IfsSystem::new(vec![
                    affine(space.clone(), 0.5, a / 2.0)?,
                    affine(space.clone(), 0.5, b / 2.0)?,
                ])?,
            }),
        }
    }
    let w_system = build_retract_ifs_local(&retract_parts)?;

    let mut f_maps = w_system.maps().to_vec();
    f_maps.push(phi.clone());
    let system = IfsSystem::new(f_maps)?.with_target(target.clone())?;

    let mut s_maps = w_system.maps().to_vec();
    s_maps.push(phi_simplified.clone());
    let simplified_system = IfsSystem::new(s_maps)?.with_target(target.clone())?;

    Ok(LineExample {
        system,
        simplified_system,
        phi,
        phi_simplified,
        target,
        first_gap,
    })
}
