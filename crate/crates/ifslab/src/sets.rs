//! Compact sets as finite point clouds with a resolution, plus the metric
//! machinery on them: grid deduplication, Hausdorff distance (exhaustive and
//! grid-indexed paths that must agree), epsilon-nets of regions and tail
//! estimates of Kuratowski lower/upper limits.

use crate::error::{IfsError, Result};
use crate::region::{arc_length, Region};
use crate::space::{Point, Space};
use rayon::prelude::*;
use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

/// Multiply-xor hasher for grid keys; the default SipHash dominates the
/// snap and nearest-neighbor paths otherwise. Bucket order never affects
/// results (greedy thinning follows input order, minima are order-free).
#[derive(Default)]
pub(crate) struct KeyHasher(u64);

impl Hasher for KeyHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x100_0000_01b3);
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0 ^ v).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        self.0 ^= self.0 >> 32;
    }

    fn write_i64(&mut self, v: i64) {
        self.write_u64(v as u64);
    }

    fn write_usize(&mut self, v: usize) {
        self.write_u64(v as u64);
    }
}

type GridMap = HashMap<(i64, i64), Vec<u32>, BuildHasherDefault<KeyHasher>>;

/// Product of set sizes above which the distance computation switches from
/// the exhaustive double loop to the spatial index. Both paths agree to
/// 1e-12 (they compute the same minima).
pub const GRID_ENGAGE_PRODUCT: usize = 1_000_000;

/// Below this size the index degenerates to a scan.
const BRUTE_INDEX_LIMIT: usize = 512;

/// A nonempty compact set approximated by a finite point cloud at a stated
/// resolution `eps`: after construction no two points are closer than
/// `eps / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SetApprox {
    space: Space,
    points: Vec<Point>,
    resolution: f64,
}

impl SetApprox {
    /// Validates membership, thins the cloud to the dedup invariant and
    /// stamps the resolution. Point order is preserved; later duplicates
    /// (within `eps / 2`) are dropped.
    pub fn new(space: Space, points: Vec<Point>, eps: f64) -> Result<SetApprox> {
        if eps <= 0.0 || !eps.is_finite() {
            return Err(IfsError::BadResolution(eps));
        }
        if points.is_empty() {
            return Err(IfsError::EmptySet);
        }
        for p in &points {
            if !space.admits(p) {
                return Err(IfsError::Invalid(format!(
                    "point {p} does not belong to the {space} chart"
                )));
            }
        }
        let thinned = thin_points(&space, &points, eps);
        Ok(SetApprox {
            space,
            points: thinned,
            resolution: eps,
        })
    }

    pub fn singleton(space: Space, p: Point, eps: f64) -> Result<SetApprox> {
        SetApprox::new(space, vec![p], eps)
    }

    /// Trusted constructor for clouds already satisfying the dedup
    /// invariant (outputs of the thinner).
    pub(crate) fn from_snapped(space: Space, points: Vec<Point>, eps: f64) -> SetApprox {
        debug_assert!(!points.is_empty());
        SetApprox {
            space,
            points,
            resolution: eps,
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Distance from `p` to the cloud by linear scan. Use [`NnIndex`] for
    /// repeated queries.
    pub fn min_distance_to(&self, p: &Point) -> f64 {
        self.points
            .iter()
            .map(|q| self.space.distance(p, q))
            .fold(f64::INFINITY, f64::min)
    }

    /// Union preserving left-to-right order, thinned at the coarser
    /// resolution.
    pub fn union(&self, other: &SetApprox) -> Result<SetApprox> {
        self.space.expect_same(&other.space)?;
        let eps = self.resolution.max(other.resolution);
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points);
        SetApprox::new(self.space.clone(), pts, eps)
    }
}

// ---------------------------------------------------------------------------
// Grid thinning
// ---------------------------------------------------------------------------

struct ThinGrid {
    cell: f64,
    period_cells: Option<i64>,
    two_d: bool,
    occupied: GridMap,
}

impl ThinGrid {
    fn new(space: &Space, eps: f64) -> ThinGrid {
        let h = eps / 2.0;
        match space.chart_period() {
            Some(period) => {
                // Cells must divide the period evenly so neighbor lookups can
                // wrap; round the count down so cells stay >= h.
                let n = (period / h).floor().max(1.0) as i64;
                ThinGrid {
                    cell: period / n as f64,
                    period_cells: Some(n),
                    two_d: false,
                    occupied: GridMap::default(),
                }
            }
            None => ThinGrid {
                cell: h,
                period_cells: None,
                two_d: space.dim() == 2,
                occupied: GridMap::default(),
            },
        }
    }

    fn key(&self, chart: [f64; 2]) -> (i64, i64) {
        match self.period_cells {
            Some(n) => {
                let period = self.cell * n as f64;
                let mut u = chart[0] % period;
                if u < 0.0 {
                    u += period;
                }
                let mut i = (u / self.cell).floor() as i64;
                if i >= n {
                    i = n - 1;
                }
                if i < 0 {
                    i = 0;
                }
                (i, 0)
            }
            None => {
                let i = (chart[0] / self.cell).floor() as i64;
                let j = if self.two_d {
                    (chart[1] / self.cell).floor() as i64
                } else {
                    0
                };
                (i, j)
            }
        }
    }

    fn neighbors(&self, key: (i64, i64)) -> Vec<(i64, i64)> {
        let mut out = Vec::with_capacity(9);
        match self.period_cells {
            Some(n) => {
                for di in -1..=1 {
                    let i = (key.0 + di).rem_euclid(n);
                    if !out.contains(&(i, 0)) {
                        out.push((i, 0));
                    }
                }
            }
            None => {
                let jrange = if self.two_d { -1..=1 } else { 0..=0 };
                for di in -1..=1 {
                    for dj in jrange.clone() {
                        out.push((key.0 + di, key.1 + dj));
                    }
                }
            }
        }
        out
    }
}

/// Greedy thinning in input order: a point is kept iff it is at least
/// `eps / 2` away from every point kept before it. Kept points are original
/// inputs, never cell averages, so thinning is idempotent and a thinned
/// cloud is always a subset of its input.
pub(crate) fn thin_points(space: &Space, points: &[Point], eps: f64) -> Vec<Point> {
    let mut grid = ThinGrid::new(space, eps);
    let mut kept: Vec<Point> = Vec::new();
    let half = eps / 2.0;
    for p in points {
        let chart = space.chart(p);
        let key = grid.key(chart);
        let mut dup = false;
        'scan: for nk in grid.neighbors(key) {
            if let Some(ids) = grid.occupied.get(&nk) {
                for &id in ids {
                    if space.distance(p, &kept[id as usize]) < half {
                        dup = true;
                        break 'scan;
                    }
                }
            }
        }
        if !dup {
            grid.occupied.entry(key).or_default().push(kept.len() as u32);
            kept.push(*p);
        }
    }
    kept
}

/// Re-snap an existing set at resolution `eps`.
pub fn grid_snap(set: &SetApprox, eps: f64) -> Result<SetApprox> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(IfsError::BadResolution(eps));
    }
    let thinned = thin_points(set.space(), set.points(), eps);
    Ok(SetApprox::from_snapped(set.space.clone(), thinned, eps))
}

// ---------------------------------------------------------------------------
// Nearest-neighbor index and Hausdorff distance
// ---------------------------------------------------------------------------

/// Nearest-point index over a set, for repeated distance queries. 1-D charts
/// use a sorted array (exact, log-time, wrap-aware); plane charts use a
/// uniform grid with expanding ring search; tiny sets fall back to a scan.
pub struct NnIndex {
    space: Space,
    strategy: Strategy,
}

enum Strategy {
    Brute {
        pts: Vec<Point>,
    },
    Sorted {
        coords: Vec<f64>,
        period: Option<f64>,
    },
    Grid {
        cell: f64,
        cells: GridMap,
        coords: Vec<[f64; 2]>,
        bbox: [(i64, i64); 2],
    },
}

impl NnIndex {
    pub fn build(set: &SetApprox) -> NnIndex {
        let space = set.space().clone();
        if set.len() <= BRUTE_INDEX_LIMIT {
            return NnIndex {
                space,
                strategy: Strategy::Brute {
                    pts: set.points().to_vec(),
                },
            };
        }
        if space.dim() == 1 {
            let period = space.chart_period();
            let mut coords: Vec<f64> = set
                .points()
                .iter()
                .map(|p| {
                    let c = space.chart(p)[0];
                    match period {
                        Some(per) => {
                            let mut u = c % per;
                            if u < 0.0 {
                                u += per;
                            }
                            u
                        }
                        None => c,
                    }
                })
                .collect();
            coords.sort_by(f64::total_cmp);
            NnIndex {
                space,
                strategy: Strategy::Sorted { coords, period },
            }
        } else {
            let coords: Vec<[f64; 2]> = set.points().iter().map(|p| space.chart(p)).collect();
            let mut ext = [f64::INFINITY, f64::NEG_INFINITY];
            for c in &coords {
                ext[0] = ext[0].min(c[0].min(c[1]));
                ext[1] = ext[1].max(c[0].max(c[1]));
            }
            let extent = (ext[1] - ext[0]).max(1e-12);
            let cell = set.resolution().max(extent / 1024.0);
            let mut cells = GridMap::default();
            let mut bbox = [(i64::MAX, i64::MAX), (i64::MIN, i64::MIN)];
            for (id, c) in coords.iter().enumerate() {
                let key = ((c[0] / cell).floor() as i64, (c[1] / cell).floor() as i64);
                bbox[0].0 = bbox[0].0.min(key.0);
                bbox[0].1 = bbox[0].1.min(key.1);
                bbox[1].0 = bbox[1].0.max(key.0);
                bbox[1].1 = bbox[1].1.max(key.1);
                cells.entry(key).or_default().push(id as u32);
            }
            NnIndex {
                space,
                strategy: Strategy::Grid {
                    cell,
                    cells,
                    coords,
                    bbox,
                },
            }
        }
    }

    /// Exact distance from `q` to the indexed set.
    pub fn distance_to(&self, q: &Point) -> f64 {
        match &self.strategy {
            Strategy::Brute { pts } => pts
                .iter()
                .map(|p| self.space.distance(q, p))
                .fold(f64::INFINITY, f64::min),
            Strategy::Sorted { coords, period } => {
                let mut u = self.space.chart(q)[0];
                if let Some(per) = period {
                    u %= per;
                    if u < 0.0 {
                        u += per;
                    }
                }
                let n = coords.len();
                let i = coords.partition_point(|c| *c < u);
                let dist1d = |a: f64, b: f64| match period {
                    Some(per) => {
                        let d = (a - b).abs() % per;
                        d.min(per - d)
                    }
                    None => (a - b).abs(),
                };
                let mut best = f64::INFINITY;
                // Neighbors in sorted order; wrap to the ends for periodic
                // charts.
                let mut cand = vec![];
                if i > 0 {
                    cand.push(coords[i - 1]);
                }
                if i < n {
                    cand.push(coords[i]);
                }
                if period.is_some() {
                    cand.push(coords[0]);
                    cand.push(coords[n - 1]);
                }
                for c in cand {
                    best = best.min(dist1d(u, c));
                }
                best
            }
            Strategy::Grid {
                cell,
                cells,
                coords,
                bbox,
            } => {
                let c = self.space.chart(q);
                let key = ((c[0] / cell).floor() as i64, (c[1] / cell).floor() as i64);
                let mut best = f64::INFINITY;
                let mut r: i64 = 0;
                loop {
                    if best.is_finite() && (r - 1) as f64 * cell > best {
                        break;
                    }
                    let mut scan = |k: (i64, i64)| {
                        if let Some(ids) = cells.get(&k) {
                            for &id in ids {
                                let p = coords[id as usize];
                                let d = (p[0] - c[0]).hypot(p[1] - c[1]);
                                if d < best {
                                    best = d;
                                }
                            }
                        }
                    };
                    if r == 0 {
                        scan(key);
                    } else {
                        for di in -r..=r {
                            scan((key.0 + di, key.1 - r));
                            scan((key.0 + di, key.1 + r));
                        }
                        for dj in (-r + 1)..r {
                            scan((key.0 - r, key.1 + dj));
                            scan((key.0 + r, key.1 + dj));
                        }
                    }
                    let covered = key.0 - r <= bbox[0].0
                        && key.0 + r >= bbox[1].0
                        && key.1 - r <= bbox[0].1
                        && key.1 + r >= bbox[1].1;
                    if covered {
                        break;
                    }
                    r += 1;
                }
                best
            }
        }
    }
}

/// Directed Hausdorff distance `sup_{a in A} d(a, B)` against an index.
pub fn directed_hausdorff(a: &SetApprox, b_index: &NnIndex) -> f64 {
    a.points()
        .par_iter()
        .map(|p| b_index.distance_to(p))
        .reduce(|| 0.0, f64::max)
}

fn directed_exhaustive(a: &SetApprox, b: &SetApprox) -> f64 {
    a.points()
        .par_iter()
        .map(|p| {
            b.points()
                .iter()
                .map(|q| a.space().distance(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff distance between two clouds on the same space; exact for the
/// clouds as given. The exhaustive path runs up to `GRID_ENGAGE_PRODUCT`
/// pairs, beyond which the index takes over.
pub fn hausdorff_distance(a: &SetApprox, b: &SetApprox) -> Result<f64> {
    a.space().expect_same(b.space())?;
    if a.len().saturating_mul(b.len()) <= GRID_ENGAGE_PRODUCT {
        Ok(directed_exhaustive(a, b).max(directed_exhaustive(b, a)))
    } else {
        let ia = NnIndex::build(a);
        let ib = NnIndex::build(b);
        Ok(directed_hausdorff(a, &ib).max(directed_hausdorff(b, &ia)))
    }
}

/// The pure double-loop oracle path, kept callable at any size so the two
/// routes can be compared.
pub fn hausdorff_distance_exhaustive(a: &SetApprox, b: &SetApprox) -> Result<f64> {
    a.space().expect_same(b.space())?;
    Ok(directed_exhaustive(a, b).max(directed_exhaustive(b, a)))
}

/// The index path regardless of size.
pub fn hausdorff_distance_indexed(a: &SetApprox, b: &SetApprox) -> Result<f64> {
    a.space().expect_same(b.space())?;
    let ia = NnIndex::build(a);
    let ib = NnIndex::build(b);
    Ok(directed_hausdorff(a, &ib).max(directed_hausdorff(b, &ia)))
}

// ---------------------------------------------------------------------------
// Epsilon nets
// ---------------------------------------------------------------------------

/// Finite net with every point of the region within `eps` of a net point.
/// Nets are generated with covering radius <= eps/2 before thinning, so the
/// dedup pass cannot push the covering radius past `eps`.
pub fn epsilon_net(space: &Space, region: &Region, eps: f64) -> Result<SetApprox> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(IfsError::BadResolution(eps));
    }
    if region.is_empty() {
        return Err(IfsError::EmptyRegion);
    }
    if !region.compatible_with(space) {
        return Err(IfsError::UnsupportedRegion(format!(
            "{region} on {space}"
        )));
    }
    let pts = match region {
        Region::Interval { lo, hi } => {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(IfsError::UnsupportedRegion(
                    "cannot net an unbounded interval".into(),
                ));
            }
            if lo == hi {
                vec![Point::Line(*lo)]
            } else {
                let n = ((hi - lo) / eps - 1e-9).ceil().max(1.0) as usize;
                (0..=n)
                    .map(|k| Point::Line(lo + (hi - lo) * k as f64 / n as f64))
                    .collect()
            }
        }
        Region::Arc { from, to } => {
            let len = arc_length(*from, *to);
            let n = (len / eps - 1e-9).ceil().max(1.0) as usize;
            let full = len >= std::f64::consts::TAU;
            let last = if full { n - 1 } else { n };
            (0..=last)
                .map(|k| Point::angle(from + len * k as f64 / n as f64))
                .collect()
        }
        Region::Rect { min, max } => {
            let s = eps / std::f64::consts::SQRT_2;
            let nx = (((max[0] - min[0]) / s - 1e-9).ceil()).max(0.0) as usize;
            let ny = (((max[1] - min[1]) / s - 1e-9).ceil()).max(0.0) as usize;
            let mut pts = Vec::with_capacity((nx + 1) * (ny + 1));
            for i in 0..=nx {
                let x = if nx == 0 {
                    min[0]
                } else {
                    min[0] + (max[0] - min[0]) * i as f64 / nx as f64
                };
                for j in 0..=ny {
                    let y = if ny == 0 {
                        min[1]
                    } else {
                        min[1] + (max[1] - min[1]) * j as f64 / ny as f64
                    };
                    pts.push(Point::Plane(x, y));
                }
            }
            pts
        }
        Region::Disc { center, radius } => {
            let s = eps / (2.0 * std::f64::consts::SQRT_2);
            let mut pts = Vec::new();
            // Boundary ring first so near-boundary interior nodes defer to it.
            let steps = ((std::f64::consts::TAU * radius) / (eps / 2.0)).ceil().max(4.0) as usize;
            for k in 0..steps {
                let t = std::f64::consts::TAU * k as f64 / steps as f64;
                pts.push(Point::Plane(
                    center[0] + radius * t.cos(),
                    center[1] + radius * t.sin(),
                ));
            }
            let n = ((2.0 * radius) / s).ceil().max(1.0) as i64;
            for i in 0..=n {
                for j in 0..=n {
                    let x = center[0] - radius + 2.0 * radius * i as f64 / n as f64;
                    let y = center[1] - radius + 2.0 * radius * j as f64 / n as f64;
                    if (x - center[0]).hypot(y - center[1]) <= *radius {
                        pts.push(Point::Plane(x, y));
                    }
                }
            }
            pts
        }
        Region::Triangle { v } => {
            let s = eps / (2.0 * std::f64::consts::SQRT_2);
            let mut pts = Vec::new();
            for k in 0..3 {
                let a = v[k];
                let b = v[(k + 1) % 3];
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                let n = (len / (eps / 2.0)).ceil().max(1.0) as usize;
                for t in 0..=n {
                    let f = t as f64 / n as f64;
                    pts.push(Point::Plane(a[0] + (b[0] - a[0]) * f, a[1] + (b[1] - a[1]) * f));
                }
            }
            let minx = v.iter().map(|c| c[0]).fold(f64::INFINITY, f64::min);
            let maxx = v.iter().map(|c| c[0]).fold(f64::NEG_INFINITY, f64::max);
            let miny = v.iter().map(|c| c[1]).fold(f64::INFINITY, f64::min);
            let maxy = v.iter().map(|c| c[1]).fold(f64::NEG_INFINITY, f64::max);
            let nx = (((maxx - minx) / s).ceil()).max(1.0) as i64;
            let ny = (((maxy - miny) / s).ceil()).max(1.0) as i64;
            let tri = Region::Triangle { v: *v };
            for i in 0..=nx {
                for j in 0..=ny {
                    let p = Point::Plane(
                        minx + (maxx - minx) * i as f64 / nx as f64,
                        miny + (maxy - miny) * j as f64 / ny as f64,
                    );
                    if tri.contains(space, &p, 0.0) {
                        pts.push(p);
                    }
                }
            }
            pts
        }
        Region::Singleton { point } => vec![*point],
        Region::Points { points } => points.clone(),
    };
    SetApprox::new(space.clone(), pts, eps)
}

// ---------------------------------------------------------------------------
// Kuratowski limit estimation
// ---------------------------------------------------------------------------

/// Tail estimate of the lower and upper limits of an orbit. The lower limit
/// can be empty for non-convergent orbits (an estimation artifact: set-valued
/// consumers still reject empty clouds), and so can the upper limit when the
/// tail never revisits any location.
#[derive(Clone, Debug)]
pub struct LimitEstimate {
    space: Space,
    resolution: f64,
    li: Vec<Point>,
    ls: Vec<Point>,
    tail_window: usize,
}

impl LimitEstimate {
    pub fn li_points(&self) -> &[Point] {
        &self.li
    }

    pub fn ls_points(&self) -> &[Point] {
        &self.ls
    }

    pub fn tail_window(&self) -> usize {
        self.tail_window
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn li_set(&self) -> Option<SetApprox> {
        if self.li.is_empty() {
            None
        } else {
            Some(SetApprox::from_snapped(
                self.space.clone(),
                self.li.clone(),
                self.resolution,
            ))
        }
    }

    pub fn ls_set(&self) -> Option<SetApprox> {
        if self.ls.is_empty() {
            None
        } else {
            Some(SetApprox::from_snapped(
                self.space.clone(),
                self.ls.clone(),
                self.resolution,
            ))
        }
    }
}

/// Estimate Li/Ls from the final `tail_window` steps of an orbit: a location
/// belongs to the upper limit when it recurs (within `tol`) in at least two
/// tail sets, and to the lower limit when it appears in every tail set.
pub fn estimate_li_ls(
    orbit: &[SetApprox],
    tail_window: usize,
    tol: f64,
) -> Result<LimitEstimate> {
    if tail_window < 2 || tail_window > orbit.len() {
        return Err(IfsError::BadWindow {
            window: tail_window,
            len: orbit.len(),
        });
    }
    let tail = &orbit[orbit.len() - tail_window..];
    let space = tail[0].space().clone();
    for s in tail {
        space.expect_same(s.space())?;
    }
    let resolution = tail
        .iter()
        .map(SetApprox::resolution)
        .fold(0.0_f64, f64::max);

    let mut all: Vec<Point> = Vec::new();
    for s in tail {
        all.extend_from_slice(s.points());
    }
    let candidates = thin_points(&space, &all, resolution);
    let indexes: Vec<NnIndex> = tail.iter().map(NnIndex::build).collect();

    let mut li = Vec::new();
    let mut ls = Vec::new();
    for c in &candidates {
        let hits = indexes
            .iter()
            .filter(|ix| ix.distance_to(c) <= tol)
            .count();
        if hits >= 2 {
            ls.push(*c);
        }
        if hits == tail_window {
            li.push(*c);
        }
    }
    Ok(LimitEstimate {
        space,
        resolution,
        li,
        ls,
        tail_window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line_set(xs: &[f64], eps: f64) -> SetApprox {
        SetApprox::new(
            Space::real_line(),
            xs.iter().copied().map(Point::Line).collect(),
            eps,
        )
        .unwrap()
    }

    #[test]
    fn hausdorff_one_sided_sup() {
        let a = line_set(&[0.0], 1e-6);
        let b = line_set(&[0.0, 1.0], 1e-6);
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn hausdorff_identity_is_zero() {
        let a = line_set(&[0.3, -1.2, 5.0, 2.25], 1e-6);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_rejects_mismatched_spaces() {
        let a = line_set(&[0.0], 1e-6);
        let b = SetApprox::new(Space::circle(), vec![Point::angle(0.0)], 1e-6).unwrap();
        assert!(hausdorff_distance(&a, &b).is_err());
    }

    #[test]
    fn empty_set_rejected() {
        assert!(matches!(
            SetApprox::new(Space::real_line(), vec![], 1e-3),
            Err(IfsError::EmptySet)
        ));
    }

    #[test]
    fn snap_merges_near_duplicates() {
        let s = line_set(&[0.0, 1e-9, 1.0], 1e-3);
        assert_eq!(s.len(), 2);
        assert_eq!(s.points()[0], Point::Line(0.0));
        assert_eq!(s.points()[1], Point::Line(1.0));
    }

    #[test]
    fn snap_keeps_singletons() {
        for eps in [1e-6, 0.25, 10.0] {
            let s = line_set(&[0.42], eps);
            assert_eq!(s.points(), &[Point::Line(0.42)]);
        }
    }

    #[test]
    fn snap_is_idempotent_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<f64> = (0..5000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let eps = 1e-2;
        let s = line_set(&pts, eps);
        let again = grid_snap(&s, eps).unwrap();
        assert_eq!(s.points(), again.points());
        // Every input is within eps/2 of a kept point.
        for x in pts {
            assert!(s.min_distance_to(&Point::Line(x)) <= eps / 2.0 + 1e-15);
        }
        // Pairwise separation.
        for (i, p) in s.points().iter().enumerate() {
            for q in &s.points()[i + 1..] {
                assert!(s.space().distance(p, q) >= eps / 2.0);
            }
        }
    }

    #[test]
    fn snap_counts_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<f64> = (0..1_000_000).map(|_| rng.random_range(0.0..1.0)).collect();
        let eps = 1e-2;
        let s = line_set(&pts, eps);
        assert!(s.len() <= 201, "got {}", s.len());
        let net = epsilon_net(
            &Space::real_line(),
            &Region::Interval { lo: 0.0, hi: 1.0 },
            eps,
        )
        .unwrap();
        let d = hausdorff_distance(&s, &net).unwrap();
        assert!(d <= 5e-3 + 1e-12, "distance to the interval net was {d}");
    }

    #[test]
    fn snap_wraps_on_the_circle() {
        let sp = Space::circle();
        let s = SetApprox::new(
            sp,
            vec![
                Point::angle(1e-9),
                Point::angle(std::f64::consts::TAU - 1e-9),
                Point::angle(3.0),
            ],
            1e-3,
        )
        .unwrap();
        assert_eq!(s.len(), 2, "antipodal wrap pair must merge");
    }

    #[test]
    fn net_examples() {
        let sp = Space::real_line();
        let net = epsilon_net(&sp, &Region::Interval { lo: 0.0, hi: 1.0 }, 0.25).unwrap();
        let xs: Vec<f64> = net.points().iter().map(Point::coord_x).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);

        let arc = epsilon_net(
            &Space::circle(),
            &Region::Arc {
                from: 0.0,
                to: std::f64::consts::PI,
            },
            std::f64::consts::FRAC_PI_2,
        )
        .unwrap();
        assert_eq!(arc.len(), 3);
    }

    #[test]
    fn net_rejects_bad_input() {
        assert!(epsilon_net(
            &Space::real_line(),
            &Region::Interval { lo: 0.0, hi: 1.0 },
            0.0
        )
        .is_err());
        assert!(epsilon_net(&Space::real_line(), &Region::Points { points: vec![] }, 0.1).is_err());
    }

    #[test]
    fn disc_net_covers_by_monte_carlo() {
        let sp = Space::unit_disc();
        let eps = 0.5;
        let net = epsilon_net(
            &sp,
            &Region::Disc {
                center: [0.0, 0.0],
                radius: 1.0,
            },
            eps,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10_000 {
            let r = rng.random::<f64>().sqrt();
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let p = Point::Plane(r * t.cos(), r * t.sin());
            assert!(net.min_distance_to(&p) <= eps, "covering radius violated");
        }
    }

    #[test]
    fn exhaustive_and_indexed_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for sp in [Space::real_line(), Space::plane_region([0.0, 0.0], [1.0, 1.0])] {
            for _ in 0..5 {
                let n = 1500;
                let mk = |rng: &mut ChaCha8Rng| {
                    let pts: Vec<Point> = (0..n)
                        .map(|_| {
                            if sp.dim() == 1 {
                                Point::Line(rng.random_range(-2.0..2.0))
                            } else {
                                Point::Plane(rng.random::<f64>(), rng.random::<f64>())
                            }
                        })
                        .collect();
                    SetApprox::new(sp.clone(), pts, 1e-5).unwrap()
                };
                let a = mk(&mut rng);
                let b = mk(&mut rng);
                let brute = hausdorff_distance_exhaustive(&a, &b).unwrap();
                let fast = hausdorff_distance_indexed(&a, &b).unwrap();
                assert!(
                    (brute - fast).abs() <= 1e-12,
                    "paths disagree: {brute} vs {fast}"
                );
            }
        }
    }

    #[test]
    fn li_ls_constant_orbit() {
        let step = line_set(&[0.0, 1.0], 1e-6);
        let orbit = vec![step.clone(); 6];
        let est = estimate_li_ls(&orbit, 4, 1e-9).unwrap();
        assert_eq!(est.li_points().len(), 2);
        assert_eq!(est.ls_points().len(), 2);
    }

    #[test]
    fn li_ls_alternating_orbit() {
        let a = line_set(&[0.0], 1e-6);
        let b = line_set(&[1.0], 1e-6);
        let orbit: Vec<SetApprox> = (0..8)
            .map(|i| if i % 2 == 0 { a.clone() } else { b.clone() })
            .collect();
        let est = estimate_li_ls(&orbit, 6, 1e-9).unwrap();
        assert!(est.li_points().is_empty(), "Li of the alternating orbit");
        let mut ls: Vec<f64> = est.ls_points().iter().map(Point::coord_x).collect();
        ls.sort_by(f64::total_cmp);
        assert_eq!(ls, vec![0.0, 1.0]);
        assert!(est.li_set().is_none());
    }

    #[test]
    fn li_ls_tail_of_reciprocals() {
        let orbit: Vec<SetApprox> = (1..=100)
            .map(|n| line_set(&[1.0 / n as f64], 1e-4))
            .collect();
        let est = estimate_li_ls(&orbit, 20, 3e-3).unwrap();
        assert!(!est.li_points().is_empty());
        let zero = line_set(&[0.0], 1e-4);
        let ls = est.ls_set().unwrap();
        assert!(hausdorff_distance(&ls, &zero).unwrap() <= 0.013);
        let li = est.li_set().unwrap();
        assert!(hausdorff_distance(&li, &zero).unwrap() <= 0.013);
    }

    #[test]
    fn li_ls_window_validation() {
        let orbit = vec![line_set(&[0.0], 1e-6); 3];
        assert!(estimate_li_ls(&orbit, 9, 1e-9).is_err());
        assert!(estimate_li_ls(&orbit, 1, 1e-9).is_err());
    }

    #[test]
    fn hausdorff_cantor_construction_step() {
        // A construction step of the ternary Cantor set against a deep
        // endpoint reference: the farthest points are the midpoints of the
        // next gaps to be removed, half a gap width from the set. For the
        // 8-interval step those gaps have width 3^-4.
        let sp = Space::real_line();
        let eps = 1e-4;
        let mut intervals = vec![(0.0_f64, 1.0_f64)];
        for _ in 0..3 {
            let mut next = Vec::with_capacity(intervals.len() * 2);
            for (a, b) in intervals {
                let w = (b - a) / 3.0;
                next.push((a, a + w));
                next.push((b - w, b));
            }
            intervals = next;
        }
        assert_eq!(intervals.len(), 8);
        let mut pts = Vec::new();
        for (a, b) in &intervals {
            pts.extend_from_slice(
                epsilon_net(&sp, &Region::Interval { lo: *a, hi: *b }, eps)
                    .unwrap()
                    .points(),
            );
        }
        let step = SetApprox::new(sp.clone(), pts, eps).unwrap();

        // Endpoint reference at depth 12, plus a brute-force endpoint oracle
        // for the expected value.
        let mut deep = intervals.clone();
        for _ in 0..9 {
            let mut next = Vec::with_capacity(deep.len() * 2);
            for (a, b) in deep {
                let w = (b - a) / 3.0;
                next.push((a, a + w));
                next.push((b - w, b));
            }
            deep = next;
        }
        let mut ref_pts = Vec::new();
        for (a, b) in &deep {
            ref_pts.push(Point::Line(*a));
            ref_pts.push(Point::Line(*b));
        }
        let reference = SetApprox::new(sp, ref_pts, 3.0_f64.powi(-12)).unwrap();

        let oracle = step
            .points()
            .iter()
            .map(|p| reference.min_distance_to(p))
            .fold(0.0_f64, f64::max);
        let expected = 3.0_f64.powi(-4) / 2.0;
        assert!(
            (oracle - expected).abs() <= 2.0 * eps,
            "endpoint oracle gave {oracle}, expected ~{expected}"
        );

        let d = hausdorff_distance(&step, &reference).unwrap();
        assert!(
            (expected - 1e-3..=expected + 1e-3).contains(&d),
            "construction-step distance {d} outside the window around {expected}"
        );
    }
}
