//! Attractor classification: attracting-map verification, local-repellor
//! witnessing sequences, pointwise-basin tests, strict-attractor refutation
//! and the retraction-based IFS builder.
//!
//! A witnessing sequence is a backward orbit `phi(x_{n+1}) = x_n` converging
//! to a fixed point with `x_0` not fixed; its existence makes that fixed
//! point a local repellor and rules out strict attraction for any system
//! containing the map: the compact set `K = {repellor} ∪ {x_n : n >= n0}`
//! sits inside an arbitrarily small neighborhood of the candidate attractor,
//! yet every iterate of the operator on `K` still contains `x_0`.

use crate::error::{IfsError, Result};
use crate::hutchinson::{apply_operator, iterate_orbit};
use crate::maps::{preimage_on_branch, IfsSystem, MapHandle, MonotoneBranch};
use crate::sets::{directed_hausdorff, estimate_li_ls, NnIndex, SetApprox};
use crate::space::Point;

/// Default radius within which a witnessing sequence counts as having
/// reached its repellor.
pub const CONVERGENCE_RADIUS: f64 = 0.1;

/// Witness length used by [`alr_verify`].
const VERIFY_WITNESS_LEN: usize = 20;

/// Max candidate fixed points tried during the repellor search.
const MAX_REPELLOR_CANDIDATES: usize = 128;

/// A backward orbit certifying a local repellor.
#[derive(Clone, Debug)]
pub struct WitnessingSequence {
    pub map: MapHandle,
    /// `x_0 ... x_N` with `phi(x_{k+1}) = x_k` up to `tol`.
    pub points: Vec<Point>,
    pub repellor: Point,
    /// `d(phi(x_{k+1}), x_k)` for each step.
    pub residuals: Vec<f64>,
    pub tol: f64,
    /// Terminal point within the convergence radius of the repellor.
    pub converged: bool,
    /// Distances to the repellor decrease over the tail and end below the
    /// starting distance.
    pub monotone_tail: bool,
}

impl WitnessingSequence {
    pub fn len(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.points.len() <= 1
    }

    pub fn x0(&self) -> &Point {
        &self.points[0]
    }

    pub fn distances_to_repellor(&self) -> Vec<f64> {
        let space = self.map.space();
        self.points
            .iter()
            .map(|p| space.distance(p, &self.repellor))
            .collect()
    }

    fn from_chain(
        map: MapHandle,
        points: Vec<Point>,
        residuals: Vec<f64>,
        repellor: Point,
        tol: f64,
        radius: f64,
    ) -> WitnessingSequence {
        let space = map.space().clone();
        let n = points.len() - 1;
        let dist: Vec<f64> = points
            .iter()
            .map(|p| space.distance(p, &repellor))
            .collect();
        let converged = dist[n] <= radius;
        // Nonincreasing over the tail: backward orbits that land exactly on
        // the repellor (underflow) flatten out there.
        let tail = (n / 4).max(2).min(n);
        let monotone_tail = dist[n] < dist[0]
            && (n - tail..n).all(|k| dist[k + 1] <= dist[k]);
        WitnessingSequence {
            map,
            points,
            repellor,
            residuals,
            tol,
            converged,
            monotone_tail,
        }
    }
}

/// One backward step: the explicit inverse when the map carries one,
/// otherwise bisection on a monotone branch containing the repellor.
fn backward_step(
    phi: &MapHandle,
    y: &Point,
    branch: Option<&MonotoneBranch>,
    tol: f64,
) -> Result<Point> {
    if let Some(x) = phi.inverse_eval(y) {
        return Ok(x);
    }
    let branch = branch.ok_or(IfsError::NoBranches)?;
    preimage_on_branch(phi, y, branch, tol)
}

fn repellor_branch<'a>(phi: &'a MapHandle, repellor: &Point) -> Option<&'a MonotoneBranch> {
    phi.branches().iter().find(|b| {
        b.param_of(phi.space(), repellor)
            .map(|u| b.contains_param(u, 1e-9 + (b.hi - b.lo) * 1e-9))
            .unwrap_or(false)
    })
}

/// Build a witnessing sequence of the requested length toward a declared
/// repellor. `x_0` must be moved by the map; every backward step must leave
/// a residual of at most `tol`.
pub fn witnessing_sequence(
    phi: &MapHandle,
    x0: Point,
    repellor: Point,
    length: usize,
    tol: f64,
) -> Result<WitnessingSequence> {
    witnessing_sequence_with_radius(phi, x0, repellor, length, tol, CONVERGENCE_RADIUS)
}

pub fn witnessing_sequence_with_radius(
    phi: &MapHandle,
    x0: Point,
    repellor: Point,
    length: usize,
    tol: f64,
    radius: f64,
) -> Result<WitnessingSequence> {
    let space = phi.space();
    if space.distance(&phi.eval(&x0), &x0) <= tol {
        return Err(IfsError::FixedStart);
    }
    let branch = repellor_branch(phi, &repellor);
    if !phi.has_inverse() && branch.is_none() {
        return Err(IfsError::NoBranches);
    }
    let mut points = vec![x0];
    let mut residuals = Vec::with_capacity(length);
    for step in 0..length {
        let prev = points[points.len() - 1];
        let next = backward_step(phi, &prev, branch, tol).map_err(|e| {
            IfsError::WitnessStalled {
                step,
                source: Box::new(e),
            }
        })?;
        let residual = space.distance(&phi.eval(&next), &prev);
        if residual > tol {
            return Err(IfsError::WitnessStalled {
                step,
                source: Box::new(IfsError::Invalid(format!(
                    "residual {residual:.3e} exceeds tol {tol:.3e}"
                ))),
            });
        }
        residuals.push(residual);
        points.push(next);
    }
    Ok(WitnessingSequence::from_chain(
        phi.clone(),
        points,
        residuals,
        repellor,
        tol,
        radius,
    ))
}

/// Extend a witnessing sequence until it enters the given radius around the
/// repellor (capped), as needed to seed a refutation at a target resolution.
pub fn witnessing_sequence_until(
    phi: &MapHandle,
    x0: Point,
    repellor: Point,
    radius: f64,
    cap: usize,
    tol: f64,
) -> Result<WitnessingSequence> {
    let space = phi.space();
    if space.distance(&phi.eval(&x0), &x0) <= tol {
        return Err(IfsError::FixedStart);
    }
    let branch = repellor_branch(phi, &repellor);
    if !phi.has_inverse() && branch.is_none() {
        return Err(IfsError::NoBranches);
    }
    let mut points = vec![x0];
    let mut residuals = Vec::new();
    let mut inside = 0usize;
    for step in 0..cap {
        let prev = points[points.len() - 1];
        let next = backward_step(phi, &prev, branch, tol).map_err(|e| {
            IfsError::WitnessStalled {
                step,
                source: Box::new(e),
            }
        })?;
        let residual = space.distance(&phi.eval(&next), &prev);
        if residual > tol {
            return Err(IfsError::WitnessStalled {
                step,
                source: Box::new(IfsError::Invalid(format!(
                    "residual {residual:.3e} exceeds tol {tol:.3e}"
                ))),
            });
        }
        residuals.push(residual);
        points.push(next);
        if space.distance(&next, &repellor) < radius {
            inside += 1;
            // A few extra points inside the neighborhood give the
            // refutation window room.
            if inside >= 8 {
                break;
            }
        }
    }
    Ok(WitnessingSequence::from_chain(
        phi.clone(),
        points,
        residuals,
        repellor,
        tol,
        radius.max(CONVERGENCE_RADIUS),
    ))
}

// ---------------------------------------------------------------------------
// ALR verification
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AlrReport {
    /// Every sampled orbit went Cauchy before `n_max` and its limit is
    /// fixed within tol.
    pub attracting: bool,
    /// Sample indices whose orbits failed to settle.
    pub failed_samples: Vec<usize>,
    /// Fixed point certified as a local repellor, with its witness.
    pub repellor: Option<Point>,
    pub witness: Option<WitnessingSequence>,
}

impl AlrReport {
    /// Attracting map with a certified local repellor.
    pub fn is_alr(&self) -> bool {
        self.attracting && self.witness.is_some()
    }
}

/// Verify the attracting property on a sample cloud and search the declared
/// fixed points for a local repellor witnessed by a backward orbit of
/// length 20.
pub fn alr_verify(
    phi: &MapHandle,
    samples: &SetApprox,
    n_max: usize,
    tol: f64,
) -> Result<AlrReport> {
    phi.space().expect_same(samples.space())?;
    let space = phi.space();

    let mut failed = Vec::new();
    for (i, start) in samples.points().iter().enumerate() {
        let mut settled = false;
        let mut y = *start;
        for _ in 0..n_max {
            let next = phi.eval(&y);
            if space.distance(&next, &y) < tol {
                // Candidate limit; it must itself sit still.
                let again = phi.eval(&next);
                if space.distance(&again, &next) <= tol {
                    settled = true;
                }
                break;
            }
            y = next;
        }
        if !settled {
            failed.push(i);
        }
    }
    let attracting = failed.is_empty();

    if !phi.has_inverse() && phi.branches().is_empty() {
        return Err(IfsError::NoBranches);
    }

    let candidates: Vec<Point> = match phi.fixed_set() {
        Some(fs) => {
            let pts = fs.points();
            let stride = pts.len().div_ceil(MAX_REPELLOR_CANDIDATES).max(1);
            pts.iter().step_by(stride).copied().collect()
        }
        None => Vec::new(),
    };

    let movable = |p: &Point| space.distance(&phi.eval(p), p) > tol;

    let mut repellor = None;
    let mut witness = None;

    if phi.has_inverse() {
        if let Some(x0) = samples.points().iter().find(|p| movable(p)) {
            if let Ok(seq) = witnessing_sequence_probe(phi, *x0, &candidates, tol) {
                repellor = Some(seq.repellor);
                witness = Some(seq);
            }
        }
    }
    if witness.is_none() {
        'cands: for cand in &candidates {
            if let Some(branch) = repellor_branch(phi, cand) {
                for j in 1..8 {
                    let u = branch.lo + (branch.hi - branch.lo) * j as f64 / 8.0;
                    let x0 = branch.point_at(space, u);
                    if !movable(&x0) {
                        continue;
                    }
                    if let Ok(seq) =
                        witnessing_sequence(phi, x0, *cand, VERIFY_WITNESS_LEN, tol)
                    {
                        if seq.converged && seq.monotone_tail {
                            repellor = Some(*cand);
                            witness = Some(seq);
                            break 'cands;
                        }
                    }
                }
            }
        }
    }

    Ok(AlrReport {
        attracting,
        failed_samples: failed,
        repellor,
        witness,
    })
}

/// Inverse-route probe: run the backward orbit and identify the repellor as
/// the nearest declared fixed point of the terminal (or the terminal itself
/// when nothing is declared).
fn witnessing_sequence_probe(
    phi: &MapHandle,
    x0: Point,
    candidates: &[Point],
    tol: f64,
) -> Result<WitnessingSequence> {
    let space = phi.space();
    let mut points = vec![x0];
    let mut residuals = Vec::with_capacity(VERIFY_WITNESS_LEN);
    for step in 0..VERIFY_WITNESS_LEN {
        let prev = points[points.len() - 1];
        let next = phi.inverse_eval(&prev).ok_or(IfsError::NoBranches)?;
        let residual = space.distance(&phi.eval(&next), &prev);
        if residual > tol {
            return Err(IfsError::WitnessStalled {
                step,
                source: Box::new(IfsError::Invalid(format!(
                    "residual {residual:.3e} exceeds tol {tol:.3e}"
                ))),
            });
        }
        residuals.push(residual);
        points.push(next);
    }
    let terminal = points[points.len() - 1];
    let repellor = candidates
        .iter()
        .copied()
        .min_by(|a, b| {
            space
                .distance(a, &terminal)
                .total_cmp(&space.distance(b, &terminal))
        })
        .unwrap_or(terminal);
    let seq = WitnessingSequence::from_chain(
        phi.clone(),
        points,
        residuals,
        repellor,
        tol,
        CONVERGENCE_RADIUS,
    );
    if seq.converged && seq.monotone_tail {
        Ok(seq)
    } else {
        Err(IfsError::Invalid(
            "backward orbit did not settle near a fixed point".into(),
        ))
    }
}

// ---------------------------------------------------------------------------
// Strict-attractor refutation
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct RefuteRow {
    pub n: usize,
    /// Distance from `x_0` to its nearest point in the n-th iterate of `K`.
    pub margin: f64,
    /// Hausdorff distance from the n-th iterate of `K` to the target.
    pub distance: f64,
}

#[derive(Clone, Debug)]
pub struct RefuteReport {
    pub refuted: bool,
    /// Inclusive iteration window `[n0, n_end]` over which the floor held.
    pub window: (usize, usize),
    /// Window end was capped by the witness tail resolution at `eps`.
    pub clamped: bool,
    pub x0_to_target: f64,
    /// `min_n` of the per-step Hausdorff distances over the window.
    pub min_distance: f64,
    pub rows: Vec<RefuteRow>,
}

/// Numerical form of the local-repellor obstruction. Builds
/// `K = {repellor} ∪ {x_n : n >= n0}` from the witness tail (which lies in
/// the `10*eps`-neighborhood of the target), iterates the system on `K`, and
/// checks that the Hausdorff distance to the target never drops below
/// `d(x_0, target) - 3*eps` across the window: `x_0 = phi^n(x_n)` keeps
/// resurfacing, so the orbit cannot converge to the target.
///
/// The window end is capped where consecutive witness points come closer
/// than `eps`: beyond that depth the tail is not representable at the run
/// resolution and the persistence argument loses its footing.
pub fn strict_refute(
    system: &IfsSystem,
    target: &SetApprox,
    witness: &WitnessingSequence,
    tail_start: Option<usize>,
    n_max: usize,
    eps: f64,
) -> Result<RefuteReport> {
    let space = system.space().clone();
    space.expect_same(target.space())?;
    space.expect_same(witness.map.space())?;
    if eps <= 0.0 || !eps.is_finite() {
        return Err(IfsError::BadResolution(eps));
    }

    // The witness map must agree with one of the system's maps where it
    // matters: on the witness points themselves.
    let mut probe = witness.points.clone();
    probe.push(witness.repellor);
    let mut best_dev = f64::INFINITY;
    let mut matched = false;
    for m in system.maps() {
        let dev = probe
            .iter()
            .map(|p| space.distance(&m.eval(p), &witness.map.eval(p)))
            .fold(0.0_f64, f64::max);
        best_dev = best_dev.min(dev);
        if dev <= 1e-9 {
            matched = true;
            break;
        }
    }
    if !matched {
        return Err(IfsError::WitnessMapUnknown(best_dev));
    }

    let target_index = NnIndex::build(target);
    if target_index.distance_to(&witness.repellor) > eps + 1e-12 {
        return Err(IfsError::Invalid(
            "witness repellor is not on the target set".into(),
        ));
    }
    let x0 = *witness.x0();
    let d0 = target_index.distance_to(&x0);
    if d0 <= 3.0 * eps {
        return Err(IfsError::Invalid(format!(
            "x0 must start farther than 3*eps from the target (d = {d0:.3e})"
        )));
    }

    let dist = witness.distances_to_repellor();
    let neighborhood = 10.0 * eps;
    let last = witness.points.len() - 1;
    let n0 = match tail_start {
        Some(n0) => n0,
        None => match dist.iter().position(|d| *d < neighborhood) {
            Some(n) => n.max(1),
            None => return Err(IfsError::TailOutside(last)),
        },
    };
    if n0 > last {
        return Err(IfsError::WitnessTooShort);
    }
    if let Some(bad) = (n0..=last).find(|&n| dist[n] >= neighborhood) {
        return Err(IfsError::TailOutside(bad));
    }
    if n_max < n0 {
        return Err(IfsError::Invalid(format!(
            "n_max = {n_max} is below the tail start {n0}"
        )));
    }

    // Resolution cap: follow the tail only while consecutive points stay
    // at least eps apart.
    let mut resolvable_end = n0;
    while resolvable_end < last
        && space.distance(
            &witness.points[resolvable_end],
            &witness.points[resolvable_end + 1],
        ) >= eps
    {
        resolvable_end += 1;
    }
    let n_end = n_max.min(resolvable_end);
    let clamped = n_end < n_max;

    let mut k_pts = vec![witness.repellor];
    k_pts.extend_from_slice(&witness.points[n0..]);
    let k = SetApprox::new(space.clone(), k_pts, eps)?;

    let mut rows = Vec::new();
    let mut cur = k;
    for n in 1..=n_end {
        cur = apply_operator(system, &cur, eps)?;
        if n >= n0 {
            let cur_index = NnIndex::build(&cur);
            let d_n = directed_hausdorff(&cur, &target_index)
                .max(directed_hausdorff(target, &cur_index));
            let margin = cur_index.distance_to(&x0);
            rows.push(RefuteRow {
                n,
                margin,
                distance: d_n,
            });
        }
    }

    let floor = d0 - 3.0 * eps;
    let min_distance = rows
        .iter()
        .map(|r| r.distance)
        .fold(f64::INFINITY, f64::min);
    let refuted = !rows.is_empty() && rows.iter().all(|r| r.distance >= floor);
    Ok(RefuteReport {
        refuted,
        window: (n0, n_end),
        clamped,
        x0_to_target: d0,
        min_distance,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Pointwise basin test
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Diverged,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Converged => write!(f, "converged"),
            Verdict::Diverged => write!(f, "diverged"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PointwiseReport {
    pub verdict: Verdict,
    /// First step of the 5-step window that stayed below tol.
    pub first_hit: Option<usize>,
    pub distances: Vec<f64>,
    pub running_min: f64,
}

/// Number of consecutive below-tol steps required for a converged verdict.
pub const PERSISTENCE_WINDOW: usize = 5;

/// Iterate the operator on the singleton `{x}` and classify convergence to
/// the candidate attractor.
///
/// Converged: the distance drops below `tol` and stays there for 5
/// consecutive steps. Diverged: it never settles, the orbit tail (upper
/// limit estimate) is empty or contains a point farther than `3*eps` from
/// the target, and the distance either never came close (min > 10*tol) or
/// rebounded past twice its running minimum. Anything else is inconclusive;
/// verdicts are never coerced.
pub fn pointwise_test(
    system: &IfsSystem,
    x: Point,
    target: &SetApprox,
    n_max: usize,
    tol: f64,
    eps: f64,
) -> Result<PointwiseReport> {
    let sys = IfsSystem::new(system.maps().to_vec())?.with_target(target.clone())?;
    let seed = SetApprox::singleton(system.space().clone(), x, eps)?;
    let orbit = iterate_orbit(&sys, &seed, n_max, eps)?;
    let distances = orbit
        .distances_to_target
        .clone()
        .expect("target was attached above");

    let n = distances.len();
    let mut first_hit = None;
    if n > PERSISTENCE_WINDOW {
        for k in 1..=n - PERSISTENCE_WINDOW {
            if distances[k..k + PERSISTENCE_WINDOW].iter().all(|d| *d < tol) {
                first_hit = Some(k);
                break;
            }
        }
    }
    let running_min = distances[1..].iter().copied().fold(f64::INFINITY, f64::min);

    if let Some(k) = first_hit {
        return Ok(PointwiseReport {
            verdict: Verdict::Converged,
            first_hit: Some(k),
            distances,
            running_min,
        });
    }

    let mut verdict = Verdict::Inconclusive;
    if n >= 4 {
        let window = (n / 2).clamp(2, 8);
        let est = estimate_li_ls(&orbit.steps, window, tol.max(2.0 * eps))?;
        let target_index = NnIndex::build(target);
        let tail_far = est.ls_points().is_empty()
            || est
                .ls_points()
                .iter()
                .any(|p| target_index.distance_to(p) > 3.0 * eps);
        let never_close = running_min > 10.0 * tol;
        let rebounded = distances[n - 1] > 2.0 * running_min;
        if tail_far && (never_close || rebounded) {
            verdict = Verdict::Diverged;
        }
    }
    Ok(PointwiseReport {
        verdict,
        first_hit: None,
        distances,
        running_min,
    })
}

// ---------------------------------------------------------------------------
// Squeeze check
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct SqueezeReport {
    pub ok: bool,
    /// First violated inclusion: step, offending point, and which side
    /// (`false` = lower `W^n(x) ⊆ F^n(x)`, `true` = upper
    /// `F^n(x) ⊆ Fix(phi) ∪ {phi^n(x)}`).
    pub violation: Option<(usize, Point, bool)>,
}

/// Verify the attracting-map sandwich along an orbit: with
/// `W(X) ⊆ Fix(phi)` (spot-checked on 10^3 samples), every step must
/// satisfy `W^n(x) ⊆ F^n(x) ⊆ Fix(phi) ∪ {phi^n(x)}` within eps, where
/// `F = W ∪ {phi}`.
pub fn squeeze_check(
    w_system: &IfsSystem,
    phi: &MapHandle,
    x: Point,
    n_max: usize,
    eps: f64,
) -> Result<SqueezeReport> {
    let space = w_system.space().clone();
    space.expect_same(phi.space())?;
    let fix = phi.fixed_set().ok_or_else(|| {
        IfsError::Invalid("squeeze check needs the map's declared fixed set".into())
    })?;

    for (i, s) in space.sample(1_000, 0xb0a).iter().enumerate() {
        for w in w_system.maps() {
            let y = w.eval(s);
            let moved = space.distance(&phi.eval(&y), &y);
            if moved > eps {
                return Err(IfsError::Invalid(format!(
                    "W(X) ⊆ Fix(phi) fails at sample #{i} ({s}): `{}` sends it {moved:.3e} off Fix",
                    w.label()
                )));
            }
        }
    }

    let mut f_maps = w_system.maps().to_vec();
    f_maps.push(phi.clone());
    let f_system = IfsSystem::new(f_maps)?;

    let seed = SetApprox::singleton(space.clone(), x, eps)?;
    let w_orbit = iterate_orbit(w_system, &seed, n_max, eps)?;
    let f_orbit = iterate_orbit(&f_system, &seed, n_max, eps)?;
    let fix_index = NnIndex::build(fix);

    let mut phi_pt = x;
    for n in 0..=n_max.min(w_orbit.len() - 1).min(f_orbit.len() - 1) {
        let f_index = NnIndex::build(&f_orbit.steps[n]);
        for p in w_orbit.steps[n].points() {
            if f_index.distance_to(p) > eps {
                return Ok(SqueezeReport {
                    ok: false,
                    violation: Some((n, *p, false)),
                });
            }
        }
        for q in f_orbit.steps[n].points() {
            let near_fix = fix_index.distance_to(q) <= eps;
            let near_phi_orbit = space.distance(q, &phi_pt) <= eps;
            if !near_fix && !near_phi_orbit {
                return Ok(SqueezeReport {
                    ok: false,
                    violation: Some((n, *q, true)),
                });
            }
        }
        phi_pt = phi.eval(&phi_pt);
    }
    Ok(SqueezeReport {
        ok: true,
        violation: None,
    })
}

// ---------------------------------------------------------------------------
// Retraction-based IFS builder
// ---------------------------------------------------------------------------

/// One piece of a retraction-built system: a target net `A_k`, a retraction
/// of the whole space onto it (or its carrier region), and a system `W_k`
/// whose maps keep `A_k` inside itself.
#[derive(Clone, Debug)]
pub struct RetractPart {
    pub target: SetApprox,
    pub retraction: MapHandle,
    pub maps: IfsSystem,
}

/// Assemble `F = { w ∘ r_k : w ∈ W_k }` over all parts. The returned system
/// sends the whole space into the union of the part targets in one step and
/// carries that union as its target.
pub fn build_retract_ifs(parts: &[RetractPart]) -> Result<IfsSystem> {
    let first = parts.first().ok_or(IfsError::EmptySet)?;
    let space = first.target.space().clone();

    let mut union_pts = Vec::new();
    let mut union_res: f64 = 0.0;
    for part in parts {
        space.expect_same(part.target.space())?;
        space.expect_same(part.retraction.space())?;
        space.expect_same(part.maps.space())?;
        union_pts.extend_from_slice(part.target.points());
        union_res = union_res.max(part.target.resolution());
    }
    let union_target = SetApprox::new(space.clone(), union_pts, union_res)?;

    for (k, part) in parts.iter().enumerate() {
        for (i, s) in space.sample(200, 0x5e7 + k as u64).iter().enumerate() {
            let once = part.retraction.eval(s);
            let twice = part.retraction.eval(&once);
            let drift = space.distance(&once, &twice);
            if drift > 1e-12 {
                return Err(IfsError::Invalid(format!(
                    "retraction `{}` is not idempotent at sample #{i} (drift {drift:.3e})",
                    part.retraction.label()
                )));
            }
        }
        let tol = 2.0 * part.target.resolution();
        for p in part.target.points() {
            for w in part.maps.maps() {
                let q = w.eval(p);
                if part.target.min_distance_to(&q) > tol {
                    return Err(IfsError::Invalid(format!(
                        "map `{}` of part {k} sends {p} out of its target net",
                        w.label()
                    )));
                }
            }
        }
    }

    let mut composed = Vec::new();
    for part in parts {
        for w in part.maps.maps() {
            composed.push(crate::maps::compose(w, &part.retraction)?);
        }
    }
    let system = IfsSystem::new(composed)?;

    let tol = 2.0 * union_target.resolution();
    for (i, s) in space.sample(1_000, 0xa11).iter().enumerate() {
        for f in system.maps() {
            let q = f.eval(s);
            if union_target.min_distance_to(&q) > tol {
                return Err(IfsError::Invalid(format!(
                    "composed map `{}` escapes the union target at sample #{i}",
                    f.label()
                )));
            }
        }
    }
    system.with_target(union_target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{
        affine, constant, identity, make_interval_alr, make_kwietniak_map, make_retraction,
        AlrVariant,
    };
    use crate::region::Region;
    use crate::sets::epsilon_net;
    use crate::space::Space;

    fn unit_samples(n: usize) -> SetApprox {
        epsilon_net(
            &Space::real_line(),
            &Region::Interval { lo: 0.0, hi: 1.0 },
            1.0 / n as f64,
        )
        .unwrap()
    }

    #[test]
    fn witness_square_map_closed_form() {
        let phi = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let seq =
            witnessing_sequence(&phi, Point::Line(0.5), Point::Line(1.0), 12, 1e-10).unwrap();
        // x_n = 0.5^(2^-n)
        for (n, p) in seq.points.iter().enumerate() {
            let expect = 0.5_f64.powf(2.0_f64.powi(-(n as i32)));
            assert!((p.coord_x() - expect).abs() < 1e-9, "n = {n}");
        }
        assert!((seq.points[12].coord_x() - 0.99983).abs() < 5e-5);
        assert!(seq.monotone_tail);
        assert!(seq.residuals.iter().all(|r| *r <= 1e-10));
    }

    #[test]
    fn witness_sqrt_map_squares_down() {
        let phi = make_interval_alr(0.0, 1.0, AlrVariant::Sqrt).unwrap();
        let seq =
            witnessing_sequence(&phi, Point::Line(0.5), Point::Line(0.0), 8, 1e-10).unwrap();
        for (n, p) in seq.points.iter().enumerate() {
            let expect = 0.5_f64.powf(2.0_f64.powi(n as i32));
            assert!((p.coord_x() - expect).abs() < 1e-12, "n = {n}");
        }
        assert!(seq.converged);
    }

    #[test]
    fn witness_rejects_fixed_start() {
        let phi = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let err = witnessing_sequence(&phi, Point::Line(0.0), Point::Line(1.0), 5, 1e-10);
        assert!(matches!(err, Err(IfsError::FixedStart)));
    }

    #[test]
    fn alr_verify_square_and_identity() {
        let phi = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let report = alr_verify(&phi, &unit_samples(100), 4000, 1e-9).unwrap();
        assert!(report.attracting);
        let rep = report.repellor.expect("repellor at 1");
        assert!((rep.coord_x() - 1.0).abs() < 1e-9);
        assert!(report.is_alr());

        let idf = identity(Space::real_line());
        let report = alr_verify(&idf, &unit_samples(50), 100, 1e-9).unwrap();
        assert!(report.attracting, "identity is trivially attracting");
        assert!(report.repellor.is_none(), "no movable x0 exists");
        assert!(!report.is_alr());
    }

    #[test]
    fn alr_verify_kwietniak() {
        let phi = make_kwietniak_map().unwrap();
        let sp = phi.space().clone();
        let pts: Vec<Point> = (-5..5).map(|k| Point::Line(k as f64)).collect();
        let samples = SetApprox::new(sp, pts, 1e-6).unwrap();
        // In the chart metric x + 1 settles near infinity within ~2/tol
        // steps of the tolerance floor.
        let report = alr_verify(&phi, &samples, 4000, 1e-3).unwrap();
        assert!(report.attracting);
        assert!(report.repellor.unwrap().is_infinity());
    }

    #[test]
    fn alr_verify_needs_introspection() {
        let sp = Space::real_line();
        let bare = crate::maps::MapHandle::from_fn(sp, "opaque", |p| *p);
        let err = alr_verify(&bare, &unit_samples(10), 10, 1e-9);
        assert!(matches!(err, Err(IfsError::NoBranches)));
    }

    #[test]
    fn strict_refute_canonical_interval() {
        let eps = 1e-4;
        let sp = Space::real_line();
        let phi = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let f = IfsSystem::new(vec![
            phi.clone(),
            constant(sp.clone(), Point::Line(0.0)).unwrap(),
            constant(sp.clone(), Point::Line(1.0)).unwrap(),
        ])
        .unwrap();
        let target = SetApprox::new(
            sp,
            vec![Point::Line(0.0), Point::Line(1.0)],
            eps,
        )
        .unwrap();
        let witness = witnessing_sequence_until(
            &phi,
            Point::Line(0.5),
            Point::Line(1.0),
            10.0 * eps,
            200,
            1e-10,
        )
        .unwrap();
        let report = strict_refute(&f, &target, &witness, None, 40, eps).unwrap();
        assert!(report.refuted);
        assert!((report.x0_to_target - 0.5).abs() < 1e-12);
        assert!(report.min_distance >= 0.5 - 3.0 * eps);
        // x0 itself keeps resurfacing across the window.
        for row in &report.rows {
            assert!(row.margin <= eps, "margin {} at n={}", row.margin, row.n);
        }
    }

    #[test]
    fn strict_refute_kwietniak() {
        let eps = 1e-3;
        let phi = make_kwietniak_map().unwrap();
        let f = IfsSystem::new(vec![phi.clone()]).unwrap();
        let target =
            SetApprox::singleton(Space::compactified_line(), Point::Infinity, eps).unwrap();
        let witness = witnessing_sequence_until(
            &phi,
            Point::Line(-5.0),
            Point::Infinity,
            10.0 * eps,
            10_000,
            1e-9,
        )
        .unwrap();
        let report = strict_refute(&f, &target, &witness, None, 100_000, eps).unwrap();
        assert!(report.refuted);
        let expect = phi
            .space()
            .distance(&Point::Line(-5.0), &Point::Infinity);
        assert!((report.x0_to_target - expect).abs() < 1e-12);
        assert!(report.min_distance >= expect - 3.0 * eps);
        assert!(report.clamped, "deep tail outruns the chart resolution");
    }

    #[test]
    fn strict_refute_short_witness_errors() {
        let eps = 1e-4;
        let phi = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let f = IfsSystem::new(vec![phi.clone()]).unwrap();
        let target = SetApprox::new(
            Space::real_line(),
            vec![Point::Line(0.0), Point::Line(1.0)],
            eps,
        )
        .unwrap();
        let witness =
            witnessing_sequence(&phi, Point::Line(0.5), Point::Line(1.0), 5, 1e-10).unwrap();
        let err = strict_refute(&f, &target, &witness, Some(30), 40, eps);
        assert!(matches!(err, Err(IfsError::WitnessTooShort)));
    }

    #[test]
    fn pointwise_contraction_converges() {
        let sp = Space::real_line();
        let f = IfsSystem::new(vec![affine(sp.clone(), 0.5, 0.0).unwrap()]).unwrap();
        let target = SetApprox::singleton(sp, Point::Line(0.0), 1e-9).unwrap();
        let report =
            pointwise_test(&f, Point::Line(1.0), &target, 60, 1e-4, 1e-9).unwrap();
        assert_eq!(report.verdict, Verdict::Converged);
    }

    #[test]
    fn pointwise_escape_diverges() {
        let sp = Space::real_line();
        let f = IfsSystem::new(vec![affine(sp.clone(), 1.0, 1.0).unwrap()]).unwrap();
        let target = SetApprox::singleton(sp, Point::Line(0.0), 1e-9).unwrap();
        let report =
            pointwise_test(&f, Point::Line(0.0), &target, 60, 1e-4, 1e-9).unwrap();
        assert_eq!(report.verdict, Verdict::Diverged);
    }

    #[test]
    fn squeeze_canonical_and_violation() {
        let sp = Space::real_line();
        let phi = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
        let r = make_retraction(
            sp.clone(),
            Region::Points {
                points: vec![Point::Line(0.0), Point::Line(1.0)],
            },
        )
        .unwrap();
        let w = IfsSystem::new(vec![r]).unwrap();
        let report = squeeze_check(&w, &phi, Point::Line(0.5), 25, 1e-6).unwrap();
        assert!(report.ok, "violation: {:?}", report.violation);

        // Identity phi: the right inclusion holds trivially when Fix is the
        // sampled space; model with Fix = [0,1] net and W mapping into it.
        let idn = identity(sp.clone())
            .with_fixed_set(unit_samples(100))
            .unwrap();
        let clamp =
            make_retraction(sp.clone(), Region::Interval { lo: 0.0, hi: 1.0 }).unwrap();
        let w = IfsSystem::new(vec![clamp]).unwrap();
        let report = squeeze_check(&w, &idn, Point::Line(0.25), 10, 2e-2).unwrap();
        assert!(report.ok);

        // W(X) not inside Fix(phi): precondition must fail loudly.
        let w_bad = IfsSystem::new(vec![affine(sp, 0.5, 0.0).unwrap()]).unwrap();
        let err = squeeze_check(&w_bad, &phi, Point::Line(0.5), 10, 1e-6);
        assert!(err.is_err());
    }

    #[test]
    fn retract_ifs_singleton_and_pair() {
        let sp = Space::real_line();
        let zero = SetApprox::singleton(sp.clone(), Point::Line(0.0), 1e-9).unwrap();
        let r0 = make_retraction(
            sp.clone(),
            Region::Singleton {
                point: Point::Line(0.0),
            },
        )
        .unwrap();
        let w0 = IfsSystem::new(vec![identity(sp.clone())]).unwrap();
        let f = build_retract_ifs(&[RetractPart {
            target: zero.clone(),
            retraction: r0.clone(),
            maps: w0.clone(),
        }])
        .unwrap();
        assert_eq!(f.maps().len(), 1);
        assert_eq!(f.maps()[0].eval(&Point::Line(7.0)), Point::Line(0.0));

        let one = SetApprox::singleton(sp.clone(), Point::Line(1.0), 1e-9).unwrap();
        let r1 = make_retraction(
            sp.clone(),
            Region::Singleton {
                point: Point::Line(1.0),
            },
        )
        .unwrap();
        let f2 = build_retract_ifs(&[
            RetractPart {
                target: zero,
                retraction: r0,
                maps: w0.clone(),
            },
            RetractPart {
                target: one,
                retraction: r1,
                maps: w0,
            },
        ])
        .unwrap();
        let seed = SetApprox::singleton(sp, Point::Line(0.3), 1e-9).unwrap();
        let step = apply_operator(&f2, &seed, 1e-9).unwrap();
        let mut xs: Vec<f64> = step.points().iter().map(Point::coord_x).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![0.0, 1.0]);
    }
}
