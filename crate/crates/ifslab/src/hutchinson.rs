//! The Barnsley-Hutchinson operator on set approximations and orbit
//! iteration with resolution control.
//!
//! One operator application takes the union of all map images of the input
//! cloud and re-snaps it at the orbit resolution. Image order is fixed (map
//! index, then point index) and the snap keeps the first representative of
//! each cluster, so orbits are bit-reproducible at any thread count.

use crate::error::Result;
use crate::maps::IfsSystem;
use crate::sets::{directed_hausdorff, thin_points, NnIndex, SetApprox};
use crate::space::Point;
use rayon::prelude::*;

/// Default per-step point cap; systems with an added nonexpansive map grow
/// multiplicatively before dedup and the cap keeps runs predictable.
pub const DEFAULT_POINT_CAP: usize = 2_000_000;

/// One operator application at resolution `eps`.
pub fn apply_operator(system: &IfsSystem, s: &SetApprox, eps: f64) -> Result<SetApprox> {
    system.space().expect_same(s.space())?;
    let images: Vec<Point> = system
        .maps()
        .iter()
        .flat_map(|map| {
            s.points()
                .par_iter()
                .map(|p| map.eval(p))
                .collect::<Vec<Point>>()
        })
        .collect();
    let thinned = thin_points(system.space(), &images, eps);
    Ok(SetApprox::from_snapped(system.space().clone(), thinned, eps))
}

/// An orbit of the operator: `steps[0]` is the seed and
/// `steps[n+1] = snap(union of map images of steps[n], eps)`. When the
/// system has a target, per-step Hausdorff distances to it are recorded
/// (same length as `steps`).
#[derive(Clone, Debug)]
pub struct OrbitRecord {
    pub system: IfsSystem,
    pub steps: Vec<SetApprox>,
    pub distances_to_target: Option<Vec<f64>>,
    pub epsilon: f64,
    pub truncated: bool,
}

impl OrbitRecord {
    pub fn initial(&self) -> &SetApprox {
        &self.steps[0]
    }

    pub fn final_step(&self) -> &SetApprox {
        self.steps.last().expect("orbits hold at least the seed")
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn iterate_orbit(
    system: &IfsSystem,
    s0: &SetApprox,
    n: usize,
    eps: f64,
) -> Result<OrbitRecord> {
    iterate_orbit_capped(system, s0, n, eps, DEFAULT_POINT_CAP)
}

/// Orbit iteration with an explicit point cap. Exceeding the cap stops the
/// run early and flags the record as truncated rather than failing.
pub fn iterate_orbit_capped(
    system: &IfsSystem,
    s0: &SetApprox,
    n: usize,
    eps: f64,
    cap: usize,
) -> Result<OrbitRecord> {
    system.space().expect_same(s0.space())?;
    let mut steps = Vec::with_capacity(n + 1);
    steps.push(s0.clone());
    let mut truncated = false;
    for _ in 0..n {
        let next = apply_operator(system, steps.last().expect("nonempty"), eps)?;
        let overflow = next.len() > cap;
        steps.push(next);
        if overflow {
            truncated = true;
            break;
        }
    }
    let distances_to_target = match system.target() {
        Some(target) => {
            let idx = NnIndex::build(target);
            let ds = steps
                .iter()
                .map(|s| {
                    let to_target = directed_hausdorff(s, &idx);
                    let from_target = directed_hausdorff(target, &NnIndex::build(s));
                    to_target.max(from_target)
                })
                .collect();
            Some(ds)
        }
        None => None,
    };
    Ok(OrbitRecord {
        system: system.clone(),
        steps,
        distances_to_target,
        epsilon: eps,
        truncated,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct FixedSetReport {
    pub defect: f64,
    pub is_fixed: bool,
}

/// Hausdorff defect of a candidate fixed set of the operator; fixed means
/// the defect stays within twice the resolution.
pub fn fixed_set_check(system: &IfsSystem, a: &SetApprox, eps: f64) -> Result<FixedSetReport> {
    let image = apply_operator(system, a, eps)?;
    let defect = crate::sets::hausdorff_distance(&image, a)?;
    Ok(FixedSetReport {
        defect,
        is_fixed: defect <= 2.0 * eps,
    })
}
