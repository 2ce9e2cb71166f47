//! Property-level invariants across modules: metric axioms on random
//! clouds, limit-estimator algebra, conjugation stability of the ALR
//! property, contraction systems, and the composite
//! pointwise-but-not-strict pipeline on the interval.

use ifslab::analysis::{
    alr_verify, build_retract_ifs, pointwise_test, squeeze_check, strict_refute,
    witnessing_sequence, witnessing_sequence_until, RetractPart, Verdict,
};
use ifslab::hutchinson::iterate_orbit;
use ifslab::maps::{
    affine_plane, constant, identity, make_interval_alr, make_retraction, AlrVariant,
    IfsSystem,
};
use ifslab::region::Region;
use ifslab::sets::{
    epsilon_net, estimate_li_ls, grid_snap, hausdorff_distance, SetApprox,
};
use ifslab::space::{Point, Space};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_line_set(rng: &mut ChaCha8Rng, max_len: usize, eps: f64) -> SetApprox {
    let n = rng.random_range(1..=max_len);
    let pts: Vec<Point> = (0..n)
        .map(|_| Point::Line(rng.random_range(-3.0..3.0)))
        .collect();
    SetApprox::new(Space::real_line(), pts, eps).unwrap()
}

#[test]
fn hausdorff_triangle_inequality_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xabc);
    for _ in 0..1000 {
        let a = random_line_set(&mut rng, 24, 1e-9);
        let b = random_line_set(&mut rng, 24, 1e-9);
        let c = random_line_set(&mut rng, 24, 1e-9);
        let ab = hausdorff_distance(&a, &b).unwrap();
        let bc = hausdorff_distance(&b, &c).unwrap();
        let ac = hausdorff_distance(&a, &c).unwrap();
        assert!(ac <= ab + bc + 1e-12, "triangle violated: {ac} > {ab} + {bc}");
    }
}

#[test]
fn limit_estimates_squeeze_between_nested_orbits() {
    // A_n ⊆ B_n ⊆ C_n with lim A = lim C = {0}: the middle estimate must
    // agree within twice the tolerance.
    let sp = Space::real_line();
    let tol = 5e-3;
    let mk = |pts: Vec<f64>| {
        SetApprox::new(sp.clone(), pts.into_iter().map(Point::Line).collect(), 1e-6).unwrap()
    };
    let mut a_orbit = Vec::new();
    let mut b_orbit = Vec::new();
    let mut c_orbit = Vec::new();
    for n in 60..100usize {
        let x = 1.0 / n as f64;
        let y = x + 0.3 / (n * n) as f64;
        let z = x + 0.7 / (n * n) as f64;
        a_orbit.push(mk(vec![x]));
        b_orbit.push(mk(vec![x, y]));
        c_orbit.push(mk(vec![x, y, z]));
    }
    let ea = estimate_li_ls(&a_orbit, 20, tol).unwrap();
    let eb = estimate_li_ls(&b_orbit, 20, tol).unwrap();
    let ec = estimate_li_ls(&c_orbit, 20, tol).unwrap();
    let d_ac = hausdorff_distance(&ea.ls_set().unwrap(), &ec.ls_set().unwrap()).unwrap();
    assert!(d_ac <= tol, "outer orbits must agree, got {d_ac}");
    let d_ab = hausdorff_distance(&ea.ls_set().unwrap(), &eb.ls_set().unwrap()).unwrap();
    assert!(d_ab <= 2.0 * tol, "middle estimate drifted by {d_ab}");
}

#[test]
fn limit_estimates_respect_unions() {
    let sp = Space::real_line();
    let tol = 5e-3;
    let eps = 1e-4;
    let mk = |pts: Vec<f64>| {
        SetApprox::new(sp.clone(), pts.into_iter().map(Point::Line).collect(), eps).unwrap()
    };
    let a_orbit: Vec<SetApprox> = (60..100).map(|n| mk(vec![1.0 / n as f64])).collect();
    let b_orbit: Vec<SetApprox> = (60..100).map(|_| mk(vec![2.0])).collect();
    let u_orbit: Vec<SetApprox> = (60..100)
        .map(|n| mk(vec![1.0 / n as f64, 2.0]))
        .collect();
    let ea = estimate_li_ls(&a_orbit, 20, tol).unwrap();
    let eb = estimate_li_ls(&b_orbit, 20, tol).unwrap();
    let eu = estimate_li_ls(&u_orbit, 20, tol).unwrap();
    let union = ea
        .ls_set()
        .unwrap()
        .union(&eb.ls_set().unwrap())
        .unwrap();
    let d = hausdorff_distance(&eu.ls_set().unwrap(), &union).unwrap();
    assert!(d <= eps, "union rule violated by {d}");
}

#[test]
fn conjugation_preserves_the_alr_property() {
    let base = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
    let samples = epsilon_net(
        &Space::real_line(),
        &Region::Interval { lo: 0.0, hi: 1.0 },
        1e-2,
    )
    .unwrap();
    let report = alr_verify(&base, &samples, 10_000, 1e-9).unwrap();
    assert!(report.is_alr());

    // Three sample homeomorphisms of the line.
    type Homeo = Box<dyn Fn(&Point) -> Point + Send + Sync>;
    let homeos: Vec<(Homeo, Homeo)> = vec![
        (
            Box::new(|p: &Point| Point::Line(2.0 * p.coord_x())),
            Box::new(|p: &Point| Point::Line(p.coord_x() / 2.0)),
        ),
        (
            Box::new(|p: &Point| Point::Line(p.coord_x() + 1.0)),
            Box::new(|p: &Point| Point::Line(p.coord_x() - 1.0)),
        ),
        (
            Box::new(|p: &Point| Point::Line(p.coord_x().powi(3))),
            Box::new(|p: &Point| Point::Line(p.coord_x().cbrt())),
        ),
    ];
    for (k, (h, h_inv)) in homeos.into_iter().enumerate() {
        let conj =
            ifslab::maps::conjugate_map(&base, h, h_inv, Space::real_line()).unwrap();
        let fs = conj.fixed_set().expect("fixed set carried through h");
        let pts: Vec<Point> = fs.points().to_vec();
        let lo = pts
            .iter()
            .map(|p| p.coord_x())
            .fold(f64::INFINITY, f64::min);
        let hi = pts
            .iter()
            .map(|p| p.coord_x())
            .fold(f64::NEG_INFINITY, f64::max);
        let samples = epsilon_net(
            &Space::real_line(),
            &Region::Interval { lo, hi },
            (hi - lo) / 100.0,
        )
        .unwrap();
        let report = alr_verify(&conj, &samples, 10_000, 1e-9).unwrap();
        assert!(report.is_alr(), "homeomorphism #{k} broke the ALR property");
    }
}

#[test]
fn four_map_square_system_contracts() {
    let sp = Space::plane_region([-2.5, -2.5], [2.5, 2.5]);
    let eps = 1e-2;
    let maps = vec![
        affine_plane(sp.clone(), 0.5, [0.0, 0.0]).unwrap(),
        affine_plane(sp.clone(), 0.5, [0.5, 0.0]).unwrap(),
        affine_plane(sp.clone(), 0.5, [0.0, 0.5]).unwrap(),
        affine_plane(sp.clone(), 0.5, [0.5, 0.5]).unwrap(),
    ];
    let target = epsilon_net(
        &sp,
        &Region::Rect {
            min: [0.0, 0.0],
            max: [1.0, 1.0],
        },
        eps,
    )
    .unwrap();
    let system = IfsSystem::new(maps).unwrap().with_target(target).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xf00);
    for _ in 0..3 {
        let seed = Point::Plane(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let s0 = SetApprox::singleton(sp.clone(), seed, eps).unwrap();
        let orbit = iterate_orbit(&system, &s0, 40, eps).unwrap();
        let d = orbit.distances_to_target.as_ref().unwrap();
        let hit = d.iter().position(|x| *x <= 10.0 * eps);
        let hit = hit.unwrap_or_else(|| panic!("never reached 10*eps from {seed}"));
        assert!(hit <= 40);
        for n in 1..hit {
            assert!(
                d[n + 1] <= d[n] + 1e-12,
                "distance rose at step {n}: {} -> {}",
                d[n],
                d[n + 1]
            );
        }
    }
}

#[test]
fn interval_pipeline_pointwise_but_not_strict() {
    // The composite check on [0, 1]: phi = x^2 is an ALR map, W retracts
    // onto Fix(phi) = {0, 1}, the squeeze inclusions hold, every seed
    // converges pointwise, and strict attraction is refuted.
    let sp = Space::real_line();
    let eps = 1e-4;
    let phi = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();

    let samples = epsilon_net(&sp, &Region::Interval { lo: 0.0, hi: 1.0 }, 1e-2).unwrap();
    let alr = alr_verify(&phi, &samples, 10_000, 1e-9).unwrap();
    assert!(alr.is_alr());

    let part = |x: f64| RetractPart {
        target: SetApprox::singleton(sp.clone(), Point::Line(x), eps).unwrap(),
        retraction: constant(sp.clone(), Point::Line(x)).unwrap(),
        maps: IfsSystem::new(vec![identity(sp.clone())]).unwrap(),
    };
    let w = build_retract_ifs(&[part(0.0), part(1.0)]).unwrap();
    let squeeze = squeeze_check(&w, &phi, Point::Line(0.5), 30, eps).unwrap();
    assert!(squeeze.ok, "squeeze violation: {:?}", squeeze.violation);

    let target = w.target().unwrap().clone();
    let mut maps = w.maps().to_vec();
    maps.push(phi.clone());
    let f = IfsSystem::new(maps).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(0xd1e);
    for _ in 0..100 {
        let x = Point::Line(rng.random_range(0.0..1.0));
        let report = pointwise_test(&f, x, &target, 60, 1e-3, eps).unwrap();
        assert_eq!(report.verdict, Verdict::Converged, "seed {x}");
    }

    let witness = witnessing_sequence_until(
        &phi,
        Point::Line(0.5),
        Point::Line(1.0),
        10.0 * eps,
        1_000,
        1e-10,
    )
    .unwrap();
    let refute = strict_refute(&f, &target, &witness, None, 100, eps).unwrap();
    assert!(refute.refuted);
    assert!((refute.x0_to_target - 0.5).abs() < 1e-12);
}

#[test]
fn witness_distances_decrease_past_half_branch() {
    let phi = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
    let seq = witnessing_sequence(&phi, Point::Line(0.2), Point::Line(1.0), 25, 1e-10).unwrap();
    let dist = seq.distances_to_repellor();
    let branch_len = 1.0;
    let start = dist
        .iter()
        .position(|d| *d < branch_len / 2.0)
        .expect("the witness enters the half-branch neighborhood");
    for k in start..dist.len() - 1 {
        assert!(dist[k + 1] < dist[k], "distance rose at index {k}");
    }
}

#[test]
fn pointwise_is_seed_deterministic() {
    let sp = Space::real_line();
    let phi = make_interval_alr(0.0, 1.0, AlrVariant::Square).unwrap();
    let clamp = make_retraction(
        sp.clone(),
        Region::Points {
            points: vec![Point::Line(0.0), Point::Line(1.0)],
        },
    )
    .unwrap();
    let f = IfsSystem::new(vec![clamp, phi]).unwrap();
    let target = SetApprox::new(
        sp,
        vec![Point::Line(0.0), Point::Line(1.0)],
        1e-6,
    )
    .unwrap();
    let a = pointwise_test(&f, Point::Line(0.37), &target, 40, 1e-6, 1e-6).unwrap();
    let b = pointwise_test(&f, Point::Line(0.37), &target, 40, 1e-6, 1e-6).unwrap();
    assert_eq!(a.verdict, b.verdict);
    assert_eq!(a.distances, b.distances);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snap_is_idempotent_and_contains_inputs(
        xs in prop::collection::vec(-10.0_f64..10.0, 1..80),
        eps in 1e-4_f64..0.5,
    ) {
        let sp = Space::real_line();
        let set = SetApprox::new(
            sp,
            xs.iter().copied().map(Point::Line).collect(),
            eps,
        ).unwrap();
        let again = grid_snap(&set, eps).unwrap();
        prop_assert_eq!(set.points(), again.points());
        for &x in &xs {
            prop_assert!(set.min_distance_to(&Point::Line(x)) <= eps / 2.0 + 1e-15);
        }
    }

    #[test]
    fn hausdorff_is_symmetric_and_zero_on_self(
        xs in prop::collection::vec(-5.0_f64..5.0, 1..40),
        ys in prop::collection::vec(-5.0_f64..5.0, 1..40),
    ) {
        let sp = Space::real_line();
        let a = SetApprox::new(sp.clone(), xs.into_iter().map(Point::Line).collect(), 1e-9).unwrap();
        let b = SetApprox::new(sp, ys.into_iter().map(Point::Line).collect(), 1e-9).unwrap();
        let ab = hausdorff_distance(&a, &b).unwrap();
        let ba = hausdorff_distance(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-15);
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
    }
}
