//! ifslab: iterated function systems on concrete metric spaces.
//!
//! The crate builds finite IFSs out of evaluable continuous self-maps,
//! iterates their Barnsley-Hutchinson operator on compact-set approximations,
//! and classifies candidate attractors: pointwise convergence tests, strict
//! attraction refutation through local-repellor witnessing sequences, and a
//! gallery of ready-made systems from a single added nonexpansive map on an
//! interval up to the Sierpinski carpet.

pub mod error;
pub mod space;
pub mod region;
pub mod sets;
pub mod maps;
pub mod hutchinson;
pub mod analysis;
pub mod gallery;
pub mod io;
pub mod render;
pub mod descriptor;
pub mod experiment;

pub use analysis::{
    alr_verify, build_retract_ifs, pointwise_test, squeeze_check, strict_refute,
    witnessing_sequence, witnessing_sequence_until, AlrReport, PointwiseReport, RefuteReport,
    RetractPart, SqueezeReport, Verdict, WitnessingSequence,
};
pub use error::{IfsError, Result};
pub use hutchinson::{
    apply_operator, fixed_set_check, iterate_orbit, iterate_orbit_capped, FixedSetReport,
    OrbitRecord,
};
pub use maps::{
    affine, affine_plane, compose, conjugate_map, constant, disc_alr_power,
    disc_chord_endpoints, identity, interval_alr_on, make_arc_alr, make_disc_alr,
    make_interval_alr, make_kwietniak_map, make_retraction, preimage_on_branch, union_maps,
    AlrVariant, Direction, IfsSystem, MapHandle, MonotoneBranch,
};
pub use region::Region;
pub use sets::{
    epsilon_net, estimate_li_ls, grid_snap, hausdorff_distance, hausdorff_distance_exhaustive,
    hausdorff_distance_indexed, LimitEstimate, NnIndex, SetApprox,
};
pub use space::{Bounds, Point, Space, SpaceKind};
