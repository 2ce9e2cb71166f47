//! JSON descriptors for spaces, regions, points and maps, so experiments can
//! be fully file-driven. Every map constructor has a descriptor form:
//! `{"kind": ..., ...params, children...}`.

use crate::error::{IfsError, Result};
use crate::maps::{
    affine, affine_plane, compose, conjugate_map, constant, identity, interval_alr_on,
    make_arc_alr, make_disc_alr, make_kwietniak_map, make_retraction, union_maps, AlrVariant,
    IfsSystem, MapHandle,
};
use crate::region::Region;
use crate::sets::{epsilon_net, SetApprox};
use crate::space::{Point, Space, SpaceKind};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceDescriptor {
    RealLine {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounds: Option<[f64; 2]>,
    },
    CompactifiedLine,
    Circle,
    UnitDisc,
    PlaneRegion { min: [f64; 2], max: [f64; 2] },
}

impl SpaceDescriptor {
    pub fn build(&self) -> Space {
        match self {
            SpaceDescriptor::RealLine { bounds: None } => Space::real_line(),
            SpaceDescriptor::RealLine { bounds: Some([lo, hi]) } => {
                Space::real_line_bounded(*lo, *hi)
            }
            SpaceDescriptor::CompactifiedLine => Space::compactified_line(),
            SpaceDescriptor::Circle => Space::circle(),
            SpaceDescriptor::UnitDisc => Space::unit_disc(),
            SpaceDescriptor::PlaneRegion { min, max } => Space::plane_region(*min, *max),
        }
    }
}

/// A point as written in config files: `{"x": 0.5}`, `{"x": 0.5, "y": 1.0}`
/// or `{"infinity": true}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PointDescriptor {
    #[serde(default)]
    pub x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub infinity: bool,
}

impl PointDescriptor {
    pub fn build(&self, space: &Space) -> Result<Point> {
        let p = if self.infinity {
            Point::Infinity
        } else {
            match (space.kind(), self.y) {
                (SpaceKind::Circle, None) => Point::angle(self.x),
                (_, None) => Point::Line(self.x),
                (_, Some(y)) => Point::Plane(self.x, y),
            }
        };
        if space.admits(&p) {
            Ok(p)
        } else {
            Err(IfsError::Parse(format!(
                "point {p} does not belong to the {space} chart"
            )))
        }
    }

    pub fn of(p: &Point) -> PointDescriptor {
        match p {
            Point::Infinity => PointDescriptor {
                x: 0.0,
                y: None,
                infinity: true,
            },
            Point::Plane(x, y) => PointDescriptor {
                x: *x,
                y: Some(*y),
                infinity: false,
            },
            other => PointDescriptor {
                x: other.coord_x(),
                y: None,
                infinity: false,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionDescriptor {
    Interval { lo: f64, hi: f64 },
    Arc { from: f64, to: f64 },
    Rect { min: [f64; 2], max: [f64; 2] },
    Disc { center: [f64; 2], radius: f64 },
    Triangle { v: [[f64; 2]; 3] },
    Singleton { point: PointDescriptor },
    Points { points: Vec<PointDescriptor> },
}

impl RegionDescriptor {
    pub fn build(&self, space: &Space) -> Result<Region> {
        Ok(match self {
            RegionDescriptor::Interval { lo, hi } => Region::Interval { lo: *lo, hi: *hi },
            RegionDescriptor::Arc { from, to } => Region::Arc {
                from: *from,
                to: *to,
            },
            RegionDescriptor::Rect { min, max } => Region::Rect {
                min: *min,
                max: *max,
            },
            RegionDescriptor::Disc { center, radius } => Region::Disc {
                center: *center,
                radius: *radius,
            },
            RegionDescriptor::Triangle { v } => Region::Triangle { v: *v },
            RegionDescriptor::Singleton { point } => Region::Singleton {
                point: point.build(space)?,
            },
            RegionDescriptor::Points { points } => Region::Points {
                points: points
                    .iter()
                    .map(|p| p.build(space))
                    .collect::<Result<Vec<_>>>()?,
            },
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum VariantDescriptor {
    Square,
    Sqrt,
}

impl From<VariantDescriptor> for AlrVariant {
    fn from(v: VariantDescriptor) -> AlrVariant {
        match v {
            VariantDescriptor::Square => AlrVariant::Square,
            VariantDescriptor::Sqrt => AlrVariant::Sqrt,
        }
    }
}

/// Named homeomorphisms usable in `conjugate` descriptors.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HomeoDescriptor {
    /// `h(x) = scale*x + offset` on a line chart.
    AffineLine { scale: f64, offset: f64 },
    /// `h(x) = e^{ix}` from a line chart bounded inside `[0, 2*pi)` onto
    /// the circle.
    IntervalToArc,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapDescriptor {
    IntervalAlr {
        a: f64,
        b: f64,
        variant: VariantDescriptor,
    },
    ArcAlr {
        alpha: f64,
        beta: f64,
    },
    DiscAlr,
    Kwietniak,
    Identity,
    Constant {
        point: PointDescriptor,
    },
    Affine {
        scale: f64,
        offset: f64,
    },
    AffinePlane {
        scale: f64,
        offset: [f64; 2],
    },
    Retraction {
        region: RegionDescriptor,
    },
    Compose {
        outer: Box<MapDescriptor>,
        inner: Box<MapDescriptor>,
    },
    Union {
        pieces: Vec<PieceDescriptor>,
    },
    Conjugate {
        child: Box<MapDescriptor>,
        homeo: HomeoDescriptor,
        target: SpaceDescriptor,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PieceDescriptor {
    pub region: RegionDescriptor,
    pub map: MapDescriptor,
}

impl MapDescriptor {
    pub fn build(&self, space: &Space) -> Result<MapHandle> {
        match self {
            MapDescriptor::IntervalAlr { a, b, variant } => {
                interval_alr_on(space.clone(), *a, *b, (*variant).into())
            }
            MapDescriptor::ArcAlr { alpha, beta } => make_arc_alr(*alpha, *beta),
            MapDescriptor::DiscAlr => make_disc_alr(),
            MapDescriptor::Kwietniak => make_kwietniak_map(),
            MapDescriptor::Identity => Ok(identity(space.clone())),
            MapDescriptor::Constant { point } => constant(space.clone(), point.build(space)?),
            MapDescriptor::Affine { scale, offset } => affine(space.clone(), *scale, *offset),
            MapDescriptor::AffinePlane { scale, offset } => {
                affine_plane(space.clone(), *scale, *offset)
            }
            MapDescriptor::Retraction { region } => {
                make_retraction(space.clone(), region.build(space)?)
            }
            MapDescriptor::Compose { outer, inner } => {
                let o = outer.build(space)?;
                let i = inner.build(space)?;
                compose(&o, &i)
            }
            MapDescriptor::Union { pieces } => {
                let mut built = Vec::with_capacity(pieces.len());
                for p in pieces {
                    built.push((p.region.build(space)?, p.map.build(space)?));
                }
                union_maps(built)
            }
            MapDescriptor::Conjugate {
                child,
                homeo,
                target,
            } => {
                let phi = child.build(space)?;
                let target_space = target.build();
                match homeo {
                    HomeoDescriptor::AffineLine { scale, offset } => {
                        let (s, o) = (*scale, *offset);
                        if s == 0.0 {
                            return Err(IfsError::Parse(
                                "affine_line homeomorphism needs nonzero scale".into(),
                            ));
                        }
                        conjugate_map(
                            &phi,
                            move |p| Point::Line(s * p.coord_x() + o),
                            move |p| Point::Line((p.coord_x() - o) / s),
                            target_space,
                        )
                    }
                    HomeoDescriptor::IntervalToArc => conjugate_map(
                        &phi,
                        |p| Point::angle(p.coord_x()),
                        |p| Point::Line(p.coord_x()),
                        target_space,
                    ),
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TargetDescriptor {
    pub region: RegionDescriptor,
    pub epsilon: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SystemDescriptor {
    pub space: SpaceDescriptor,
    pub maps: Vec<MapDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetDescriptor>,
}

/// Parse a system descriptor from JSON text and build it.
pub fn system_from_json(text: &str) -> Result<IfsSystem> {
    let desc: SystemDescriptor =
        serde_json::from_str(text).map_err(|e| IfsError::Parse(e.to_string()))?;
    desc.build()
}

impl SystemDescriptor {
    pub fn build(&self) -> Result<IfsSystem> {
        let space = self.space.build();
        let maps = self
            .maps
            .iter()
            .map(|m| m.build(&space))
            .collect::<Result<Vec<_>>>()?;
        let system = IfsSystem::new(maps)?;
        match &self.target {
            Some(t) => {
                let region = t.region.build(&space)?;
                let net: SetApprox = epsilon_net(&space, &region, t.epsilon)?;
                system.with_target(net)
            }
            None => Ok(system),
        }
    }
}
