//! Shared graph model: geographic/planar points, the anchor-and-scale
//! projection, haversine distance, and graph validation.
//!
//! Every generator in this crate produces a [`NetworkGraph`]; every emitter
//! consumes one.

use thiserror::Error;

/// Mean Earth radius in meters, used by [`haversine_m`].
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Default projection anchor latitude in degrees.
pub const DEFAULT_ANCHOR_LAT: f64 = 39.125;
/// Default projection anchor longitude in degrees.
pub const DEFAULT_ANCHOR_LON: f64 = 161.567;
/// Default projection scale in degrees per planar unit.
pub const DEFAULT_SCALE_DEG: f64 = 0.004;

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("coordinate out of range: lon {lon}, lat {lat}")]
    InvalidCoordinate { lon: f64, lat: f64 },
    #[error("projection scale must be a positive finite number, got {0}")]
    InvalidScale(f64),
    #[error("projected point leaves valid coordinate ranges: lon {lon}, lat {lat}")]
    ProjectionOutOfRange { lon: f64, lat: f64 },
}

/// A geographic position in degrees, longitude first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Result<Self, GeoError> {
        if !lon.is_finite() || !lat.is_finite() || !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
            return Err(GeoError::InvalidCoordinate { lon, lat });
        }
        Ok(Self { lon, lat })
    }

    pub fn is_valid(&self) -> bool {
        GeoPoint::new(self.lon, self.lat).is_ok()
    }
}

/// A point in the planar frame (grid units or image pixels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &PlanarPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Equirectangular mapping between the planar frame and geographic
/// coordinates: one planar unit equals `scale` degrees on both axes,
/// centered on `anchor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub anchor: GeoPoint,
    pub scale: f64,
}

impl Default for Projection {
    fn default() -> Self {
        Self {
            anchor: GeoPoint {
                lon: DEFAULT_ANCHOR_LON,
                lat: DEFAULT_ANCHOR_LAT,
            },
            scale: DEFAULT_SCALE_DEG,
        }
    }
}

impl Projection {
    pub fn new(anchor: GeoPoint, scale: f64) -> Result<Self, GeoError> {
        if !anchor.is_valid() {
            return Err(GeoError::InvalidCoordinate {
                lon: anchor.lon,
                lat: anchor.lat,
            });
        }
        if !scale.is_finite() || scale <= 0.0 {
            return Err(GeoError::InvalidScale(scale));
        }
        Ok(Self { anchor, scale })
    }

    /// Maps a planar point into geographic space.
    pub fn project(&self, p: PlanarPoint) -> Result<GeoPoint, GeoError> {
        let lon = self.anchor.lon + p.x * self.scale;
        let lat = self.anchor.lat + p.y * self.scale;
        GeoPoint::new(lon, lat).map_err(|_| GeoError::ProjectionOutOfRange { lon, lat })
    }

    /// Inverse of [`Projection::project`].
    pub fn unproject(&self, g: GeoPoint) -> PlanarPoint {
        PlanarPoint {
            x: (g.lon - self.anchor.lon) / self.scale,
            y: (g.lat - self.anchor.lat) / self.scale,
        }
    }
}

/// Rounds a length to centimeter precision, the resolution of the emitted
/// Link.csv `length` column. Generators store lengths at this precision so
/// an emit/parse round trip reproduces them exactly.
pub fn quantize_length_m(meters: f64) -> f64 {
    (meters * 100.0).round() / 100.0
}

/// Great-circle distance in meters between two geographic points.
pub fn haversine_m(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// A network node carrying both its planar and geographic positions.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub node_id: u64,
    pub planar: PlanarPoint,
    pub geo: GeoPoint,
}

/// A directed road segment between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRecord {
    pub link_id: u64,
    pub from_node_id: u64,
    pub to_node_id: u64,
    /// Length in meters.
    pub length_m: f64,
    pub lanes: u32,
    /// Polyline shape; starts at the from-node and ends at the to-node.
    pub geometry: Vec<GeoPoint>,
}

/// Nodes plus directed links in a planar frame with an attached geographic
/// projection.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    pub nodes: Vec<NodeRecord>,
    pub links: Vec<LinkRecord>,
    pub projection: Projection,
}

impl NetworkGraph {
    pub fn new(projection: Projection) -> Self {
        Self {
            nodes: Vec::new(),
            links: Vec::new(),
            projection,
        }
    }

    pub fn node(&self, node_id: u64) -> Option<&NodeRecord> {
        self.nodes.iter().find(|n| n.node_id == node_id)
    }
}

/// One violated graph invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    DuplicateNodeId(u64),
    DuplicateLinkId(u64),
    DanglingEndpoint { link_id: u64, node_id: u64 },
    SelfLoop { link_id: u64 },
    DuplicateLinkPair { from: u64, to: u64 },
    InvalidLanes { link_id: u64 },
    InvalidLength { link_id: u64 },
    ShortGeometry { link_id: u64 },
    GeometryEndpointMismatch { link_id: u64 },
    InvalidNodeCoordinate { node_id: u64 },
    PlanarGeoMismatch { node_id: u64 },
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::DuplicateNodeId(id) => write!(f, "duplicate node_id {id}"),
            Self::DuplicateLinkId(id) => write!(f, "duplicate link_id {id}"),
            Self::DanglingEndpoint { link_id, node_id } => {
                write!(f, "link {link_id} references missing node {node_id}")
            }
            Self::SelfLoop { link_id } => write!(f, "link {link_id} starts and ends at the same node"),
            Self::DuplicateLinkPair { from, to } => {
                write!(f, "more than one link from node {from} to node {to}")
            }
            Self::InvalidLanes { link_id } => write!(f, "link {link_id} has zero lanes"),
            Self::InvalidLength { link_id } => write!(f, "link {link_id} has a negative or non-finite length"),
            Self::ShortGeometry { link_id } => write!(f, "link {link_id} geometry has fewer than 2 points"),
            Self::GeometryEndpointMismatch { link_id } => {
                write!(f, "link {link_id} geometry does not start/end at its node coordinates")
            }
            Self::InvalidNodeCoordinate { node_id } => write!(f, "node {node_id} has out-of-range coordinates"),
            Self::PlanarGeoMismatch { node_id } => {
                write!(f, "node {node_id} geo position disagrees with its projected planar position")
            }
        }
    }
}

/// Result of [`validate_graph`]; empty iff the graph satisfies every
/// invariant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "graph is valid");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

const GEO_CONSISTENCY_EPS_DEG: f64 = 1e-9;

/// Checks every graph invariant and reports each violation; never fails.
pub fn validate_graph(g: &NetworkGraph) -> ValidationReport {
    let mut issues = Vec::new();
    let mut node_ids = std::collections::HashSet::new();
    for n in &g.nodes {
        if !node_ids.insert(n.node_id) {
            issues.push(ValidationIssue::DuplicateNodeId(n.node_id));
        }
        if !n.geo.is_valid() || !n.planar.x.is_finite() || !n.planar.y.is_finite() {
            issues.push(ValidationIssue::InvalidNodeCoordinate { node_id: n.node_id });
            continue;
        }
        match g.projection.project(n.planar) {
            Ok(p) => {
                if (p.lon - n.geo.lon).abs() > GEO_CONSISTENCY_EPS_DEG
                    || (p.lat - n.geo.lat).abs() > GEO_CONSISTENCY_EPS_DEG
                {
                    issues.push(ValidationIssue::PlanarGeoMismatch { node_id: n.node_id });
                }
            }
            Err(_) => issues.push(ValidationIssue::PlanarGeoMismatch { node_id: n.node_id }),
        }
    }

    let mut link_ids = std::collections::HashSet::new();
    let mut pairs = std::collections::HashSet::new();
    for l in &g.links {
        if !link_ids.insert(l.link_id) {
            issues.push(ValidationIssue::DuplicateLinkId(l.link_id));
        }
        if l.from_node_id == l.to_node_id {
            issues.push(ValidationIssue::SelfLoop { link_id: l.link_id });
        }
        if !pairs.insert((l.from_node_id, l.to_node_id)) {
            issues.push(ValidationIssue::DuplicateLinkPair {
                from: l.from_node_id,
                to: l.to_node_id,
            });
        }
        if l.lanes == 0 {
            issues.push(ValidationIssue::InvalidLanes { link_id: l.link_id });
        }
        if !l.length_m.is_finite() || l.length_m < 0.0 {
            issues.push(ValidationIssue::InvalidLength { link_id: l.link_id });
        }
        if l.geometry.len() < 2 {
            issues.push(ValidationIssue::ShortGeometry { link_id: l.link_id });
            continue;
        }
        let from = g.node(l.from_node_id);
        let to = g.node(l.to_node_id);
        match (from, to) {
            (Some(from), Some(to)) => {
                let head = l.geometry[0];
                let tail = l.geometry[l.geometry.len() - 1];
                let agree = |a: GeoPoint, b: GeoPoint| {
                    (a.lon - b.lon).abs() <= GEO_CONSISTENCY_EPS_DEG
                        && (a.lat - b.lat).abs() <= GEO_CONSISTENCY_EPS_DEG
                };
                if !agree(head, from.geo) || !agree(tail, to.geo) {
                    issues.push(ValidationIssue::GeometryEndpointMismatch { link_id: l.link_id });
                }
            }
            _ => {
                if from.is_none() {
                    issues.push(ValidationIssue::DanglingEndpoint {
                        link_id: l.link_id,
                        node_id: l.from_node_id,
                    });
                }
                if to.is_none() {
                    issues.push(ValidationIssue::DanglingEndpoint {
                        link_id: l.link_id,
                        node_id: l.to_node_id,
                    });
                }
            }
        }
    }
    ValidationReport { issues }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn geo_point() -> impl Strategy<Value = GeoPoint> {
        (-180.0..180.0f64, -89.0..89.0f64).prop_map(|(lon, lat)| GeoPoint { lon, lat })
    }

    proptest! {
        #[test]
        fn haversine_is_symmetric(a in geo_point(), b in geo_point()) {
            let ab = haversine_m(a, b);
            let ba = haversine_m(b, a);
            prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
            prop_assert!(ab >= 0.0);
        }

        #[test]
        fn haversine_triangle_inequality(a in geo_point(), b in geo_point(), c in geo_point()) {
            let ab = haversine_m(a, b);
            let bc = haversine_m(b, c);
            let ac = haversine_m(a, c);
            prop_assert!(ac <= ab + bc + 1e-6 * (ab + bc).max(1.0));
        }

        #[test]
        fn projection_is_injective(
            x1 in -100.0..100.0f64, y1 in -100.0..100.0f64,
            x2 in -100.0..100.0f64, y2 in -100.0..100.0f64,
        ) {
            let proj = Projection::default();
            let p1 = PlanarPoint::new(x1, y1);
            let p2 = PlanarPoint::new(x2, y2);
            let g1 = proj.project(p1).unwrap();
            let g2 = proj.project(p2).unwrap();
            if p1 != p2 {
                prop_assert!(g1 != g2);
            }
        }
    }
}
