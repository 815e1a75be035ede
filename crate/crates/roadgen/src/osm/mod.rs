//! Location-specified network generation: OSM XML parsing and conversion of
//! tagged ways into a routable [`NetworkGraph`].

mod client;

pub use client::{
    bbox_around, fetch_osm, geocode, BoundingBox, FixtureGeocoder, GeocodeResult, Geocoder, HttpGeocoder,
    DEFAULT_FETCH_CAP_BYTES, DEFAULT_RADIUS_M,
};

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

use crate::geo::{haversine_m, GeoError, GeoPoint, LinkRecord, NetworkGraph, NodeRecord, Projection};

#[derive(Debug, Error)]
pub enum OsmError {
    #[error("geocoding query must not be empty")]
    EmptyQuery,
    #[error("no geocoding candidates for {0:?}")]
    GeocodeNotFound(String),
    #[error("geocoding provider unreachable: {0}")]
    ProviderUnreachable(String),
    #[error("geocoding provider rejected the request (status {0})")]
    ProviderRejected(u16),
    #[error("search radius {0} m is outside (0, 50000]")]
    RadiusOutOfRange(f64),
    #[error("bounding boxes are undefined beyond 85 degrees latitude, got {0}")]
    PolarUndefined(f64),
    #[error("OSM fetch failed: {0}")]
    HttpFailure(String),
    #[error("OSM response exceeds the {limit} byte cap")]
    PayloadTooLarge { limit: u64 },
    #[error("malformed OSM XML: {0}")]
    XmlMalformed(String),
    #[error("way {way_id} references missing node {node_ref}")]
    DanglingRef { way_id: i64, node_ref: i64 },
    #[error("no ways matched the highway filter; the area has no roads to convert")]
    EmptyNetwork,
    #[error("highway filter must allow at least one tag value")]
    EmptyFilter,
    #[error(transparent)]
    Geo(#[from] GeoError),
}

/// An OSM way: ordered node references plus its tag map.
#[derive(Debug, Clone, PartialEq)]
pub struct OsmWay {
    pub id: i64,
    pub node_refs: Vec<i64>,
    pub tags: BTreeMap<String, String>,
}

/// Parsed OSM data: node positions and tagged ways.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OsmDocument {
    pub nodes: BTreeMap<i64, GeoPoint>,
    pub ways: Vec<OsmWay>,
}

/// Highway tag values that survive conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct HighwayFilter {
    allowed: BTreeSet<String>,
}

impl Default for HighwayFilter {
    fn default() -> Self {
        let base = [
            "motorway",
            "trunk",
            "primary",
            "secondary",
            "tertiary",
            "residential",
            "unclassified",
        ];
        let mut allowed = BTreeSet::new();
        for v in base {
            allowed.insert(v.to_string());
            allowed.insert(format!("{v}_link"));
        }
        Self { allowed }
    }
}

impl HighwayFilter {
    pub fn new<I: IntoIterator<Item = String>>(values: I) -> Result<Self, OsmError> {
        let allowed: BTreeSet<String> = values.into_iter().collect();
        if allowed.is_empty() {
            return Err(OsmError::EmptyFilter);
        }
        Ok(Self { allowed })
    }

    pub fn allows(&self, value: &str) -> bool {
        self.allowed.contains(value)
    }
}

fn attr_value(e: &quick_xml::events::BytesStart, name: &[u8]) -> Result<Option<String>, OsmError> {
    for attr in e.attributes() {
        let attr = attr.map_err(|err| OsmError::XmlMalformed(err.to_string()))?;
        if attr.key.as_ref() == name {
            let value = attr
                .unescape_value()
                .map_err(|err| OsmError::XmlMalformed(err.to_string()))?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

fn required_attr(e: &quick_xml::events::BytesStart, name: &str) -> Result<String, OsmError> {
    attr_value(e, name.as_bytes())?
        .ok_or_else(|| OsmError::XmlMalformed(format!("<{}> missing {name} attribute", String::from_utf8_lossy(e.name().as_ref()))))
}

fn parse_attr_num<T: std::str::FromStr>(text: &str, what: &str) -> Result<T, OsmError>
where
    T::Err: std::fmt::Display,
{
    text.trim()
        .parse()
        .map_err(|e| OsmError::XmlMalformed(format!("bad {what} {text:?}: {e}")))
}

/// Parses OSM XML bytes into nodes and ways. Relations and other elements
/// are ignored; ways with fewer than two node references are dropped.
pub fn parse_osm(xml: &[u8]) -> Result<OsmDocument, OsmError> {
    let text = std::str::from_utf8(xml).map_err(|e| OsmError::XmlMalformed(e.to_string()))?;
    let mut reader = Reader::from_str(text);
    reader.trim_text(true);

    let mut doc = OsmDocument::default();
    let mut current_way: Option<OsmWay> = None;
    let mut saw_any_element = false;
    let mut depth = 0usize;

    fn handle_element(
        e: &quick_xml::events::BytesStart,
        doc: &mut OsmDocument,
        current_way: &mut Option<OsmWay>,
    ) -> Result<(), OsmError> {
        match e.name().as_ref() {
            b"node" => {
                let id: i64 = parse_attr_num(&required_attr(e, "id")?, "node id")?;
                let lat: f64 = parse_attr_num(&required_attr(e, "lat")?, "lat")?;
                let lon: f64 = parse_attr_num(&required_attr(e, "lon")?, "lon")?;
                let point = GeoPoint::new(lon, lat)
                    .map_err(|err| OsmError::XmlMalformed(format!("node {id}: {err}")))?;
                doc.nodes.insert(id, point);
            }
            b"way" => {
                let id: i64 = parse_attr_num(&required_attr(e, "id")?, "way id")?;
                *current_way = Some(OsmWay {
                    id,
                    node_refs: Vec::new(),
                    tags: BTreeMap::new(),
                });
            }
            b"nd" => {
                if let Some(way) = current_way.as_mut() {
                    let r: i64 = parse_attr_num(&required_attr(e, "ref")?, "nd ref")?;
                    way.node_refs.push(r);
                }
            }
            b"tag" => {
                if let Some(way) = current_way.as_mut() {
                    let k = required_attr(e, "k")?;
                    let v = required_attr(e, "v")?;
                    way.tags.insert(k, v);
                }
            }
            _ => {}
        }
        Ok(())
    }

    loop {
        match reader.read_event() {
            Err(e) => return Err(OsmError::XmlMalformed(e.to_string())),
            Ok(Event::Eof) => {
                if depth > 0 {
                    return Err(OsmError::XmlMalformed(
                        "unexpected end of document with unclosed elements".into(),
                    ));
                }
                break;
            }
            Ok(Event::Start(e)) => {
                depth += 1;
                saw_any_element = true;
                handle_element(&e, &mut doc, &mut current_way)?;
            }
            Ok(Event::Empty(e)) => {
                saw_any_element = true;
                handle_element(&e, &mut doc, &mut current_way)?;
            }
            Ok(Event::End(e)) => {
                depth = depth.saturating_sub(1);
                if e.name().as_ref() == b"way" {
                    if let Some(way) = current_way.take() {
                        if way.node_refs.len() >= 2 {
                            doc.ways.push(way);
                        }
                    }
                }
            }
            Ok(_) => {}
        }
    }

    if !saw_any_element {
        return Err(OsmError::XmlMalformed("document has no XML elements".into()));
    }
    for way in &doc.ways {
        for &r in &way.node_refs {
            if !doc.nodes.contains_key(&r) {
                return Err(OsmError::DanglingRef {
                    way_id: way.id,
                    node_ref: r,
                });
            }
        }
    }
    Ok(doc)
}

fn is_oneway(way: &OsmWay) -> bool {
    matches!(way.tags.get("oneway").map(String::as_str), Some("yes" | "true" | "1"))
}

fn way_lanes(way: &OsmWay) -> u32 {
    way.tags
        .get("lanes")
        .and_then(|s| s.trim().parse::<u32>().ok())
        .filter(|&l| l >= 1)
        .unwrap_or(2)
}

/// Converts tagged ways into a graph, deriving the projection anchor from
/// the center of the kept ways' bounding box.
pub fn osm_to_network(doc: &OsmDocument, filter: &HighwayFilter) -> Result<NetworkGraph, OsmError> {
    let kept = kept_ways(doc, filter)?;
    let mut min_lon = f64::INFINITY;
    let mut max_lon = f64::NEG_INFINITY;
    let mut min_lat = f64::INFINITY;
    let mut max_lat = f64::NEG_INFINITY;
    for way in &kept {
        for r in &way.node_refs {
            let p = doc.nodes[r];
            min_lon = min_lon.min(p.lon);
            max_lon = max_lon.max(p.lon);
            min_lat = min_lat.min(p.lat);
            max_lat = max_lat.max(p.lat);
        }
    }
    let anchor = GeoPoint::new((min_lon + max_lon) / 2.0, (min_lat + max_lat) / 2.0)?;
    let projection = Projection::new(anchor, crate::geo::DEFAULT_SCALE_DEG)?;
    convert(doc, &kept, projection)
}

/// As [`osm_to_network`] with an explicit projection (for callers that
/// already know the map center, e.g. from geocoding).
pub fn osm_to_network_with(
    doc: &OsmDocument,
    filter: &HighwayFilter,
    projection: Projection,
) -> Result<NetworkGraph, OsmError> {
    let kept = kept_ways(doc, filter)?;
    convert(doc, &kept, projection)
}

fn kept_ways<'a>(doc: &'a OsmDocument, filter: &HighwayFilter) -> Result<Vec<&'a OsmWay>, OsmError> {
    let kept: Vec<&OsmWay> = doc
        .ways
        .iter()
        .filter(|w| w.tags.get("highway").is_some_and(|v| filter.allows(v)))
        .collect();
    if kept.is_empty() {
        return Err(OsmError::EmptyNetwork);
    }
    Ok(kept)
}

fn convert(doc: &OsmDocument, kept: &[&OsmWay], projection: Projection) -> Result<NetworkGraph, OsmError> {
    // A node becomes a graph intersection when at least two kept ways use it
    // or when it terminates a way. Interior nodes stay as link geometry.
    let mut ways_using: HashMap<i64, usize> = HashMap::new();
    let mut intersections: HashSet<i64> = HashSet::new();
    for way in kept {
        let distinct: HashSet<i64> = way.node_refs.iter().copied().collect();
        for r in distinct {
            *ways_using.entry(r).or_insert(0) += 1;
        }
        intersections.insert(way.node_refs[0]);
        intersections.insert(*way.node_refs.last().expect("ways have >= 2 refs"));
    }
    for (&r, &count) in &ways_using {
        if count >= 2 {
            intersections.insert(r);
        }
    }

    // Split each way at intersections. Ring segments (same start and end
    // intersection) are cut into three parts so no two resulting links share
    // the same endpoint pair.
    let mut way_segments: Vec<(usize, Vec<i64>)> = Vec::new();
    for (w, way) in kept.iter().enumerate() {
        let mut start = 0usize;
        for i in 1..way.node_refs.len() {
            if intersections.contains(&way.node_refs[i]) {
                let segment = way.node_refs[start..=i].to_vec();
                let mut stack = vec![segment];
                while let Some(seg) = stack.pop() {
                    if seg.first() != seg.last() {
                        way_segments.push((w, seg));
                    } else if seg.len() >= 4 {
                        let (a, b) = (seg.len() / 3, 2 * seg.len() / 3);
                        intersections.insert(seg[a]);
                        intersections.insert(seg[b]);
                        stack.push(seg[..=a].to_vec());
                        stack.push(seg[a..=b].to_vec());
                        stack.push(seg[b..].to_vec());
                    } else if seg.len() == 3 {
                        // Out-and-back stub: keep both directions as links.
                        intersections.insert(seg[1]);
                        stack.push(seg[..=1].to_vec());
                        stack.push(seg[1..].to_vec());
                    }
                    // A two-entry ring (A, A) carries no usable link.
                }
                start = i;
            }
        }
    }

    let mut used_intersections: BTreeSet<i64> = BTreeSet::new();
    for (_, seg) in &way_segments {
        used_intersections.insert(seg[0]);
        used_intersections.insert(*seg.last().unwrap());
    }

    let mut graph = NetworkGraph::new(projection);
    let mut node_index: HashMap<i64, u64> = HashMap::new();
    for (next_id, osm_id) in used_intersections.iter().enumerate() {
        let geo = doc.nodes[osm_id];
        node_index.insert(*osm_id, next_id as u64);
        graph.nodes.push(NodeRecord {
            node_id: next_id as u64,
            planar: projection.unproject(geo),
            geo,
        });
    }

    let mut link_id = 0u64;
    let mut seen_pairs: HashSet<(u64, u64)> = HashSet::new();
    for (w, seg) in &way_segments {
        let way = kept[*w];
        let geometry: Vec<GeoPoint> = seg.iter().map(|r| doc.nodes[r]).collect();
        let length_m = crate::geo::quantize_length_m(
            geometry.windows(2).map(|p| haversine_m(p[0], p[1])).sum(),
        );
        let lanes = way_lanes(way);
        let from = node_index[&seg[0]];
        let to = node_index[seg.last().unwrap()];
        let mut directions = vec![(from, to, geometry.clone())];
        if !is_oneway(way) {
            let mut reversed = geometry;
            reversed.reverse();
            directions.push((to, from, reversed));
        }
        for (from, to, geometry) in directions {
            if !seen_pairs.insert((from, to)) {
                continue; // parallel carriageway collapsed onto an existing pair
            }
            graph.links.push(LinkRecord {
                link_id,
                from_node_id: from,
                to_node_id: to,
                length_m,
                lanes,
                geometry,
            });
            link_id += 1;
        }
    }

    Ok(graph)
}
