//! GMNS CSV emission and parsing: the two-file `Node.csv` / `Link.csv`
//! exchange format.
//!
//! Emission is byte-stable: the same graph always serializes to identical
//! files. Geometry is WKT `LINESTRING` text; because WKT contains commas the
//! geometry field is quoted, all other fields are written bare.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::geo::{validate_graph, GeoPoint, LinkRecord, NetworkGraph, NodeRecord, Projection};

pub const NODE_CSV_HEADER: &str = "node_id,x_coord,y_coord";
pub const LINK_CSV_HEADER: &str = "link_id,from_node_id,to_node_id,length,lanes,geometry";

/// Default lane count applied when a Link.csv has no `lanes` column.
pub const DEFAULT_LANES: u32 = 2;

#[derive(Debug, Error)]
pub enum GmnsError {
    #[error("refusing to emit an invalid graph: {0}")]
    InvalidGraph(String),
    #[error("failed to write {path}: {source}")]
    IoFailure {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("schema error in {file}: {detail}")]
    SchemaError { file: String, detail: String },
    #[error("parse error in {file} row {row}: {detail}")]
    ParseError {
        file: String,
        row: usize,
        detail: String,
    },
    #[error("referential error: {0}")]
    ReferentialError(String),
}

/// One `Node.csv` row.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRow {
    pub node_id: u64,
    /// Longitude in degrees.
    pub x_coord: f64,
    /// Latitude in degrees.
    pub y_coord: f64,
}

/// One `Link.csv` row; `geometry` is WKT LINESTRING text.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRow {
    pub link_id: u64,
    pub from_node_id: u64,
    pub to_node_id: u64,
    pub length: f64,
    pub lanes: u32,
    pub geometry: String,
}

/// In-memory form of the two CSV files.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GmnsDocument {
    pub node_rows: Vec<NodeRow>,
    pub link_rows: Vec<LinkRow>,
}

fn format_wkt_linestring(points: &[GeoPoint]) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|p| format!("{:.6} {:.6}", p.lon, p.lat))
        .collect();
    format!("LINESTRING ({})", coords.join(", "))
}

fn parse_wkt_linestring(text: &str) -> Result<Vec<GeoPoint>, String> {
    let trimmed = text.trim();
    let rest = trimmed
        .strip_prefix("LINESTRING")
        .ok_or_else(|| format!("expected LINESTRING, got {trimmed:?}"))?
        .trim_start();
    let inner = rest
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| "LINESTRING body must be parenthesized".to_string())?;
    let mut points = Vec::new();
    for pair in inner.split(',') {
        let mut nums = pair.split_whitespace();
        let lon: f64 = nums
            .next()
            .ok_or_else(|| "empty coordinate pair".to_string())?
            .parse()
            .map_err(|e| format!("bad longitude: {e}"))?;
        let lat: f64 = nums
            .next()
            .ok_or_else(|| "coordinate pair missing latitude".to_string())?
            .parse()
            .map_err(|e| format!("bad latitude: {e}"))?;
        if nums.next().is_some() {
            return Err("coordinate pair has more than two numbers".to_string());
        }
        points.push(GeoPoint::new(lon, lat).map_err(|e| e.to_string())?);
    }
    if points.len() < 2 {
        return Err("LINESTRING needs at least 2 coordinate pairs".to_string());
    }
    Ok(points)
}

impl GmnsDocument {
    /// Snapshot of a graph, rows sorted by id.
    pub fn from_graph(g: &NetworkGraph) -> Self {
        let mut node_rows: Vec<NodeRow> = g
            .nodes
            .iter()
            .map(|n| NodeRow {
                node_id: n.node_id,
                x_coord: n.geo.lon,
                y_coord: n.geo.lat,
            })
            .collect();
        node_rows.sort_by_key(|r| r.node_id);
        let mut link_rows: Vec<LinkRow> = g
            .links
            .iter()
            .map(|l| LinkRow {
                link_id: l.link_id,
                from_node_id: l.from_node_id,
                to_node_id: l.to_node_id,
                length: l.length_m,
                lanes: l.lanes,
                geometry: format_wkt_linestring(&l.geometry),
            })
            .collect();
        link_rows.sort_by_key(|r| r.link_id);
        Self { node_rows, link_rows }
    }

    pub fn node_csv(&self) -> String {
        let mut out = String::from(NODE_CSV_HEADER);
        out.push('\n');
        for r in &self.node_rows {
            out.push_str(&format!("{},{:.6},{:.6}\n", r.node_id, r.x_coord, r.y_coord));
        }
        out
    }

    pub fn link_csv(&self) -> String {
        let mut out = String::from(LINK_CSV_HEADER);
        out.push('\n');
        for r in &self.link_rows {
            out.push_str(&format!(
                "{},{},{},{:.2},{},\"{}\"\n",
                r.link_id, r.from_node_id, r.to_node_id, r.length, r.lanes, r.geometry
            ));
        }
        out
    }

    /// Rebuilds a graph; planar coordinates come from inverse projection.
    pub fn to_graph(&self, projection: Projection) -> Result<NetworkGraph, GmnsError> {
        let mut graph = NetworkGraph::new(projection);
        for r in &self.node_rows {
            let geo = GeoPoint::new(r.x_coord, r.y_coord).map_err(|e| GmnsError::ParseError {
                file: "Node.csv".into(),
                row: 0,
                detail: e.to_string(),
            })?;
            graph.nodes.push(NodeRecord {
                node_id: r.node_id,
                planar: projection.unproject(geo),
                geo,
            });
        }
        let ids: std::collections::HashSet<u64> = graph.nodes.iter().map(|n| n.node_id).collect();
        for r in &self.link_rows {
            for endpoint in [r.from_node_id, r.to_node_id] {
                if !ids.contains(&endpoint) {
                    return Err(GmnsError::ReferentialError(format!(
                        "link {} references node {endpoint} absent from Node.csv",
                        r.link_id
                    )));
                }
            }
            let geometry = parse_wkt_linestring(&r.geometry).map_err(|detail| GmnsError::ParseError {
                file: "Link.csv".into(),
                row: r.link_id as usize,
                detail,
            })?;
            graph.links.push(LinkRecord {
                link_id: r.link_id,
                from_node_id: r.from_node_id,
                to_node_id: r.to_node_id,
                length_m: r.length,
                lanes: r.lanes,
                geometry,
            });
        }
        Ok(graph)
    }
}

/// Writes `Node.csv` and `Link.csv` under `out_dir` and returns their
/// absolute paths.
pub fn emit_gmns(g: &NetworkGraph, out_dir: &Path) -> Result<(PathBuf, PathBuf), GmnsError> {
    let report = validate_graph(g);
    if !report.is_empty() {
        return Err(GmnsError::InvalidGraph(report.to_string()));
    }
    let doc = GmnsDocument::from_graph(g);
    fs::create_dir_all(out_dir).map_err(|source| GmnsError::IoFailure {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let dir = fs::canonicalize(out_dir).map_err(|source| GmnsError::IoFailure {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let node_path = dir.join("Node.csv");
    let link_path = dir.join("Link.csv");
    fs::write(&node_path, doc.node_csv()).map_err(|source| GmnsError::IoFailure {
        path: node_path.clone(),
        source,
    })?;
    fs::write(&link_path, doc.link_csv()).map_err(|source| GmnsError::IoFailure {
        path: link_path.clone(),
        source,
    })?;
    Ok((node_path, link_path))
}

struct ColumnMap {
    indices: std::collections::HashMap<String, usize>,
    file: String,
}

impl ColumnMap {
    fn from_headers(headers: &csv::StringRecord, file: &str) -> Self {
        let indices = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_string(), i))
            .collect();
        Self {
            indices,
            file: file.to_string(),
        }
    }

    fn required(&self, name: &str) -> Result<usize, GmnsError> {
        self.indices.get(name).copied().ok_or_else(|| GmnsError::SchemaError {
            file: self.file.clone(),
            detail: format!("missing required column {name:?}"),
        })
    }

    fn optional(&self, name: &str) -> Option<usize> {
        self.indices.get(name).copied()
    }
}

fn field<'a>(record: &'a csv::StringRecord, idx: usize, file: &str, row: usize) -> Result<&'a str, GmnsError> {
    record.get(idx).ok_or_else(|| GmnsError::ParseError {
        file: file.to_string(),
        row,
        detail: format!("row has no field at column index {idx}"),
    })
}

fn parse_num<T: std::str::FromStr>(text: &str, what: &str, file: &str, row: usize) -> Result<T, GmnsError>
where
    T::Err: std::fmt::Display,
{
    text.trim().parse().map_err(|e| GmnsError::ParseError {
        file: file.to_string(),
        row,
        detail: format!("bad {what} {text:?}: {e}"),
    })
}

/// Reads the two CSV files back into a graph. Planar coordinates are
/// reconstructed against `projection`. A missing `lanes` column defaults
/// every link to [`DEFAULT_LANES`].
pub fn parse_gmns(node_csv: &Path, link_csv: &Path, projection: Projection) -> Result<NetworkGraph, GmnsError> {
    let mut doc = GmnsDocument::default();

    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(node_csv)
        .map_err(|e| io_or_schema(e, node_csv, "Node.csv"))?;
    let headers = reader
        .headers()
        .map_err(|e| io_or_schema(e, node_csv, "Node.csv"))?
        .clone();
    let cols = ColumnMap::from_headers(&headers, "Node.csv");
    let (id_col, x_col, y_col) = (
        cols.required("node_id")?,
        cols.required("x_coord")?,
        cols.required("y_coord")?,
    );
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| GmnsError::ParseError {
            file: "Node.csv".into(),
            row: row + 2,
            detail: e.to_string(),
        })?;
        doc.node_rows.push(NodeRow {
            node_id: parse_num(field(&record, id_col, "Node.csv", row + 2)?, "node_id", "Node.csv", row + 2)?,
            x_coord: parse_num(field(&record, x_col, "Node.csv", row + 2)?, "x_coord", "Node.csv", row + 2)?,
            y_coord: parse_num(field(&record, y_col, "Node.csv", row + 2)?, "y_coord", "Node.csv", row + 2)?,
        });
    }

    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(link_csv)
        .map_err(|e| io_or_schema(e, link_csv, "Link.csv"))?;
    let headers = reader
        .headers()
        .map_err(|e| io_or_schema(e, link_csv, "Link.csv"))?
        .clone();
    let cols = ColumnMap::from_headers(&headers, "Link.csv");
    let id_col = cols.required("link_id")?;
    let from_col = cols.required("from_node_id")?;
    let to_col = cols.required("to_node_id")?;
    let length_col = cols.required("length")?;
    let geometry_col = cols.required("geometry")?;
    let lanes_col = cols.optional("lanes");
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| GmnsError::ParseError {
            file: "Link.csv".into(),
            row: row + 2,
            detail: e.to_string(),
        })?;
        let lanes = match lanes_col {
            Some(idx) => parse_num(field(&record, idx, "Link.csv", row + 2)?, "lanes", "Link.csv", row + 2)?,
            None => DEFAULT_LANES,
        };
        doc.link_rows.push(LinkRow {
            link_id: parse_num(field(&record, id_col, "Link.csv", row + 2)?, "link_id", "Link.csv", row + 2)?,
            from_node_id: parse_num(field(&record, from_col, "Link.csv", row + 2)?, "from_node_id", "Link.csv", row + 2)?,
            to_node_id: parse_num(field(&record, to_col, "Link.csv", row + 2)?, "to_node_id", "Link.csv", row + 2)?,
            length: parse_num(field(&record, length_col, "Link.csv", row + 2)?, "length", "Link.csv", row + 2)?,
            lanes,
            geometry: field(&record, geometry_col, "Link.csv", row + 2)?.to_string(),
        });
    }

    doc.to_graph(projection)
}

fn io_or_schema(e: csv::Error, path: &Path, file: &str) -> GmnsError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => GmnsError::IoFailure {
            path: path.to_path_buf(),
            source,
        },
        other => GmnsError::SchemaError {
            file: file.to_string(),
            detail: format!("{other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{generate_grid, GridSpec};
    use std::io::Write;

    fn grid(rows: u32, cols: u32) -> NetworkGraph {
        generate_grid(&GridSpec::new(rows, cols)).unwrap()
    }

    #[test]
    fn single_node_grid_emits_one_node_row() {
        let doc = GmnsDocument::from_graph(&grid(1, 1));
        assert_eq!(doc.node_rows.len(), 1);
        assert_eq!(doc.link_rows.len(), 0);
        assert_eq!(doc.node_csv().lines().count(), 2);
        assert_eq!(doc.link_csv().lines().count(), 1);
    }

    #[test]
    fn two_by_two_grid_emits_expected_rows() {
        let doc = GmnsDocument::from_graph(&grid(2, 2));
        assert_eq!(doc.node_rows.len(), 4);
        assert_eq!(doc.link_rows.len(), 8);
    }

    #[test]
    fn headers_are_exact() {
        let doc = GmnsDocument::from_graph(&grid(2, 2));
        assert!(doc.node_csv().starts_with("node_id,x_coord,y_coord\n"));
        assert!(doc
            .link_csv()
            .starts_with("link_id,from_node_id,to_node_id,length,lanes,geometry\n"));
    }

    #[test]
    fn round_trip_preserves_graph() {
        let g = grid(3, 2);
        let dir = tempfile::tempdir().unwrap();
        let (node_path, link_path) = emit_gmns(&g, dir.path()).unwrap();
        let parsed = parse_gmns(&node_path, &link_path, g.projection).unwrap();
        assert_eq!(parsed.nodes.len(), g.nodes.len());
        assert_eq!(parsed.links.len(), g.links.len());
        for (a, b) in g.nodes.iter().zip(parsed.nodes.iter()) {
            assert_eq!(a.node_id, b.node_id);
            assert!((a.geo.lon - b.geo.lon).abs() < 1e-6);
            assert!((a.geo.lat - b.geo.lat).abs() < 1e-6);
        }
        for (a, b) in g.links.iter().zip(parsed.links.iter()) {
            assert_eq!((a.link_id, a.from_node_id, a.to_node_id, a.lanes), (b.link_id, b.from_node_id, b.to_node_id, b.lanes));
            assert!((a.length_m - b.length_m).abs() <= 1e-6 * a.length_m.max(1.0));
        }
        assert!(validate_graph(&parsed).is_empty());
    }

    #[test]
    fn emission_is_byte_stable() {
        let g = grid(3, 3);
        let doc1 = GmnsDocument::from_graph(&g);
        let doc2 = GmnsDocument::from_graph(&g);
        assert_eq!(doc1.node_csv(), doc2.node_csv());
        assert_eq!(doc1.link_csv(), doc2.link_csv());
    }

    #[test]
    fn geometry_wkt_starts_and_ends_at_node_coordinates() {
        let g = grid(2, 3);
        let doc = GmnsDocument::from_graph(&g);
        let nodes: std::collections::HashMap<u64, (f64, f64)> = doc
            .node_rows
            .iter()
            .map(|r| (r.node_id, (r.x_coord, r.y_coord)))
            .collect();
        for l in &doc.link_rows {
            let pts = parse_wkt_linestring(&l.geometry).unwrap();
            let (flon, flat) = nodes[&l.from_node_id];
            let (tlon, tlat) = nodes[&l.to_node_id];
            assert!((pts[0].lon - flon).abs() < 1e-6 && (pts[0].lat - flat).abs() < 1e-6);
            let last = pts[pts.len() - 1];
            assert!((last.lon - tlon).abs() < 1e-6 && (last.lat - tlat).abs() < 1e-6);
        }
    }

    #[test]
    fn dangling_endpoint_is_a_referential_error() {
        let dir = tempfile::tempdir().unwrap();
        let node_path = dir.path().join("Node.csv");
        let link_path = dir.path().join("Link.csv");
        fs::write(&node_path, "node_id,x_coord,y_coord\n0,161.567000,39.125000\n").unwrap();
        let mut f = fs::File::create(&link_path).unwrap();
        writeln!(f, "{LINK_CSV_HEADER}").unwrap();
        writeln!(f, "0,7,0,10.00,2,\"LINESTRING (161.567000 39.125000, 161.571000 39.125000)\"").unwrap();
        let err = parse_gmns(&node_path, &link_path, Projection::default()).unwrap_err();
        assert!(matches!(err, GmnsError::ReferentialError(_)), "{err}");
    }

    #[test]
    fn missing_lanes_column_defaults_to_two() {
        let dir = tempfile::tempdir().unwrap();
        let node_path = dir.path().join("Node.csv");
        let link_path = dir.path().join("Link.csv");
        fs::write(
            &node_path,
            "node_id,x_coord,y_coord\n0,161.567000,39.125000\n1,161.571000,39.125000\n",
        )
        .unwrap();
        fs::write(
            &link_path,
            "link_id,from_node_id,to_node_id,length,geometry\n0,0,1,345.00,\"LINESTRING (161.567000 39.125000, 161.571000 39.125000)\"\n",
        )
        .unwrap();
        let g = parse_gmns(&node_path, &link_path, Projection::default()).unwrap();
        assert_eq!(g.links[0].lanes, DEFAULT_LANES);
    }

    #[test]
    fn renamed_column_is_a_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let node_path = dir.path().join("Node.csv");
        let link_path = dir.path().join("Link.csv");
        fs::write(&node_path, "id,x_coord,y_coord\n0,161.567,39.125\n").unwrap();
        fs::write(&link_path, format!("{LINK_CSV_HEADER}\n")).unwrap();
        let err = parse_gmns(&node_path, &link_path, Projection::default()).unwrap_err();
        assert!(matches!(err, GmnsError::SchemaError { .. }), "{err}");
    }

    #[test]
    fn malformed_number_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let node_path = dir.path().join("Node.csv");
        let link_path = dir.path().join("Link.csv");
        fs::write(&node_path, "node_id,x_coord,y_coord\n0,not-a-number,39.125\n").unwrap();
        fs::write(&link_path, format!("{LINK_CSV_HEADER}\n")).unwrap();
        let err = parse_gmns(&node_path, &link_path, Projection::default()).unwrap_err();
        assert!(matches!(err, GmnsError::ParseError { .. }), "{err}");
    }

    #[test]
    fn emit_rejects_invalid_graph() {
        let proj = Projection::default();
        let mut g = NetworkGraph::new(proj);
        let planar = crate::geo::PlanarPoint::new(0.0, 0.0);
        let geo = proj.project(planar).unwrap();
        g.nodes.push(NodeRecord { node_id: 0, planar, geo });
        g.links.push(LinkRecord {
            link_id: 0,
            from_node_id: 0,
            to_node_id: 1,
            length_m: 1.0,
            lanes: 2,
            geometry: vec![geo, geo],
        });
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(emit_gmns(&g, dir.path()), Err(GmnsError::InvalidGraph(_))));
    }
}
