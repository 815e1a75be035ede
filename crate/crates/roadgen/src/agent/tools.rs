//! The default tool registry: the four generation pipelines exposed as
//! routable tools. Each invocation writes into its own numbered directory
//! and reports the produced file paths as the observation.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde_json::{Map, Value};

use crate::geo::{GeoPoint, Projection};
use crate::gmns::emit_gmns;
use crate::grid::{generate_grid, GridSpec};
use crate::osm::{self, Geocoder, HighwayFilter};
use crate::raster::{extract_network, preprocess_sketch, BinaryMask, ConnectParams, CornerParams};
use crate::svg::{render_svg, RenderStyle};

use super::{AgentError, ArgSpec, ToolDescriptor, ToolRegistry};

/// Shared state for the default tools.
pub struct ToolContext {
    pub out_dir: PathBuf,
    pub projection: Projection,
    /// Geocoding backend; `place` reports an error observation when absent.
    pub geocoder: Option<Box<dyn Geocoder + Send + Sync>>,
    /// OSM fetch endpoint; `place` reports an error observation when absent.
    pub osm_endpoint: Option<String>,
    pub fetch_timeout: Duration,
    pub fetch_cap_bytes: u64,
    invocations: AtomicUsize,
}

impl ToolContext {
    pub fn new(out_dir: PathBuf) -> Self {
        Self {
            out_dir,
            projection: Projection::default(),
            geocoder: None,
            osm_endpoint: None,
            fetch_timeout: Duration::from_secs(30),
            fetch_cap_bytes: osm::DEFAULT_FETCH_CAP_BYTES,
            invocations: AtomicUsize::new(0),
        }
    }

    fn next_dir(&self, tool: &str) -> PathBuf {
        let n = self.invocations.fetch_add(1, Ordering::SeqCst);
        self.out_dir.join(format!("{tool}-{n}"))
    }
}

fn arg_u64(args: &Map<String, Value>, name: &str) -> Option<u64> {
    match args.get(name)? {
        Value::Number(n) => n.as_u64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn arg_f64(args: &Map<String, Value>, name: &str) -> Option<f64> {
    match args.get(name)? {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn arg_str<'a>(args: &'a Map<String, Value>, name: &str) -> Option<&'a str> {
    args.get(name).and_then(Value::as_str)
}

fn emit_outputs(graph: &crate::geo::NetworkGraph, dir: &std::path::Path) -> Result<String, String> {
    let (node_path, link_path) = emit_gmns(graph, dir).map_err(|e| format!("error: {e}"))?;
    let svg = render_svg(graph, &RenderStyle::default()).map_err(|e| format!("error: {e}"))?;
    let svg_path = node_path.with_file_name("network.svg");
    std::fs::write(&svg_path, svg).map_err(|e| format!("error: failed to write SVG: {e}"))?;
    Ok(format!(
        "{}\n{}\n{}",
        node_path.display(),
        link_path.display(),
        svg_path.display()
    ))
}

fn load_mask(path: &str) -> Result<BinaryMask, String> {
    let img = image::open(path)
        .map_err(|e| format!("error: cannot open image {path:?}: {e}"))?
        .to_luma8();
    Ok(BinaryMask::from_gray(&img))
}

/// Builds the registry of the four generation tools over a shared context.
pub fn default_registry(ctx: ToolContext) -> Result<ToolRegistry, AgentError> {
    let ctx = Arc::new(ctx);
    let mut registry = ToolRegistry::new();

    let c = Arc::clone(&ctx);
    registry.register(
        ToolDescriptor {
            name: "grid".into(),
            description: "Generates a regular grid road network with the requested number of \
                          rows and columns, writes GMNS Node.csv/Link.csv plus an SVG overview, \
                          and returns their paths. Use for rectangular or lattice networks \
                          described by counts."
                .into(),
            args: vec![
                ArgSpec::required("rows", "integer"),
                ArgSpec::required("cols", "integer"),
                ArgSpec::optional("lat", "number"),
                ArgSpec::optional("lon", "number"),
                ArgSpec::optional("scale", "number"),
            ],
        },
        Box::new(move |args| {
            let rows = arg_u64(args, "rows").ok_or("error: missing or invalid integer argument rows")?;
            let cols = arg_u64(args, "cols").ok_or("error: missing or invalid integer argument cols")?;
            let rows = u32::try_from(rows).map_err(|_| "error: rows out of range".to_string())?;
            let cols = u32::try_from(cols).map_err(|_| "error: cols out of range".to_string())?;
            let mut projection = c.projection;
            if let (Some(lat), Some(lon)) = (arg_f64(args, "lat"), arg_f64(args, "lon")) {
                projection.anchor = GeoPoint::new(lon, lat).map_err(|e| format!("error: {e}"))?;
            }
            if let Some(scale) = arg_f64(args, "scale") {
                projection = Projection::new(projection.anchor, scale).map_err(|e| format!("error: {e}"))?;
            }
            let spec = GridSpec::new(rows, cols).with_projection(projection);
            let graph = generate_grid(&spec).map_err(|e| format!("error: {e}"))?;
            emit_outputs(&graph, &c.next_dir("grid"))
        }),
    )?;

    let c = Arc::clone(&ctx);
    registry.register(
        ToolDescriptor {
            name: "place".into(),
            description: "Builds the road network around a named real-world location: geocodes \
                          the name, downloads OpenStreetMap data within the search radius in \
                          meters, converts it to GMNS Node.csv/Link.csv with an SVG overview, \
                          and returns the file paths. Use when the user names a city, district, \
                          or address."
                .into(),
            args: vec![
                ArgSpec::required("name", "text"),
                ArgSpec::optional("radius_m", "number"),
            ],
        },
        Box::new(move |args| {
            let name = arg_str(args, "name").ok_or("error: missing text argument name")?;
            let radius = arg_f64(args, "radius_m").unwrap_or(osm::DEFAULT_RADIUS_M);
            let geocoder = c
                .geocoder
                .as_deref()
                .ok_or("error: place tool is not configured (no geocoder endpoint)")?;
            let endpoint = c
                .osm_endpoint
                .as_deref()
                .ok_or("error: place tool is not configured (no OSM endpoint)")?;
            let located = osm::geocode(name, geocoder).map_err(|e| format!("error: {e}"))?;
            let bbox = osm::bbox_around(located.point, radius).map_err(|e| format!("error: {e}"))?;
            let bytes = osm::fetch_osm(&bbox, endpoint, c.fetch_timeout, c.fetch_cap_bytes)
                .map_err(|e| format!("error: {e}"))?;
            let dir = c.next_dir("place");
            std::fs::create_dir_all(&dir).map_err(|e| format!("error: {e}"))?;
            let raw_path = dir.join("source.osm");
            std::fs::write(&raw_path, &bytes).map_err(|e| format!("error: {e}"))?;
            let doc = osm::parse_osm(&bytes).map_err(|e| format!("error: {e}"))?;
            let projection =
                Projection::new(located.point, c.projection.scale).map_err(|e| format!("error: {e}"))?;
            let graph = osm::osm_to_network_with(&doc, &HighwayFilter::default(), projection)
                .map_err(|e| format!("error: {e}"))?;
            let outputs = emit_outputs(&graph, &dir)?;
            Ok(format!("{}\n{}", raw_path.display(), outputs))
        }),
    )?;

    let c = Arc::clone(&ctx);
    registry.register(
        ToolDescriptor {
            name: "from-image".into(),
            description: "Extracts a road network from a binary road-mask image file (white \
                          pixels are road, e.g. satellite segmentation output), writes GMNS \
                          Node.csv/Link.csv plus an SVG overview, and returns their paths. Use \
                          when the user supplies a segmented or binary road image."
                .into(),
            args: vec![
                ArgSpec::required("mask", "path"),
                ArgSpec::optional("m_per_px", "number"),
            ],
        },
        Box::new(move |args| {
            let path = arg_str(args, "mask").ok_or("error: missing path argument mask")?;
            let m_per_px = arg_f64(args, "m_per_px").unwrap_or(1.0);
            let mask = load_mask(path)?;
            let graph = extract_network(
                &mask,
                &CornerParams::default(),
                &ConnectParams::default(),
                c.projection,
                m_per_px,
            )
            .map_err(|e| format!("error: {e}"))?;
            emit_outputs(&graph, &c.next_dir("from-image"))
        }),
    )?;

    let c = Arc::clone(&ctx);
    registry.register(
        ToolDescriptor {
            name: "from-sketch".into(),
            description: "Extracts a road network from a hand-drawn sketch image: binarizes the \
                          drawing (denoise, threshold, gap filling), recovers the stroke graph, \
                          writes GMNS Node.csv/Link.csv plus an SVG overview, and returns their \
                          paths. Use when the user supplies a drawing or photographed sketch."
                .into(),
            args: vec![ArgSpec::required("image", "path")],
        },
        Box::new(move |args| {
            let path = arg_str(args, "image").ok_or("error: missing path argument image")?;
            let img = image::open(path)
                .map_err(|e| format!("error: cannot open image {path:?}: {e}"))?
                .to_luma8();
            let mask = preprocess_sketch(&img).map_err(|e| format!("error: {e}"))?;
            let graph = extract_network(
                &mask,
                &CornerParams::default(),
                &ConnectParams::default(),
                c.projection,
                1.0,
            )
            .map_err(|e| format!("error: {e}"))?;
            emit_outputs(&graph, &c.next_dir("from-sketch"))
        }),
    )?;

    Ok(registry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{build_system_prompt, run_session, ScriptedModel, SessionOutcome};

    #[test]
    fn default_prompt_enumerates_the_four_tools() {
        let dir = tempfile::tempdir().unwrap();
        let registry = default_registry(ToolContext::new(dir.path().to_path_buf())).unwrap();
        let prompt = build_system_prompt(registry.descriptors()).unwrap();
        for tool in ["grid", "place", "from-image", "from-sketch"] {
            assert!(prompt.contains(&format!("- {tool}: ")), "missing {tool}");
        }
    }

    #[test]
    fn grid_tool_produces_files() {
        let dir = tempfile::tempdir().unwrap();
        let registry = default_registry(ToolContext::new(dir.path().to_path_buf())).unwrap();
        let mut args = Map::new();
        args.insert("rows".into(), Value::from(2));
        args.insert("cols".into(), Value::from(3));
        let observation = registry.invoke("grid", &args).unwrap().unwrap();
        for line in observation.lines() {
            assert!(std::path::Path::new(line).is_file(), "{line} missing");
        }
    }

    #[test]
    fn unconfigured_place_reports_error_observation() {
        let dir = tempfile::tempdir().unwrap();
        let registry = default_registry(ToolContext::new(dir.path().to_path_buf())).unwrap();
        let mut args = Map::new();
        args.insert("name".into(), Value::from("Springfield"));
        let result = registry.invoke("place", &args).unwrap();
        assert!(result.unwrap_err().contains("not configured"));
    }

    #[test]
    fn scripted_session_against_real_tools() {
        let dir = tempfile::tempdir().unwrap();
        let registry = default_registry(ToolContext::new(dir.path().to_path_buf())).unwrap();
        let model = ScriptedModel::new([
            r#"{"action":"grid","args":{"rows":3,"cols":4}}"#,
            r#"{"action":"final","answer":"grid written"}"#,
        ]);
        let log = run_session("please build a 3x4 grid", &registry, &model, 5).unwrap();
        assert_eq!(log.outcome, SessionOutcome::Final("grid written".into()));
        assert_eq!(log.step_count(), 1);
        assert!(log.steps[0].observation.contains("Node.csv"));
    }
}
