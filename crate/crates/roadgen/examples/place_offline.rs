//! Convert a bundled OpenStreetMap extract into a routable network without
//! touching the network: parse, filter highway ways, split at intersections,
//! and emit GMNS plus an SVG overview.
//!
//! ```bash
//! cargo run --example place_offline
//! ```

use roadgen::gmns::emit_gmns;
use roadgen::osm::{osm_to_network, parse_osm, HighwayFilter};
use roadgen::svg::{render_svg, RenderStyle};

const SAMPLE_OSM: &str = include_str!("data/riverton.osm");

fn main() -> anyhow::Result<()> {
    let out_dir = std::env::temp_dir().join("roadgen-examples/place-offline");

    let doc = parse_osm(SAMPLE_OSM.as_bytes())?;
    println!("parsed {} OSM nodes, {} ways", doc.nodes.len(), doc.ways.len());

    // The default filter keeps drivable road classes; the sample's footway
    // is dropped, lane counts and oneway tags carry through.
    let graph = osm_to_network(&doc, &HighwayFilter::default())?;
    println!("converted to {} graph nodes, {} directed links", graph.nodes.len(), graph.links.len());
    for link in graph.links.iter().take(4) {
        println!(
        "  link {}: {} -> {} ({:.1} m, {} lanes)",
            link.link_id, link.from_node_id, link.to_node_id, link.length_m, link.lanes
        );
    }

    let (node_csv, link_csv) = emit_gmns(&graph, &out_dir)?;
    let svg = render_svg(&graph, &RenderStyle::default())?;
    let svg_path = out_dir.join("network.svg");
    std::fs::write(&svg_path, svg)?;

    println!("{}", node_csv.display());
    println!("{}", link_csv.display());
    println!("{}", svg_path.display());
    Ok(())
}
