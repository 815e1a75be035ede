//! Generate a regular grid network and emit GMNS CSV plus an SVG overview.
//!
//! ```bash
//! cargo run --example grid
//! ```

use roadgen::geo::{validate_graph, GeoPoint, Projection};
use roadgen::gmns::emit_gmns;
use roadgen::grid::{generate_grid, GridSpec};
use roadgen::svg::{render_svg, RenderStyle};

fn main() -> anyhow::Result<()> {
    let out_dir = std::env::temp_dir().join("roadgen-examples/grid");

    // 5 rows x 7 columns, centered on a custom anchor, 0.004 degrees per
    // planar unit (roughly 445 m between neighbors).
    let projection = Projection::new(GeoPoint::new(13.405, 52.52)?, 0.004)?;
    let spec = GridSpec::new(5, 7).with_projection(projection);
    let graph = generate_grid(&spec)?;

    println!(
        "generated {} nodes and {} directed links; validation: {}",
        graph.nodes.len(),
        graph.links.len(),
        validate_graph(&graph)
    );

    let (node_csv, link_csv) = emit_gmns(&graph, &out_dir)?;
    let svg = render_svg(&graph, &RenderStyle::default())?;
    let svg_path = out_dir.join("network.svg");
    std::fs::write(&svg_path, svg)?;

    println!("{}", node_csv.display());
    println!("{}", link_csv.display());
    println!("{}", svg_path.display());
    Ok(())
}
