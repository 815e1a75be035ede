//! Deterministic SVG rendering: same graph in, same bytes out, one stroke
//! per two-way link pair and arrowheads on one-way links.
//!
//! ```bash
//! cargo run --example render_svg
//! ```

use roadgen::grid::{generate_grid, GridSpec};
use roadgen::svg::{render_svg, RenderStyle};

fn main() -> anyhow::Result<()> {
    let out_dir = std::env::temp_dir().join("roadgen-examples/render");
    std::fs::create_dir_all(&out_dir)?;

    let mut graph = generate_grid(&GridSpec::new(4, 4))?;
    // Make the top row one-way by deleting the reverse links, to show the
    // arrowhead rendering.
    graph.links.retain(|l| !(l.from_node_id < 4 && l.to_node_id < 4 && l.from_node_id > l.to_node_id));

    let style = RenderStyle {
        width: 600,
        height: 600,
        node_radius: 6.0,
        stroke_width: 3.0,
        margin: 0.08,
    };
    let svg = render_svg(&graph, &style)?;
    assert_eq!(svg, render_svg(&graph, &style)?, "rendering is byte-deterministic");

    let svg_path = out_dir.join("grid.svg");
    std::fs::write(&svg_path, &svg)?;
    println!(
        "rendered {} circles and {} strokes",
        svg.matches("<circle").count(),
        svg.matches("<line").count()
    );
    println!("{}", svg_path.display());
    Ok(())
}
