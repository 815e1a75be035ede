//! Extract a road network from a binary mask: corner detection, two rounds
//! of error-decrease line connection, and redundancy pruning.
//!
//! The mask here is drawn in memory (an H-shaped road layout); pass your own
//! segmentation output through the `from-image` subcommand instead.
//!
//! ```bash
//! cargo run --example image_extract
//! ```

use roadgen::geo::Projection;
use roadgen::gmns::emit_gmns;
use roadgen::raster::{extract_network_stages, BinaryMask, ConnectParams, CornerParams};
use roadgen::svg::{render_svg, RenderStyle};

fn stroke(mask: &mut BinaryMask, from: (usize, usize), to: (usize, usize)) {
    for (x, y) in roadgen::raster::bresenham((from.0 as i64, from.1 as i64), (to.0 as i64, to.1 as i64)) {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if mask.in_bounds(x + dx, y + dy) {
                    mask.set((x + dx) as usize, (y + dy) as usize, true);
                }
            }
        }
    }
}

fn main() -> anyhow::Result<()> {
    let out_dir = std::env::temp_dir().join("roadgen-examples/image-extract");

    let mut mask = BinaryMask::new(256, 256);
    stroke(&mut mask, (40, 40), (40, 216));
    stroke(&mut mask, (216, 40), (216, 216));
    stroke(&mut mask, (40, 128), (216, 128));

    let (graph, stages) = extract_network_stages(
        &mask,
        &CornerParams::default(),
        &ConnectParams::default(),
        Projection::default(),
        2.0, // two meters per pixel
    )?;
    println!(
        "detected {} corners -> {} first-round edges -> {} nodes, {} links",
        stages.corners.len(),
        stages.first_round.edges.len(),
        graph.nodes.len(),
        graph.links.len()
    );

    let (node_csv, link_csv) = emit_gmns(&graph, &out_dir)?;
    let svg = render_svg(&graph, &RenderStyle::default())?;
    let svg_path = out_dir.join("network.svg");
    std::fs::write(&svg_path, svg)?;
    let mask_path = out_dir.join("mask.png");
    mask.to_gray().save(&mask_path)?;

    println!("{}", node_csv.display());
    println!("{}", link_csv.display());
    println!("{}", svg_path.display());
    println!("{}", mask_path.display());
    Ok(())
}
