//! Turn a noisy grayscale "hand-drawn" sketch into a binary mask (resize,
//! median denoise, Otsu threshold, gap closing) and extract its network.
//!
//! ```bash
//! cargo run --example sketch_preprocess
//! ```

use image::{GrayImage, Luma};
use roadgen::geo::Projection;
use roadgen::gmns::emit_gmns;
use roadgen::raster::{extract_network, iou, preprocess_sketch, BinaryMask, ConnectParams, CornerParams};

fn main() -> anyhow::Result<()> {
    let out_dir = std::env::temp_dir().join("roadgen-examples/sketch");
    std::fs::create_dir_all(&out_dir)?;

    // Simulate a pen sketch: dark strokes on paper, salt-and-pepper noise,
    // and a couple of small gaps where the pen skipped.
    let mut sketch = GrayImage::from_pixel(512, 512, Luma([235]));
    let mut draw = |from: (i64, i64), to: (i64, i64)| {
        for (x, y) in roadgen::raster::bresenham(from, to) {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (px, py) = (x + dx, y + dy);
                    if px >= 0 && py >= 0 && px < 512 && py < 512 && (px + py) % 97 != 0 {
                        sketch.put_pixel(px as u32, py as u32, Luma([25]));
                    }
                }
            }
        }
    };
    draw((60, 60), (60, 440));
    draw((60, 440), (440, 440));
    draw((60, 60), (440, 60));
    draw((440, 60), (440, 440));
    draw((60, 250), (440, 250));
    // Pepper noise on the paper.
    for i in 0..400u32 {
        let x = (i * 7919) % 512;
        let y = (i * 104729) % 512;
        sketch.put_pixel(x, y, Luma([90]));
    }

    let mask = preprocess_sketch(&sketch)?;
    println!("binarized sketch: {} road pixels", mask.count_ones());

    // How well does the binary mask match a clean rendering of the strokes?
    let clean = BinaryMask::from_fn(512, 512, |x, y| {
        let on_v = |cx: usize| x.abs_diff(cx) <= 1 && (59..=441).contains(&y);
        let on_h = |cy: usize| y.abs_diff(cy) <= 1 && (59..=441).contains(&x);
        on_v(60) || on_v(440) || on_h(60) || on_h(440) || on_h(250)
    });
    println!("IoU against the clean strokes: {:.3}", iou(&mask, &clean)?);

    let graph = extract_network(
        &mask,
        &CornerParams::default(),
        &ConnectParams::default(),
        Projection::default(),
        1.0,
    )?;
    println!("extracted {} nodes, {} links", graph.nodes.len(), graph.links.len());

    let (node_csv, link_csv) = emit_gmns(&graph, &out_dir)?;
    let mask_path = out_dir.join("binarized.png");
    mask.to_gray().save(&mask_path)?;
    println!("{}", node_csv.display());
    println!("{}", link_csv.display());
    println!("{}", mask_path.display());
    Ok(())
}
