//! Deterministic SVG rendering of a [`NetworkGraph`]: one stroke per
//! undirected link pair, one circle per node, affinely fit to the canvas.

use thiserror::Error;

use crate::geo::NetworkGraph;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("cannot render an empty graph")]
    EmptyGraph,
}

/// Canvas geometry; all values in pixels except `margin`, a fraction of the
/// canvas kept clear on every side.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    pub width: u32,
    pub height: u32,
    pub node_radius: f64,
    pub stroke_width: f64,
    pub margin: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            width: 800,
            height: 800,
            node_radius: 4.0,
            stroke_width: 2.0,
            margin: 0.05,
        }
    }
}

/// Renders the graph as SVG text. Output is byte-deterministic: elements are
/// ordered by id and coordinates use fixed two-decimal formatting. Directed
/// link pairs collapse to one line; one-way links get an arrowhead marker.
pub fn render_svg(g: &NetworkGraph, style: &RenderStyle) -> Result<String, RenderError> {
    if g.nodes.is_empty() {
        return Err(RenderError::EmptyGraph);
    }

    let xs: Vec<f64> = g.nodes.iter().map(|n| n.planar.x).collect();
    let ys: Vec<f64> = g.nodes.iter().map(|n| n.planar.y).collect();
    let (min_x, max_x) = bounds(&xs);
    let (min_y, max_y) = bounds(&ys);
    let span_x = max_x - min_x;
    let span_y = max_y - min_y;
    let inner_w = f64::from(style.width) * (1.0 - 2.0 * style.margin);
    let inner_h = f64::from(style.height) * (1.0 - 2.0 * style.margin);
    let scale = match (span_x > 0.0, span_y > 0.0) {
        (true, true) => (inner_w / span_x).min(inner_h / span_y),
        (true, false) => inner_w / span_x,
        (false, true) => inner_h / span_y,
        (false, false) => 1.0,
    };
    let cx = (min_x + max_x) / 2.0;
    let cy = (min_y + max_y) / 2.0;
    let map_x = |x: f64| f64::from(style.width) / 2.0 + (x - cx) * scale;
    // Planar y points north; SVG y points down.
    let map_y = |y: f64| f64::from(style.height) / 2.0 - (y - cy) * scale;

    // Collapse directed pairs: keep one entry per unordered endpoint pair,
    // indexed by the smallest participating link id.
    let mut directions = std::collections::HashSet::new();
    for l in &g.links {
        directions.insert((l.from_node_id, l.to_node_id));
    }
    let mut strokes: Vec<(u64, u64, u64, bool)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut links_by_id: Vec<_> = g.links.iter().collect();
    links_by_id.sort_by_key(|l| l.link_id);
    for l in links_by_id {
        let key = (l.from_node_id.min(l.to_node_id), l.from_node_id.max(l.to_node_id));
        if !seen.insert(key) {
            continue;
        }
        let two_way = directions.contains(&(l.to_node_id, l.from_node_id));
        strokes.push((l.link_id, l.from_node_id, l.to_node_id, !two_way));
    }

    let any_oneway = strokes.iter().any(|s| s.3);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = style.width,
        h = style.height
    ));
    if any_oneway {
        out.push_str(
            "  <defs>\n    <marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" \
             markerWidth=\"6\" markerHeight=\"6\" orient=\"auto-start-reverse\">\n      \
             <path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#555555\"/>\n    </marker>\n  </defs>\n",
        );
    }

    let node_pos: std::collections::HashMap<u64, (f64, f64)> = g
        .nodes
        .iter()
        .map(|n| (n.node_id, (map_x(n.planar.x), map_y(n.planar.y))))
        .collect();

    for (_, from, to, oneway) in &strokes {
        let (x1, y1) = node_pos[from];
        let (x2, y2) = node_pos[to];
        let marker = if *oneway { " marker-end=\"url(#arrow)\"" } else { "" };
        out.push_str(&format!(
            "  <line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"#555555\" stroke-width=\"{sw:.2}\"{marker}/>\n",
            sw = style.stroke_width
        ));
    }

    let mut nodes: Vec<_> = g.nodes.iter().collect();
    nodes.sort_by_key(|n| n.node_id);
    for n in nodes {
        let (x, y) = node_pos[&n.node_id];
        out.push_str(&format!(
            "  <circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" fill=\"#c0392b\"/>\n",
            r = style.node_radius
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{generate_grid, GridSpec};

    fn assert_well_formed(svg: &str) {
        let mut reader = quick_xml::Reader::from_str(svg);
        loop {
            match reader.read_event() {
                Ok(quick_xml::events::Event::Eof) => break,
                Ok(_) => {}
                Err(e) => panic!("SVG is not well-formed XML: {e}"),
            }
        }
    }

    #[test]
    fn single_node_renders_centered_circle() {
        let g = generate_grid(&GridSpec::new(1, 1)).unwrap();
        let svg = render_svg(&g, &RenderStyle::default()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("cx=\"400.00\" cy=\"400.00\""));
        assert_well_formed(&svg);
    }

    #[test]
    fn grid_collapses_directed_pairs() {
        let g = generate_grid(&GridSpec::new(3, 3)).unwrap();
        let svg = render_svg(&g, &RenderStyle::default()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 9);
        assert_eq!(svg.matches("<line").count(), 12);
        assert!(!svg.contains("marker-end"), "two-way links carry no arrowheads");
        assert_well_formed(&svg);
    }

    #[test]
    fn rendering_is_byte_deterministic() {
        let g = generate_grid(&GridSpec::new(4, 2)).unwrap();
        let a = render_svg(&g, &RenderStyle::default()).unwrap();
        let b = render_svg(&g, &RenderStyle::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn one_way_links_get_arrowheads() {
        let mut g = generate_grid(&GridSpec::new(1, 2)).unwrap();
        g.links.retain(|l| l.link_id == 0);
        let svg = render_svg(&g, &RenderStyle::default()).unwrap();
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.contains("marker-end=\"url(#arrow)\""));
        assert_well_formed(&svg);
    }

    #[test]
    fn empty_graph_is_an_error() {
        let g = crate::geo::NetworkGraph::new(crate::geo::Projection::default());
        assert!(matches!(
            render_svg(&g, &RenderStyle::default()),
            Err(RenderError::EmptyGraph)
        ));
    }
}
