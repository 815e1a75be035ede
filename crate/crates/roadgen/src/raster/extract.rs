//! Full mask-to-graph extraction: corners, first connection round,
//! classification, pruning, and a second connection round over the
//! survivors.

use crate::geo::{LinkRecord, NetworkGraph, NodeRecord, PlanarPoint, Projection};

use super::connect::{classify_points, connect_points_with_canvas, drop_collinear_chords, prune_redundant};
use super::corners::{enforce_min_distance, shi_tomasi_corners, snap_to_road};
use super::{AdjacencyGraph, BinaryMask, ConnectParams, CornerParams, ExtractError, PointClass};

// Coarse road-mass alignment reach, then the fine distance-ridge reach.
const CENTROID_SNAP_RADIUS_PX: i64 = 3;
const CENTROID_SNAP_ITERATIONS: usize = 2;
const RIDGE_SNAP_RADIUS_PX: i64 = 2;
// Twin maxima around one junction can end up closer than the detector's own
// suppression distance after snapping; suppress again with headroom.
const POST_SNAP_SUPPRESSION_FACTOR: f64 = 1.25;
// Stubs shorter than this cannot be genuine links; they bridge leftover twin
// corners around one junction.
const CONTRACT_FACTOR: f64 = 1.2;

/// Iterated road-mass centroid; a coarse first alignment step whose result
/// feeds the distance-ridge snap.
fn centroid_snap(mask: &BinaryMask, points: &[PlanarPoint], radius: i64, iterations: usize) -> Vec<PlanarPoint> {
    points
        .iter()
        .map(|&p| {
            let mut current = p;
            for _ in 0..iterations {
                let cx = current.x.round() as i64;
                let cy = current.y.round() as i64;
                let mut sum_x = 0.0;
                let mut sum_y = 0.0;
                let mut count = 0usize;
                for y in cy - radius..=cy + radius {
                    for x in cx - radius..=cx + radius {
                        if mask.in_bounds(x, y) && mask.get(x as usize, y as usize) {
                            sum_x += x as f64;
                            sum_y += y as f64;
                            count += 1;
                        }
                    }
                }
                if count == 0 {
                    break;
                }
                current = PlanarPoint::new(sum_x / count as f64, sum_y / count as f64);
            }
            current
        })
        .collect()
}

/// Fuses nodes joined by an edge shorter than `min_len` into their midpoint.
/// A junction spawns one response maximum per concave quadrant; suppression
/// keeps the survivors apart, but two of them can still bracket one
/// junction, connected by a stub of road. No genuine link is that short, so
/// contracting the stub recovers a single node at the junction center.
fn contract_short_edges(adj: &AdjacencyGraph, min_len: f64) -> AdjacencyGraph {
    let mut points = adj.points.clone();
    let mut edges = adj.edges.clone();
    loop {
        let shortest = edges
            .iter()
            .map(|&(a, b)| (points[a].distance(&points[b]), a, b))
            .filter(|&(len, _, _)| len < min_len)
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let Some((_, keep, fold)) = shortest else { break };
        points[keep] = PlanarPoint::new(
            (points[keep].x + points[fold].x) / 2.0,
            (points[keep].y + points[fold].y) / 2.0,
        );
        edges = edges
            .iter()
            .filter_map(|&(a, b)| {
                let a = if a == fold { keep } else { a };
                let b = if b == fold { keep } else { b };
                (a != b).then_some((a.min(b), a.max(b)))
            })
            .collect();
    }

    // Folded points keep their slots with no edges; graph assembly drops
    // degree-0 points anyway.
    AdjacencyGraph { points, edges }
}

/// Intermediate products of [`extract_network`], kept for debugging dumps.
#[derive(Debug, Clone)]
pub struct ExtractStages {
    pub corners: Vec<PlanarPoint>,
    pub first_round: AdjacencyGraph,
    pub first_round_canvas: BinaryMask,
    pub classes: Vec<PointClass>,
    pub pruned: AdjacencyGraph,
    pub final_round: AdjacencyGraph,
}

/// Extracts a road graph from a binary mask. Node positions are pixel
/// coordinates; geographic positions come from `projection`; link lengths
/// are pixel lengths scaled by `m_per_px`.
pub fn extract_network(
    mask: &BinaryMask,
    corner: &CornerParams,
    connect: &ConnectParams,
    projection: Projection,
    m_per_px: f64,
) -> Result<NetworkGraph, ExtractError> {
    extract_network_stages(mask, corner, connect, projection, m_per_px).map(|(g, _)| g)
}

/// As [`extract_network`], additionally returning every pipeline stage.
pub fn extract_network_stages(
    mask: &BinaryMask,
    corner: &CornerParams,
    connect: &ConnectParams,
    projection: Projection,
    m_per_px: f64,
) -> Result<(NetworkGraph, ExtractStages), ExtractError> {
    let detected = shi_tomasi_corners(mask, corner);
    if detected.is_empty() {
        return Err(ExtractError::NoCornersFound);
    }
    // Response maxima sit slightly off the stroke centerline; pull them onto
    // the road mass, then onto the distance ridge, before validating any
    // line against the mask.
    let centered = centroid_snap(mask, &detected, CENTROID_SNAP_RADIUS_PX, CENTROID_SNAP_ITERATIONS);
    let snapped = snap_to_road(mask, &centered, RIDGE_SNAP_RADIUS_PX);
    let corners = enforce_min_distance(&snapped, corner.min_distance * POST_SNAP_SUPPRESSION_FACTOR);

    let (connected, first_round_canvas) = connect_points_with_canvas(mask, &corners, connect);
    let first_round = drop_collinear_chords(&connected, connect.collinearity_eps);
    let classes = classify_points(&first_round);
    let pruned = prune_redundant(&first_round, &classes, connect.collinearity_eps);
    // The second round re-validates pairs of survivors against the mask on a
    // fresh canvas. Its accepted edges are merged with the bridged edges the
    // pruning pass produced: both are road-backed, and the bridged ones keep
    // long links whose direct re-validation is hypersensitive to endpoint
    // placement. The combined graph then gets the same chord and redundancy
    // cleanup, and junction twins collapse into single nodes.
    let (reconnected, _) = connect_points_with_canvas(mask, &pruned.points, connect);
    let mut combined = reconnected;
    combined.edges.extend(pruned.edges.iter().copied());
    let refiltered = drop_collinear_chords(&combined, connect.collinearity_eps);
    let repruned = prune_redundant(&refiltered, &classify_points(&refiltered), connect.collinearity_eps);
    let final_round = contract_short_edges(&repruned, CONTRACT_FACTOR * corner.min_distance);

    // Points the second round left unconnected carry no road information.
    let degrees = final_round.degrees();
    let mut remap = vec![usize::MAX; final_round.points.len()];
    let mut graph = NetworkGraph::new(projection);
    for (i, &point) in final_round.points.iter().enumerate() {
        if degrees[i] == 0 {
            continue;
        }
        remap[i] = graph.nodes.len();
        graph.nodes.push(NodeRecord {
            node_id: graph.nodes.len() as u64,
            planar: point,
            geo: projection.project(point)?,
        });
    }

    let mut link_id = 0u64;
    for &(a, b) in &final_round.edges {
        let (ai, bi) = (remap[a], remap[b]);
        let length_m =
            crate::geo::quantize_length_m(final_round.points[a].distance(&final_round.points[b]) * m_per_px);
        for (from, to) in [(ai, bi), (bi, ai)] {
            graph.links.push(LinkRecord {
                link_id,
                from_node_id: graph.nodes[from].node_id,
                to_node_id: graph.nodes[to].node_id,
                length_m,
                lanes: 2,
                geometry: vec![graph.nodes[from].geo, graph.nodes[to].geo],
            });
            link_id += 1;
        }
    }

    let stages = ExtractStages {
        corners,
        first_round,
        first_round_canvas,
        classes,
        pruned,
        final_round,
    };
    Ok((graph, stages))
}
