//! Point connection over a road mask: error-decrease line validation,
//! degree classification, and collinearity pruning.
//!
//! Connection draws candidate segments onto a reconstruction canvas and
//! accepts a segment only when doing so strictly reduces the squared error
//! against the source mask. Since canvas pixels only ever switch from 0 to
//! 1, that reduction equals (#newly set road pixels) - (#newly set
//! background pixels), so the check runs on the newly covered pixels alone.

use std::collections::{BTreeSet, HashSet};

use crate::geo::PlanarPoint;

use super::{BinaryMask, ExtractError};

/// Knobs for the connection rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectParams {
    /// Line raster half-width in pixels; 1 gives a 3-px stroke.
    pub thickness: u32,
    /// Triangle-inequality excess below which a degree-2 point is redundant.
    pub collinearity_eps: f64,
    /// Candidate pair cutoff; `None` means the image diagonal.
    pub max_pair_distance: Option<f64>,
}

impl Default for ConnectParams {
    fn default() -> Self {
        Self {
            thickness: 1,
            collinearity_eps: 2.0,
            max_pair_distance: None,
        }
    }
}

/// Undirected graph over candidate points; edges hold index pairs (i < j).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdjacencyGraph {
    pub points: Vec<PlanarPoint>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl AdjacencyGraph {
    pub fn degrees(&self) -> Vec<usize> {
        let mut degrees = vec![0; self.points.len()];
        for &(a, b) in &self.edges {
            degrees[a] += 1;
            degrees[b] += 1;
        }
        degrees
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    /// Intersection or endpoint: connection count differs from 2.
    Important,
    /// Pass-through point with exactly two connections.
    NonImportant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointClass {
    pub point: PlanarPoint,
    pub degree: usize,
    pub kind: PointKind,
}

/// Integer line rasterization between two pixels, inclusive of both ends.
pub fn bresenham(p: (i64, i64), q: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = p;
    let (x1, y1) = q;
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let sx = if x < x1 { 1 } else { -1 };
    let sy = if y < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut pixels = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        pixels.push((x, y));
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    pixels
}

fn round_to_pixel(p: PlanarPoint) -> (i64, i64) {
    (p.x.round() as i64, p.y.round() as i64)
}

/// Unique in-bounds pixels covered by the segment p-q dilated to the given
/// half-width.
pub fn segment_pixels(
    width: usize,
    height: usize,
    p: PlanarPoint,
    q: PlanarPoint,
    thickness: u32,
) -> Result<Vec<(usize, usize)>, ExtractError> {
    let pi = round_to_pixel(p);
    let qi = round_to_pixel(q);
    for (x, y) in [pi, qi] {
        if x < 0 || y < 0 || x as usize >= width || y as usize >= height {
            return Err(ExtractError::OutOfBounds { x, y, width, height });
        }
    }
    if pi == qi {
        return Err(ExtractError::DegenerateSegment);
    }
    let t = i64::from(thickness);
    let mut seen = HashSet::new();
    let mut pixels = Vec::new();
    for (cx, cy) in bresenham(pi, qi) {
        for dy in -t..=t {
            for dx in -t..=t {
                let x = cx + dx;
                let y = cy + dy;
                if x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height && seen.insert((x, y)) {
                    pixels.push((x as usize, y as usize));
                }
            }
        }
    }
    Ok(pixels)
}

/// Signed squared-error change from drawing segment p-q onto `canvas`,
/// measured against `mask`. Negative means the drawing improves the
/// reconstruction.
pub fn segment_gain(
    mask: &BinaryMask,
    canvas: &BinaryMask,
    p: PlanarPoint,
    q: PlanarPoint,
    thickness: u32,
) -> Result<i64, ExtractError> {
    let mut gain = 0i64;
    for (x, y) in segment_pixels(mask.width(), mask.height(), p, q, thickness)? {
        if canvas.get(x, y) {
            continue; // already set; squared error unchanged
        }
        gain += if mask.get(x, y) { -1 } else { 1 };
    }
    Ok(gain)
}

fn stamp_segment(canvas: &mut BinaryMask, p: PlanarPoint, q: PlanarPoint, thickness: u32) {
    if let Ok(pixels) = segment_pixels(canvas.width(), canvas.height(), p, q, thickness) {
        for (x, y) in pixels {
            canvas.set(x, y, true);
        }
    }
}

/// Draws an undirected edge set onto a fresh canvas; used for staging dumps
/// and for constructing synthetic fixtures.
pub fn rasterize_edges(
    width: usize,
    height: usize,
    points: &[PlanarPoint],
    edges: &BTreeSet<(usize, usize)>,
    thickness: u32,
) -> BinaryMask {
    let mut canvas = BinaryMask::new(width, height);
    for &(a, b) in edges {
        stamp_segment(&mut canvas, points[a], points[b], thickness);
    }
    canvas
}

/// Greedy first/second-round connection: candidate pairs in ascending
/// distance order, accepted when the reconstruction error strictly drops.
pub fn connect_points(mask: &BinaryMask, points: &[PlanarPoint], params: &ConnectParams) -> AdjacencyGraph {
    connect_points_with_canvas(mask, points, params).0
}

pub(crate) fn connect_points_with_canvas(
    mask: &BinaryMask,
    points: &[PlanarPoint],
    params: &ConnectParams,
) -> (AdjacencyGraph, BinaryMask) {
    let mut graph = AdjacencyGraph {
        points: points.to_vec(),
        edges: BTreeSet::new(),
    };
    let mut canvas = BinaryMask::new(mask.width(), mask.height());
    if points.len() < 2 {
        return (graph, canvas);
    }

    let diag = ((mask.width() * mask.width() + mask.height() * mask.height()) as f64).sqrt();
    let cutoff = params.max_pair_distance.unwrap_or(diag);

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = points[i].distance(&points[j]);
            if d <= cutoff {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    for (_, i, j) in pairs {
        match segment_gain(mask, &canvas, points[i], points[j], params.thickness) {
            Ok(gain) if gain < 0 => {
                graph.edges.insert((i, j));
                stamp_segment(&mut canvas, points[i], points[j], params.thickness);
            }
            _ => {}
        }
    }
    (graph, canvas)
}

/// Removes chord edges the rest of the graph already explains: an edge
/// (a, b) is dropped when the remaining edges connect a to b along a route
/// whose length exceeds the straight-line distance by less than `eps`.
/// Rasterization slivers let straight-through chords pass the error test at
/// junctions and along stair-stepped diagonals; those chords retrace
/// existing geometry and carry no information. Edges are examined longest
/// first so chords are judged against the short segments beneath them; a
/// removal never disconnects the graph because the covering route stays.
pub fn drop_collinear_chords(adj: &AdjacencyGraph, eps: f64) -> AdjacencyGraph {
    let mut edges = adj.edges.clone();
    let mut by_length: Vec<(f64, usize, usize)> = edges
        .iter()
        .map(|&(a, b)| (adj.points[a].distance(&adj.points[b]), a, b))
        .collect();
    by_length.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    for &(direct, a, b) in &by_length {
        edges.remove(&(a, b));
        let covered = shortest_path_within(&adj.points, &edges, a, b, direct + eps)
            .is_some_and(|len| len - direct < eps);
        if !covered {
            edges.insert((a, b));
        }
    }
    AdjacencyGraph {
        points: adj.points.clone(),
        edges,
    }
}

/// Dijkstra with a length cutoff; small graphs, so the quadratic scan is
/// fine.
fn shortest_path_within(
    points: &[PlanarPoint],
    edges: &BTreeSet<(usize, usize)>,
    from: usize,
    to: usize,
    cutoff: f64,
) -> Option<f64> {
    let n = points.len();
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        let d = points[a].distance(&points[b]);
        adjacency[a].push((b, d));
        adjacency[b].push((a, d));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[from] = 0.0;
    loop {
        let mut current = None;
        let mut best = f64::INFINITY;
        for (v, &d) in dist.iter().enumerate() {
            if !done[v] && d < best {
                best = d;
                current = Some(v);
            }
        }
        let Some(u) = current else { break };
        if best > cutoff {
            break;
        }
        if u == to {
            return Some(best);
        }
        done[u] = true;
        for &(w, d) in &adjacency[u] {
            if best + d < dist[w] {
                dist[w] = best + d;
            }
        }
    }
    None
}

/// Applies the degree rule: connection count != 2 marks an Important point.
pub fn classify_points(adj: &AdjacencyGraph) -> Vec<PointClass> {
    adj.degrees()
        .into_iter()
        .zip(adj.points.iter())
        .map(|(degree, &point)| PointClass {
            point,
            degree,
            kind: if degree == 2 { PointKind::NonImportant } else { PointKind::Important },
        })
        .collect()
}

/// Removes degree-2 points that lie on the straight line between their two
/// neighbors (triangle-inequality excess below `eps`), bridging the
/// neighbors directly. Runs to a fixpoint so chains of redundant points
/// collapse; surviving points are re-indexed in their original order.
pub fn prune_redundant(adj: &AdjacencyGraph, classes: &[PointClass], eps: f64) -> AdjacencyGraph {
    debug_assert_eq!(classes.len(), adj.points.len());
    debug_assert!(adj
        .degrees()
        .iter()
        .zip(classes.iter())
        .all(|(d, c)| *d == c.degree));

    let points = &adj.points;
    let mut edges = adj.edges.clone();
    let mut alive = vec![true; points.len()];

    loop {
        let mut degrees = vec![0usize; points.len()];
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
        for &(a, b) in &edges {
            degrees[a] += 1;
            degrees[b] += 1;
            neighbors[a].push(b);
            neighbors[b].push(a);
        }

        let mut removed = None;
        for r in 0..points.len() {
            if !alive[r] || degrees[r] != 2 {
                continue;
            }
            let (p, q) = (neighbors[r][0], neighbors[r][1]);
            let excess = points[p].distance(&points[r]) + points[r].distance(&points[q])
                - points[p].distance(&points[q]);
            if excess < eps {
                removed = Some((r, p, q));
                break;
            }
        }

        match removed {
            Some((r, p, q)) => {
                edges.remove(&(r.min(p), r.max(p)));
                edges.remove(&(r.min(q), r.max(q)));
                edges.insert((p.min(q), p.max(q)));
                alive[r] = false;
            }
            None => break,
        }
    }

    let mut remap = vec![usize::MAX; points.len()];
    let mut new_points = Vec::new();
    for (i, &keep) in alive.iter().enumerate() {
        if keep {
            remap[i] = new_points.len();
            new_points.push(points[i]);
        }
    }
    let new_edges = edges
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (remap[a], remap[b]);
            (a.min(b), a.max(b))
        })
        .collect();
    AdjacencyGraph {
        points: new_points,
        edges: new_edges,
    }
}
