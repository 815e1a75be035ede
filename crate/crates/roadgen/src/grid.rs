//! Regular grid network generation: an N x M lattice with unit planar
//! spacing, centered on the projection anchor.

use thiserror::Error;

use crate::geo::{haversine_m, GeoError, LinkRecord, NetworkGraph, NodeRecord, PlanarPoint, Projection};

/// Guard against runaway output sizes; callers can raise it.
pub const DEFAULT_MAX_CELLS: u64 = 10_000;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid grid spec: {0}")]
    SpecInvalid(String),
    #[error(transparent)]
    Projection(#[from] GeoError),
}

/// Dimensions and placement of a grid network.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub rows: u32,
    pub cols: u32,
    pub projection: Projection,
    /// Upper bound on `rows * cols`.
    pub max_cells: u64,
}

impl GridSpec {
    pub fn new(rows: u32, cols: u32) -> Self {
        Self {
            rows,
            cols,
            projection: Projection::default(),
            max_cells: DEFAULT_MAX_CELLS,
        }
    }

    pub fn with_projection(mut self, projection: Projection) -> Self {
        self.projection = projection;
        self
    }

    fn check(&self) -> Result<(), GridError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(GridError::SpecInvalid("rows and cols must be at least 1".into()));
        }
        let cells = u64::from(self.rows) * u64::from(self.cols);
        if cells > self.max_cells {
            return Err(GridError::SpecInvalid(format!(
                "{} x {} = {cells} cells exceeds the limit of {}",
                self.rows, self.cols, self.max_cells
            )));
        }
        Ok(())
    }
}

/// Builds the grid graph: `rows * cols` nodes, two directed links per
/// 4-neighborhood adjacency, two lanes each, lengths from the geodesic
/// distance between projected endpoints.
pub fn generate_grid(spec: &GridSpec) -> Result<NetworkGraph, GridError> {
    spec.check()?;
    let (rows, cols) = (spec.rows as u64, spec.cols as u64);
    let mut graph = NetworkGraph::new(spec.projection);

    for i in 0..rows {
        for j in 0..cols {
            let planar = PlanarPoint::new(
                j as f64 - (cols as f64 - 1.0) / 2.0,
                i as f64 - (rows as f64 - 1.0) / 2.0,
            );
            graph.nodes.push(NodeRecord {
                node_id: i * cols + j,
                planar,
                geo: spec.projection.project(planar)?,
            });
        }
    }

    let mut link_id = 0;
    let mut push_pair = |graph: &mut NetworkGraph, a: u64, b: u64| {
        let (from, to) = (&graph.nodes[a as usize], &graph.nodes[b as usize]);
        let length_m = crate::geo::quantize_length_m(haversine_m(from.geo, to.geo));
        for (from, to) in [(from, to), (to, from)] {
            graph.links.push(LinkRecord {
                link_id,
                from_node_id: from.node_id,
                to_node_id: to.node_id,
                length_m,
                lanes: 2,
                geometry: vec![from.geo, to.geo],
            });
            link_id += 1;
        }
    };

    for i in 0..rows {
        for j in 0..cols {
            let id = i * cols + j;
            if j + 1 < cols {
                push_pair(&mut graph, id, id + 1);
            }
            if i + 1 < rows {
                push_pair(&mut graph, id, id + cols);
            }
        }
    }

    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::validate_graph;

    fn directed_link_count(rows: u64, cols: u64) -> u64 {
        2 * (rows * (cols - 1) + cols * (rows - 1))
    }

    #[test]
    fn one_by_one_is_a_single_node() {
        let g = generate_grid(&GridSpec::new(1, 1)).unwrap();
        assert_eq!(g.nodes.len(), 1);
        assert_eq!(g.links.len(), 0);
    }

    #[test]
    fn two_by_two_counts() {
        let g = generate_grid(&GridSpec::new(2, 2)).unwrap();
        assert_eq!(g.nodes.len(), 4);
        assert_eq!(g.links.len(), 8);
    }

    #[test]
    fn three_by_three_counts_and_lengths() {
        let g = generate_grid(&GridSpec::new(3, 3)).unwrap();
        assert_eq!(g.nodes.len(), 9);
        assert_eq!(g.links.len(), 24);
        for l in &g.links {
            assert!(l.length_m <= 500.0, "link {} too long: {}", l.link_id, l.length_m);
        }
        // Latitude-direction links sit at ~444.6 m under the default scale.
        let vertical: Vec<&LinkRecord> = g
            .links
            .iter()
            .filter(|l| (l.geometry[0].lon - l.geometry[1].lon).abs() < 1e-12)
            .collect();
        assert!(!vertical.is_empty());
        for l in vertical {
            assert!((l.length_m - 444.6).abs() <= 1.0, "got {}", l.length_m);
        }
    }

    #[test]
    fn all_small_grids_hold_count_formula_and_validate() {
        for rows in 1..=8u32 {
            for cols in 1..=8u32 {
                let g = generate_grid(&GridSpec::new(rows, cols)).unwrap();
                assert_eq!(g.nodes.len() as u64, u64::from(rows) * u64::from(cols));
                assert_eq!(g.links.len() as u64, directed_link_count(rows.into(), cols.into()));
                assert!(validate_graph(&g).is_empty(), "{rows}x{cols} failed validation");
            }
        }
    }

    #[test]
    fn grid_is_connected() {
        let g = generate_grid(&GridSpec::new(4, 6)).unwrap();
        let n = g.nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        for l in &g.links {
            adjacency[l.from_node_id as usize].push(l.to_node_id as usize);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn output_is_deterministic() {
        let a = generate_grid(&GridSpec::new(5, 4)).unwrap();
        let b = generate_grid(&GridSpec::new(5, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(matches!(
            generate_grid(&GridSpec::new(0, 3)),
            Err(GridError::SpecInvalid(_))
        ));
    }

    #[test]
    fn cell_guard_is_enforced() {
        assert!(matches!(
            generate_grid(&GridSpec::new(200, 200)),
            Err(GridError::SpecInvalid(_))
        ));
        let mut spec = GridSpec::new(200, 200);
        spec.max_cells = 50_000;
        assert!(generate_grid(&spec).is_ok());
    }

    #[test]
    fn grid_is_centered_on_anchor() {
        let g = generate_grid(&GridSpec::new(3, 3)).unwrap();
        let center = &g.nodes[4];
        assert_eq!(center.planar, PlanarPoint::new(0.0, 0.0));
        assert!((center.geo.lon - crate::geo::DEFAULT_ANCHOR_LON).abs() < 1e-12);
        assert!((center.geo.lat - crate::geo::DEFAULT_ANCHOR_LAT).abs() < 1e-12);
    }
}
