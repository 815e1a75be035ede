//! roadgen: a road-network generation toolkit.
//!
//! Four generators share one graph model and three emitters:
//!
//! - [`grid`] builds regular N x M lattice networks;
//! - [`osm`] geocodes a place, fetches OpenStreetMap data, and converts the
//!   tagged ways into a routable graph;
//! - [`raster`] extracts a graph from a binary road mask (satellite
//!   segmentation output or a preprocessed hand-drawn sketch) via corner
//!   detection, error-decrease line connection, and redundancy pruning;
//! - [`agent`] routes free-form requests to those generators through a
//!   tool-calling model loop and scores routing quality.
//!
//! Graphs leave the system as GMNS CSV ([`gmns`]), SUMO plain XML
//! ([`sumo`]), and SVG overviews ([`svg`]). The [`cli`] module packages
//! everything as subcommands; `src/bin/roadgen.rs` is the thin entry point.
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! cargo run --example grid            # lattice network -> GMNS + SVG
//! cargo run --example place_offline   # bundled .osm file -> network
//! cargo run --example image_extract   # synthetic road mask -> network
//! cargo run --example sketch_preprocess  # grayscale sketch -> binary mask
//! cargo run --example render_svg      # deterministic SVG rendering
//! cargo run --example sumo_export     # plain node/edge XML (+ netconvert)
//! cargo run --example router_session  # scripted tool-routing session
//! cargo run --example eval_metrics    # routing metrics table -> CSV
//! ```

pub mod agent;
pub mod cli;
pub mod geo;
pub mod gmns;
pub mod grid;
pub mod osm;
pub mod raster;
pub mod sumo;
pub mod svg;

pub use geo::{GeoPoint, LinkRecord, NetworkGraph, NodeRecord, PlanarPoint, Projection};
