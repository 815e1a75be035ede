//! SUMO plain-XML export (node and edge files) and an optional wrapper
//! around the external `netconvert` tool.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use thiserror::Error;

use crate::geo::NetworkGraph;

#[derive(Debug, Error)]
pub enum SumoError {
    #[error("netconvert is not on the executable search path")]
    ToolMissing,
    #[error("netconvert failed with {status}: {stderr}")]
    ToolFailed { status: String, stderr: String },
    #[error("failed to write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Which coordinates to write into the plain files. `netconvert` expects
/// planar x/y by default; geographic output suits runs with projection
/// options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoordinateMode {
    #[default]
    Planar,
    Geographic,
}

/// The two plain-XML documents consumed by netconvert.
#[derive(Debug, Clone, PartialEq)]
pub struct SumoPlainFiles {
    pub nod_xml: String,
    pub edg_xml: String,
}

/// Renders node and edge documents with planar coordinates.
pub fn export_sumo_plain(g: &NetworkGraph) -> SumoPlainFiles {
    export_sumo_plain_with(g, CoordinateMode::Planar)
}

/// Renders node and edge documents with the chosen coordinate mode,
/// elements sorted by id.
pub fn export_sumo_plain_with(g: &NetworkGraph, mode: CoordinateMode) -> SumoPlainFiles {
    let mut nodes: Vec<_> = g.nodes.iter().collect();
    nodes.sort_by_key(|n| n.node_id);
    let mut links: Vec<_> = g.links.iter().collect();
    links.sort_by_key(|l| l.link_id);

    let mut nod = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if nodes.is_empty() {
        nod.push_str("<nodes/>\n");
    } else {
        nod.push_str("<nodes>\n");
        for n in nodes {
            let (x, y) = match mode {
                CoordinateMode::Planar => (n.planar.x, n.planar.y),
                CoordinateMode::Geographic => (n.geo.lon, n.geo.lat),
            };
            nod.push_str(&format!(
                "    <node id=\"{}\" x=\"{:.6}\" y=\"{:.6}\"/>\n",
                n.node_id, x, y
            ));
        }
        nod.push_str("</nodes>\n");
    }

    let mut edg = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if links.is_empty() {
        edg.push_str("<edges/>\n");
    } else {
        edg.push_str("<edges>\n");
        for l in links {
            edg.push_str(&format!(
                "    <edge id=\"{}\" from=\"{}\" to=\"{}\" numLanes=\"{}\"/>\n",
                l.link_id, l.from_node_id, l.to_node_id, l.lanes
            ));
        }
        edg.push_str("</edges>\n");
    }

    SumoPlainFiles { nod_xml: nod, edg_xml: edg }
}

/// Writes the plain files into `out_dir` and returns their absolute paths.
pub fn write_sumo_plain(files: &SumoPlainFiles, out_dir: &Path) -> Result<(PathBuf, PathBuf), SumoError> {
    fs::create_dir_all(out_dir).map_err(|source| SumoError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let dir = fs::canonicalize(out_dir).map_err(|source| SumoError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let nod_path = dir.join("network.nod.xml");
    let edg_path = dir.join("network.edg.xml");
    fs::write(&nod_path, &files.nod_xml).map_err(|source| SumoError::Io {
        path: nod_path.clone(),
        source,
    })?;
    fs::write(&edg_path, &files.edg_xml).map_err(|source| SumoError::Io {
        path: edg_path.clone(),
        source,
    })?;
    Ok((nod_path, edg_path))
}

/// Combines the plain files into a NET.XML by invoking the external
/// `netconvert` executable. The plain files are written into `out_dir`
/// first.
pub fn run_netconvert(files: &SumoPlainFiles, out_dir: &Path) -> Result<PathBuf, SumoError> {
    let (nod_path, edg_path) = write_sumo_plain(files, out_dir)?;
    let net_path = nod_path.parent().expect("written file has a parent").join("network.net.xml");
    let output = Command::new("netconvert")
        .arg(format!("--node-files={}", nod_path.display()))
        .arg(format!("--edge-files={}", edg_path.display()))
        .arg(format!("--output-file={}", net_path.display()))
        .output();
    match output {
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(SumoError::ToolMissing),
        Err(e) => Err(SumoError::Io {
            path: net_path,
            source: e,
        }),
        Ok(out) if out.status.success() => Ok(net_path),
        Ok(out) => Err(SumoError::ToolFailed {
            status: out.status.to_string(),
            stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        }),
    }
}
