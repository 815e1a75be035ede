//! Export a network as SUMO plain node/edge XML and, when the external
//! `netconvert` tool is installed, combine them into a NET.XML.
//!
//! ```bash
//! cargo run --example sumo_export
//! ```

use roadgen::grid::{generate_grid, GridSpec};
use roadgen::sumo::{export_sumo_plain, run_netconvert, write_sumo_plain, SumoError};

fn main() -> anyhow::Result<()> {
    let out_dir = std::env::temp_dir().join("roadgen-examples/sumo");

    let graph = generate_grid(&GridSpec::new(3, 3))?;
    let files = export_sumo_plain(&graph);
    let (nod_path, edg_path) = write_sumo_plain(&files, &out_dir)?;
    println!("{}", nod_path.display());
    println!("{}", edg_path.display());

    match run_netconvert(&files, &out_dir) {
        Ok(net_path) => println!("{}", net_path.display()),
        Err(SumoError::ToolMissing) => {
            eprintln!("netconvert is not installed; skipped the NET.XML step");
        }
        Err(other) => return Err(other.into()),
    }
    Ok(())
}
