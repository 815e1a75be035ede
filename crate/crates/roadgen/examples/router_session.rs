//! Run a request through the tool-routing loop with a scripted model: the
//! model picks a tool, the tool runs for real, the observation (the produced
//! file paths) goes back, and the model finishes.
//!
//! ```bash
//! cargo run --example router_session
//! ```

use roadgen::agent::tools::{default_registry, ToolContext};
use roadgen::agent::{run_session, ScriptedModel};

fn main() -> anyhow::Result<()> {
    let out_dir = std::env::temp_dir().join("roadgen-examples/router");
    let registry = default_registry(ToolContext::new(out_dir))?;

    eprintln!("system prompt:\n---\n{}---\n", registry.system_prompt()?);

    // A scripted stand-in for the chat model: first call the wrong tool,
    // recover from the error observation, then finish.
    let model = ScriptedModel::new([
        r#"I'll try the sketch tool. {"action":"from-sketch","args":{"image":"nonexistent.png"}}"#,
        r#"That failed; the request is really a grid. {"action":"grid","args":{"rows":3,"cols":5}}"#,
        r#"{"action":"final","answer":"Your 3x5 grid network is ready; the paths are listed above."}"#,
    ]);

    let log = run_session("I need a three by five lattice network", &registry, &model, 5)?;
    println!("{}", log.transcript());
    println!("steps taken: {}", log.step_count());
    Ok(())
}
