//! Score scripted routing sessions: tool selection accuracy, average
//! invocation count, and repeated call probability per language and
//! question form, with composite rollups, as a CSV table.
//!
//! ```bash
//! cargo run --example eval_metrics
//! ```

use roadgen::agent::tools::{default_registry, ToolContext};
use roadgen::agent::{compute_metrics, reference, run_session, QuestionForm, ScriptedModel, TrialSpec};

fn main() -> anyhow::Result<()> {
    let out_dir = std::env::temp_dir().join("roadgen-examples/eval");
    let registry = default_registry(ToolContext::new(out_dir))?;

    let grid_call = r#"{"action":"grid","args":{"rows":2,"cols":2}}"#;
    let image_call = r#"{"action":"from-image","args":{"mask":"missing.png"}}"#;
    let done = r#"{"action":"final","answer":"done"}"#;

    // (prompt, language, form, scripted replies)
    let setups: Vec<(&str, &str, QuestionForm, Vec<&str>)> = vec![
        ("Please build a two by two grid network.", "en", QuestionForm::Detailed, vec![grid_call, done]),
        ("2x2 grid", "en", QuestionForm::Concise, vec![grid_call, done]),
        ("grid", "en", QuestionForm::Keywords, vec![image_call, grid_call, done]),
        ("请生成一个2x2网格路网。", "zh", QuestionForm::Detailed, vec![grid_call, done]),
        ("生成2x2网格", "zh", QuestionForm::Concise, vec![grid_call, done]),
        ("网格", "zh", QuestionForm::Keywords, vec![grid_call, grid_call, done]),
    ];

    let mut logs = Vec::new();
    let mut specs = Vec::new();
    for (prompt, language, form, replies) in setups {
        let model = ScriptedModel::new(replies);
        logs.push(run_session(prompt, &registry, &model, 5)?);
        specs.push(TrialSpec {
            prompt: prompt.into(),
            expected_tool: "grid".into(),
            language: language.into(),
            form,
        });
    }

    let table = compute_metrics(&logs, &specs)?;
    println!("{}", table.to_csv());

    println!("published baseline for comparison (hosted-model deployment):");
    for (language, form, accuracy, invocations, repeats) in reference::CELLS {
        println!("  {language}/{form}: {accuracy:.4} {invocations:.4} {repeats:.4}");
    }
    let (acc, inv, rep) = reference::OVERALL;
    println!("  overall: {acc:.4} {inv:.4} {rep:.4}");
    Ok(())
}
