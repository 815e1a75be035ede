//! Tool routing: descriptors, the system prompt, the select-invoke-assess
//! session loop, and the evaluation metrics over recorded sessions.

mod metrics;
mod session;
pub mod tools;

pub use metrics::{
    compute_metrics, compute_metrics_with, reference, IndicatorSet, MetricsCell, MetricsTable,
    QuestionForm, RepeatBasis, TrialSpec,
};
pub use session::{
    parse_action, run_session, Action, ChatMessage, HttpModel, ModelClient, Role, ScriptedModel,
    SessionLog, SessionOutcome, SessionStep,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("tool registry is empty")]
    EmptyRegistry,
    #[error("tool {0:?} is already registered")]
    DuplicateTool(String),
    #[error("tool descriptor for {0:?} has an empty description")]
    EmptyDescription(String),
    #[error("reply contains no structured action object")]
    Unparseable,
    #[error("model unreachable: {0}")]
    ModelUnreachable(String),
    #[error("model transport failure: {0}")]
    Transport(String),
    #[error("max_steps must be at least 1")]
    InvalidMaxSteps,
    #[error("{logs} session logs but {specs} trial specs; inputs must align 1:1")]
    Misaligned { logs: usize, specs: usize },
}

/// One argument in a tool's calling contract.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ArgSpec {
    pub name: String,
    /// Human-readable type hint shown to the model ("integer", "text", ...).
    pub ty: String,
    pub required: bool,
}

impl ArgSpec {
    pub fn required(name: &str, ty: &str) -> Self {
        Self {
            name: name.into(),
            ty: ty.into(),
            required: true,
        }
    }

    pub fn optional(name: &str, ty: &str) -> Self {
        Self {
            name: name.into(),
            ty: ty.into(),
            required: false,
        }
    }
}

/// What the routing model reads about one tool.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ToolDescriptor {
    pub name: String,
    pub description: String,
    pub args: Vec<ArgSpec>,
}

/// A tool implementation: JSON arguments in, observation text out. Both the
/// success and the failure string are fed back to the model verbatim.
pub type ToolHandler =
    Box<dyn Fn(&serde_json::Map<String, serde_json::Value>) -> Result<String, String> + Send + Sync>;

/// Descriptors plus their executable handlers.
#[derive(Default)]
pub struct ToolRegistry {
    descriptors: Vec<ToolDescriptor>,
    handlers: std::collections::HashMap<String, ToolHandler>,
}

impl ToolRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, descriptor: ToolDescriptor, handler: ToolHandler) -> Result<(), AgentError> {
        if descriptor.description.trim().is_empty() {
            return Err(AgentError::EmptyDescription(descriptor.name));
        }
        if self.handlers.contains_key(&descriptor.name) {
            return Err(AgentError::DuplicateTool(descriptor.name));
        }
        self.handlers.insert(descriptor.name.clone(), handler);
        self.descriptors.push(descriptor);
        Ok(())
    }

    pub fn descriptors(&self) -> &[ToolDescriptor] {
        &self.descriptors
    }

    pub fn contains(&self, name: &str) -> bool {
        self.handlers.contains_key(name)
    }

    pub fn tool_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.descriptors.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        names
    }

    /// Runs a registered tool; `None` when the name is unknown.
    pub fn invoke(
        &self,
        name: &str,
        args: &serde_json::Map<String, serde_json::Value>,
    ) -> Option<Result<String, String>> {
        self.handlers.get(name).map(|h| h(args))
    }

    pub fn system_prompt(&self) -> Result<String, AgentError> {
        build_system_prompt(&self.descriptors)
    }
}

/// Assembles the deterministic system prompt: the tool list (sorted by
/// name), the structured reply format, the no-fabrication rule, and the
/// finish condition.
pub fn build_system_prompt(descriptors: &[ToolDescriptor]) -> Result<String, AgentError> {
    if descriptors.is_empty() {
        return Err(AgentError::EmptyRegistry);
    }
    let mut sorted: Vec<&ToolDescriptor> = descriptors.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));

    let mut prompt = String::from(
        "You are a road-network generation assistant. You fulfil user requests \
         exclusively by invoking the tools listed below; you have no other way to \
         produce road networks or files.\n\nAvailable tools:\n",
    );
    for d in sorted {
        prompt.push_str(&format!("- {}: {}\n", d.name, d.description));
        if !d.args.is_empty() {
            let args: Vec<String> = d
                .args
                .iter()
                .map(|a| {
                    format!(
                        "{} ({}{})",
                        a.name,
                        a.ty,
                        if a.required { ", required" } else { ", optional" }
                    )
                })
                .collect();
            prompt.push_str(&format!("  arguments: {}\n", args.join(", ")));
        }
    }
    prompt.push_str(
        "\nReply with exactly one JSON object per turn and nothing else.\n\
         To invoke a tool: {\"action\": \"<tool-name>\", \"args\": {...}}\n\
         When the request is fulfilled: {\"action\": \"final\", \"answer\": \"<summary>\"}\n\n\
         Rules:\n\
         - Never fabricate data, file paths, coordinates, or tool output; report only what \
           the tools returned.\n\
         - After each tool result, decide whether the request is fulfilled. If it is, stop \
           and send the final answer listing the produced file paths verbatim.\n\
         - If a tool reports an error, correct the call or explain the failure in the final \
           answer instead of retrying the same call indefinitely.\n",
    );
    Ok(prompt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn descriptor(name: &str) -> ToolDescriptor {
        ToolDescriptor {
            name: name.into(),
            description: "builds outputs from the given parameters".into(),
            args: vec![ArgSpec::required("rows", "integer")],
        }
    }

    #[test]
    fn prompt_lists_each_tool_once() {
        let prompt = build_system_prompt(&[descriptor("gridmaker")]).unwrap();
        assert_eq!(prompt.matches("gridmaker").count(), 1);
    }

    #[test]
    fn prompt_is_order_invariant() {
        let a = build_system_prompt(&[descriptor("alpha"), descriptor("beta")]).unwrap();
        let b = build_system_prompt(&[descriptor("beta"), descriptor("alpha")]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_registry_is_rejected() {
        assert!(matches!(build_system_prompt(&[]), Err(AgentError::EmptyRegistry)));
    }

    #[test]
    fn prompt_carries_format_and_rules() {
        let prompt = build_system_prompt(&[descriptor("alpha")]).unwrap();
        assert!(prompt.contains("\"action\""));
        assert!(prompt.contains("final"));
        assert!(prompt.contains("Never fabricate"));
    }

    #[test]
    fn registry_rejects_duplicates_and_empty_descriptions() {
        let mut registry = ToolRegistry::new();
        registry
            .register(descriptor("alpha"), Box::new(|_| Ok("ok".into())))
            .unwrap();
        let err = registry
            .register(descriptor("alpha"), Box::new(|_| Ok("ok".into())))
            .unwrap_err();
        assert!(matches!(err, AgentError::DuplicateTool(_)));
        let mut blank = descriptor("beta");
        blank.description = "  ".into();
        let err = registry.register(blank, Box::new(|_| Ok("ok".into()))).unwrap_err();
        assert!(matches!(err, AgentError::EmptyDescription(_)));
    }
}
