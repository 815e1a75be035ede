//! The select-invoke-assess loop: parse the model's structured action,
//! execute it, feed the observation back, repeat until a final answer or an
//! abort.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde_json::{Map, Value};

use super::{AgentError, ToolRegistry};

/// One parsed model decision.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    ToolCall { name: String, args: Map<String, Value> },
    Final { answer: String },
}

/// Extracts the first well-formed `{"action": ...}` object from a reply,
/// tolerating surrounding prose. `{"action": "final", "answer": ...}` ends
/// the session; any other action string is a tool call.
pub fn parse_action(reply: &str) -> Result<Action, AgentError> {
    for (idx, ch) in reply.char_indices() {
        if ch != '{' {
            continue;
        }
        let mut stream = serde_json::Deserializer::from_str(&reply[idx..]).into_iter::<Value>();
        let Some(Ok(Value::Object(obj))) = stream.next() else {
            continue;
        };
        let Some(Value::String(action)) = obj.get("action") else {
            continue;
        };
        if action == "final" {
            let answer = obj
                .get("answer")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            return Ok(Action::Final { answer });
        }
        let args = match obj.get("args") {
            Some(Value::Object(m)) => m.clone(),
            _ => Map::new(),
        };
        return Ok(Action::ToolCall {
            name: action.clone(),
            args,
        });
    }
    Err(AgentError::Unparseable)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

/// Transport to a chat model. Implementations must be usable from multiple
/// threads; independent sessions may run concurrently.
pub trait ModelClient: Send + Sync {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, AgentError>;
}

/// Replays a fixed list of replies; the backbone of every offline test and
/// demo.
pub struct ScriptedModel {
    replies: Mutex<VecDeque<String>>,
}

impl ScriptedModel {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            replies: Mutex::new(replies.into_iter().map(Into::into).collect()),
        }
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().expect("script lock").len()
    }
}

impl ModelClient for ScriptedModel {
    fn complete(&self, _messages: &[ChatMessage]) -> Result<String, AgentError> {
        self.replies
            .lock()
            .expect("script lock")
            .pop_front()
            .ok_or_else(|| AgentError::Transport("scripted replies exhausted".into()))
    }
}

/// OpenAI-style chat-completions client.
pub struct HttpModel {
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
}

impl HttpModel {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            api_key: None,
            timeout: Duration::from_secs(120),
        }
    }
}

impl ModelClient for HttpModel {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, AgentError> {
        let payload = serde_json::json!({
            "model": self.model,
            "messages": messages
                .iter()
                .map(|m| serde_json::json!({"role": m.role.as_str(), "content": m.content}))
                .collect::<Vec<_>>(),
        });
        let url = format!("{}/chat/completions", self.base_url.trim_end_matches('/'));
        let agent = ureq::AgentBuilder::new().timeout(self.timeout).build();
        let mut request = agent.post(&url).set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            request = request.set("Authorization", &format!("Bearer {key}"));
        }
        let response = request
            .send_string(&payload.to_string())
            .map_err(|e| AgentError::Transport(e.to_string()))?;
        let body = response
            .into_string()
            .map_err(|e| AgentError::Transport(e.to_string()))?;
        let value: Value =
            serde_json::from_str(&body).map_err(|e| AgentError::Transport(format!("bad JSON: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| AgentError::Transport("response carries no message content".into()))
    }
}

/// One executed tool call and the observation it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionStep {
    pub call_name: String,
    pub call_args: Map<String, Value>,
    /// Tool output (or error text), passed back to the model verbatim.
    pub observation: String,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionOutcome {
    Final(String),
    MaxStepsReached,
    UnparseableReplies,
}

/// Record of one routed request.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub request: String,
    pub steps: Vec<SessionStep>,
    pub outcome: SessionOutcome,
}

impl SessionLog {
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Names of the tools called, in order.
    pub fn call_names(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.call_name.as_str()).collect()
    }

    /// Deterministic rendering of the session, wall times excluded.
    pub fn transcript(&self) -> String {
        let mut out = format!("request: {}\n", self.request);
        for (i, step) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "step {}: call={} args={}\nobservation: {}\n",
                i + 1,
                step.call_name,
                Value::Object(step.call_args.clone()),
                step.observation
            ));
        }
        match &self.outcome {
            SessionOutcome::Final(answer) => out.push_str(&format!("outcome: final: {answer}\n")),
            SessionOutcome::MaxStepsReached => out.push_str("outcome: aborted: max steps reached\n"),
            SessionOutcome::UnparseableReplies => out.push_str("outcome: aborted: unparseable replies\n"),
        }
        out
    }
}

fn complete_with_retry(model: &dyn ModelClient, messages: &[ChatMessage]) -> Result<String, AgentError> {
    match model.complete(messages) {
        Ok(reply) => Ok(reply),
        Err(_) => model
            .complete(messages)
            .map_err(|e| AgentError::ModelUnreachable(e.to_string())),
    }
}

/// Runs one request through the loop: prompt, parse the action, invoke the
/// tool, append the observation, repeat. Tool failures become observations,
/// never errors; the session aborts on `max_steps` tool calls without a
/// final answer or on a second unparseable reply.
pub fn run_session(
    request: &str,
    registry: &ToolRegistry,
    model: &dyn ModelClient,
    max_steps: usize,
) -> Result<SessionLog, AgentError> {
    if max_steps == 0 {
        return Err(AgentError::InvalidMaxSteps);
    }
    let system = registry.system_prompt()?;
    let mut messages = vec![
        ChatMessage {
            role: Role::System,
            content: system,
        },
        ChatMessage {
            role: Role::User,
            content: request.to_string(),
        },
    ];
    let mut steps: Vec<SessionStep> = Vec::new();
    let mut unparseable_replies = 0usize;

    let outcome = loop {
        let reply = complete_with_retry(model, &messages)?;
        messages.push(ChatMessage {
            role: Role::Assistant,
            content: reply.clone(),
        });
        match parse_action(&reply) {
            Err(_) => {
                unparseable_replies += 1;
                if unparseable_replies >= 2 {
                    break SessionOutcome::UnparseableReplies;
                }
                messages.push(ChatMessage {
                    role: Role::User,
                    content: "Your reply did not contain a valid action object. Respond with a \
                              single JSON object: {\"action\": \"<tool-name>\", \"args\": {...}} \
                              or {\"action\": \"final\", \"answer\": \"...\"}."
                        .to_string(),
                });
            }
            Ok(Action::Final { answer }) => break SessionOutcome::Final(answer),
            Ok(Action::ToolCall { name, args }) => {
                let started = Instant::now();
                let observation = match registry.invoke(&name, &args) {
                    None => format!(
                        "error: unknown tool {:?}. Available tools: {}",
                        name,
                        registry.tool_names().join(", ")
                    ),
                    Some(Ok(output)) => output,
                    Some(Err(error)) => error,
                };
                let wall_ms = started.elapsed().as_millis() as u64;
                steps.push(SessionStep {
                    call_name: name,
                    call_args: args,
                    observation: observation.clone(),
                    wall_ms,
                });
                if steps.len() >= max_steps {
                    break SessionOutcome::MaxStepsReached;
                }
                messages.push(ChatMessage {
                    role: Role::User,
                    content: observation,
                });
            }
        }
    };

    Ok(SessionLog {
        request: request.to_string(),
        steps,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{ArgSpec, ToolDescriptor};

    fn test_registry() -> ToolRegistry {
        let mut registry = ToolRegistry::new();
        registry
            .register(
                ToolDescriptor {
                    name: "grid".into(),
                    description: "builds a grid network".into(),
                    args: vec![ArgSpec::required("rows", "integer"), ArgSpec::required("cols", "integer")],
                },
                Box::new(|args| {
                    let rows = args.get("rows").and_then(Value::as_u64).unwrap_or(0);
                    Ok(format!("/tmp/out/grid-{rows}/Node.csv\n/tmp/out/grid-{rows}/Link.csv"))
                }),
            )
            .unwrap();
        registry
            .register(
                ToolDescriptor {
                    name: "place".into(),
                    description: "fetches a named place".into(),
                    args: vec![ArgSpec::required("name", "text")],
                },
                Box::new(|_| Err("error: no network access".into())),
            )
            .unwrap();
        registry
    }

    #[test]
    fn parse_tool_call() {
        let action = parse_action(r#"Sure! {"action":"grid", "args":{"rows":3, "cols":4}}"#).unwrap();
        match action {
            Action::ToolCall { name, args } => {
                assert_eq!(name, "grid");
                assert_eq!(args["rows"], 3);
                assert_eq!(args["cols"], 4);
            }
            other => panic!("unexpected action {other:?}"),
        }
    }

    #[test]
    fn parse_final() {
        let action = parse_action(r#"{"action":"final","answer":"files at /tmp/x"}"#).unwrap();
        assert_eq!(
            action,
            Action::Final {
                answer: "files at /tmp/x".into()
            }
        );
    }

    #[test]
    fn prose_without_object_is_unparseable() {
        assert!(matches!(
            parse_action("I think we should build a grid."),
            Err(AgentError::Unparseable)
        ));
    }

    #[test]
    fn nested_prose_objects_are_skipped_until_action() {
        let reply = r#"data {"note":"x"} then {"action":"grid","args":{}}"#;
        let action = parse_action(reply).unwrap();
        assert!(matches!(action, Action::ToolCall { name, .. } if name == "grid"));
    }

    #[test]
    fn session_runs_tool_then_final() {
        let model = ScriptedModel::new([
            r#"{"action":"grid","args":{"rows":3,"cols":3}}"#,
            r#"{"action":"final","answer":"done"}"#,
        ]);
        let log = run_session("3x3 grid please", &test_registry(), &model, 5).unwrap();
        assert_eq!(log.step_count(), 1);
        assert_eq!(log.outcome, SessionOutcome::Final("done".into()));
        assert!(log.steps[0].observation.contains("Node.csv"));
    }

    #[test]
    fn session_aborts_at_max_steps() {
        let call = r#"{"action":"grid","args":{"rows":1,"cols":1}}"#;
        let model = ScriptedModel::new(vec![call; 10]);
        let log = run_session("loop forever", &test_registry(), &model, 5).unwrap();
        assert_eq!(log.step_count(), 5);
        assert_eq!(log.outcome, SessionOutcome::MaxStepsReached);
        assert_eq!(model.remaining(), 5, "no model call after the step budget is spent");
    }

    #[test]
    fn unknown_tool_becomes_observation_then_corrects() {
        let model = ScriptedModel::new([
            r#"{"action":"terraform","args":{}}"#,
            r#"{"action":"grid","args":{"rows":2,"cols":2}}"#,
            r#"{"action":"final","answer":"ok"}"#,
        ]);
        let log = run_session("build something", &test_registry(), &model, 5).unwrap();
        assert_eq!(log.step_count(), 2);
        assert!(log.steps[0].observation.starts_with("error: unknown tool"));
        assert!(log.steps[1].observation.contains("Node.csv"));
    }

    #[test]
    fn tool_errors_are_observations_not_crashes() {
        let model = ScriptedModel::new([
            r#"{"action":"place","args":{"name":"Springfield"}}"#,
            r#"{"action":"final","answer":"could not fetch"}"#,
        ]);
        let log = run_session("fetch a place", &test_registry(), &model, 5).unwrap();
        assert_eq!(log.steps[0].observation, "error: no network access");
        assert_eq!(log.outcome, SessionOutcome::Final("could not fetch".into()));
    }

    #[test]
    fn one_unparseable_reply_is_forgiven_two_abort() {
        let model = ScriptedModel::new([
            "no object here",
            r#"{"action":"final","answer":"recovered"}"#,
        ]);
        let log = run_session("hello", &test_registry(), &model, 5).unwrap();
        assert_eq!(log.outcome, SessionOutcome::Final("recovered".into()));

        let model = ScriptedModel::new(["nope", "still nope"]);
        let log = run_session("hello", &test_registry(), &model, 5).unwrap();
        assert_eq!(log.outcome, SessionOutcome::UnparseableReplies);
        assert_eq!(log.step_count(), 0);
    }

    #[test]
    fn exhausted_script_maps_to_model_unreachable() {
        let model = ScriptedModel::new(Vec::<String>::new());
        let err = run_session("hello", &test_registry(), &model, 5).unwrap_err();
        assert!(matches!(err, AgentError::ModelUnreachable(_)));
    }

    #[test]
    fn zero_max_steps_is_invalid() {
        let model = ScriptedModel::new([r#"{"action":"final","answer":"x"}"#]);
        assert!(matches!(
            run_session("hello", &test_registry(), &model, 0),
            Err(AgentError::InvalidMaxSteps)
        ));
    }

    #[test]
    fn http_model_reads_chat_completion_content() {
        use std::io::{Read as _, Write as _};
        use std::net::TcpListener;

        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            if let Ok((mut stream, _)) = listener.accept() {
                let mut buf = [0u8; 8192];
                let _ = stream.read(&mut buf);
                let body = r#"{"choices":[{"message":{"role":"assistant","content":"{\"action\":\"final\",\"answer\":\"hi\"}"}}]}"#;
                let response = format!(
                    "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                let _ = stream.write_all(response.as_bytes());
            }
        });

        let model = HttpModel {
            base_url: format!("http://{addr}/v1"),
            model: "test-model".into(),
            api_key: Some("secret".into()),
            timeout: Duration::from_secs(5),
        };
        let reply = model
            .complete(&[ChatMessage {
                role: Role::User,
                content: "hello".into(),
            }])
            .unwrap();
        assert_eq!(parse_action(&reply).unwrap(), Action::Final { answer: "hi".into() });
    }

    #[test]
    fn transcript_is_deterministic_for_scripted_models() {
        let script = [
            r#"{"action":"grid","args":{"rows":2,"cols":3}}"#,
            r#"{"action":"final","answer":"done"}"#,
        ];
        let a = run_session("req", &test_registry(), &ScriptedModel::new(script), 5).unwrap();
        let b = run_session("req", &test_registry(), &ScriptedModel::new(script), 5).unwrap();
        assert_eq!(a.transcript(), b.transcript());
    }
}
