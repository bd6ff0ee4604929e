//! The `use_mcp_tool` call envelope.
//!
//! ```text
//! <use_mcp_tool>
//! <server_name>video_gen_server</server_name>
//! <tool_name>generate_clip</tool_name>
//! <arguments>
//! { "duration": 5 }
//! </arguments>
//! </use_mcp_tool>
//! ```
//!
//! A message must carry exactly one envelope. The arguments body is JSON; string
//! values written with single or typographic quotes are accepted and
//! normalized.

use std::sync::OnceLock;

use regex::Regex;
use serde_json::Value;
use thiserror::Error;

use super::call::{Arguments, ToolCall};

const OPEN: &str = "<use_mcp_tool>";
const CLOSE: &str = "</use_mcp_tool>";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    #[error("message contains no use_mcp_tool envelope")]
    NoEnvelope,
    #[error("message contains {0} envelopes; one tool per message")]
    MultipleEnvelopes(usize),
    #[error("envelope is missing <{0}>")]
    MissingField(&'static str),
    #[error("envelope is not closed")]
    Unclosed,
    #[error("malformed arguments: {0}")]
    MalformedArguments(String),
}

fn block_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)<use_mcp_tool>(.*?)</use_mcp_tool>").unwrap())
}

fn field<'a>(body: &'a str, tag: &'static str) -> Result<&'a str, EnvelopeError> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = body.find(&open).ok_or(EnvelopeError::MissingField(tag))? + open.len();
    let len = body[start..]
        .find(&close)
        .ok_or(EnvelopeError::MissingField(tag))?;
    Ok(body[start..start + len].trim())
}

/// Parses the single envelope in `text` into an unbound [`ToolCall`].
pub fn parse_envelope(text: &str) -> Result<ToolCall, EnvelopeError> {
    let blocks: Vec<&str> = block_pattern()
        .captures_iter(text)
        .map(|c| c.get(1).unwrap().as_str())
        .collect();
    let opens = text.matches(OPEN).count();
    match (blocks.len(), opens) {
        (0, 0) => return Err(EnvelopeError::NoEnvelope),
        (0, _) => return Err(EnvelopeError::Unclosed),
        (1, 1) => {}
        (_, n) => return Err(EnvelopeError::MultipleEnvelopes(n.max(blocks.len()))),
    }
    let body = blocks[0];
    let server_name = field(body, "server_name")?;
    let tool_name = field(body, "tool_name")?;
    let raw_args = field(body, "arguments")?;
    Ok(ToolCall::new(server_name, tool_name, parse_arguments(raw_args)?))
}

fn parse_arguments(raw: &str) -> Result<Arguments, EnvelopeError> {
    if raw.is_empty() {
        return Ok(Arguments::new());
    }
    let normalized = normalize_quotes(raw)?;
    match serde_json::from_str::<Value>(&normalized) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(EnvelopeError::MalformedArguments(
            "arguments must be a key-value object".into(),
        )),
        Err(e) => Err(EnvelopeError::MalformedArguments(e.to_string())),
    }
}

/// Rewrites `'x'` and `‘x’` string literals outside double-quoted strings as
/// JSON strings.
fn normalize_quotes(raw: &str) -> Result<String, EnvelopeError> {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    let mut in_string = false;
    while let Some(c) = chars.next() {
        if in_string {
            out.push(c);
            match c {
                '\\' => {
                    if let Some(next) = chars.next() {
                        out.push(next);
                    }
                }
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => {
                in_string = true;
                out.push(c);
            }
            '\'' | '\u{2018}' | '\u{2019}' => {
                let closing: &[char] = if c == '\'' { &['\''] } else { &['\u{2019}', '\u{2018}'] };
                let mut literal = String::new();
                loop {
                    match chars.next() {
                        Some(ch) if closing.contains(&ch) => break,
                        Some(ch) => literal.push(ch),
                        None => {
                            return Err(EnvelopeError::MalformedArguments(
                                "unterminated quoted string".into(),
                            ))
                        }
                    }
                }
                out.push_str(&serde_json::to_string(&literal).expect("string serializes"));
            }
            _ => out.push(c),
        }
    }
    Ok(out)
}

/// Renders `call` as an envelope. `parse_envelope` inverts it exactly for the
/// server, tool and arguments.
pub fn emit_envelope(call: &ToolCall) -> String {
    let args = serde_json::to_string_pretty(&Value::Object(call.arguments.clone()))
        .expect("arguments serialize");
    format!(
        "{OPEN}\n<server_name>{}</server_name>\n<tool_name>{}</tool_name>\n<arguments>\n{args}\n</arguments>\n{CLOSE}",
        call.server_name, call.tool_name
    )
}
