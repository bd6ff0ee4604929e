//! Server backends. The in-process backend calls the mocks directly; the
//! subprocess backend speaks newline-delimited JSON over a child's stdio:
//!
//! ```text
//! → {"server_name": .., "produces": "video", "call": {..ToolCall..}}
//! ← {"latency_ms": 123, "artifact": {..}}   or   {"latency_ms": 5, "error": ".."}
//! ```

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::call::{Artifact, ToolCall};
use super::catalog::ArtifactKind;
use super::mock::{self, Execution};

pub trait ServerBackend: Send + Sync {
    fn execute(&self, server_name: &str, call: &ToolCall, produces: ArtifactKind) -> Result<Execution, String>;
}

/// Deterministic in-process mocks.
#[derive(Debug, Default, Clone, Copy)]
pub struct MockBackend;

impl ServerBackend for MockBackend {
    fn execute(&self, server_name: &str, call: &ToolCall, produces: ArtifactKind) -> Result<Execution, String> {
        Ok(mock::execute(server_name, call, produces))
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WireRequest {
    pub server_name: String,
    pub produces: ArtifactKind,
    pub call: ToolCall,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WireResponse {
    pub latency_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact: Option<Artifact>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl From<Execution> for WireResponse {
    fn from(exec: Execution) -> Self {
        match exec.outcome {
            Ok(artifact) => Self {
                latency_ms: exec.latency_ms,
                artifact: Some(artifact),
                error: None,
            },
            Err(error) => Self {
                latency_ms: exec.latency_ms,
                artifact: None,
                error: Some(error),
            },
        }
    }
}

/// Serves the mock backend over line-delimited JSON until `input` closes.
pub fn serve_lines<R: BufRead, W: Write>(input: R, mut output: W) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<WireRequest>(&line) {
            Ok(req) => WireResponse::from(mock::execute(&req.server_name, &req.call, req.produces)),
            Err(e) => WireResponse {
                latency_ms: 0,
                artifact: None,
                error: Some(format!("bad request: {e}")),
            },
        };
        serde_json::to_writer(&mut output, &response)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}

struct Pipe {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

/// A server process reached over its stdin/stdout.
pub struct SubprocessBackend {
    pipe: Mutex<Pipe>,
}

impl SubprocessBackend {
    pub fn spawn(mut command: Command) -> std::io::Result<Self> {
        let mut child = command
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self {
            pipe: Mutex::new(Pipe { child, stdin, stdout }),
        })
    }
}

impl ServerBackend for SubprocessBackend {
    fn execute(&self, server_name: &str, call: &ToolCall, produces: ArtifactKind) -> Result<Execution, String> {
        let mut pipe = self.pipe.lock().map_err(|_| "server pipe poisoned".to_string())?;
        let request = WireRequest {
            server_name: server_name.to_string(),
            produces,
            call: call.clone(),
        };
        let io = |e: std::io::Error| format!("server {server_name} unavailable: {e}");
        serde_json::to_writer(&mut pipe.stdin, &request).map_err(|e| e.to_string())?;
        pipe.stdin.write_all(b"\n").map_err(io)?;
        pipe.stdin.flush().map_err(io)?;
        let mut line = String::new();
        if pipe.stdout.read_line(&mut line).map_err(io)? == 0 {
            return Err(format!("server {server_name} unavailable: closed its output"));
        }
        let response: WireResponse =
            serde_json::from_str(&line).map_err(|e| format!("bad response from {server_name}: {e}"))?;
        let outcome = match (response.artifact, response.error) {
            (Some(artifact), None) => Ok(artifact),
            (None, Some(error)) => Err(error),
            _ => return Err(format!("bad response from {server_name}: need artifact xor error")),
        };
        Ok(Execution {
            outcome,
            latency_ms: response.latency_ms,
        })
    }
}

impl Drop for SubprocessBackend {
    fn drop(&mut self) {
        if let Ok(pipe) = self.pipe.get_mut() {
            let _ = pipe.child.kill();
            let _ = pipe.child.wait();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn line_server_matches_in_process() {
        let call = ToolCall::new("video_gen_server", "text2video_gen", json!({"prompt": "a cat"}).as_object().unwrap().clone())
            .in_session("s", 1);
        let req = WireRequest {
            server_name: "video_gen_server".into(),
            produces: ArtifactKind::Video,
            call: call.clone(),
        };
        let input = format!("{}\n\nnot json\n", serde_json::to_string(&req).unwrap());
        let mut out = Vec::new();
        serve_lines(input.as_bytes(), &mut out).unwrap();
        let lines: Vec<&str> = std::str::from_utf8(&out).unwrap().lines().collect();
        assert_eq!(lines.len(), 2);
        let first: WireResponse = serde_json::from_str(lines[0]).unwrap();
        let direct = mock::execute("video_gen_server", &call, ArtifactKind::Video);
        assert_eq!(first.artifact.unwrap(), direct.outcome.unwrap());
        assert_eq!(first.latency_ms, direct.latency_ms);
        let second: WireResponse = serde_json::from_str(lines[1]).unwrap();
        assert!(second.error.unwrap().starts_with("bad request"));
    }
}
