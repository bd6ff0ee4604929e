//! Deterministic stand-ins for the media model servers.
//!
//! Every artifact is a pure function of `(tool_name, canonical arguments)`:
//! the URI embeds the call digest, so repeating a call reproduces the same
//! artifact and latency. Provenance is taken from the call.

use serde_json::{json, Map, Value};

use super::call::{Artifact, Provenance, ToolCall};
use super::catalog::{ArtifactKind, STORYBOARD_TOOL};
use crate::canonical::{call_digest, text_digest};
use crate::storyboard::{
    Character, PerspectiveDesign, Shot, ShotAngle, ShotDistance, Storyboard, VideoType,
    MAX_CHARACTERS, SHOT_SECONDS,
};

/// Default total length when a story request gives none.
pub const DEFAULT_STORY_SECONDS: u32 = 60;

/// What a server returns for one atom call.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub outcome: Result<Artifact, String>,
    pub latency_ms: u64,
}

pub fn latency_for(digest: &str) -> u64 {
    let n = u64::from_str_radix(&digest[..4], 16).unwrap_or(0);
    40 + n % 460
}

fn str_arg<'a>(call: &'a ToolCall, key: &str) -> Option<&'a str> {
    call.arguments.get(key).and_then(Value::as_str)
}

fn int_arg(call: &ToolCall, key: &str) -> Option<i64> {
    call.arguments.get(key).and_then(Value::as_i64)
}

fn media_inputs(call: &ToolCall) -> Vec<String> {
    let mut out = Vec::new();
    for (key, value) in &call.arguments {
        if matches!(key.as_str(), "prompt" | "label" | "text" | "keyword" | "transition" | "resolution" | "voice") {
            continue;
        }
        match value {
            Value::String(s) => out.push(s.clone()),
            Value::Array(items) => out.extend(items.iter().filter_map(|v| v.as_str().map(str::to_string))),
            _ => {}
        }
    }
    out
}

/// Runs one atom tool hosted on `server_name`.
pub fn execute(server_name: &str, call: &ToolCall, produces: ArtifactKind) -> Execution {
    let digest = call_digest(&call.tool_name, &call.arguments);
    let latency_ms = latency_for(&digest);
    let outcome = build_artifact(server_name, call, produces, &digest);
    Execution { outcome, latency_ms }
}

pub(crate) fn provenance(call: &ToolCall) -> Provenance {
    Provenance {
        session_id: call.session_id.clone(),
        step_number: call.step_number,
        tool_name: call.tool_name.clone(),
        call_id: call.call_id.clone(),
    }
}

pub(crate) fn artifact_uri(server_name: &str, tool_name: &str, kind: ArtifactKind, digest: &str) -> String {
    format!("mock://{server_name}/{tool_name}/{}.{}", &digest[..16], kind.extension())
}

fn build_artifact(
    server_name: &str,
    call: &ToolCall,
    produces: ArtifactKind,
    digest: &str,
) -> Result<Artifact, String> {
    let mut metadata = Map::new();
    metadata.insert("content_digest".into(), json!(&digest[..16]));
    if let Some(prompt) = str_arg(call, "prompt") {
        metadata.insert("prompt_digest".into(), json!(&text_digest(prompt)[..12]));
    }
    if let Some(res) = str_arg(call, "resolution") {
        metadata.insert("resolution".into(), json!(res));
    }

    match produces {
        ArtifactKind::Video => {
            let duration = match call.tool_name.as_str() {
                "merge_video" | "add_transition" => {
                    SHOT_SECONDS as i64 * call.arguments.get("videos").and_then(Value::as_array).map_or(0, |v| v.len()) as i64
                }
                "video_extension" => 2 * SHOT_SECONDS as i64,
                _ => int_arg(call, "duration").unwrap_or(SHOT_SECONDS as i64),
            };
            if duration <= 0 {
                return Err(format!("{}: duration must be positive", call.tool_name));
            }
            metadata.insert("duration_s".into(), json!(duration));
        }
        ArtifactKind::Audio => {
            metadata.insert("duration_s".into(), json!(SHOT_SECONDS));
        }
        ArtifactKind::Text => {
            let subject = str_arg(call, "prompt")
                .or_else(|| str_arg(call, "label"))
                .unwrap_or("content");
            let text = format!(
                "{} of {} [{}]",
                call.tool_name,
                media_inputs(call).join(", "),
                subject
            );
            metadata.insert("text".into(), json!(text));
        }
        ArtifactKind::Storyboard => {
            if call.tool_name != STORYBOARD_TOOL {
                return Err(format!("{} cannot produce a storyboard", call.tool_name));
            }
            let storyboard = author_storyboard(call)?;
            metadata.insert("storyboard".into(), storyboard.to_value());
            metadata.insert("duration_s".into(), json!(storyboard.total_duration()));
        }
        ArtifactKind::Image | ArtifactKind::Mask => {}
    }

    Ok(Artifact {
        uri: artifact_uri(server_name, &call.tool_name, produces, digest),
        kind: produces,
        metadata,
        provenance: provenance(call),
    })
}

/// Deterministic storyboard for a one-line concept: `character_count`
/// characters, one 5 second image2video shot per slot, all characters
/// rotating on stage.
fn author_storyboard(call: &ToolCall) -> Result<Storyboard, String> {
    let concept = str_arg(call, "prompt").unwrap_or("").trim().to_string();
    if concept.is_empty() {
        return Err("storyboard_gen: empty concept".into());
    }
    let total = int_arg(call, "total_duration_s").unwrap_or(DEFAULT_STORY_SECONDS as i64);
    if total <= 0 || total % SHOT_SECONDS as i64 != 0 {
        return Err(format!(
            "storyboard_gen: total_duration_s {total} is not a positive multiple of {SHOT_SECONDS}"
        ));
    }
    let cast = int_arg(call, "character_count").unwrap_or(1);
    if !(1..=MAX_CHARACTERS as i64).contains(&cast) {
        return Err(format!("storyboard_gen: character_count {cast} outside 1..={MAX_CHARACTERS}"));
    }
    let characters: Vec<Character> = (1..=cast)
        .map(|i| Character {
            id: format!("char_{i}"),
            name: if i == 1 { "main character".into() } else { format!("supporting character {}", i - 1) },
            description: format!("this character {i} as imagined for: {concept}"),
        })
        .collect();
    let shots_n = (total / SHOT_SECONDS as i64) as u32;
    let distances = [ShotDistance::Wide, ShotDistance::Medium, ShotDistance::CloseUp];
    let shots = (1..=shots_n)
        .map(|id| {
            let on_stage = &characters[(id as usize - 1) % characters.len()];
            Shot {
                id,
                duration: SHOT_SECONDS,
                setting_description: format!("scene {id} of {shots_n}"),
                plot_correspondence: format!("this {} advances the story ({id}/{shots_n}): {concept}", on_stage.name),
                onstage_characters: vec![on_stage.id.clone()],
                static_shot_description: format!("this {} framed for beat {id}", on_stage.name),
                shot_perspective_design: PerspectiveDesign {
                    distance: distances[(id as usize - 1) % distances.len()],
                    angle: ShotAngle::EyeLevel,
                    lens: None,
                },
                audio_description: format!("ambient sound for beat {id}"),
                video_type: VideoType::Image2Video,
            }
        })
        .collect();
    Ok(Storyboard {
        characters,
        shots,
        style: "Mock Cartoon Style".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::storyboard::validate_storyboard;

    fn call(tool: &str, args: Value) -> ToolCall {
        ToolCall::new("srv", tool, args.as_object().unwrap().clone()).in_session("s", 1)
    }

    #[test]
    fn text2video_is_five_seconds() {
        let exec = execute("video_gen_server", &call("text2video_gen", json!({"prompt": "a cat"})), ArtifactKind::Video);
        let artifact = exec.outcome.unwrap();
        assert_eq!(artifact.kind, ArtifactKind::Video);
        assert_eq!(artifact.duration_s(), Some(5));
        assert!(artifact.uri.starts_with("mock://video_gen_server/text2video_gen/"));
    }

    #[test]
    fn same_call_same_artifact() {
        let a = execute("v", &call("text2video_gen", json!({"prompt": "a cat"})), ArtifactKind::Video);
        let b = execute("v", &call("text2video_gen", json!({"prompt": "a cat"})), ArtifactKind::Video);
        let c = execute("v", &call("text2video_gen", json!({"prompt": "a cas"})), ArtifactKind::Video);
        assert_eq!(a, b);
        assert_ne!(a.outcome.unwrap().uri, c.outcome.unwrap().uri);
    }

    #[test]
    fn merge_sums_shots() {
        let exec = execute("c", &call("merge_video", json!({"videos": ["a", "b", "c"]})), ArtifactKind::Video);
        assert_eq!(exec.outcome.unwrap().duration_s(), Some(15));
    }

    #[test]
    fn authored_storyboard_is_valid() {
        let exec = execute(
            "u",
            &call(STORYBOARD_TOOL, json!({"prompt": "a fox story", "total_duration_s": 20, "character_count": 2})),
            ArtifactKind::Storyboard,
        );
        let artifact = exec.outcome.unwrap();
        let sb: Storyboard = serde_json::from_value(artifact.metadata["storyboard"].clone()).unwrap();
        assert_eq!(sb.shots.len(), 4);
        assert_eq!(sb.characters.len(), 2);
        assert!(validate_storyboard(&sb, 20).valid);
    }

    #[test]
    fn storyboard_rejects_odd_durations() {
        let exec = execute("u", &call(STORYBOARD_TOOL, json!({"prompt": "x", "total_duration_s": 12})), ArtifactKind::Storyboard);
        assert!(exec.outcome.is_err());
    }
}
