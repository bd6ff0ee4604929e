//! Workflow tools: fixed compositions of atom calls executed by the hub.

use serde_json::{json, Map, Value};

use super::call::{Arguments, Artifact};
use super::catalog::STORYBOARD_TOOL;
use crate::storyboard::{shots_to_requests, Storyboard, MAX_CHARACTERS};

/// Runs one atom call on behalf of a workflow and returns its artifact.
pub(crate) trait AtomDispatch {
    fn atom(&mut self, tool_name: &str, args: Arguments) -> Result<Artifact, String>;
}

/// Metadata the workflow contributes to its own result artifact.
pub(crate) type WorkflowOutput = Map<String, Value>;

fn args(value: Value) -> Arguments {
    match value {
        Value::Object(map) => map,
        _ => unreachable!("workflow arguments are built as objects"),
    }
}

fn with_resolution(mut a: Arguments, resolution: Option<&Value>) -> Arguments {
    if let Some(r) = resolution {
        a.insert("resolution".into(), r.clone());
    }
    a
}

pub(crate) fn run(
    tool_name: &str,
    arguments: &Arguments,
    dispatch: &mut dyn AtomDispatch,
) -> Result<WorkflowOutput, String> {
    match tool_name {
        "storyvideo_gen" => story(arguments, None, dispatch),
        "entity2video" => {
            let images: Vec<String> = arguments
                .get("images")
                .and_then(Value::as_array)
                .map(|v| v.iter().filter_map(|x| x.as_str().map(str::to_string)).collect())
                .unwrap_or_default();
            story(arguments, Some(images), dispatch)
        }
        "longvideo_understanding" => long_video(arguments, dispatch),
        "voice_clone" => voice_clone(arguments, dispatch),
        other => Err(format!("no workflow implementation for {other}")),
    }
}

/// Storyboard, character images (generated, or taken from `provided`),
/// keyframes, one clip per shot, merge.
fn story(
    arguments: &Arguments,
    provided: Option<Vec<String>>,
    dispatch: &mut dyn AtomDispatch,
) -> Result<WorkflowOutput, String> {
    let prompt = arguments.get("prompt").cloned().unwrap_or(json!(""));
    let resolution = arguments.get("resolution");
    let mut sb_args = args(json!({ "prompt": prompt }));
    if let Some(total) = arguments.get("total_duration_s") {
        sb_args.insert("total_duration_s".into(), total.clone());
    }
    if let Some(images) = &provided {
        if images.is_empty() || images.len() > MAX_CHARACTERS {
            return Err(format!(
                "entity2video needs 1..={MAX_CHARACTERS} character images, got {}",
                images.len()
            ));
        }
        sb_args.insert("character_count".into(), json!(images.len()));
    }

    let sb_artifact = dispatch.atom(STORYBOARD_TOOL, sb_args)?;
    let storyboard: Storyboard = sb_artifact
        .metadata
        .get("storyboard")
        .cloned()
        .ok_or("storyboard artifact carries no storyboard")
        .and_then(|v| serde_json::from_value(v).map_err(|_| "storyboard artifact is malformed"))?;

    let mut character_images: Vec<(String, String)> = Vec::new();
    for (i, c) in storyboard.characters.iter().enumerate() {
        let uri = match &provided {
            Some(images) => images
                .get(i)
                .cloned()
                .ok_or_else(|| format!("no image provided for {}", c.id))?,
            None => {
                let a = args(json!({
                    "prompt": format!("{}: {} Style: {}", c.name, c.description, storyboard.style)
                }));
                dispatch.atom("text2image_generate", with_resolution(a, resolution))?.uri
            }
        };
        character_images.push((c.id.clone(), uri));
    }

    let requests = shots_to_requests(&storyboard).map_err(|e| e.to_string())?;
    let mut clips: Vec<(u32, String)> = Vec::new();
    let mut merged = None;
    for request in requests {
        let Some(shot_id) = request.shot_id else {
            let videos: Vec<Value> = request
                .input_shots
                .iter()
                .map(|id| {
                    clips
                        .iter()
                        .find(|(s, _)| s == id)
                        .map(|(_, uri)| json!(uri))
                        .ok_or_else(|| format!("shot {id} was not rendered"))
                })
                .collect::<Result<_, _>>()?;
            merged = Some(dispatch.atom(&request.tool_name, args(json!({ "videos": videos })))?);
            continue;
        };
        let shot = &storyboard.shots[shot_id as usize - 1];
        let prompt = request.prompt.clone().unwrap_or_default();
        let reference = shot
            .onstage_characters
            .first()
            .and_then(|id| character_images.iter().find(|(c, _)| c == id))
            .map(|(_, uri)| uri.clone());
        let mut keyframe = |suffix: &str| -> Result<String, String> {
            let frame_prompt = format!("{prompt}{suffix}");
            let a = match &reference {
                Some(image) => ("image2image_generate", args(json!({"prompt": frame_prompt, "image": image}))),
                None => ("text2image_generate", args(json!({"prompt": frame_prompt}))),
            };
            Ok(dispatch.atom(a.0, with_resolution(a.1, resolution))?.uri)
        };
        let clip_args = match request.tool_name.as_str() {
            "image2video_gen" => {
                let image = keyframe("")?;
                args(json!({"prompt": prompt, "image": image}))
            }
            "frame2frame_video_gen" => {
                let first = keyframe(" (first frame)")?;
                let last = keyframe(" (last frame)")?;
                args(json!({"prompt": prompt, "first_frame": first, "last_frame": last}))
            }
            _ => args(json!({"prompt": prompt})),
        };
        let clip = dispatch.atom(&request.tool_name, with_resolution(clip_args, resolution))?;
        clips.push((shot_id, clip.uri));
    }

    let merged = merged.ok_or("storyboard produced no merge request")?;
    let mut out = Map::new();
    out.insert("storyboard_uri".into(), json!(sb_artifact.uri));
    out.insert("shots".into(), json!(storyboard.shots.len()));
    out.insert("result_of".into(), json!(merged.uri));
    if let Some(d) = merged.duration_s() {
        out.insert("duration_s".into(), json!(d));
    }
    Ok(out)
}

const LONG_VIDEO_SEGMENTS: usize = 3;

fn long_video(arguments: &Arguments, dispatch: &mut dyn AtomDispatch) -> Result<WorkflowOutput, String> {
    let video = arguments.get("video").cloned().unwrap_or(Value::Null);
    let question = arguments
        .get("prompt")
        .and_then(Value::as_str)
        .unwrap_or("summarize");
    let mut notes = Vec::new();
    for k in 1..=LONG_VIDEO_SEGMENTS {
        let a = args(json!({
            "media": video,
            "prompt": format!("segment {k} of {LONG_VIDEO_SEGMENTS}: {question}")
        }));
        let text = dispatch.atom("vision2text_gen", a)?;
        notes.push(text.metadata.get("text").and_then(Value::as_str).unwrap_or("").to_string());
    }
    let mut out = Map::new();
    out.insert("text".into(), json!(notes.join("\n")));
    out.insert("segments".into(), json!(LONG_VIDEO_SEGMENTS));
    Ok(out)
}

fn voice_clone(arguments: &Arguments, dispatch: &mut dyn AtomDispatch) -> Result<WorkflowOutput, String> {
    let samples: Vec<Value> = arguments
        .get("samples")
        .and_then(Value::as_array)
        .cloned()
        .unwrap_or_default();
    let mut transcripts = Vec::new();
    for sample in samples {
        let t = dispatch.atom("speech_to_text", args(json!({ "audio": sample })))?;
        transcripts.push(t.uri);
    }
    let voice = format!(
        "voice-{}",
        &crate::canonical::text_digest(&transcripts.join("|"))[..8]
    );
    let speech = dispatch.atom(
        "speech_gen",
        args(json!({"prompt": arguments.get("prompt").cloned().unwrap_or(json!("")), "voice": voice})),
    )?;
    let mut out = Map::new();
    out.insert("voice".into(), json!(voice));
    out.insert("result_of".into(), json!(speech.uri));
    out.insert("duration_s".into(), json!(speech.duration_s().unwrap_or(0)));
    Ok(out)
}
