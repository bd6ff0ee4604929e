//! Storyboard intermediate representation for story-video workflows.
//!
//! A storyboard is exactly `{characters, shots, style}`. Every shot lasts
//! [`SHOT_SECONDS`]; a storyboard for a 20 second video therefore has four
//! shots. [`shots_to_requests`] turns a valid storyboard into one generation
//! request per shot followed by a single `merge_video` request.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::strict::{self, Obj};
use crate::validation::{Collector, SchemaError, ValidationReport};

pub const SHOT_SECONDS: u32 = 5;
pub const MAX_CHARACTERS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Character {
    pub id: String,
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShotDistance {
    #[serde(rename = "wide shot")]
    Wide,
    #[serde(rename = "medium shot")]
    Medium,
    #[serde(rename = "close-up")]
    CloseUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShotAngle {
    #[serde(rename = "eye-level")]
    EyeLevel,
    #[serde(rename = "low angle (looking up)")]
    Low,
    #[serde(rename = "high angle (looking down)")]
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VideoType {
    #[serde(rename = "text2video")]
    Text2Video,
    #[serde(rename = "image2video")]
    Image2Video,
    #[serde(rename = "frame2frame")]
    Frame2Frame,
    #[serde(rename = "frame2frame_video_gen")]
    Frame2FrameVideoGen,
}

impl VideoType {
    /// The generation tool a shot of this type is rendered with.
    pub fn tool_name(self) -> &'static str {
        match self {
            VideoType::Text2Video => "text2video_gen",
            VideoType::Image2Video => "image2video_gen",
            VideoType::Frame2Frame | VideoType::Frame2FrameVideoGen => "frame2frame_video_gen",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerspectiveDesign {
    pub distance: ShotDistance,
    pub angle: ShotAngle,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lens: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Shot {
    pub id: u32,
    pub duration: u32,
    pub setting_description: String,
    pub plot_correspondence: String,
    pub onstage_characters: Vec<String>,
    pub static_shot_description: String,
    pub shot_perspective_design: PerspectiveDesign,
    pub audio_description: String,
    pub video_type: VideoType,
}

impl Shot {
    /// Generation prompt: static composition, then the action, then the style.
    pub fn prompt(&self, style: &str) -> String {
        let mut parts: Vec<String> = [&self.static_shot_description, &self.plot_correspondence]
            .into_iter()
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        let style = style.trim();
        if !style.is_empty() {
            parts.push(format!("Style: {style}"));
        }
        parts.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Storyboard {
    pub characters: Vec<Character>,
    pub shots: Vec<Shot>,
    pub style: String,
}

impl<'de> Deserialize<'de> for Storyboard {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        storyboard_from_value(&value).map_err(serde::de::Error::custom)
    }
}

impl Storyboard {
    pub fn character(&self, id: &str) -> Option<&Character> {
        self.characters.iter().find(|c| c.id == id)
    }

    pub fn total_duration(&self) -> u32 {
        self.shots.iter().map(|s| s.duration).sum()
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("storyboard serialization cannot fail")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoryboardError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("schema error at {0}")]
    Schema(#[from] SchemaError),
    #[error("invalid storyboard: {0}")]
    Invalid(ValidationReport<StoryboardViolationCode>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StoryboardViolationCode {
    NoShots,
    NonPositiveTotal,
    DurationMismatch,
    ShotCountMismatch,
    ShotDuration,
    ShotNumbering,
    UnknownCharacter,
    DuplicateCharacter,
    CharacterIdFormat,
    TooManyCharacters,
}

pub type StoryboardReport = ValidationReport<StoryboardViolationCode>;

// ── parsing ──────────────────────────────────────────────────

const TOP_KEYS: &[&str] = &["characters", "shots", "style"];
const CHARACTER_KEYS: &[&str] = &["id", "name", "description"];
const SHOT_KEYS: &[&str] = &[
    "id",
    "duration",
    "setting_description",
    "plot_correspondence",
    "onstage_characters",
    "static_shot_description",
    "shot_perspective_design",
    "audio_description",
    "video_type",
];
const PERSPECTIVE_KEYS: &[&str] = &["distance", "angle", "lens"];

pub fn parse_storyboard(json_text: &str) -> Result<Storyboard, StoryboardError> {
    let value: Value =
        serde_json::from_str(json_text).map_err(|e| StoryboardError::Syntax(e.to_string()))?;
    Ok(storyboard_from_value(&value)?)
}

pub fn storyboard_from_value(value: &Value) -> Result<Storyboard, SchemaError> {
    let root = Obj::new(value, "")?;
    root.deny_unknown(TOP_KEYS)?;
    let characters = root
        .array("characters")?
        .into_iter()
        .map(|(path, v)| {
            let obj = Obj::new(v, &path)?;
            obj.deny_unknown(CHARACTER_KEYS)?;
            Ok(Character {
                id: obj.string("id")?,
                name: obj.string("name")?,
                description: obj.string("description")?,
            })
        })
        .collect::<Result<Vec<_>, SchemaError>>()?;
    let shots = root
        .array("shots")?
        .into_iter()
        .map(|(path, v)| parse_shot(v, &path))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Storyboard {
        characters,
        shots,
        style: root.string("style")?,
    })
}

fn parse_shot(value: &Value, path: &str) -> Result<Shot, SchemaError> {
    let obj = Obj::new(value, path)?;
    obj.deny_unknown(SHOT_KEYS)?;
    let perspective = obj.object("shot_perspective_design")?;
    perspective.deny_unknown(PERSPECTIVE_KEYS)?;
    let distance = match perspective.string("distance")?.as_str() {
        "wide shot" => ShotDistance::Wide,
        "medium shot" => ShotDistance::Medium,
        "close-up" => ShotDistance::CloseUp,
        other => return Err(enum_error(perspective.path_of("distance"), other)),
    };
    let angle = match perspective.string("angle")?.as_str() {
        "eye-level" => ShotAngle::EyeLevel,
        "low angle (looking up)" => ShotAngle::Low,
        "high angle (looking down)" => ShotAngle::High,
        other => return Err(enum_error(perspective.path_of("angle"), other)),
    };
    let video_type = match obj.string("video_type")?.as_str() {
        "text2video" => VideoType::Text2Video,
        "image2video" => VideoType::Image2Video,
        "frame2frame" => VideoType::Frame2Frame,
        "frame2frame_video_gen" => VideoType::Frame2FrameVideoGen,
        other => return Err(enum_error(obj.path_of("video_type"), other)),
    };
    let onstage_characters = obj
        .array("onstage_characters")?
        .into_iter()
        .map(|(p, v)| strict::as_string(v, &p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Shot {
        id: obj.uint("id")?,
        duration: obj.uint("duration")?,
        setting_description: obj.string("setting_description")?,
        plot_correspondence: obj.string("plot_correspondence")?,
        onstage_characters,
        static_shot_description: obj.string("static_shot_description")?,
        shot_perspective_design: PerspectiveDesign {
            distance,
            angle,
            lens: perspective.opt_string("lens")?,
        },
        audio_description: obj.string("audio_description")?,
        video_type,
    })
}

fn enum_error(path: String, found: &str) -> SchemaError {
    SchemaError::new(path, format!("enum: unexpected value {found:?}"))
}

// ── validation ───────────────────────────────────────────────

fn character_id_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^char_[1-9][0-9]*$").unwrap())
}

pub fn validate_storyboard(sb: &Storyboard, total_duration: u32) -> StoryboardReport {
    use StoryboardViolationCode::*;
    let mut out = Collector::new();

    if sb.shots.is_empty() {
        out.push(NoShots, None, "storyboard has no shots");
    }
    if total_duration == 0 {
        out.push(NonPositiveTotal, None, "total duration must be positive");
    }
    let sum = sb.total_duration();
    if sum != total_duration {
        out.push(
            DurationMismatch,
            None,
            format!("shot durations sum to {sum}s, expected {total_duration}s"),
        );
    }
    if !total_duration.is_multiple_of(SHOT_SECONDS)
        || (total_duration / SHOT_SECONDS) as usize != sb.shots.len()
    {
        out.push(
            ShotCountMismatch,
            None,
            format!(
                "{} shots for {total_duration}s at {SHOT_SECONDS}s per shot",
                sb.shots.len()
            ),
        );
    }

    let mut ids = BTreeSet::new();
    for c in &sb.characters {
        if !character_id_pattern().is_match(&c.id) {
            out.push(
                CharacterIdFormat,
                None,
                format!("character id {:?} is not char_<n>", c.id),
            );
        }
        if !ids.insert(c.id.as_str()) {
            out.push(DuplicateCharacter, None, format!("character id {:?} repeated", c.id));
        }
    }
    if sb.characters.len() > MAX_CHARACTERS {
        out.push(
            TooManyCharacters,
            None,
            format!(
                "{} characters; at most one main and three supporting",
                sb.characters.len()
            ),
        );
    }

    for (i, shot) in sb.shots.iter().enumerate() {
        if shot.id != i as u32 + 1 {
            out.push(
                ShotNumbering,
                Some(shot.id),
                format!("shot at position {} has id {}", i + 1, shot.id),
            );
        }
        if shot.duration != SHOT_SECONDS {
            out.push(
                ShotDuration,
                Some(shot.id),
                format!("shot lasts {}s, expected {SHOT_SECONDS}s", shot.duration),
            );
        }
        for c in &shot.onstage_characters {
            if !ids.contains(c.as_str()) {
                out.push(
                    UnknownCharacter,
                    Some(shot.id),
                    format!("onstage character {c:?} is not defined"),
                );
            }
        }
    }

    out.finish()
}

// ── shot → tool request mapping ──────────────────────────────

/// A generation request derived from a storyboard. `input_shots` names the
/// shots whose rendered videos the request consumes (only for the merge).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolRequest {
    pub tool_name: String,
    pub shot_id: Option<u32>,
    pub prompt: Option<String>,
    pub input_shots: Vec<u32>,
}

pub fn shots_to_requests(sb: &Storyboard) -> Result<Vec<ToolRequest>, StoryboardError> {
    let total = SHOT_SECONDS * sb.shots.len() as u32;
    let report = validate_storyboard(sb, total);
    if !report.valid {
        return Err(StoryboardError::Invalid(report));
    }
    let mut requests: Vec<ToolRequest> = sb
        .shots
        .iter()
        .map(|shot| ToolRequest {
            tool_name: shot.video_type.tool_name().to_string(),
            shot_id: Some(shot.id),
            prompt: Some(shot.prompt(&sb.style)),
            input_shots: Vec::new(),
        })
        .collect();
    requests.push(ToolRequest {
        tool_name: "merge_video".to_string(),
        shot_id: None,
        prompt: None,
        input_shots: sb.shots.iter().map(|s| s.id).collect(),
    });
    Ok(requests)
}
