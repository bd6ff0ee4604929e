//! Tool descriptors, the registry, and the seed catalog.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolKind {
    Atom,
    Workflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    VideoGeneration,
    VideoEditing,
    VideoUnderstanding,
    VideoTracking,
    Audio,
    Image,
    NonAi,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::VideoGeneration,
        Category::VideoEditing,
        Category::VideoUnderstanding,
        Category::VideoTracking,
        Category::Audio,
        Category::Image,
        Category::NonAi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::VideoGeneration => "video_generation",
            Category::VideoEditing => "video_editing",
            Category::VideoUnderstanding => "video_understanding",
            Category::VideoTracking => "video_tracking",
            Category::Audio => "audio",
            Category::Image => "image",
            Category::NonAi => "non_ai",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == text)
    }

    /// Server that hosts tools of this category in the seed catalog.
    pub fn default_server(self) -> &'static str {
        match self {
            Category::VideoGeneration => "video_gen_server",
            Category::VideoEditing => "video_edit_server",
            Category::VideoUnderstanding => "video_understanding_server",
            Category::VideoTracking => "video_tracking_server",
            Category::Audio => "audio_server",
            Category::Image => "image_gen_server",
            Category::NonAi => "video_cut_server",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Video,
    Image,
    Audio,
    Text,
    Mask,
    Storyboard,
}

impl ArtifactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ArtifactKind::Video => "video",
            ArtifactKind::Image => "image",
            ArtifactKind::Audio => "audio",
            ArtifactKind::Text => "text",
            ArtifactKind::Mask => "mask",
            ArtifactKind::Storyboard => "storyboard",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ArtifactKind::Video => "mp4",
            ArtifactKind::Image => "png",
            ArtifactKind::Audio => "wav",
            ArtifactKind::Text => "txt",
            ArtifactKind::Mask => "mask.mp4",
            ArtifactKind::Storyboard => "json",
        }
    }
}

/// What a parameter carries. Media references are URIs or material paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemanticType {
    Text,
    Integer,
    Number,
    Boolean,
    Image,
    Video,
    Audio,
    Media,
    MediaList,
}

impl SemanticType {
    pub fn is_media(self) -> bool {
        matches!(
            self,
            SemanticType::Image
                | SemanticType::Video
                | SemanticType::Audio
                | SemanticType::Media
                | SemanticType::MediaList
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub semantic_type: SemanticType,
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolDescriptor {
    pub name: String,
    pub server_name: String,
    pub kind: ToolKind,
    pub category: Category,
    pub description: String,
    pub param_schema: Vec<ParamSpec>,
    pub produces: ArtifactKind,
    /// Atom tools a workflow chains, in execution order. Empty for atoms.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expansion: Vec<String>,
}

impl ToolDescriptor {
    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.param_schema.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("invalid descriptor {name}: {reason}")]
    InvalidDescriptor { name: String, reason: String },
    #[error("catalog file: {0}")]
    Io(String),
    #[error("catalog format: {0}")]
    Format(String),
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Registered descriptors keyed by `(server_name, name)`.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    tools: BTreeMap<(String, String), ToolDescriptor>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn seeded() -> Self {
        let mut registry = Self::new();
        // Atoms first so every workflow expansion resolves.
        let (atoms, workflows): (Vec<_>, Vec<_>) = seed_catalog()
            .into_iter()
            .partition(|d| d.kind == ToolKind::Atom);
        for d in atoms.into_iter().chain(workflows) {
            registry.register(d).expect("seed catalog is well-formed");
        }
        registry
    }

    pub fn len(&self) -> usize {
        self.tools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tools.is_empty()
    }

    pub fn check(&self, d: &ToolDescriptor) -> Result<(), CatalogError> {
        let invalid = |reason: String| CatalogError::InvalidDescriptor {
            name: d.name.clone(),
            reason,
        };
        if !is_identifier(&d.name) {
            return Err(invalid("tool name must be a lowercase identifier".into()));
        }
        if !is_identifier(&d.server_name) {
            return Err(invalid("server name must be a lowercase identifier".into()));
        }
        let mut seen = BTreeSet::new();
        for p in &d.param_schema {
            if !is_identifier(&p.name) {
                return Err(invalid(format!("parameter {:?} is not an identifier", p.name)));
            }
            if !seen.insert(p.name.as_str()) {
                return Err(invalid(format!("parameter {} declared twice", p.name)));
            }
        }
        match d.kind {
            ToolKind::Atom if !d.expansion.is_empty() => {
                Err(invalid("atom tools have no expansion".into()))
            }
            ToolKind::Workflow if d.expansion.is_empty() => {
                Err(invalid("workflow expansion is empty".into()))
            }
            ToolKind::Workflow => {
                for step in &d.expansion {
                    let registered_atom = self
                        .tools
                        .values()
                        .any(|t| &t.name == step && t.kind == ToolKind::Atom);
                    if !registered_atom {
                        return Err(invalid(format!(
                            "expansion references unregistered atom {step}"
                        )));
                    }
                }
                Ok(())
            }
            ToolKind::Atom => Ok(()),
        }
    }

    /// Inserts or replaces the descriptor for `(server_name, name)`.
    pub fn register(&mut self, d: ToolDescriptor) -> Result<(), CatalogError> {
        self.check(&d)?;
        self.tools.insert((d.server_name.clone(), d.name.clone()), d);
        Ok(())
    }

    pub fn get(&self, server_name: &str, name: &str) -> Option<&ToolDescriptor> {
        self.tools.get(&(server_name.to_string(), name.to_string()))
    }

    /// First descriptor with this name, by server order.
    pub fn find(&self, name: &str) -> Option<&ToolDescriptor> {
        self.tools.values().find(|d| d.name == name)
    }

    /// Name-sorted listing, optionally restricted to one category.
    pub fn list(&self, filter: Option<Category>) -> Vec<ToolDescriptor> {
        let mut out: Vec<ToolDescriptor> = self
            .tools
            .values()
            .filter(|d| filter.is_none_or(|c| d.category == c))
            .cloned()
            .collect();
        out.sort_by(|a, b| (&a.name, &a.server_name).cmp(&(&b.name, &b.server_name)));
        out
    }

    pub fn export_json(&self) -> String {
        serde_json::to_string_pretty(&self.list(None)).expect("descriptors serialize")
    }

    pub fn export_file(&self, path: &Path) -> Result<(), CatalogError> {
        std::fs::write(path, self.export_json() + "\n").map_err(|e| CatalogError::Io(e.to_string()))
    }

    /// Registers every descriptor in a catalog file, atoms before workflows.
    pub fn import_json(&mut self, text: &str) -> Result<usize, CatalogError> {
        let descriptors: Vec<ToolDescriptor> =
            serde_json::from_str(text).map_err(|e| CatalogError::Format(e.to_string()))?;
        let n = descriptors.len();
        let (atoms, workflows): (Vec<_>, Vec<_>) = descriptors
            .into_iter()
            .partition(|d| d.kind == ToolKind::Atom);
        for d in atoms.into_iter().chain(workflows) {
            self.register(d)?;
        }
        Ok(n)
    }

    pub fn import_file(&mut self, path: &Path) -> Result<usize, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|e| CatalogError::Io(e.to_string()))?;
        self.import_json(&text)
    }
}

// ── seed catalog ─────────────────────────────────────────────

fn p(name: &str, semantic_type: SemanticType, required: bool) -> ParamSpec {
    ParamSpec {
        name: name.into(),
        semantic_type,
        required,
    }
}

fn tool(
    name: &str,
    kind: ToolKind,
    category: Category,
    description: &str,
    params: Vec<ParamSpec>,
    produces: ArtifactKind,
    expansion: &[&str],
) -> ToolDescriptor {
    ToolDescriptor {
        name: name.into(),
        server_name: category.default_server().into(),
        kind,
        category,
        description: description.into(),
        param_schema: params,
        produces,
        expansion: expansion.iter().map(|s| s.to_string()).collect(),
    }
}

pub const STORYBOARD_TOOL: &str = "storyboard_gen";

/// Every tool of the published taxonomy, with schemas inferred from the
/// one-line "needs X, returns Y" descriptions, plus `storyboard_gen`, which
/// the story workflows use to author their storyboard.
pub fn seed_catalog() -> Vec<ToolDescriptor> {
    use ArtifactKind as A;
    use Category::*;
    use SemanticType as T;
    use ToolKind::{Atom, Workflow};

    let story_expansion = [
        STORYBOARD_TOOL,
        "text2image_generate",
        "image2image_generate",
        "text2video_gen",
        "image2video_gen",
        "frame2frame_video_gen",
        "merge_video",
    ];
    let video_gen_params = |extra: Vec<ParamSpec>| {
        let mut v = vec![p("prompt", T::Text, true)];
        v.extend(extra);
        v.push(p("duration", T::Integer, false));
        v.push(p("resolution", T::Text, false));
        v
    };

    vec![
        // video generation
        tool("text2video_gen", Atom, VideoGeneration, "Generate a ~5 s video from a text prompt.",
            video_gen_params(vec![]), A::Video, &[]),
        tool("image2video_gen", Atom, VideoGeneration, "Generate a ~5 s video that starts from a reference image.",
            video_gen_params(vec![p("image", T::Image, true)]), A::Video, &[]),
        tool("video_extension", Atom, VideoGeneration, "Extend a video from its last frame.",
            video_gen_params(vec![p("video", T::Video, true)]), A::Video, &[]),
        tool("frame2frame_video_gen", Atom, VideoGeneration, "Generate a ~5 s transition between a first and a last frame.",
            video_gen_params(vec![p("first_frame", T::Image, true), p("last_frame", T::Image, true)]), A::Video, &[]),
        tool("storyvideo_gen", Workflow, VideoGeneration,
            "Storyboard, character images, keyframes, per-shot clips, merge.",
            vec![p("prompt", T::Text, true), p("total_duration_s", T::Integer, false), p("resolution", T::Text, false)],
            A::Video, &story_expansion),
        tool("entity2video", Workflow, VideoGeneration,
            "Story video that uses the provided character images instead of generating them.",
            vec![p("prompt", T::Text, true), p("images", T::MediaList, true), p("total_duration_s", T::Integer, false), p("resolution", T::Text, false)],
            A::Video, &story_expansion),
        // video editing
        tool("swap_object_tool", Atom, VideoEditing, "Swap an object class in a video with the object of a reference image.",
            vec![p("video", T::Video, true), p("image", T::Image, true), p("prompt", T::Text, true), p("label", T::Text, false)], A::Video, &[]),
        tool("repainting", Atom, VideoEditing, "Repaint or replace one labelled object in a video.",
            vec![p("video", T::Video, true), p("prompt", T::Text, true), p("label", T::Text, false)], A::Video, &[]),
        tool("depth_modify", Atom, VideoEditing, "Edit foreground or background using depth.",
            vec![p("video", T::Video, true), p("prompt", T::Text, true)], A::Video, &[]),
        tool("recolor", Atom, VideoEditing, "Recolor a video or regions of it.",
            vec![p("video", T::Video, true), p("prompt", T::Text, true)], A::Video, &[]),
        tool("pose_reference", Atom, VideoEditing, "Transfer a person's motion to a new character.",
            vec![p("video", T::Video, true), p("prompt", T::Text, true)], A::Video, &[]),
        tool("style_transfer", Atom, VideoEditing, "Re-render a video in a new artistic style.",
            vec![p("video", T::Video, true), p("prompt", T::Text, true)], A::Video, &[]),
        // video tracking
        tool("referring_segmentation", Atom, VideoTracking, "Segment the objects a text prompt refers to.",
            vec![p("video", T::Video, true), p("prompt", T::Text, true)], A::Mask, &[]),
        tool("video_all_segmentation", Atom, VideoTracking, "Segment every detectable object.",
            vec![p("video", T::Video, true)], A::Mask, &[]),
        // video understanding
        tool("vision2text_gen", Atom, VideoUnderstanding, "Describe the visual content of a video or image.",
            vec![p("media", T::Media, true), p("prompt", T::Text, false)], A::Text, &[]),
        tool("video_timestamp_analysis", Atom, VideoUnderstanding, "Describe the frame at a timestamp, optionally segmented.",
            vec![p("video", T::Video, true), p("timestamp", T::Number, true), p("segment", T::Boolean, false), p("prompt", T::Text, false)], A::Text, &[]),
        tool("main_object_analysis", Atom, VideoUnderstanding, "Locate and describe the main object of a video.",
            vec![p("video", T::Video, true), p("label", T::Text, false), p("prompt", T::Text, false)], A::Text, &[]),
        tool(STORYBOARD_TOOL, Atom, VideoUnderstanding, "Author a storyboard (characters, 5 s shots, style) from a one-line concept.",
            vec![p("prompt", T::Text, true), p("total_duration_s", T::Integer, false), p("character_count", T::Integer, false)], A::Storyboard, &[]),
        tool("longvideo_understanding", Workflow, VideoUnderstanding, "Segment-wise analysis of a long video into a summary.",
            vec![p("video", T::Video, true), p("prompt", T::Text, false)], A::Text, &["vision2text_gen"]),
        // audio
        tool("video_foley", Atom, Audio, "Create sound effects synced to visual events.",
            vec![p("video", T::Video, true), p("prompt", T::Text, false)], A::Audio, &[]),
        tool("speech_gen", Atom, Audio, "Synthesize speech from text.",
            vec![p("prompt", T::Text, true), p("voice", T::Text, false)], A::Audio, &[]),
        tool("speech_to_text", Atom, Audio, "Transcribe speech with timestamps.",
            vec![p("audio", T::Audio, true)], A::Text, &[]),
        tool("voice_clone", Workflow, Audio, "Clone a voice from samples and speak new text with it.",
            vec![p("samples", T::MediaList, true), p("prompt", T::Text, true)], A::Audio, &["speech_to_text", "speech_gen"]),
        tool("music_gen", Atom, Audio, "Generate background music from a mood or scene description.",
            vec![p("prompt", T::Text, true)], A::Audio, &[]),
        // image
        tool("text2image_generate", Atom, Image, "Generate an image from text.",
            vec![p("prompt", T::Text, true), p("resolution", T::Text, false)], A::Image, &[]),
        tool("image2image_generate", Atom, Image, "Generate an image conditioned on an input image.",
            vec![p("prompt", T::Text, true), p("image", T::Image, true), p("resolution", T::Text, false)], A::Image, &[]),
        tool("image_editing", Atom, Image, "Inpaint, retouch or composite an image.",
            vec![p("image", T::Image, true), p("prompt", T::Text, true)], A::Image, &[]),
        // video cut
        tool("merge_video", Atom, NonAi, "Concatenate clips into one sequence.",
            vec![p("videos", T::MediaList, true)], A::Video, &[]),
        tool("add_transition", Atom, NonAi, "Insert transitions (fade, wipe, slide) between clips.",
            vec![p("videos", T::MediaList, true), p("transition", T::Text, false)], A::Video, &[]),
        tool("add_subtitle", Atom, NonAi, "Burn subtitles into a video.",
            vec![p("video", T::Video, true), p("text", T::Text, true)], A::Video, &[]),
        tool("materials_search", Atom, NonAi, "Search royalty-free images or videos by keyword.",
            vec![p("keyword", T::Text, true)], A::Image, &[]),
    ]
}

/// Category of a seed-catalog tool, by name.
pub fn seed_category(name: &str) -> Option<Category> {
    seed_catalog()
        .into_iter()
        .find(|d| d.name == name)
        .map(|d| d.category)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn video_generation_has_six() {
        let reg = Registry::seeded();
        let listed = reg.list(Some(Category::VideoGeneration));
        assert_eq!(listed.len(), 6);
        assert_eq!(listed.iter().filter(|d| d.kind == ToolKind::Atom).count(), 4);
        assert_eq!(listed.iter().filter(|d| d.kind == ToolKind::Workflow).count(), 2);
    }

    #[test]
    fn non_ai_has_four() {
        let names: Vec<String> = Registry::seeded()
            .list(Some(Category::NonAi))
            .into_iter()
            .map(|d| d.name)
            .collect();
        assert_eq!(
            names,
            vec!["add_subtitle", "add_transition", "materials_search", "merge_video"]
        );
    }

    #[test]
    fn empty_registry_lists_nothing() {
        assert!(Registry::new().list(None).is_empty());
    }

    #[test]
    fn listing_is_name_sorted() {
        let names: Vec<String> = Registry::seeded().list(None).into_iter().map(|d| d.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn register_and_replace() {
        let mut reg = Registry::new();
        let d = seed_catalog().into_iter().find(|d| d.name == "text2video_gen").unwrap();
        reg.register(d.clone()).unwrap();
        assert_eq!(reg.len(), 1);
        let mut changed = d.clone();
        changed.description = "replaced".into();
        reg.register(changed).unwrap();
        assert_eq!(reg.len(), 1);
        assert_eq!(reg.get("video_gen_server", "text2video_gen").unwrap().description, "replaced");
    }

    #[test]
    fn workflow_needs_registered_atoms() {
        let mut reg = Registry::new();
        let wf = seed_catalog().into_iter().find(|d| d.name == "storyvideo_gen").unwrap();
        assert!(matches!(reg.register(wf), Err(CatalogError::InvalidDescriptor { .. })));
    }

    #[test]
    fn malformed_descriptors_rejected() {
        let mut reg = Registry::new();
        let mut d = seed_catalog().into_iter().find(|d| d.name == "recolor").unwrap();
        d.param_schema.push(d.param_schema[0].clone());
        assert!(reg.register(d.clone()).is_err());
        d.param_schema.pop();
        d.name = "Bad Name".into();
        assert!(reg.register(d).is_err());
    }

    #[test]
    fn export_import_round_trip() {
        let reg = Registry::seeded();
        let mut other = Registry::new();
        let n = other.import_json(&reg.export_json()).unwrap();
        assert_eq!(n, reg.len());
        assert_eq!(other.list(None), reg.list(None));
    }
}
