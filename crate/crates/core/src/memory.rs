//! Three memory levels: global execution traces shared across tasks,
//! per-session task memory (step outputs, memo table, storyboard slot) and
//! user memory (materials and preferences).
//!
//! Each store sits behind its own lock, so reads run concurrently and writes
//! are serialized per store. Every store persists as one JSON record per line.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::call_digest;
use crate::hub::{Arguments, Artifact, ArtifactKind};
use crate::orchestrator::{Session, SessionState};
use crate::storyboard::Storyboard;

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("session {0} has not finished")]
    SessionNotTerminal(String),
    #[error("material {0} needs at least one tag")]
    UntaggedMaterial(String),
    #[error("memory io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
}

// ── similarity ─────────────────────────────────────────────

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub trait Similarity: Send + Sync {
    fn score(&self, query: &[String], candidate: &[String]) -> f64;
}

/// Cosine similarity of token sets (binary bag of words).
#[derive(Debug, Default, Clone, Copy)]
pub struct TokenCosine;

impl Similarity for TokenCosine {
    fn score(&self, query: &[String], candidate: &[String]) -> f64 {
        let q: BTreeSet<&String> = query.iter().collect();
        let c: BTreeSet<&String> = candidate.iter().collect();
        if q.is_empty() || c.is_empty() {
            return 0.0;
        }
        let shared = q.intersection(&c).count() as f64;
        shared / ((q.len() as f64).sqrt() * (c.len() as f64).sqrt())
    }
}

// ── global traces ──────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceOutcome {
    Completed,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalTrace {
    pub trace_id: u64,
    pub goal_text: String,
    pub tool_sequence: Vec<String>,
    pub outcome: TraceOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct GlobalStore {
    traces: Vec<GlobalTrace>,
}

impl GlobalStore {
    pub fn traces(&self) -> &[GlobalTrace] {
        &self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    fn next_id(&self) -> u64 {
        self.traces.iter().map(|t| t.trace_id + 1).max().unwrap_or(1)
    }

    pub fn add(
        &mut self,
        goal_text: &str,
        tool_sequence: Vec<String>,
        outcome: TraceOutcome,
        score: Option<f64>,
    ) -> GlobalTrace {
        let trace = GlobalTrace {
            trace_id: self.next_id(),
            goal_text: goal_text.to_string(),
            tool_sequence,
            outcome,
            score,
        };
        self.traces.push(trace.clone());
        trace
    }

    /// Top `k` traces by goal similarity; equal scores prefer the newer id.
    pub fn retrieve(&self, goal_text: &str, k: usize, sim: &dyn Similarity) -> Vec<GlobalTrace> {
        let query = tokenize(goal_text);
        let mut scored: Vec<(f64, &GlobalTrace)> = self
            .traces
            .iter()
            .map(|t| (sim.score(&query, &tokenize(&t.goal_text)), t))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.trace_id.cmp(&a.1.trace_id)));
        scored.into_iter().take(k).map(|(_, t)| t.clone()).collect()
    }
}

// ── user memory ────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserMaterial {
    pub material_id: String,
    pub uri: String,
    pub kind: ArtifactKind,
    pub tags: Vec<String>,
    pub added_at: u64,
}

impl UserMaterial {
    pub fn new(material_id: &str, uri: &str, kind: ArtifactKind, tags: &[&str], added_at: u64) -> Self {
        Self {
            material_id: material_id.to_string(),
            uri: uri.to_string(),
            kind,
            tags: tags.iter().map(|t| t.to_lowercase()).collect(),
            added_at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserPreference {
    pub key: String,
    pub value: String,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct UserStore {
    materials: Vec<UserMaterial>,
    preferences: BTreeMap<String, String>,
}

impl UserStore {
    pub fn materials(&self) -> &[UserMaterial] {
        &self.materials
    }

    /// Adds or replaces (by material_id) a material.
    pub fn add_material(&mut self, m: UserMaterial) -> Result<(), MemoryError> {
        if m.tags.is_empty() {
            return Err(MemoryError::UntaggedMaterial(m.material_id));
        }
        self.materials.retain(|x| x.material_id != m.material_id);
        self.materials.push(m);
        Ok(())
    }

    pub fn set_preference(&mut self, key: &str, value: &str) {
        self.preferences.insert(key.to_string(), value.to_string());
    }

    pub fn preference(&self, key: &str) -> Option<&str> {
        self.preferences.get(key).map(String::as_str)
    }

    pub fn preferences(&self) -> impl Iterator<Item = UserPreference> + '_ {
        self.preferences.iter().map(|(key, value)| UserPreference {
            key: key.clone(),
            value: value.clone(),
        })
    }

    /// `key=value`, one per line, in key order.
    pub fn preference_lines(&self) -> String {
        self.preferences
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// Materials whose tags overlap the query, best first; equal scores
    /// prefer the later `added_at`.
    pub fn retrieve(&self, query: &str, k: usize, sim: &dyn Similarity) -> Vec<UserMaterial> {
        let q = tokenize(query);
        let mut scored: Vec<(f64, &UserMaterial)> = self
            .materials
            .iter()
            .map(|m| (sim.score(&q, &m.tags), m))
            .filter(|(s, _)| *s > 0.0)
            .collect();
        scored.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then(b.1.added_at.cmp(&a.1.added_at))
                .then(a.1.material_id.cmp(&b.1.material_id))
        });
        scored.into_iter().take(k).map(|(_, m)| m.clone()).collect()
    }

    pub fn by_uri(&self, uri: &str) -> Option<&UserMaterial> {
        self.materials.iter().find(|m| m.uri == uri)
    }
}

// ── task memory ────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TaskKey {
    StepOutput { step_number: u32 },
    Memo { tool_name: String, args_digest: String },
    Storyboard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskValue {
    Artifact(Artifact),
    Storyboard(Storyboard),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskEntry {
    pub session_id: String,
    pub key: TaskKey,
    pub value: TaskValue,
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct TaskMemory {
    entries: BTreeMap<TaskKey, TaskValue>,
    storyboard_writes: u32,
}

impl TaskMemory {
    pub fn step_output(&self, step_number: u32) -> Option<&Artifact> {
        match self.entries.get(&TaskKey::StepOutput { step_number }) {
            Some(TaskValue::Artifact(a)) => Some(a),
            _ => None,
        }
    }

    pub fn put_step_output(&mut self, step_number: u32, artifact: Artifact) {
        self.entries
            .insert(TaskKey::StepOutput { step_number }, TaskValue::Artifact(artifact));
    }

    pub fn memo_lookup(&self, tool_name: &str, args: &Arguments) -> Option<&Artifact> {
        let key = TaskKey::Memo {
            tool_name: tool_name.to_string(),
            args_digest: call_digest(tool_name, args),
        };
        match self.entries.get(&key) {
            Some(TaskValue::Artifact(a)) => Some(a),
            _ => None,
        }
    }

    pub fn memo_store(&mut self, tool_name: &str, args: &Arguments, artifact: Artifact) {
        let key = TaskKey::Memo {
            tool_name: tool_name.to_string(),
            args_digest: call_digest(tool_name, args),
        };
        self.entries.insert(key, TaskValue::Artifact(artifact));
    }

    pub fn storyboard(&self) -> Option<&Storyboard> {
        match self.entries.get(&TaskKey::Storyboard) {
            Some(TaskValue::Storyboard(s)) => Some(s),
            _ => None,
        }
    }

    /// Fills the single storyboard slot; a later write replaces the earlier one.
    pub fn write_storyboard(&mut self, storyboard: Storyboard) {
        self.entries.insert(TaskKey::Storyboard, TaskValue::Storyboard(storyboard));
        self.storyboard_writes += 1;
    }

    pub fn storyboard_writes(&self) -> u32 {
        self.storyboard_writes
    }

    pub fn memo_len(&self) -> usize {
        self.entries.keys().filter(|k| matches!(k, TaskKey::Memo { .. })).count()
    }

    pub fn entries(&self, session_id: &str) -> Vec<TaskEntry> {
        self.entries
            .iter()
            .map(|(key, value)| TaskEntry {
                session_id: session_id.to_string(),
                key: key.clone(),
                value: value.clone(),
            })
            .collect()
    }
}

// ── stores ─────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryPaths {
    pub global: PathBuf,
    pub user: PathBuf,
    pub task: PathBuf,
}

impl MemoryPaths {
    /// `global.jsonl`, `user.jsonl` and `task.jsonl` under `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            global: dir.join("global.jsonl"),
            user: dir.join("user.jsonl"),
            task: dir.join("task.jsonl"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum UserLine {
    Material(UserMaterial),
    Preference(UserPreference),
}

/// Planner-facing view of memory for one goal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MemoryContext {
    pub traces: Vec<GlobalTrace>,
    pub materials: Vec<UserMaterial>,
    pub preference_lines: String,
}

impl MemoryContext {
    pub fn is_empty(&self) -> bool {
        self.traces.is_empty() && self.materials.is_empty() && self.preference_lines.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for t in &self.traces {
            out.push_str(&format!(
                "trace {} ({:?}): {} => {}\n",
                t.trace_id,
                t.outcome,
                t.goal_text,
                t.tool_sequence.join(", ")
            ));
        }
        for m in &self.materials {
            out.push_str(&format!("material {} [{}]: {}\n", m.material_id, m.tags.join(" "), m.uri));
        }
        out.push_str(&self.preference_lines);
        out
    }
}

pub struct MemoryStores {
    global: RwLock<GlobalStore>,
    user: RwLock<UserStore>,
    tasks: RwLock<BTreeMap<String, TaskMemory>>,
    similarity: Box<dyn Similarity>,
    paths: Option<MemoryPaths>,
}

impl Default for MemoryStores {
    fn default() -> Self {
        Self::new()
    }
}

impl MemoryStores {
    pub fn new() -> Self {
        Self {
            global: RwLock::new(GlobalStore::default()),
            user: RwLock::new(UserStore::default()),
            tasks: RwLock::new(BTreeMap::new()),
            similarity: Box::new(TokenCosine),
            paths: None,
        }
    }

    pub fn with_similarity(mut self, sim: Box<dyn Similarity>) -> Self {
        self.similarity = sim;
        self
    }

    /// Loads all three stores from `paths` (missing files are empty stores)
    /// and appends every recorded trace there.
    pub fn open(paths: MemoryPaths) -> Result<Self, MemoryError> {
        let mut stores = Self::load(&paths)?;
        stores.paths = Some(paths);
        Ok(stores)
    }

    // ── global ──

    pub fn global_retrieve(&self, goal_text: &str, k: usize) -> Vec<GlobalTrace> {
        self.global.read().unwrap().retrieve(goal_text, k, self.similarity.as_ref())
    }

    pub fn global_snapshot(&self) -> GlobalStore {
        self.global.read().unwrap().clone()
    }

    pub fn add_trace(
        &self,
        goal_text: &str,
        tool_sequence: Vec<String>,
        outcome: TraceOutcome,
        score: Option<f64>,
    ) -> Result<GlobalTrace, MemoryError> {
        let trace = self.global.write().unwrap().add(goal_text, tool_sequence, outcome, score);
        if let Some(paths) = &self.paths {
            append_line(&paths.global, &trace)?;
        }
        Ok(trace)
    }

    /// Exports a finished session as a global trace. The tool sequence is the
    /// plan's executed (non-pending) steps; `score` is typically its wPED.
    pub fn record_trace(&self, session: &Session, score: Option<f64>) -> Result<GlobalTrace, MemoryError> {
        let outcome = match session.state {
            SessionState::Completed => TraceOutcome::Completed,
            SessionState::Aborted => TraceOutcome::Aborted,
            _ => return Err(MemoryError::SessionNotTerminal(session.session_id.clone())),
        };
        let sequence = session
            .plan
            .steps
            .iter()
            .filter(|s| s.status != crate::plan::StepStatus::Pending)
            .map(|s| s.tool.name.clone())
            .collect();
        self.add_trace(&session.goal.goal_text, sequence, outcome, score)
    }

    // ── user ──

    pub fn add_material(&self, m: UserMaterial) -> Result<(), MemoryError> {
        self.user.write().unwrap().add_material(m)
    }

    pub fn set_preference(&self, key: &str, value: &str) {
        self.user.write().unwrap().set_preference(key, value);
    }

    pub fn preference(&self, key: &str) -> Option<String> {
        self.user.read().unwrap().preference(key).map(str::to_string)
    }

    pub fn user_retrieve(&self, query: &str, k: usize) -> Vec<UserMaterial> {
        self.user.read().unwrap().retrieve(query, k, self.similarity.as_ref())
    }

    pub fn material_by_uri(&self, uri: &str) -> Option<UserMaterial> {
        self.user.read().unwrap().by_uri(uri).cloned()
    }

    pub fn user_snapshot(&self) -> UserStore {
        self.user.read().unwrap().clone()
    }

    pub fn context(&self, goal_text: &str, k: usize, global: bool, user: bool) -> MemoryContext {
        let mut ctx = MemoryContext::default();
        if global {
            ctx.traces = self.global_retrieve(goal_text, k);
        }
        if user {
            ctx.materials = self.user_retrieve(goal_text, k);
            ctx.preference_lines = self.user.read().unwrap().preference_lines();
        }
        ctx
    }

    // ── task ──

    /// Runs `f` on the task memory of `session_id`, creating it if needed.
    pub fn with_task<R>(&self, session_id: &str, f: impl FnOnce(&mut TaskMemory) -> R) -> R {
        let mut tasks = self.tasks.write().unwrap();
        f(tasks.entry(session_id.to_string()).or_default())
    }

    pub fn task(&self, session_id: &str) -> Option<TaskMemory> {
        self.tasks.read().unwrap().get(session_id).cloned()
    }

    pub fn memo_lookup(&self, session_id: &str, tool_name: &str, args: &Arguments) -> Option<Artifact> {
        self.tasks
            .read()
            .unwrap()
            .get(session_id)
            .and_then(|t| t.memo_lookup(tool_name, args).cloned())
    }

    /// Drops the session's task memory.
    pub fn end_session(&self, session_id: &str) {
        self.tasks.write().unwrap().remove(session_id);
    }

    // ── persistence ──

    pub fn save(&self, paths: &MemoryPaths) -> Result<(), MemoryError> {
        write_lines(&paths.global, self.global.read().unwrap().traces.iter())?;
        let user = self.user.read().unwrap();
        let lines: Vec<UserLine> = user
            .materials
            .iter()
            .cloned()
            .map(UserLine::Material)
            .chain(user.preferences().map(UserLine::Preference))
            .collect();
        write_lines(&paths.user, lines.iter())?;
        let tasks = self.tasks.read().unwrap();
        let entries: Vec<TaskEntry> = tasks.iter().flat_map(|(sid, t)| t.entries(sid)).collect();
        write_lines(&paths.task, entries.iter())?;
        Ok(())
    }

    pub fn load(paths: &MemoryPaths) -> Result<Self, MemoryError> {
        let stores = Self::new();
        {
            let mut global = stores.global.write().unwrap();
            global.traces = read_lines(&paths.global)?;
        }
        {
            let mut user = stores.user.write().unwrap();
            for line in read_lines::<UserLine>(&paths.user)? {
                match line {
                    UserLine::Material(m) => user.add_material(m)?,
                    UserLine::Preference(p) => user.set_preference(&p.key, &p.value),
                }
            }
        }
        {
            let mut tasks = stores.tasks.write().unwrap();
            for entry in read_lines::<TaskEntry>(&paths.task)? {
                let task = tasks.entry(entry.session_id).or_default();
                if entry.key == TaskKey::Storyboard {
                    task.storyboard_writes += 1;
                }
                task.entries.insert(entry.key, entry.value);
            }
        }
        Ok(stores)
    }

    /// Whether the three stores hold the same contents.
    pub fn same_contents(&self, other: &MemoryStores) -> bool {
        *self.global.read().unwrap() == *other.global.read().unwrap()
            && *self.user.read().unwrap() == *other.user.read().unwrap()
            && self
                .tasks
                .read()
                .unwrap()
                .iter()
                .map(|(k, t)| (k.clone(), t.entries.clone()))
                .eq(other.tasks.read().unwrap().iter().map(|(k, t)| (k.clone(), t.entries.clone())))
    }
}

fn write_lines<'a, T: Serialize + 'a>(path: &Path, items: impl Iterator<Item = &'a T>) -> Result<(), MemoryError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn append_line<T: Serialize>(path: &Path, item: &T) -> Result<(), MemoryError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = serde_json::to_string(item).map_err(std::io::Error::from)?;
    line.push('\n');
    f.write_all(line.as_bytes())?;
    Ok(())
}

fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, MemoryError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| MemoryError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hub::Provenance;
    use serde_json::json;

    fn artifact(uri: &str) -> Artifact {
        Artifact {
            uri: uri.into(),
            kind: ArtifactKind::Video,
            metadata: Default::default(),
            provenance: Provenance {
                session_id: "s".into(),
                step_number: 1,
                tool_name: "text2video_gen".into(),
                call_id: "s#0".into(),
            },
        }
    }

    fn args(v: serde_json::Value) -> Arguments {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn tokenizer_lowercases_and_splits() {
        assert_eq!(tokenize("Make a CARTOON-dog, video!"), vec!["make", "a", "cartoon", "dog", "video"]);
    }

    #[test]
    fn cosine_by_hand() {
        // {make,a,cartoon,dog,video} vs {cartoon,dog,story}: 2 / (sqrt5 * sqrt3)
        let q = tokenize("make a cartoon dog video");
        let v = TokenCosine.score(&q, &tokenize("cartoon dog story"));
        assert!((v - 2.0 / (5f64.sqrt() * 3f64.sqrt())).abs() < 1e-12);
        assert_eq!(TokenCosine.score(&q, &tokenize("city timelapse")), 0.0);
    }

    #[test]
    fn global_retrieval_ranks_and_breaks_ties() {
        let mut g = GlobalStore::default();
        assert!(g.retrieve("anything", 3, &TokenCosine).is_empty());
        g.add("city timelapse", vec!["text2video_gen".into()], TraceOutcome::Completed, None);
        assert_eq!(g.retrieve("unrelated words", 1, &TokenCosine).len(), 1);
        g.add("cartoon dog story", vec!["storyvideo_gen".into()], TraceOutcome::Completed, None);
        let top = g.retrieve("make a cartoon dog video", 2, &TokenCosine);
        assert_eq!(top[0].goal_text, "cartoon dog story");
        let tied = g.retrieve("nothing shared", 2, &TokenCosine);
        assert_eq!(tied.iter().map(|t| t.trace_id).collect::<Vec<_>>(), vec![2, 1]);
    }

    #[test]
    fn user_retrieval_finds_the_cat() {
        let mut u = UserStore::default();
        u.add_material(UserMaterial::new("m1", "/u/cat.png", ArtifactKind::Image, &["cat", "pet"], 1)).unwrap();
        u.add_material(UserMaterial::new("m2", "/u/car.mp4", ArtifactKind::Video, &["car"], 2)).unwrap();
        assert_eq!(u.retrieve("my cat", 5, &TokenCosine)[0].uri, "/u/cat.png");
        assert!(u.retrieve("ocean waves", 5, &TokenCosine).is_empty());
        u.add_material(UserMaterial::new("m3", "/u/cat2.png", ArtifactKind::Image, &["cat", "pet"], 3)).unwrap();
        assert_eq!(u.retrieve("my cat", 5, &TokenCosine)[0].material_id, "m3");
        assert!(u.add_material(UserMaterial::new("m4", "/u/x", ArtifactKind::Image, &[], 4)).is_err());
    }

    #[test]
    fn preference_lines_are_sorted() {
        let mut u = UserStore::default();
        u.set_preference("preferred_style", "watercolor");
        u.set_preference("preferred_resolution", "1080p");
        assert_eq!(u.preference_lines(), "preferred_resolution=1080p\npreferred_style=watercolor\n");
    }

    #[test]
    fn memo_is_exact_and_session_scoped() {
        let stores = MemoryStores::new();
        let a = args(json!({"prompt": "a cat"}));
        stores.with_task("s1", |t| t.memo_store("text2video_gen", &a, artifact("mock://x")));
        assert!(stores.memo_lookup("s1", "text2video_gen", &a).is_some());
        assert!(stores.memo_lookup("s1", "text2video_gen", &args(json!({"prompt": "a cab"}))).is_none());
        assert!(stores.memo_lookup("s2", "text2video_gen", &a).is_none());
        stores.end_session("s1");
        assert!(stores.memo_lookup("s1", "text2video_gen", &a).is_none());
    }

    #[test]
    fn storyboard_slot_counts_writes() {
        let mut t = TaskMemory::default();
        t.write_storyboard(crate::storyboard::tests::board(2));
        t.write_storyboard(crate::storyboard::tests::board(3));
        assert_eq!(t.storyboard().unwrap().shots.len(), 3);
        assert_eq!(t.storyboard_writes(), 2);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let paths = MemoryPaths::in_dir(dir.path());
        let stores = MemoryStores::new();
        stores.add_trace("cartoon dog", vec!["storyvideo_gen".into()], TraceOutcome::Completed, Some(1.0)).unwrap();
        stores.add_material(UserMaterial::new("m1", "/u/cat.png", ArtifactKind::Image, &["cat"], 1)).unwrap();
        stores.set_preference("preferred_resolution", "720p");
        stores.with_task("s1", |t| {
            t.put_step_output(1, artifact("mock://a"));
            t.memo_store("text2video_gen", &args(json!({"prompt": "x"})), artifact("mock://a"));
            t.write_storyboard(crate::storyboard::tests::board(2));
        });
        stores.save(&paths).unwrap();
        let loaded = MemoryStores::load(&paths).unwrap();
        assert!(loaded.same_contents(&stores));
        assert_eq!(loaded.task("s1").unwrap().storyboard_writes(), 1);
    }

    #[test]
    fn opened_store_appends_traces() {
        let dir = tempfile::tempdir().unwrap();
        let paths = MemoryPaths::in_dir(dir.path());
        let stores = MemoryStores::open(paths.clone()).unwrap();
        stores.add_trace("a b", vec!["x".into()], TraceOutcome::Aborted, None).unwrap();
        drop(stores);
        let again = MemoryStores::open(paths).unwrap();
        assert_eq!(again.global_retrieve("a", 5).len(), 1);
    }

    #[test]
    fn corrupt_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let paths = MemoryPaths::in_dir(dir.path());
        fs::write(&paths.global, "{\"trace_id\": 1}\n").unwrap();
        assert!(matches!(MemoryStores::load(&paths), Err(MemoryError::Corrupt { line: 1, .. })));
    }
}
