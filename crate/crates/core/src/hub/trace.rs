//! Append-only trace of tool calls, optionally mirrored to a JSONL file.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use thiserror::Error;

use super::call::TraceRecord;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace io: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt trace at line {line}: {message}")]
    Corrupt { line: usize, message: String },
}

#[derive(Default)]
pub struct TraceLog {
    records: Mutex<Vec<TraceRecord>>,
    sink: Mutex<Option<BufWriter<File>>>,
}

impl TraceLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Mirrors every subsequent record to `path`, appending.
    pub fn persist_to(&self, path: &Path) -> Result<(), TraceError> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        *self.sink.lock().unwrap() = Some(BufWriter::new(file));
        Ok(())
    }

    pub fn append(&self, record: TraceRecord) -> Result<(), TraceError> {
        if let Some(sink) = self.sink.lock().unwrap().as_mut() {
            serde_json::to_writer(&mut *sink, &record).map_err(std::io::Error::from)?;
            sink.write_all(b"\n")?;
            sink.flush()?;
        }
        self.records.lock().unwrap().push(record);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> Vec<TraceRecord> {
        self.records.lock().unwrap().clone()
    }

    pub fn for_session(&self, session_id: &str) -> Vec<TraceRecord> {
        self.records
            .lock()
            .unwrap()
            .iter()
            .filter(|r| r.session_id == session_id)
            .cloned()
            .collect()
    }

    pub fn children_of(&self, call_id: &str) -> Vec<TraceRecord> {
        self.records
            .lock()
            .unwrap()
            .iter()
            .filter(|r| r.parent_call_id.as_deref() == Some(call_id))
            .cloned()
            .collect()
    }

    /// The record of `call_id` preceded by its children, in append order.
    pub fn call_family(&self, call_id: &str) -> Vec<TraceRecord> {
        self.records
            .lock()
            .unwrap()
            .iter()
            .filter(|r| r.call.call_id == call_id || r.parent_call_id.as_deref() == Some(call_id))
            .cloned()
            .collect()
    }
}

pub fn to_jsonl(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("trace record serializes"));
        out.push('\n');
    }
    out
}

pub fn read_jsonl(path: &Path) -> Result<Vec<TraceRecord>, TraceError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| TraceError::Corrupt {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}
