//! Violation reports shared by plan and storyboard validation, and the
//! path-carrying error raised when structured text does not fit a schema.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A field-level schema failure. `path` is a JSON-pointer-like location such
/// as `execution_plan.steps[1].status`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// One invariant violation. `step_number` is the plan step number for plan
/// reports and the shot id for storyboard reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation<C> {
    pub code: C,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub step_number: Option<u32>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport<C> {
    pub valid: bool,
    pub violations: Vec<Violation<C>>,
}

impl<C> ValidationReport<C> {
    pub fn from_violations(violations: Vec<Violation<C>>) -> Self {
        Self {
            valid: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, code: &C) -> bool
    where
        C: PartialEq,
    {
        self.violations.iter().any(|v| &v.code == code)
    }
}

impl<C: fmt::Debug> fmt::Display for ValidationReport<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            match v.step_number {
                Some(n) => write!(f, "{:?} at {}: {}", v.code, n, v.message)?,
                None => write!(f, "{:?}: {}", v.code, v.message)?,
            }
        }
        Ok(())
    }
}

/// Accumulates violations during a validation pass.
pub(crate) struct Collector<C> {
    violations: Vec<Violation<C>>,
}

impl<C> Collector<C> {
    pub(crate) fn new() -> Self {
        Self {
            violations: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, code: C, step_number: Option<u32>, message: impl Into<String>) {
        self.violations.push(Violation {
            code,
            step_number,
            message: message.into(),
        });
    }

    pub(crate) fn finish(self) -> ValidationReport<C> {
        ValidationReport::from_violations(self.violations)
    }
}
