//! Seeded failure injection for gateway calls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canonical::text_digest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum FailureMode {
    /// Fail the call with this zero-based index within its session.
    AtCallIndex(u64),
    /// Fail every call to this tool.
    ByToolName(String),
    /// Fail each call independently with this probability.
    Probability(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailurePlan {
    #[serde(flatten)]
    pub mode: FailureMode,
    #[serde(default)]
    pub seed: u64,
}

impl FailurePlan {
    pub fn at_call_index(index: u64) -> Self {
        Self {
            mode: FailureMode::AtCallIndex(index),
            seed: 0,
        }
    }

    pub fn by_tool_name(name: impl Into<String>) -> Self {
        Self {
            mode: FailureMode::ByToolName(name.into()),
            seed: 0,
        }
    }

    pub fn probability(p: f64, seed: u64) -> Self {
        Self {
            mode: FailureMode::Probability(p),
            seed,
        }
    }

    pub fn is_valid(&self) -> bool {
        match &self.mode {
            FailureMode::Probability(p) => (0.0..=1.0).contains(p),
            FailureMode::ByToolName(name) => !name.is_empty(),
            FailureMode::AtCallIndex(_) => true,
        }
    }

    /// Whether the `call_index`-th call of `session_id` to `tool_name` fails.
    /// Independent of how calls of other sessions interleave.
    pub fn should_fail(&self, session_id: &str, call_index: u64, tool_name: &str) -> bool {
        match &self.mode {
            FailureMode::AtCallIndex(i) => *i == call_index,
            FailureMode::ByToolName(name) => name == tool_name,
            FailureMode::Probability(p) => {
                let session_bits =
                    u64::from_str_radix(&text_digest(session_id)[..16], 16).unwrap_or(0);
                let mut rng = ChaCha8Rng::seed_from_u64(
                    self.seed ^ session_bits ^ call_index.wrapping_mul(0x9E37_79B9_7F4A_7C15),
                );
                rng.gen::<f64>() < *p
            }
        }
    }
}
