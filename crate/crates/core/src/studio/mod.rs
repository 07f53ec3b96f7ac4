//! Sessions in which a poet is offered generated lines, selects some, and
//! arranges them into poems, changing at most case and punctuation.
//!
//! Every change is an [`Event`]; the state is whatever replaying the events
//! yields, and the optional store is the events as JSON lines.

mod edit;
mod log;
mod service;
mod state;

pub use edit::{normalize_for_edit, validate_edit, DiffOp, DiffWord, EditVerdict};
pub use log::{parse_log, EventLog};
pub use service::{CreateSession, EntryInput, LoadedModel, Studio, MAX_BATCH};
pub use state::{Entry, Event, Poem, PoemStatus, Session, StudioState};

use thiserror::Error;

use crate::generator::GenError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StudioError {
    #[error("no session {0}")]
    SessionNotFound(String),
    #[error("no poem {0}")]
    PoemNotFound(String),
    #[error("line {0} was not offered in this session")]
    UnknownLine(String),
    #[error("line {0} is not selected")]
    NotSelected(String),
    #[error("line {0} is used by a poem")]
    LineInUse(String),
    #[error("line count must be between 1 and {MAX_BATCH}, got {0}")]
    InvalidCount(usize),
    #[error("edit of line {line_id} changes more than case and punctuation ({summary})")]
    EditRuleViolation { line_id: String, summary: String },
    #[error("poem {0} has no lines")]
    EmptyPoem(String),
    #[error("poem {0} is final")]
    PoemFinalized(String),
    #[error("no checkpoint given and no default configured")]
    NoCheckpoint,
    #[error("cannot load checkpoint: {0}")]
    BadCheckpoint(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Generation(#[from] GenError),
    #[error("storage: {0}")]
    Storage(String),
}

impl StudioError {
    /// Stable machine-readable name.
    pub fn code(&self) -> &'static str {
        match self {
            Self::SessionNotFound(_) => "SessionNotFound",
            Self::PoemNotFound(_) => "PoemNotFound",
            Self::UnknownLine(_) => "UnknownLine",
            Self::NotSelected(_) => "NotSelected",
            Self::LineInUse(_) => "LineInUse",
            Self::InvalidCount(_) => "InvalidCount",
            Self::EditRuleViolation { .. } => "EditRuleViolation",
            Self::EmptyPoem(_) => "EmptyPoem",
            Self::PoemFinalized(_) => "PoemFinalized",
            Self::NoCheckpoint => "NoCheckpoint",
            Self::BadCheckpoint(_) => "BadCheckpoint",
            Self::InvalidConfig(_) => "InvalidConfig",
            Self::Generation(GenError::RetryBudgetExhausted { .. }) => "RetryBudgetExhausted",
            Self::Generation(_) => "GenerationFailed",
            Self::Storage(_) => "StorageError",
        }
    }
}
