use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::edit::{normalize_for_edit, validate_edit};
use crate::generator::{CandidateLine, GenConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub checkpoint: String,
    pub config: GenConfig,
    /// Offered lines by id, in the order they were offered.
    pub offered: IndexMap<String, CandidateLine>,
    pub selected: BTreeSet<String>,
    /// Number of batches generated so far; seeds the next batch.
    pub batches: u64,
    pub created_at: u64,
    pub updated_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Entry {
    Line { line_id: String, text: String },
    Break,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoemStatus {
    Draft,
    Final,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poem {
    pub id: String,
    pub session_id: String,
    pub title: String,
    pub entries: Vec<Entry>,
    pub status: PoemStatus,
    pub created_at: u64,
    pub updated_at: u64,
}

impl Poem {
    pub fn line_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().filter_map(|e| match e {
            Entry::Line { line_id, .. } => Some(line_id.as_str()),
            Entry::Break => None,
        })
    }

    /// Title, a blank line, then one row per line; each stanza break is an
    /// empty row. Without a title the poem starts at its first line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.title.trim().is_empty() {
            out.push_str(self.title.trim());
            out.push_str("\n\n");
        }
        for entry in &self.entries {
            if let Entry::Line { text, .. } = entry {
                out.push_str(text);
            }
            out.push('\n');
        }
        out
    }
}

/// One record of the append-only log. Timestamps are Unix milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        at: u64,
        session_id: String,
        checkpoint: String,
        config: GenConfig,
    },
    LinesOffered {
        at: u64,
        session_id: String,
        lines: Vec<CandidateLine>,
    },
    SelectionChanged {
        at: u64,
        session_id: String,
        add: Vec<String>,
        remove: Vec<String>,
    },
    PoemCreated {
        at: u64,
        poem_id: String,
        session_id: String,
        title: String,
    },
    PoemEdited {
        at: u64,
        poem_id: String,
        title: String,
        entries: Vec<Entry>,
    },
    PoemFinalized {
        at: u64,
        poem_id: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StudioState {
    pub sessions: BTreeMap<String, Session>,
    pub poems: BTreeMap<String, Poem>,
    pub next_session: u64,
    pub next_poem: u64,
}

fn counter(id: &str, prefix: char) -> Option<u64> {
    id.strip_prefix(prefix)?.parse().ok()
}

impl StudioState {
    /// Applies an event that has already been validated. Events naming an
    /// unknown session or poem are ignored, so replaying any log prefix is
    /// total.
    pub fn apply(&mut self, event: &Event) {
        match event {
            Event::SessionCreated {
                at,
                session_id,
                checkpoint,
                config,
            } => {
                if let Some(n) = counter(session_id, 's') {
                    self.next_session = self.next_session.max(n + 1);
                }
                self.sessions.insert(
                    session_id.clone(),
                    Session {
                        id: session_id.clone(),
                        checkpoint: checkpoint.clone(),
                        config: config.clone(),
                        offered: IndexMap::new(),
                        selected: BTreeSet::new(),
                        batches: 0,
                        created_at: *at,
                        updated_at: *at,
                    },
                );
            }
            Event::LinesOffered { at, session_id, lines } => {
                if let Some(s) = self.sessions.get_mut(session_id) {
                    for line in lines {
                        s.offered.entry(line.id.clone()).or_insert_with(|| line.clone());
                    }
                    s.batches += 1;
                    s.updated_at = *at;
                }
            }
            Event::SelectionChanged {
                at,
                session_id,
                add,
                remove,
            } => {
                if let Some(s) = self.sessions.get_mut(session_id) {
                    for id in add {
                        if s.offered.contains_key(id) {
                            s.selected.insert(id.clone());
                        }
                    }
                    for id in remove {
                        s.selected.remove(id);
                    }
                    s.updated_at = *at;
                }
            }
            Event::PoemCreated {
                at,
                poem_id,
                session_id,
                title,
            } => {
                if let Some(n) = counter(poem_id, 'p') {
                    self.next_poem = self.next_poem.max(n + 1);
                }
                if self.sessions.contains_key(session_id) {
                    self.poems.insert(
                        poem_id.clone(),
                        Poem {
                            id: poem_id.clone(),
                            session_id: session_id.clone(),
                            title: title.clone(),
                            entries: Vec::new(),
                            status: PoemStatus::Draft,
                            created_at: *at,
                            updated_at: *at,
                        },
                    );
                }
            }
            Event::PoemEdited {
                at,
                poem_id,
                title,
                entries,
            } => {
                if let Some(p) = self.poems.get_mut(poem_id) {
                    p.title = title.clone();
                    p.entries = entries.clone();
                    p.updated_at = *at;
                }
            }
            Event::PoemFinalized { at, poem_id } => {
                if let Some(p) = self.poems.get_mut(poem_id) {
                    p.status = PoemStatus::Final;
                    p.updated_at = *at;
                }
            }
        }
    }

    pub fn replay<'a>(events: impl IntoIterator<Item = &'a Event>) -> Self {
        let mut state = Self::default();
        for e in events {
            state.apply(e);
        }
        state
    }

    /// Checks the structural invariants; returns the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        for s in self.sessions.values() {
            if let Some(id) = s.selected.iter().find(|id| !s.offered.contains_key(*id)) {
                return Err(format!("session {}: selected line {id} was never offered", s.id));
            }
            if let Some((k, _)) = s.offered.iter().find(|(k, l)| *k != &l.id) {
                return Err(format!("session {}: line stored under wrong id {k}", s.id));
            }
        }
        for p in self.poems.values() {
            let Some(s) = self.sessions.get(&p.session_id) else {
                return Err(format!("poem {} belongs to missing session {}", p.id, p.session_id));
            };
            for e in &p.entries {
                if let Entry::Line { line_id, text } = e {
                    if !s.selected.contains(line_id) {
                        return Err(format!("poem {} uses unselected line {line_id}", p.id));
                    }
                    if !validate_edit(&s.offered[line_id].text, text).accepted {
                        return Err(format!("poem {} line {line_id} breaks the edit rule", p.id));
                    }
                }
            }
            if p.status == PoemStatus::Final && p.line_ids().next().is_none() {
                return Err(format!("poem {} is final but empty", p.id));
            }
        }
        Ok(())
    }

    /// Whether every line of the poem normalizes to a line generated in its
    /// session.
    pub fn poem_provenance_holds(&self, poem_id: &str) -> bool {
        let Some(p) = self.poems.get(poem_id) else {
            return false;
        };
        let Some(s) = self.sessions.get(&p.session_id) else {
            return false;
        };
        let generated: BTreeSet<String> = s.offered.values().map(|l| normalize_for_edit(&l.text)).collect();
        p.entries.iter().all(|e| match e {
            Entry::Line { text, .. } => generated.contains(&normalize_for_edit(text)),
            Entry::Break => true,
        })
    }
}
