use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Deserialize;

use super::edit::validate_edit;
use super::log::EventLog;
use super::state::{Entry, Event, Poem, PoemStatus, Session, StudioState};
use super::StudioError;
use crate::generator::{generate_batch, CandidateLine, CorpusIndex, GenConfig};
use crate::model::Checkpoint;
use crate::numerics::{derive_seed, Rng};

/// Upper bound on lines per request.
pub const MAX_BATCH: usize = 1000;

/// A checkpoint with its overlap index, shared by every session using it.
#[derive(Debug)]
pub struct LoadedModel {
    pub checkpoint: Checkpoint,
    pub index: CorpusIndex,
}

impl LoadedModel {
    pub fn new(checkpoint: Checkpoint) -> Self {
        let index = CorpusIndex::build(&checkpoint.corpus_lines);
        Self { checkpoint, index }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    /// Checkpoint path; the studio default when absent.
    pub checkpoint: Option<String>,
    /// Seed of the session's line stream; derived from the studio seed and
    /// the session number when absent.
    pub seed: Option<u64>,
    pub config: Option<GenConfig>,
}

/// Requested poem entry. A line without `text` uses the generated text.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EntryInput {
    Line { line_id: String, text: Option<String> },
    Break,
}

struct Inner {
    state: StudioState,
    log: Option<EventLog>,
}

impl Inner {
    fn commit(&mut self, event: Event) -> Result<(), StudioError> {
        if let Some(log) = self.log.as_mut() {
            log.append(&event)?;
        }
        self.state.apply(&event);
        Ok(())
    }
}

/// Thread-safe studio. Operations on one session are serialized; generation
/// for different sessions runs concurrently.
pub struct Studio {
    default_checkpoint: Option<String>,
    base_seed: u64,
    models: Mutex<HashMap<String, Arc<LoadedModel>>>,
    inner: Mutex<Inner>,
    session_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl Studio {
    /// In-memory studio without persistence.
    pub fn new(default_checkpoint: Option<String>, base_seed: u64) -> Self {
        Self {
            default_checkpoint,
            base_seed,
            models: Mutex::new(HashMap::new()),
            inner: Mutex::new(Inner {
                state: StudioState::default(),
                log: None,
            }),
            session_locks: Mutex::new(HashMap::new()),
        }
    }

    /// Studio persisted to `store`, with state rebuilt from its events.
    pub fn open(default_checkpoint: Option<String>, base_seed: u64, store: &Path) -> Result<Self, StudioError> {
        let (log, events) = EventLog::open(store)?;
        let studio = Self::new(default_checkpoint, base_seed);
        {
            let mut inner = lock(&studio.inner);
            inner.state = StudioState::replay(&events);
            inner.log = Some(log);
        }
        Ok(studio)
    }

    /// Makes `checkpoint` available under `reference` without touching disk.
    pub fn register_model(&self, reference: impl Into<String>, checkpoint: Checkpoint) -> Arc<LoadedModel> {
        let model = Arc::new(LoadedModel::new(checkpoint));
        lock(&self.models).insert(reference.into(), model.clone());
        model
    }

    pub fn model(&self, reference: &str) -> Result<Arc<LoadedModel>, StudioError> {
        if let Some(m) = lock(&self.models).get(reference) {
            return Ok(m.clone());
        }
        let ckpt = Checkpoint::load(Path::new(reference)).map_err(|e| StudioError::BadCheckpoint(e.to_string()))?;
        Ok(lock(&self.models).entry(reference.to_owned()).or_insert_with(|| Arc::new(LoadedModel::new(ckpt))).clone())
    }

    pub fn snapshot(&self) -> StudioState {
        lock(&self.inner).state.clone()
    }

    fn session_lock(&self, id: &str) -> Arc<Mutex<()>> {
        lock(&self.session_locks).entry(id.to_owned()).or_default().clone()
    }

    pub fn session(&self, id: &str) -> Result<Session, StudioError> {
        lock(&self.inner)
            .state
            .sessions
            .get(id)
            .cloned()
            .ok_or_else(|| StudioError::SessionNotFound(id.to_owned()))
    }

    pub fn poem(&self, id: &str) -> Result<Poem, StudioError> {
        lock(&self.inner)
            .state
            .poems
            .get(id)
            .cloned()
            .ok_or_else(|| StudioError::PoemNotFound(id.to_owned()))
    }

    pub fn create_session(&self, req: CreateSession) -> Result<Session, StudioError> {
        let reference = req
            .checkpoint
            .or_else(|| self.default_checkpoint.clone())
            .ok_or(StudioError::NoCheckpoint)?;
        self.model(&reference)?;
        let mut inner = lock(&self.inner);
        let n = inner.state.next_session;
        let mut config = req.config.unwrap_or_default();
        config.seed = req.seed.unwrap_or_else(|| derive_seed(self.base_seed, n));
        config.validate().map_err(|e| StudioError::InvalidConfig(e.to_string()))?;
        let id = format!("s{n}");
        inner.commit(Event::SessionCreated {
            at: now_ms(),
            session_id: id.clone(),
            checkpoint: reference,
            config,
        })?;
        Ok(inner.state.sessions[&id].clone())
    }

    /// Generates `count` lines not yet offered in the session and offers
    /// them. Batch `k` of a session is drawn from stream `k` of its seed.
    pub fn request_lines(&self, session_id: &str, count: usize) -> Result<Vec<CandidateLine>, StudioError> {
        if count == 0 || count > MAX_BATCH {
            return Err(StudioError::InvalidCount(count));
        }
        let guard = self.session_lock(session_id);
        let _serial = lock(&guard);
        let session = self.session(session_id)?;
        let model = self.model(&session.checkpoint)?;
        let taken: HashSet<String> = session.offered.values().map(CandidateLine::dedup_key).collect();
        let config = GenConfig { count, ..session.config.clone() };
        let mut rng = Rng::stream(config.seed, session.batches);
        let ckpt = &model.checkpoint;
        let lines = generate_batch(&ckpt.params, &ckpt.vocab, &model.index, &config, &mut rng, &taken)?;
        lock(&self.inner).commit(Event::LinesOffered {
            at: now_ms(),
            session_id: session_id.to_owned(),
            lines: lines.clone(),
        })?;
        Ok(lines)
    }

    pub fn change_selection(&self, session_id: &str, add: &[String], remove: &[String]) -> Result<Session, StudioError> {
        let guard = self.session_lock(session_id);
        let _serial = lock(&guard);
        let mut inner = lock(&self.inner);
        let state = &inner.state;
        let session = state
            .sessions
            .get(session_id)
            .ok_or_else(|| StudioError::SessionNotFound(session_id.to_owned()))?;
        if let Some(id) = add.iter().chain(remove).find(|id| !session.offered.contains_key(*id)) {
            return Err(StudioError::UnknownLine(id.clone()));
        }
        let removing: HashSet<&str> = remove
            .iter()
            .filter(|id| !add.contains(id))
            .map(String::as_str)
            .collect();
        for poem in state.poems.values().filter(|p| p.session_id == session_id) {
            if let Some(id) = poem.line_ids().find(|id| removing.contains(id)) {
                return Err(StudioError::LineInUse(id.to_owned()));
            }
        }
        let add: Vec<String> = add.iter().filter(|id| !session.selected.contains(*id)).cloned().collect();
        let remove: Vec<String> = removing
            .iter()
            .filter(|id| session.selected.contains(**id))
            .map(|id| id.to_string())
            .collect();
        if !add.is_empty() || !remove.is_empty() {
            inner.commit(Event::SelectionChanged {
                at: now_ms(),
                session_id: session_id.to_owned(),
                add,
                remove,
            })?;
        }
        Ok(inner.state.sessions[session_id].clone())
    }

    fn resolve_entries(session: &Session, entries: &[EntryInput]) -> Result<Vec<Entry>, StudioError> {
        entries
            .iter()
            .map(|e| match e {
                EntryInput::Break => Ok(Entry::Break),
                EntryInput::Line { line_id, text } => {
                    let original = session
                        .offered
                        .get(line_id)
                        .ok_or_else(|| StudioError::UnknownLine(line_id.clone()))?;
                    if !session.selected.contains(line_id) {
                        return Err(StudioError::NotSelected(line_id.clone()));
                    }
                    let text = text.clone().unwrap_or_else(|| original.text.clone());
                    let verdict = validate_edit(&original.text, &text);
                    if !verdict.accepted {
                        return Err(StudioError::EditRuleViolation {
                            line_id: line_id.clone(),
                            summary: verdict.summary,
                        });
                    }
                    Ok(Entry::Line {
                        line_id: line_id.clone(),
                        text,
                    })
                }
            })
            .collect()
    }

    pub fn create_poem(&self, session_id: &str, title: &str, entries: Option<&[EntryInput]>) -> Result<Poem, StudioError> {
        let guard = self.session_lock(session_id);
        let _serial = lock(&guard);
        let mut inner = lock(&self.inner);
        let session = inner
            .state
            .sessions
            .get(session_id)
            .ok_or_else(|| StudioError::SessionNotFound(session_id.to_owned()))?;
        let resolved = entries.map(|e| Self::resolve_entries(session, e)).transpose()?;
        let poem_id = format!("p{}", inner.state.next_poem);
        let at = now_ms();
        inner.commit(Event::PoemCreated {
            at,
            poem_id: poem_id.clone(),
            session_id: session_id.to_owned(),
            title: title.to_owned(),
        })?;
        if let Some(entries) = resolved {
            inner.commit(Event::PoemEdited {
                at,
                poem_id: poem_id.clone(),
                title: title.to_owned(),
                entries,
            })?;
        }
        Ok(inner.state.poems[&poem_id].clone())
    }

    fn poem_session(&self, poem_id: &str) -> Result<String, StudioError> {
        Ok(self.poem(poem_id)?.session_id)
    }

    /// Replaces the poem's arrangement, and its title when given.
    pub fn set_entries(&self, poem_id: &str, entries: &[EntryInput], title: Option<&str>) -> Result<Poem, StudioError> {
        let guard = self.session_lock(&self.poem_session(poem_id)?);
        let _serial = lock(&guard);
        let mut inner = lock(&self.inner);
        let poem = &inner.state.poems[poem_id];
        if poem.status == PoemStatus::Final {
            return Err(StudioError::PoemFinalized(poem_id.to_owned()));
        }
        let resolved = Self::resolve_entries(&inner.state.sessions[&poem.session_id], entries)?;
        let title = title.map_or_else(|| poem.title.clone(), str::to_owned);
        inner.commit(Event::PoemEdited {
            at: now_ms(),
            poem_id: poem_id.to_owned(),
            title,
            entries: resolved,
        })?;
        Ok(inner.state.poems[poem_id].clone())
    }

    pub fn finalize(&self, poem_id: &str) -> Result<Poem, StudioError> {
        let guard = self.session_lock(&self.poem_session(poem_id)?);
        let _serial = lock(&guard);
        let mut inner = lock(&self.inner);
        let poem = &inner.state.poems[poem_id];
        if poem.status == PoemStatus::Final {
            return Err(StudioError::PoemFinalized(poem_id.to_owned()));
        }
        if poem.line_ids().next().is_none() {
            return Err(StudioError::EmptyPoem(poem_id.to_owned()));
        }
        inner.commit(Event::PoemFinalized {
            at: now_ms(),
            poem_id: poem_id.to_owned(),
        })?;
        Ok(inner.state.poems[poem_id].clone())
    }

    pub fn export_text(&self, poem_id: &str) -> Result<String, StudioError> {
        Ok(self.poem(poem_id)?.to_text())
    }
}
