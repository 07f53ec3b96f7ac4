use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use super::state::Event;
use super::StudioError;

/// Append-only JSON-lines event file.
#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
}

/// Parses log text. A final record that is cut off or unparsable is treated
/// as an interrupted write and dropped; damage anywhere else is an error.
/// Returns the events and the byte length of the intact prefix.
pub fn parse_log(bytes: &[u8]) -> Result<(Vec<Event>, usize), StudioError> {
    let blank = |b: &[u8]| b.iter().all(u8::is_ascii_whitespace);
    let mut events = Vec::new();
    let mut valid = 0;
    let mut rest = bytes;
    let mut line_no = 0;
    while !rest.is_empty() {
        line_no += 1;
        let (line, consumed, terminated) = match rest.iter().position(|&b| b == b'\n') {
            Some(i) => (&rest[..i], i + 1, true),
            None => (rest, rest.len(), false),
        };
        rest = &rest[consumed..];
        if blank(line) {
            valid += consumed;
            continue;
        }
        match serde_json::from_slice::<Event>(line) {
            Ok(e) if terminated => {
                events.push(e);
                valid += consumed;
            }
            Ok(_) => break,
            Err(_) if blank(rest) => break,
            Err(e) => {
                return Err(StudioError::Storage(format!("corrupt event log at line {line_no}: {e}")));
            }
        }
    }
    Ok((events, valid))
}

impl EventLog {
    /// Opens or creates the log and returns the recorded events. An
    /// interrupted final record is cut off so later appends start clean.
    pub fn open(path: &Path) -> Result<(Self, Vec<Event>), StudioError> {
        let io_err = |e: io::Error| StudioError::Storage(format!("{}: {e}", path.display()));
        let bytes = match std::fs::read(path) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(io_err(e)),
        };
        let (events, valid) = parse_log(&bytes)?;
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io_err)?;
        if valid < bytes.len() {
            log::warn!("dropping interrupted record at the end of {}", path.display());
            file.set_len(valid as u64).map_err(io_err)?;
        }
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
            },
            events,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, event: &Event) -> Result<(), StudioError> {
        let mut line = serde_json::to_string(event).map_err(|e| StudioError::Storage(e.to_string()))?;
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.sync_data())
            .map_err(|e| StudioError::Storage(format!("{}: {e}", self.path.display())))
    }
}
