//! Replayable session records.
//!
//! A record is newline-delimited JSON: a header line, one line per
//! stimulus event, one line per selection, then optional robot-trace and
//! raw-signal lines. Floats are written in shortest round-trip form, so a
//! record reloads bit-identically.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::decoder::{self, SelectionResult};
use crate::error::{Error, Result};
use crate::paradigm::{CommandId, SessionMode, StimulusEvent};
use crate::robot::RobotState;
use crate::signal::SignalBuffer;
use crate::swlda::SwldaModel;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub format_version: u32,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub mode: SessionMode,
    pub seed: u64,
    pub config: Config,
    /// Model used to decode an online session; the trained model for calibration.
    pub model: Option<SwldaModel>,
    /// Attended command per online selection.
    pub intents: Vec<CommandId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub header: SessionHeader,
    pub events: Vec<StimulusEvent>,
    pub selections: Vec<SelectionResult>,
    pub robot_trace: Option<Vec<RobotState>>,
    pub raw_signals: Option<Vec<SignalBuffer>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line {
    Header(Box<SessionHeader>),
    Event(StimulusEvent),
    Selection(SelectionResult),
    RobotTrace {
        states: Vec<RobotState>,
    },
    RawSignal {
        selection: usize,
        buffer: SignalBuffer,
    },
}

pub fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl SessionRecord {
    pub fn new(mode: SessionMode, config: &Config) -> Self {
        SessionRecord {
            header: SessionHeader {
                format_version: FORMAT_VERSION,
                created_at: now_unix(),
                mode,
                seed: config.seed,
                config: config.clone(),
                model: None,
                intents: Vec::new(),
            },
            events: Vec::new(),
            selections: Vec::new(),
            robot_trace: None,
            raw_signals: None,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn save_session(record: &SessionRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut put = |line: &Line| -> Result<()> {
        let text = serde_json::to_string(line).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e.into(),
        })?;
        writeln!(w, "{text}").map_err(io_err(path))
    };
    put(&Line::Header(Box::new(record.header.clone())))?;
    for e in &record.events {
        put(&Line::Event(*e))?;
    }
    for s in &record.selections {
        put(&Line::Selection(s.clone()))?;
    }
    if let Some(states) = &record.robot_trace {
        put(&Line::RobotTrace {
            states: states.clone(),
        })?;
    }
    if let Some(raw) = &record.raw_signals {
        for (selection, buffer) in raw.iter().enumerate() {
            put(&Line::RawSignal {
                selection,
                buffer: buffer.clone(),
            })?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn load_session(path: impl AsRef<Path>) -> Result<SessionRecord> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty session file".into()))?
        .map_err(io_err(path))?;
    // check the version before the schema so old or future files get a clear error
    let raw: serde_json::Value =
        serde_json::from_str(&first).map_err(|e| parse_err(1, e.to_string()))?;
    match raw.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(found) => {
            return Err(Error::UnsupportedVersion {
                found,
                expected: FORMAT_VERSION,
            })
        }
        None => return Err(parse_err(1, "header lacks format_version".into())),
    }
    let header = match serde_json::from_value::<Line>(raw) {
        Ok(Line::Header(h)) => *h,
        Ok(_) => return Err(parse_err(1, "first line is not a header".into())),
        Err(e) => return Err(parse_err(1, e.to_string())),
    };
    let mut record = SessionRecord {
        header,
        events: Vec::new(),
        selections: Vec::new(),
        robot_trace: None,
        raw_signals: None,
    };
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Line>(&line).map_err(|e| parse_err(n, e.to_string()))? {
            Line::Header(_) => return Err(parse_err(n, "second header".into())),
            Line::Event(e) => record.events.push(e),
            Line::Selection(s) => record.selections.push(s),
            Line::RobotTrace { states } => record.robot_trace = Some(states),
            Line::RawSignal { selection, buffer } => {
                let raw = record.raw_signals.get_or_insert_with(Vec::new);
                if selection != raw.len() {
                    return Err(parse_err(n, format!("raw signal {selection} out of order")));
                }
                raw.push(buffer);
            }
        }
    }
    Ok(record)
}

/// Re-runs the decoder from the header's config and seed.
pub fn replay(record: &SessionRecord) -> Result<Vec<SelectionResult>> {
    let h = &record.header;
    if h.format_version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: u64::from(h.format_version),
            expected: FORMAT_VERSION,
        });
    }
    let mut config = h.config.clone();
    config.seed = h.seed;
    config.validate()?;
    match h.mode {
        SessionMode::Calibration => {
            let sim = config.simulation(SessionMode::Calibration, 0);
            Ok(decoder::run_calibration_session(&sim, false)?.selections)
        }
        SessionMode::Online => {
            let model = h
                .model
                .as_ref()
                .ok_or_else(|| Error::invalid("online record has no model"))?;
            let sim = config.simulation(SessionMode::Online, h.intents.len());
            decoder::run_online(&sim, model, &h.intents)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReplayOutcome {
    Match {
        selections: usize,
    },
    /// Index of the first selection that differs, or the shorter length if
    /// one list is a prefix of the other.
    Mismatch {
        first_divergent: usize,
    },
}

pub fn verify_replay(record: &SessionRecord) -> Result<ReplayOutcome> {
    let regenerated = replay(record)?;
    let stored = &record.selections;
    let first = stored
        .iter()
        .zip(&regenerated)
        .position(|(a, b)| a != b)
        .or_else(|| {
            (stored.len() != regenerated.len()).then(|| stored.len().min(regenerated.len()))
        });
    Ok(match first {
        None => ReplayOutcome::Match {
            selections: stored.len(),
        },
        Some(first_divergent) => ReplayOutcome::Mismatch { first_divergent },
    })
}

pub fn save_model(model: &SwldaModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(model).expect("model serializes");
    std::fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SwldaModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let model: SwldaModel = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paradigm::{schedule_selection, SessionPlan};

    fn sample_record() -> SessionRecord {
        let mut r = SessionRecord::new(SessionMode::Online, &Config::default());
        r.events = schedule_selection(&SessionPlan::online(1), 0, 1024, 5);
        r.selections.push(SelectionResult {
            intended: Some(CommandId::new(1).unwrap()),
            chosen: CommandId::new(1).unwrap(),
            command_scores: [0.1, 0.7 / 3.0, -1e-17, 0.0, 5.0e300, -0.3],
            rounds_used: 3,
            tie_flag: false,
        });
        r
    }

    #[test]
    fn line_count_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let rec = sample_record();
        save_session(&rec, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 20);
        assert_eq!(load_session(&path).unwrap(), rec);
    }

    #[test]
    fn unwritable_path_is_named() {
        let err = save_session(&sample_record(), "/nonexistent-dir/x/s.jsonl").unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x/s.jsonl"));
    }

    #[test]
    fn future_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        save_session(&sample_record(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap().replacen(
            "\"format_version\":1",
            "\"format_version\":99",
            1,
        );
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            load_session(&path),
            Err(Error::UnsupportedVersion { found: 99, .. })
        ));
        let mut rec = sample_record();
        rec.header.format_version = 99;
        assert!(matches!(
            replay(&rec),
            Err(Error::UnsupportedVersion { .. })
        ));
    }

    #[test]
    fn garbage_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        save_session(&sample_record(), &path).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("{not json}\n");
        std::fs::write(&path, text).unwrap();
        match load_session(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 21),
            other => panic!("{other:?}"),
        }
    }
}
