//! In-memory sessions with idle expiry, per-game tallies, and an optional
//! append-only JSON-lines transcript.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::session::{DecisionRequest, Event, Outcome, RevealKind, Session};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(60 * 60);

/// Finished plays for one strategy. Every decision follows a goat reveal,
/// so `wins / plays` is the goat-conditioned win rate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyTally {
    pub plays: u64,
    pub wins: u64,
}

impl StrategyTally {
    pub fn rate(&self) -> f64 {
        if self.plays == 0 {
            0.0
        } else {
            self.wins as f64 / self.plays as f64
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTally {
    pub finished: u64,
    pub host_opened_prize: u64,
    pub stick: StrategyTally,
    pub switch: StrategyTally,
}

impl GameTally {
    fn record(&mut self, event: &Event) {
        match event {
            Event::Picked { reveal: RevealKind::Prize, .. } => {
                self.finished += 1;
                self.host_opened_prize += 1;
            }
            Event::Picked { .. } | Event::Created { .. } => {}
            Event::Decided { request, outcome, .. } => {
                self.finished += 1;
                let t = match request {
                    DecisionRequest::Stick => &mut self.stick,
                    DecisionRequest::Switch { .. } => &mut self.switch,
                };
                t.plays += 1;
                t.wins += u64::from(*outcome == Outcome::Win);
            }
        }
    }
}

/// One transcript line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptLine {
    pub session: Uuid,
    #[serde(flatten)]
    pub event: Event,
}

struct Entry {
    session: Session,
    last_active: Instant,
}

type SessionHandle = Arc<Mutex<Entry>>;

pub struct SessionStore {
    sessions: Mutex<HashMap<Uuid, SessionHandle>>,
    tallies: Mutex<BTreeMap<String, GameTally>>,
    transcript: Option<Mutex<BufWriter<File>>>,
    idle_timeout: Duration,
}

impl SessionStore {
    pub fn new(idle_timeout: Duration) -> Self {
        SessionStore {
            sessions: Mutex::default(),
            tallies: Mutex::default(),
            transcript: None,
            idle_timeout,
        }
    }

    /// Appends every event to `path` as JSON lines.
    pub fn with_transcript(mut self, path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        self.transcript = Some(Mutex::new(BufWriter::new(file)));
        Ok(self)
    }

    pub fn idle_timeout(&self) -> Duration {
        self.idle_timeout
    }

    fn log(&self, session: Uuid, event: &Event) {
        let Some(t) = &self.transcript else { return };
        let line = TranscriptLine { session, event: event.clone() };
        let mut w = t.lock().expect("transcript lock");
        let res = serde_json::to_writer(&mut *w, &line)
            .map_err(io::Error::from)
            .and_then(|_| w.write_all(b"\n"))
            .and_then(|_| w.flush());
        if let Err(e) = res {
            tracing::warn!(error = %e, "failed to append to transcript");
        }
    }

    pub fn insert(&self, session: Session) -> Uuid {
        let id = Uuid::new_v4();
        self.log(id, &session.events()[0]);
        let entry = Entry { session, last_active: Instant::now() };
        self.sessions.lock().expect("store lock").insert(id, Arc::new(Mutex::new(entry)));
        id
    }

    fn handle(&self, id: Uuid) -> Option<SessionHandle> {
        self.sessions.lock().expect("store lock").get(&id).cloned()
    }

    /// Runs `f` with the session locked; no other request can touch the same
    /// session meanwhile. Returns `None` for unknown or expired ids. Events
    /// appended by `f` are logged and tallied.
    pub fn with_session<T>(&self, id: Uuid, f: impl FnOnce(&mut Session) -> T) -> Option<T> {
        let handle = self.handle(id)?;
        let mut entry = handle.lock().expect("session lock");
        if entry.last_active.elapsed() > self.idle_timeout {
            drop(entry);
            self.sessions.lock().expect("store lock").remove(&id);
            return None;
        }
        entry.last_active = Instant::now();
        let before = entry.session.events().len();
        let out = f(&mut entry.session);
        let new_events = entry.session.events()[before..].to_vec();
        if !new_events.is_empty() {
            let label = entry.session.spec().label.clone();
            let mut tallies = self.tallies.lock().expect("tally lock");
            let tally = tallies.entry(label).or_default();
            for event in &new_events {
                self.log(id, event);
                tally.record(event);
            }
        }
        Some(out)
    }

    /// Drops sessions idle longer than the timeout; returns how many.
    pub fn reap_expired(&self) -> usize {
        let mut sessions = self.sessions.lock().expect("store lock");
        let before = sessions.len();
        sessions.retain(|_, h| {
            h.try_lock().map_or(true, |e| e.last_active.elapsed() <= self.idle_timeout)
        });
        before - sessions.len()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tally(&self, label: &str) -> GameTally {
        self.tallies.lock().expect("tally lock").get(label).copied().unwrap_or_default()
    }
}

/// Result of re-running every session found in a transcript.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ReplaySummary {
    pub sessions: usize,
    pub events: usize,
    pub mismatches: Vec<String>,
}

impl ReplaySummary {
    pub fn is_faithful(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Groups a transcript by session and checks each one replays to the same
/// events.
pub fn verify_transcript(path: &Path) -> io::Result<ReplaySummary> {
    let reader = BufReader::new(File::open(path)?);
    let mut order = Vec::new();
    let mut by_session: HashMap<Uuid, Vec<Event>> = HashMap::new();
    let mut summary = ReplaySummary::default();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TranscriptLine = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", n + 1)))?;
        summary.events += 1;
        by_session
            .entry(parsed.session)
            .or_insert_with(|| {
                order.push(parsed.session);
                Vec::new()
            })
            .push(parsed.event);
    }
    summary.sessions = order.len();
    for id in order {
        let recorded = &by_session[&id];
        match crate::session::replay(recorded) {
            Ok(replayed) if replayed == *recorded => {}
            Ok(_) => summary.mismatches.push(format!("{id}: replay diverged")),
            Err(e) => summary.mismatches.push(format!("{id}: {e}")),
        }
    }
    Ok(summary)
}
