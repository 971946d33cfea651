//! Concurrent session store.
//!
//! Each session sits behind its own `RwLock`, so reads of different sessions
//! and concurrent reads of one session never contend. State-changing calls
//! additionally take the session's writer gate with `try_lock`: a second
//! writer gets [`SessionError::Busy`] instead of queueing. A writer works on
//! a copy and commits it only after the log accepted the event, so readers
//! never observe a half-applied call, and a provider call does not block
//! readers.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use yao_core::interpret::{interpret, Inquiry, InterpretationProvider, MockProvider, MusicPlan, PromptOptions};
use yao_core::music::GenParams;
use yao_core::render::{chunk_stream, PlaybackChunk};
use yao_core::Corpus;

use crate::error::SessionError;
use crate::log::{replay_log, EventLog, LogEvent, LogRecord};
use crate::session::{Session, TossOutcome};

/// Source of timestamps, in milliseconds since the Unix epoch.
pub trait Clock: Send + Sync {
    fn now_millis(&self) -> u64;
}

#[derive(Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_millis(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    }
}

/// A clock that only moves when told to.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(start: u64) -> Self {
        Self(AtomicU64::new(start))
    }

    pub fn advance(&self, millis: u64) {
        self.0.fetch_add(millis, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_millis(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub params: GenParams,
    /// Idle time after which a session is evicted from memory.
    pub ttl: Duration,
    /// Whether the inquirer's name is forwarded to the provider.
    pub include_name: bool,
    /// Loop repetitions in casting-stage playback streams.
    pub casting_cycles: u32,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            params: GenParams::default(),
            ttl: Duration::from_secs(3600),
            include_name: true,
            casting_cycles: 4,
        }
    }
}

struct Slot {
    gate: Mutex<()>,
    session: RwLock<Session>,
    last_used: AtomicU64,
}

pub struct SessionService {
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
    provider: Arc<dyn InterpretationProvider>,
    corpus: Arc<Corpus>,
    log: Option<EventLog>,
    clock: Arc<dyn Clock>,
    config: ServiceConfig,
}

impl SessionService {
    pub fn new(
        config: ServiceConfig,
        corpus: Corpus,
        provider: Arc<dyn InterpretationProvider>,
        log: Option<EventLog>,
        clock: Arc<dyn Clock>,
    ) -> Self {
        Self {
            sessions: RwLock::new(HashMap::new()),
            provider,
            corpus: Arc::new(corpus),
            log,
            clock,
            config,
        }
    }

    /// In-memory service with the bundled corpus, the mock provider, no log
    /// and the system clock.
    pub fn in_memory() -> Self {
        Self::new(
            ServiceConfig::default(),
            Corpus::bundled(),
            Arc::new(MockProvider),
            None,
            Arc::new(SystemClock),
        )
    }

    /// Reloads every session recorded in the attached log.
    pub fn recover(&self) -> Result<usize, SessionError> {
        let Some(log) = &self.log else { return Ok(0) };
        if !log.path().exists() {
            return Ok(0);
        }
        let restored = replay_log(log.path(), &self.corpus)?;
        let now = self.clock.now_millis();
        let mut map = self.sessions.write().unwrap_or_else(|p| p.into_inner());
        let count = restored.len();
        for (id, session) in restored {
            map.insert(id, Arc::new(Slot::new(session, now)));
        }
        Ok(count)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().unwrap_or_else(|p| p.into_inner()).len()
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, SessionError> {
        let map = self.sessions.read().unwrap_or_else(|p| p.into_inner());
        let slot = map
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownSession(id.to_owned()))?;
        slot.last_used.store(self.clock.now_millis(), Ordering::Relaxed);
        Ok(slot)
    }

    fn log(&self, session_id: &str, at: u64, event: LogEvent) -> Result<(), SessionError> {
        match &self.log {
            Some(log) => log.append(&LogRecord {
                session_id: session_id.to_owned(),
                at,
                event,
            }),
            None => Ok(()),
        }
    }

    /// Runs `f` on a copy of the session under the writer gate; commits the
    /// copy and logs the event `f` returns only if `f` succeeds.
    fn write<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session, u64) -> Result<(T, LogEvent), SessionError>,
    ) -> Result<(T, Session), SessionError> {
        let slot = self.slot(id)?;
        let _gate = slot.gate.try_lock().map_err(|_| SessionError::Busy)?;
        let mut draft = slot.session.read().unwrap_or_else(|p| p.into_inner()).clone();
        let now = self.clock.now_millis();
        let (out, event) = f(&mut draft, now)?;
        self.log(id, now, event)?;
        *slot.session.write().unwrap_or_else(|p| p.into_inner()) = draft.clone();
        Ok((out, draft))
    }

    pub fn create_session(&self, seed: Option<u64>) -> Result<Session, SessionError> {
        let seed = seed.unwrap_or_else(rand::random);
        let id = uuid::Uuid::new_v4().simple().to_string();
        let now = self.clock.now_millis();
        let session = Session::new(id.clone(), seed, self.config.params.clone(), now);
        self.log(
            &id,
            now,
            LogEvent::Created {
                seed,
                params: self.config.params.clone(),
            },
        )?;
        self.sessions
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(id, Arc::new(Slot::new(session.clone(), now)));
        Ok(session)
    }

    pub fn get(&self, id: &str) -> Result<Session, SessionError> {
        Ok(self.slot(id)?.session.read().unwrap_or_else(|p| p.into_inner()).clone())
    }

    pub fn submit_inquiry(&self, id: &str, inquiry: Inquiry) -> Result<Session, SessionError> {
        self.write(id, |s, now| {
            s.submit_inquiry(inquiry.clone(), now)?;
            Ok(((), LogEvent::Inquiry { inquiry }))
        })
        .map(|(_, s)| s)
    }

    pub fn perform_toss(&self, id: &str) -> Result<(TossOutcome, Session), SessionError> {
        self.write(id, |s, now| {
            let out = s.perform_toss(now)?;
            let event = LogEvent::Toss {
                toss_index: out.toss_index,
                coins: out.toss.coins(),
            };
            Ok((out, event))
        })
    }

    /// Assembles the prompt, calls the provider and moves to Playback. On a
    /// provider failure the session stays in Interpreting and may retry.
    pub fn run_interpretation(&self, id: &str) -> Result<Session, SessionError> {
        let include_name = self.config.include_name;
        self.write(id, |s, now| {
            let doc = s.prompt_document(&self.corpus, PromptOptions { include_name })?;
            let reading = interpret(&doc, self.provider.as_ref())?;
            s.apply_reading(reading.clone(), now)?;
            Ok(((), LogEvent::Interpreted { include_name, reading }))
        })
        .map(|(_, s)| s)
    }

    pub fn complete(&self, id: &str) -> Result<Session, SessionError> {
        self.write(id, |s, now| {
            s.complete(now)?;
            Ok(((), LogEvent::Completed))
        })
        .map(|(_, s)| s)
    }

    pub fn reset(&self, id: &str) -> Result<Session, SessionError> {
        self.write(id, |s, now| {
            s.reset(now);
            Ok(((), LogEvent::Reset))
        })
        .map(|(_, s)| s)
    }

    pub fn get_plan(&self, id: &str) -> Result<MusicPlan, SessionError> {
        let slot = self.slot(id)?;
        let session = slot.session.read().unwrap_or_else(|p| p.into_inner());
        session.plan().cloned()
    }

    pub fn get_playback(&self, id: &str, from_time: f64, window: f64) -> Result<PlaybackChunk, SessionError> {
        let stream = self.get(id)?.playback_stream(self.config.casting_cycles)?;
        chunk_stream(&stream, from_time, window).map_err(|e| SessionError::InvalidRequest(e.to_string()))
    }

    /// Drops sessions idle for longer than the TTL, skipping any with a
    /// writer in flight. Returns how many were dropped.
    pub fn evict_idle(&self) -> usize {
        let now = self.clock.now_millis();
        let ttl = self.config.ttl.as_millis() as u64;
        let mut map = self.sessions.write().unwrap_or_else(|p| p.into_inner());
        let before = map.len();
        map.retain(|_, slot| {
            let idle = now.saturating_sub(slot.last_used.load(Ordering::Relaxed));
            idle <= ttl || slot.gate.try_lock().is_err()
        });
        before - map.len()
    }
}

impl Slot {
    fn new(session: Session, now: u64) -> Self {
        Self {
            gate: Mutex::new(()),
            session: RwLock::new(session),
            last_used: AtomicU64::new(now),
        }
    }
}
