//! Client for the auxiliary tagger worker process.
//!
//! Protocol: UTF-8 JSON Lines over the child's stdin/stdout. The child first
//! prints `{"ready": true}`; each request `{"id": n, "text": "..."}` is
//! answered by `{"id": n, "entities": [{"start": s, "end": e, "class": "LOC"}]}`
//! with offsets in Unicode scalar values. Responses may come out of order.
//!
//! [`AuxTagger`] wraps one child per pipeline worker. A failed request
//! (crash, timeout, garbage) yields an empty prediction set, is counted, and
//! the child is restarted while the run-wide restart budget lasts.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{Receiver, RecvTimeoutError};
use serde::{Deserialize, Serialize};
use silverner_core::mention::{predicted_mentions, Mention, PredictionDrops, RawEntity};

/// Program and arguments of the worker.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxCommand {
    pub program: String,
    pub args: Vec<String>,
}

impl AuxCommand {
    /// Splits a command line on whitespace (no shell quoting).
    pub fn parse(line: &str) -> Option<Self> {
        let mut parts = line.split_whitespace().map(str::to_string);
        let program = parts.next()?;
        Some(AuxCommand {
            program,
            args: parts.collect(),
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AuxError {
    #[error("starting tagger: {0}")]
    Spawn(std::io::Error),
    #[error("writing to tagger: {0}")]
    Write(std::io::Error),
    #[error("tagger closed its output")]
    Closed,
    #[error("tagger timed out")]
    Timeout,
    #[error("tagger protocol violation: {0}")]
    Protocol(String),
}

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    text: &'a str,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Message {
    Ready { ready: bool },
    Response { id: u64, entities: Vec<RawEntity> },
}

enum Line {
    Message(Message),
    Garbage(String),
}

/// One running worker process.
pub struct AuxClient {
    child: Child,
    stdin: Option<BufWriter<ChildStdin>>,
    lines: Receiver<Line>,
    next_id: u64,
    pending: HashMap<u64, Vec<RawEntity>>,
    timeout: Duration,
}

impl AuxClient {
    /// Spawns the worker and waits for its ready line.
    pub fn spawn(cmd: &AuxCommand, timeout: Duration) -> Result<Self, AuxError> {
        let mut child = Command::new(&cmd.program)
            .args(&cmd.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(AuxError::Spawn)?;
        let stdin = Some(BufWriter::new(child.stdin.take().expect("piped stdin")));
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = crossbeam_channel::unbounded();
        thread::Builder::new()
            .name("aux-reader".into())
            .spawn(move || {
                for line in BufReader::new(stdout).lines() {
                    let Ok(line) = line else { break };
                    if line.trim().is_empty() {
                        continue;
                    }
                    let msg = match serde_json::from_str::<Message>(&line) {
                        Ok(m) => Line::Message(m),
                        Err(_) => Line::Garbage(line),
                    };
                    if tx.send(msg).is_err() {
                        break;
                    }
                }
            })
            .map_err(AuxError::Spawn)?;
        let client = AuxClient {
            child,
            stdin,
            lines: rx,
            next_id: 0,
            pending: HashMap::new(),
            timeout,
        };
        match client.recv(Instant::now() + timeout) {
            Ok(Message::Ready { ready: true }) => Ok(client),
            Ok(_) => Err(AuxError::Protocol("expected {\"ready\": true} first".into())),
            Err(e) => Err(e),
        }
    }

    fn recv(&self, deadline: Instant) -> Result<Message, AuxError> {
        match self.lines.recv_deadline(deadline) {
            Ok(Line::Message(m)) => Ok(m),
            Ok(Line::Garbage(l)) => Err(AuxError::Protocol(format!("unparseable line {l:?}"))),
            Err(RecvTimeoutError::Timeout) => Err(AuxError::Timeout),
            Err(RecvTimeoutError::Disconnected) => Err(AuxError::Closed),
        }
    }

    /// Sends a request without waiting; returns its id.
    pub fn submit(&mut self, text: &str) -> Result<u64, AuxError> {
        let id = self.next_id;
        self.next_id += 1;
        let line = serde_json::to_string(&Request { id, text }).expect("request serializes");
        let stdin = self.stdin.as_mut().ok_or(AuxError::Closed)?;
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush())
            .map_err(AuxError::Write)?;
        Ok(id)
    }

    /// Waits for the response to `id`, buffering responses to other ids.
    pub fn wait(&mut self, id: u64) -> Result<Vec<RawEntity>, AuxError> {
        let deadline = Instant::now() + self.timeout;
        loop {
            if let Some(entities) = self.pending.remove(&id) {
                return Ok(entities);
            }
            match self.recv(deadline)? {
                Message::Response { id: got, entities } => {
                    if got >= self.next_id || self.pending.insert(got, entities).is_some() {
                        return Err(AuxError::Protocol(format!("unexpected response id {got}")));
                    }
                }
                Message::Ready { .. } => return Err(AuxError::Protocol("repeated ready line".into())),
            }
        }
    }

    pub fn request(&mut self, text: &str) -> Result<Vec<RawEntity>, AuxError> {
        let id = self.submit(text)?;
        self.wait(id)
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for AuxClient {
    fn drop(&mut self) {
        // Closing stdin lets a well-behaved worker exit on its own.
        drop(self.stdin.take());
        let deadline = Instant::now() + Duration::from_millis(500);
        loop {
            match self.child.try_wait() {
                Ok(Some(_)) | Err(_) => return,
                Ok(None) if Instant::now() >= deadline => break,
                Ok(None) => thread::sleep(Duration::from_millis(5)),
            }
        }
        self.kill();
    }
}

/// Run-wide tagger counters, shared by all workers.
#[derive(Debug, Default)]
pub struct AuxCounters {
    pub requests: AtomicU64,
    pub failures: AtomicU64,
    pub restarts: AtomicU64,
    pub dropped_out_of_bounds: AtomicU64,
    pub dropped_unknown_class: AtomicU64,
    pub dropped_empty: AtomicU64,
    pub dropped_overlapping: AtomicU64,
    restart_budget: AtomicU64,
}

/// Plain snapshot of [`AuxCounters`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AuxReport {
    pub requests: u64,
    pub failures: u64,
    pub restarts: u64,
    pub dropped_out_of_bounds: u64,
    pub dropped_unknown_class: u64,
    pub dropped_empty: u64,
    pub dropped_overlapping: u64,
}

impl AuxCounters {
    pub fn with_restart_budget(restarts: u64) -> Self {
        AuxCounters {
            restart_budget: AtomicU64::new(restarts),
            ..Default::default()
        }
    }

    fn take_restart(&self) -> bool {
        self.restart_budget
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1))
            .is_ok()
    }

    fn record_drops(&self, d: &PredictionDrops) {
        self.dropped_out_of_bounds
            .fetch_add(d.out_of_bounds as u64, Ordering::Relaxed);
        self.dropped_unknown_class
            .fetch_add(d.unknown_class as u64, Ordering::Relaxed);
        self.dropped_empty.fetch_add(d.empty as u64, Ordering::Relaxed);
        self.dropped_overlapping
            .fetch_add(d.overlapping as u64, Ordering::Relaxed);
    }

    pub fn report(&self) -> AuxReport {
        let get = |a: &AtomicU64| a.load(Ordering::SeqCst);
        AuxReport {
            requests: get(&self.requests),
            failures: get(&self.failures),
            restarts: get(&self.restarts),
            dropped_out_of_bounds: get(&self.dropped_out_of_bounds),
            dropped_unknown_class: get(&self.dropped_unknown_class),
            dropped_empty: get(&self.dropped_empty),
            dropped_overlapping: get(&self.dropped_overlapping),
        }
    }
}

/// Maximum number of worker restarts in one run.
pub const RESTART_BUDGET: u64 = 3;

/// A supervised worker owned by one pipeline thread.
pub struct AuxTagger {
    cmd: AuxCommand,
    timeout: Duration,
    client: Option<AuxClient>,
    counters: Arc<AuxCounters>,
}

impl AuxTagger {
    /// Starts the worker; failing to start at all is fatal for the run.
    pub fn start(cmd: AuxCommand, timeout: Duration, counters: Arc<AuxCounters>) -> Result<Self, AuxError> {
        let client = AuxClient::spawn(&cmd, timeout)?;
        Ok(AuxTagger {
            cmd,
            timeout,
            client: Some(client),
            counters,
        })
    }

    /// Predicted mentions for `text`; empty when the worker fails.
    pub fn predict(&mut self, text: &str) -> Vec<Mention> {
        self.counters.requests.fetch_add(1, Ordering::Relaxed);
        let result = match self.client.as_mut() {
            Some(c) => c.request(text),
            None => Err(AuxError::Closed),
        };
        match result {
            Ok(entities) => {
                let (mentions, drops) = predicted_mentions(text, &entities);
                self.counters.record_drops(&drops);
                mentions
            }
            Err(e) => {
                self.counters.failures.fetch_add(1, Ordering::Relaxed);
                log::warn!("auxiliary tagger failed: {e}");
                self.restart();
                Vec::new()
            }
        }
    }

    fn restart(&mut self) {
        if let Some(mut old) = self.client.take() {
            old.kill();
        }
        if !self.counters.take_restart() {
            log::warn!("auxiliary tagger restart budget exhausted; continuing without predictions");
            return;
        }
        self.counters.restarts.fetch_add(1, Ordering::Relaxed);
        match AuxClient::spawn(&self.cmd, self.timeout) {
            Ok(c) => self.client = Some(c),
            Err(e) => log::warn!("auxiliary tagger restart failed: {e}"),
        }
    }
}
