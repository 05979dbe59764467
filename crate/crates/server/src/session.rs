use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use chainplan_core::io::parse_scenario;
use chainplan_core::planner::Planner;
use chainplan_core::{Intervention, InterventionSource, LocalMinimum, Outcome, PlannerEvent, Scenario};
use tokio::sync::{mpsc::UnboundedSender, oneshot};

use crate::protocol::{codes, ClientMessage, LogEntry, ServerMessage, SessionState, WireError};

#[derive(Debug, Clone, Copy)]
pub struct HubConfig {
    /// How long a run waits for an intervention before aborting.
    pub park_timeout: Duration,
    /// Minimum wall-clock gap between two batches of step events.
    pub throttle: Duration,
}

impl Default for HubConfig {
    fn default() -> Self {
        HubConfig {
            park_timeout: Duration::from_secs(600),
            throttle: Duration::from_millis(10),
        }
    }
}

/// Outbound half of one client connection.
#[derive(Debug, Clone)]
pub struct Connection {
    pub id: u64,
    pub tx: UnboundedSender<ServerMessage>,
}

type Ack = oneshot::Sender<Result<LogEntry, String>>;

struct Handoff {
    intervention: Intervention,
    ack: Ack,
}

struct Shared {
    state: SessionState,
    log: Vec<LogEntry>,
    /// Entries below this index have been sent to subscribers.
    published: usize,
    last_flush: Option<Instant>,
    subscribers: Vec<Connection>,
    /// Acknowledgement owed to the client whose intervention was just accepted.
    ack: Option<Ack>,
}

impl Shared {
    fn append_event(&mut self, event: PlannerEvent) {
        let seq = self.log.len() as u64;
        let entry = LogEntry::Event { seq, event };
        if let Some(ack) = self.ack.take() {
            let _ = ack.send(Ok(entry.clone()));
        }
        self.log.push(entry);
    }

    fn set_state(&mut self, state: SessionState) {
        self.state = state;
        let seq = self.log.len() as u64;
        self.log.push(LogEntry::StateChanged { seq, state });
    }

    fn flush(&mut self, id: &str) {
        if self.published == self.log.len() {
            return;
        }
        let entries = self.log[self.published..].to_vec();
        self.published = self.log.len();
        self.last_flush = Some(Instant::now());
        let msg = ServerMessage::Events {
            id: id.to_string(),
            entries,
        };
        self.subscribers.retain(|c| c.tx.send(msg.clone()).is_ok());
    }
}

struct Session {
    id: String,
    scenario: Scenario,
    shared: Mutex<Shared>,
    handoff: Mutex<Option<mpsc::Sender<Handoff>>>,
}

impl Session {
    fn lock(&self) -> MutexGuard<'_, Shared> {
        self.shared.lock().unwrap_or_else(|e| e.into_inner())
    }
}

/// Registry of sessions. Cheap to clone; clones share state.
#[derive(Clone)]
pub struct Hub {
    inner: Arc<HubInner>,
}

struct HubInner {
    config: HubConfig,
    next_id: AtomicU64,
    next_conn: AtomicU64,
    sessions: Mutex<HashMap<String, Arc<Session>>>,
}

impl Default for Hub {
    fn default() -> Self {
        Hub::new(HubConfig::default())
    }
}

impl Hub {
    pub fn new(config: HubConfig) -> Self {
        Hub {
            inner: Arc::new(HubInner {
                config,
                next_id: AtomicU64::new(1),
                next_conn: AtomicU64::new(1),
                sessions: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn connection(&self, tx: UnboundedSender<ServerMessage>) -> Connection {
        Connection {
            id: self.inner.next_conn.fetch_add(1, Ordering::Relaxed),
            tx,
        }
    }

    /// Drops every subscription held by `conn`. Running sessions carry on.
    pub fn disconnect(&self, conn: &Connection) {
        for s in self.all_sessions() {
            s.lock().subscribers.retain(|c| c.id != conn.id);
        }
    }

    fn all_sessions(&self) -> Vec<Arc<Session>> {
        self.inner.sessions.lock().unwrap().values().cloned().collect()
    }

    fn session(&self, id: &str) -> Result<Arc<Session>, WireError> {
        self.inner
            .sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| WireError::new(codes::UNKNOWN_SESSION, format!("no session `{id}`")).for_session(id))
    }

    /// Processes one client message. Replies go to `conn.tx`.
    pub fn handle(&self, conn: &Connection, msg: ClientMessage) {
        let reply = match msg {
            ClientMessage::CreateSession { scenario } => self
                .create(&scenario)
                .map(|id| Some(ServerMessage::SessionCreated { id })),
            ClientMessage::Start { id } => self.start(&id).map(|_| None),
            ClientMessage::Intervene { id, intervention } => self.intervene(conn, &id, intervention).map(|_| None),
            ClientMessage::Subscribe { id, from } => self.subscribe(conn, &id, from).map(|_| None),
            ClientMessage::Replay { id } => self
                .replay(&id)
                .map(|entries| Some(ServerMessage::Events { id, entries })),
        };
        let msg = match reply {
            Ok(Some(m)) => m,
            Ok(None) => return,
            Err(e) => e.into(),
        };
        let _ = conn.tx.send(msg);
    }

    pub fn create(&self, doc: &str) -> Result<String, WireError> {
        let scenario = parse_scenario(doc).map_err(|e| WireError::from_parse(&e))?;
        let id = format!("s{}", self.inner.next_id.fetch_add(1, Ordering::Relaxed));
        let mut shared = Shared {
            state: SessionState::Idle,
            log: Vec::new(),
            published: 0,
            last_flush: None,
            subscribers: Vec::new(),
            ack: None,
        };
        shared.set_state(SessionState::Idle);
        shared.published = shared.log.len();
        let session = Arc::new(Session {
            id: id.clone(),
            scenario,
            shared: Mutex::new(shared),
            handoff: Mutex::new(None),
        });
        self.inner.sessions.lock().unwrap().insert(id.clone(), session);
        tracing::info!(session = %id, "created");
        Ok(id)
    }

    pub fn start(&self, id: &str) -> Result<(), WireError> {
        let session = self.session(id)?;
        let (tx, rx) = mpsc::channel();
        {
            let mut shared = session.lock();
            if shared.state != SessionState::Idle {
                return Err(WireError::new(codes::NOT_IDLE, "session has already been started").for_session(id));
            }
            *session.handoff.lock().unwrap() = Some(tx);
            shared.set_state(SessionState::Running);
            shared.flush(id);
        }
        let config = self.inner.config;
        std::thread::Builder::new()
            .name(format!("session-{id}"))
            .spawn(move || run(session, rx, config))
            .expect("spawn planner thread");
        Ok(())
    }

    pub fn intervene(&self, conn: &Connection, id: &str, intervention: Intervention) -> Result<(), WireError> {
        let session = self.session(id)?;
        let (ack_tx, ack_rx) = oneshot::channel();
        let subscribed = {
            let mut shared = session.lock();
            if shared.state != SessionState::AwaitingIntervention {
                return Err(
                    WireError::new(codes::NOT_AWAITING, "session is not waiting for an intervention").for_session(id),
                );
            }
            shared.set_state(SessionState::Running);
            shared.flush(id);
            let handoff = session.handoff.lock().unwrap();
            let sent = handoff.as_ref().map(|tx| {
                tx.send(Handoff {
                    intervention,
                    ack: ack_tx,
                })
            });
            if !matches!(sent, Some(Ok(()))) {
                return Err(WireError::new(codes::NOT_AWAITING, "session run has ended").for_session(id));
            }
            shared.subscribers.iter().any(|c| c.id == conn.id)
        };
        // Subscribers see the acknowledging entry in the live stream; anyone
        // else gets it directly.
        let tx = conn.tx.clone();
        let id = id.to_string();
        tokio::spawn(async move {
            let msg = match ack_rx.await {
                Ok(Ok(_)) if subscribed => return,
                Ok(Ok(entry)) => ServerMessage::Events {
                    id,
                    entries: vec![entry],
                },
                Ok(Err(reason)) => WireError::new(codes::REJECTED, reason).for_session(&id).into(),
                Err(_) => WireError::new(codes::REJECTED, "session run ended")
                    .for_session(&id)
                    .into(),
            };
            let _ = tx.send(msg);
        });
        Ok(())
    }

    pub fn subscribe(&self, conn: &Connection, id: &str, from: u64) -> Result<(), WireError> {
        let session = self.session(id)?;
        let mut shared = session.lock();
        let from = (from as usize).min(shared.published);
        if from < shared.published {
            let _ = conn.tx.send(ServerMessage::Events {
                id: id.to_string(),
                entries: shared.log[from..shared.published].to_vec(),
            });
        }
        if !shared.subscribers.iter().any(|c| c.id == conn.id) {
            shared.subscribers.push(conn.clone());
        }
        Ok(())
    }

    /// Every entry published so far, in order.
    pub fn replay(&self, id: &str) -> Result<Vec<LogEntry>, WireError> {
        let session = self.session(id)?;
        let shared = session.lock();
        Ok(shared.log[..shared.published].to_vec())
    }

    pub fn state(&self, id: &str) -> Result<SessionState, WireError> {
        Ok(self.session(id)?.lock().state)
    }
}

fn run(session: Arc<Session>, rx: mpsc::Receiver<Handoff>, config: HubConfig) {
    let mut source = WireSource {
        session: &session,
        rx,
        timeout: config.park_timeout,
    };
    let mut observer = |event: &PlannerEvent| {
        let mut shared = session.lock();
        let is_step = matches!(event, PlannerEvent::Stepped { .. });
        let finished = match event {
            PlannerEvent::Finished { outcome, .. } => Some(*outcome),
            _ => None,
        };
        shared.append_event(event.clone());
        if let Some(outcome) = finished {
            shared.set_state(SessionState::Finished { outcome });
        }
        let due = shared.last_flush.is_none_or(|t| t.elapsed() >= config.throttle);
        if !is_step || due {
            shared.flush(&session.id);
        }
    };
    let result = Planner::new(&session.scenario).run(Some(&mut source), &mut observer);
    if let Err(e) = result {
        tracing::error!(session = %session.id, error = %e, "planner failed");
        let mut shared = session.lock();
        shared.set_state(SessionState::Finished {
            outcome: Outcome::Aborted,
        });
        shared.flush(&session.id);
    }
    *session.handoff.lock().unwrap() = None;
}

/// Bridges the planner's blocking request to interventions arriving on the wire.
struct WireSource<'a> {
    session: &'a Session,
    rx: mpsc::Receiver<Handoff>,
    timeout: Duration,
}

impl WireSource<'_> {
    fn take(&mut self, handoff: Handoff) -> Intervention {
        self.session.lock().ack = Some(handoff.ack);
        handoff.intervention
    }
}

impl InterventionSource for WireSource<'_> {
    fn request(&mut self, _event: &LocalMinimum) -> Intervention {
        {
            let mut shared = self.session.lock();
            shared.set_state(SessionState::AwaitingIntervention);
            shared.flush(&self.session.id);
        }
        match self.rx.recv_timeout(self.timeout) {
            Ok(h) => self.take(h),
            Err(mpsc::RecvTimeoutError::Timeout) => {
                {
                    let mut shared = self.session.lock();
                    if shared.state == SessionState::AwaitingIntervention {
                        tracing::info!(session = %self.session.id, "no intervention before timeout; aborting");
                        shared.set_state(SessionState::Running);
                        return Intervention::Abort;
                    }
                }
                // An intervention was accepted just as the timer expired.
                match self.rx.recv() {
                    Ok(h) => self.take(h),
                    Err(_) => Intervention::Abort,
                }
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => Intervention::Abort,
        }
    }

    fn rejected(&mut self, _intervention: &Intervention, reason: &str) {
        if let Some(ack) = self.session.lock().ack.take() {
            let _ = ack.send(Err(reason.to_string()));
        }
    }
}
