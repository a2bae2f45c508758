//! HTTP and WebSocket front end.
//!
//! Each session runs one tick loop. Connection tasks only enqueue into the
//! session (under its lock, between ticks) and drain its outbox; they never
//! step the simulation themselves.

use std::collections::{HashMap, VecDeque};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::{Json, Router};
use futures_util::{SinkExt, StreamExt};
use serde::Serialize;
use tokio::sync::Notify;

use crate::protocol::{
    parse_client, ClientBody, ProtocolError, ScenarioEntry, ServerBody, ServerMessage, PROTOCOL_VERSION,
};
use crate::session::{scenario_entries, SessionCore};

pub const DEFAULT_PORT: u16 = 8787;
/// Snapshots queued for one client before the oldest is discarded.
pub const SNAPSHOT_QUEUE_CAP: usize = 8;
pub const PARK_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Clone, Copy, Debug)]
pub struct ServerConfig {
    /// How long a session outlives its connection.
    pub park_timeout: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { park_timeout: PARK_TIMEOUT }
    }
}

/// Outgoing messages for the attached client. Snapshots are lossy (only the
/// newest [`SNAPSHOT_QUEUE_CAP`] are kept); everything else is delivered.
#[derive(Default)]
pub struct Outbox {
    queue: Mutex<VecDeque<(bool, String)>>,
    notify: Notify,
    dropped: AtomicU64,
}

impl Outbox {
    pub fn push(&self, body: &ServerBody, session: &str) {
        let lossy = matches!(body, ServerBody::StateSnapshot(_));
        let text = ServerMessage::new(Some(session.to_string()), body.clone()).to_json();
        let mut q = self.queue.lock().unwrap();
        if matches!(body, ServerBody::Reset {} | ServerBody::Start { .. }) {
            // Frames from before a restart would only confuse the client.
            q.retain(|(lossy, _)| !lossy);
        }
        if lossy && q.iter().filter(|(l, _)| *l).count() >= SNAPSHOT_QUEUE_CAP {
            let oldest = q.iter().position(|(l, _)| *l).expect("a queued snapshot");
            q.remove(oldest);
            self.dropped.fetch_add(1, Ordering::Relaxed);
        }
        q.push_back((lossy, text));
        drop(q);
        self.notify.notify_one();
    }

    pub async fn pop(&self) -> String {
        loop {
            let notified = self.notify.notified();
            if let Some((_, text)) = self.queue.lock().unwrap().pop_front() {
                return text;
            }
            notified.await;
        }
    }

    pub fn clear(&self) {
        self.queue.lock().unwrap().clear();
    }

    pub fn len(&self) -> usize {
        self.queue.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Snapshots discarded because the client fell behind.
    pub fn dropped(&self) -> u64 {
        self.dropped.load(Ordering::Relaxed)
    }
}

pub struct Session {
    pub id: String,
    pub core: Mutex<SessionCore>,
    pub outbox: Outbox,
    parked_since: Mutex<Option<Instant>>,
    closed: AtomicBool,
}

impl Session {
    fn new(id: String) -> Arc<Self> {
        Arc::new(Self {
            id,
            core: Mutex::new(SessionCore::new()),
            outbox: Outbox::default(),
            parked_since: Mutex::new(None),
            closed: AtomicBool::new(false),
        })
    }

    fn send(&self, bodies: Vec<ServerBody>) {
        for b in &bodies {
            self.outbox.push(b, &self.id);
        }
    }

    fn is_parked(&self) -> bool {
        self.parked_since.lock().unwrap().is_some()
    }
}

/// The session's clock: one `tick` per period while attached.
pub async fn session_loop(session: Arc<Session>) {
    let mut hz = 0.0;
    let mut interval = tokio::time::interval(Duration::from_secs(1));
    while !session.closed.load(Ordering::Relaxed) {
        let current = session.core.lock().unwrap().tick_hz();
        if current != hz {
            hz = current;
            interval = tokio::time::interval(Duration::from_secs_f64(1.0 / hz));
            interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
            interval.tick().await;
        }
        interval.tick().await;
        if session.is_parked() {
            continue;
        }
        let out = session.core.lock().unwrap().tick();
        session.send(out);
    }
}

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Arc<Session>>>>,
    config: ServerConfig,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Self {
        Self { sessions: Arc::default(), config }
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    /// Drop sessions parked longer than the timeout.
    pub fn reap(&self) {
        let timeout = self.config.park_timeout;
        self.sessions.lock().unwrap().retain(|_, s| {
            let expired = s.parked_since.lock().unwrap().is_some_and(|t| t.elapsed() >= timeout);
            if expired {
                s.closed.store(true, Ordering::Relaxed);
            }
            !expired
        });
    }
}

#[derive(Serialize)]
struct CatalogResponse {
    protocol_version: u32,
    scenarios: Vec<ScenarioEntry>,
}

async fn scenarios() -> Json<CatalogResponse> {
    Json(CatalogResponse { protocol_version: PROTOCOL_VERSION, scenarios: scenario_entries() })
}

async fn session_upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, state))
}

fn reply(session: Option<&str>, body: ServerBody) -> Message {
    Message::Text(ServerMessage::new(session.map(str::to_string), body).to_json().into())
}

/// Wait for a hello and return the (new or resumed) session.
async fn handshake(socket: &mut WebSocket, state: &AppState) -> Option<(Arc<Session>, bool)> {
    while let Some(Ok(msg)) = socket.next().await {
        let text = match msg {
            Message::Text(t) => t,
            Message::Close(_) => return None,
            _ => continue,
        };
        let err = match parse_client(&text) {
            Ok(m) => match m.body {
                ClientBody::Hello { resume: None, .. } => {
                    let session = Session::new(uuid::Uuid::new_v4().to_string());
                    state.sessions.lock().unwrap().insert(session.id.clone(), session.clone());
                    tokio::spawn(session_loop(session.clone()));
                    return Some((session, false));
                }
                ClientBody::Hello { resume: Some(id), .. } => {
                    let found = state.sessions.lock().unwrap().get(&id).cloned();
                    match found {
                        Some(s) if s.is_parked() => return Some((s, true)),
                        Some(_) => ProtocolError::new("session-busy", format!("session {id} is attached elsewhere")),
                        None => ProtocolError::new("unknown-session", format!("no parked session {id}")),
                    }
                }
                _ => ProtocolError::new("no-session", "send hello first"),
            },
            Err(e) => e,
        };
        if socket.send(reply(None, err.body())).await.is_err() {
            return None;
        }
    }
    None
}

async fn connection(mut socket: WebSocket, state: AppState) {
    let Some((session, resumed)) = handshake(&mut socket, &state).await else {
        return;
    };
    session.outbox.clear();
    *session.parked_since.lock().unwrap() = None;
    let hz = session.core.lock().unwrap().tick_hz();
    let hello = ServerBody::Hello { server: format!("gsc-teleop/{}", env!("CARGO_PKG_VERSION")), tick_hz: hz, resumed };
    if socket.send(reply(Some(&session.id), hello)).await.is_err() {
        park(&session);
        return;
    }

    let (mut sink, mut stream) = socket.split();
    let writer_session = session.clone();
    let mut writer = tokio::spawn(async move {
        loop {
            let text = writer_session.outbox.pop().await;
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });
    loop {
        tokio::select! {
            msg = stream.next() => {
                let text = match msg {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                let out = match parse_client(&text) {
                    Ok(m) => session.core.lock().unwrap().handle(m.body),
                    Err(e) => vec![e.body()],
                };
                session.send(out);
            }
            _ = &mut writer => break,
        }
    }
    writer.abort();
    park(&session);
}

fn park(session: &Session) {
    session.outbox.clear();
    *session.parked_since.lock().unwrap() = Some(Instant::now());
}

pub fn router(state: AppState) -> Router {
    Router::new().route("/scenarios", get(scenarios)).route("/session", get(session_upgrade)).with_state(state)
}

/// Serve on an already-bound listener until the task is cancelled.
pub async fn serve_on(listener: tokio::net::TcpListener, config: ServerConfig) -> std::io::Result<()> {
    let state = AppState::new(config);
    let reaper = state.clone();
    let period = config.park_timeout.min(Duration::from_secs(1)).max(Duration::from_millis(10));
    tokio::spawn(async move {
        let mut interval = tokio::time::interval(period);
        loop {
            interval.tick().await;
            reaper.reap();
        }
    });
    axum::serve(listener, router(state)).await
}

pub async fn serve(port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(SocketAddr::from(([0, 0, 0, 0], port))).await?;
    eprintln!("gsc-teleop listening on http://{}", listener.local_addr()?);
    serve_on(listener, ServerConfig::default()).await
}

/// Run the server on a fresh runtime, blocking the calling thread.
pub fn serve_blocking(port: u16) -> std::io::Result<()> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build()?.block_on(serve(port))
}
