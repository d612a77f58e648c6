//! Websocket endpoint: one isolated pipeline per connected client.
//!
//! A connection owns its pipeline outright. Incoming messages and the 10 Hz
//! timer are handled in one loop, so samples, tokens and ticks are applied
//! in arrival order without locks. Inputs are stamped with their arrival
//! time relative to the connection, recorded, and replaying that recording
//! gives the same metrics as the live run.

use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use hat_core::pipeline::{Applied, Pushed, TickReport, TICK_MS};
use hat_core::protocol::decode_sample;
use hat_core::scenario::Scenario;
use hat_core::session::SessionError;
use hat_core::trace::{TraceHeader, TraceWriter};
use hat_core::{CommandFrame, ControlEvent, Gating, Pipeline, Record};
use tokio::net::TcpListener;
use tokio::time::{Instant, MissedTickBehavior};

use crate::config::ServiceConfig;
use crate::wire::{self, ClientMessage};

struct Shared {
    cfg: ServiceConfig,
    scenario: Scenario,
    next_id: AtomicU64,
}

pub fn router(cfg: ServiceConfig, scenario: Scenario) -> Router {
    let shared = Arc::new(Shared { cfg, scenario, next_id: AtomicU64::new(1) });
    Router::new()
        .route("/ws", get(upgrade))
        .route("/health", get(|| async { "ok" }))
        .with_state(shared)
}

/// Binds the configured address and serves until `shutdown` resolves.
pub async fn serve(
    cfg: ServiceConfig,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    let listener = TcpListener::bind(cfg.listen).await?;
    serve_on(listener, cfg, shutdown).await
}

pub async fn serve_on(
    listener: TcpListener,
    cfg: ServiceConfig,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    let scenario = cfg.scenario().map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
    if let Some(dir) = &cfg.trace_dir {
        fs::create_dir_all(dir)?;
    }
    log::info!("listening on ws://{}/ws (scenario {})", listener.local_addr()?, scenario.id);
    axum::serve(listener, router(cfg, scenario)).with_graceful_shutdown(shutdown).await
}

/// Serves on an ephemeral port in the background; returns the bound address.
pub async fn spawn(mut cfg: ServiceConfig) -> io::Result<SocketAddr> {
    let listener = TcpListener::bind(cfg.listen).await?;
    let addr = listener.local_addr()?;
    cfg.listen = addr;
    tokio::spawn(async move {
        if let Err(e) = serve_on(listener, cfg, std::future::pending()).await {
            log::error!("server stopped: {e}");
        }
    });
    Ok(addr)
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Arc<Shared>>) -> impl IntoResponse {
    let id = shared.next_id.fetch_add(1, Ordering::Relaxed);
    ws.on_upgrade(move |socket| async move {
        let mut conn = Connection::open(&shared, id);
        if let Err(e) = conn.run(socket).await {
            log::debug!("session {id}: {e}");
        }
        conn.close();
    })
}

fn unix_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

struct Connection {
    id: u64,
    pipeline: Pipeline,
    recorder: Option<(PathBuf, TraceWriter<BufWriter<File>>)>,
    epoch: Instant,
    last_frame: CommandFrame,
    outbox: Vec<String>,
}

impl Connection {
    fn open(shared: &Shared, id: u64) -> Self {
        let cfg = &shared.cfg;
        let gating = if cfg.strict_gating { Gating::Strict } else { Gating::Trusted };
        let pipeline = Pipeline::new(cfg.pipeline.clone(), shared.scenario.clone(), gating);
        let start = unix_ms();
        let header = TraceHeader {
            scenario: shared.scenario.id,
            cfg_hash: cfg.pipeline.hash_hex(),
            start_unix_ms: Some(start),
        };
        let recorder = cfg.trace_dir.as_ref().and_then(|dir| {
            let path = dir.join(format!("session-{start}-{id}.trace"));
            let opened = File::create(&path).and_then(|f| TraceWriter::new(BufWriter::new(f), &header));
            match opened {
                Ok(w) => Some((path, w)),
                Err(e) => {
                    log::warn!("session {id}: not recording, cannot create {}: {e}", path.display());
                    None
                }
            }
        });
        log::info!("session {id} connected");
        Self { id, pipeline, recorder, epoch: Instant::now(), last_frame: CommandFrame::default(), outbox: Vec::new() }
    }

    fn now_ms(&self) -> u32 {
        u32::try_from(self.epoch.elapsed().as_millis()).unwrap_or(u32::MAX)
    }

    async fn run(&mut self, mut socket: WebSocket) -> Result<(), axum::Error> {
        self.outbox.push(wire::hello(&self.pipeline));
        self.outbox.push(wire::mode_notice(&self.pipeline));
        self.flush(&mut socket).await?;
        let mut ticker = tokio::time::interval_at(self.epoch + Duration::from_millis(u64::from(TICK_MS)), Duration::from_millis(u64::from(TICK_MS)));
        ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
        loop {
            tokio::select! {
                msg = socket.recv() => {
                    let Some(msg) = msg else { return Ok(()) };
                    match msg? {
                        Message::Binary(bytes) => self.on_frame(&bytes),
                        Message::Text(text) => {
                            if !self.on_text(text.as_str()) {
                                self.flush(&mut socket).await?;
                                return socket.send(Message::Close(None)).await;
                            }
                        }
                        Message::Close(_) => return Ok(()),
                        Message::Ping(_) | Message::Pong(_) => {}
                    }
                }
                _ = ticker.tick() => {
                    let reports = self.pipeline.advance_to(self.now_ms());
                    self.on_ticks(&reports);
                    self.outbox.push(wire::snapshot(&self.pipeline, &self.last_frame));
                    if let Some((_, w)) = &mut self.recorder {
                        if let Err(e) = w.flush() {
                            log::warn!("session {}: trace flush failed: {e}", self.id);
                        }
                    }
                }
            }
            self.flush(&mut socket).await?;
        }
    }

    async fn flush(&mut self, socket: &mut WebSocket) -> Result<(), axum::Error> {
        for text in self.outbox.drain(..) {
            socket.send(Message::Text(text.into())).await?;
        }
        Ok(())
    }

    fn push(&mut self, record: Record) -> Pushed {
        let pushed = self.pipeline.push(record);
        self.on_ticks(&pushed.ticks);
        if let (Some(rec), Some((_, w))) = (&pushed.record, &mut self.recorder) {
            if let Err(e) = w.append(rec) {
                log::warn!("session {}: trace write failed: {e}", self.id);
            }
        }
        pushed
    }

    fn on_ticks(&mut self, reports: &[TickReport]) {
        for r in reports {
            if !r.step.clamped.is_empty() {
                self.outbox.push(wire::clamp_notice(r.t_ms, r.step.clamped.iter().copied()));
            }
            if r.succeeded {
                self.outbox.push(wire::success_notice(r.t_ms + TICK_MS));
            }
            self.last_frame = r.frame.clone();
        }
    }

    fn on_frame(&mut self, bytes: &[u8]) {
        match decode_sample(bytes) {
            Ok(sample) => {
                let t_ms = self.now_ms();
                let pushed = self.push(Record::Sample(hat_core::OrientationSample { t_ms, ..sample }));
                if let Applied::Sample { shake_detected: true } = pushed.applied {
                    self.outbox.push(wire::mode_notice(&self.pipeline));
                }
            }
            Err(e) => self.outbox.push(wire::error_notice("bad_frame", &e.to_string())),
        }
    }

    /// Returns false when the message is malformed and the client must go.
    fn on_text(&mut self, text: &str) -> bool {
        match ClientMessage::parse(text) {
            Ok(ClientMessage::Token(kind)) => {
                let t_ms = self.now_ms();
                let before = self.pipeline.session().phase();
                let pushed = self.push(Record::Event(ControlEvent { t_ms, kind }));
                let Applied::Event { outcome, .. } = pushed.applied else {
                    unreachable!("an event record yields an event outcome")
                };
                let confirm = match outcome {
                    Ok(o) => {
                        let reason = match o {
                            hat_core::session::EventOutcome::Rejected(r) => Some(r.as_str()),
                            hat_core::session::EventOutcome::Repeat => Some("unrecognized"),
                            _ => None,
                        };
                        wire::confirm(o.confirmation(kind), o.accepted(), reason)
                    }
                    Err(SessionError::Mapping(_)) => wire::confirm("repeat", false, Some("no_sample")),
                };
                self.outbox.push(confirm);
                if self.pipeline.session().phase() != before || pushed.record.is_some() {
                    self.outbox.push(wire::mode_notice(&self.pipeline));
                }
                true
            }
            Ok(ClientMessage::Reset) => {
                let t_ms = self.now_ms();
                self.push(Record::Reset { t_ms });
                true
            }
            Ok(ClientMessage::Metrics) => {
                let reports = self.pipeline.advance_to(self.now_ms());
                self.on_ticks(&reports);
                self.outbox.push(wire::metrics(&self.pipeline.metrics()));
                true
            }
            Err(e) => {
                self.outbox.push(wire::error_notice("bad_message", &e.to_string()));
                false
            }
        }
    }

    /// Stops the session and flushes its recording.
    fn close(&mut self) {
        let metrics = self.pipeline.metrics();
        if let Some((path, mut w)) = self.recorder.take() {
            match w.flush() {
                Ok(()) => log::info!("session {} recorded to {}", self.id, path.display()),
                Err(e) => log::warn!("session {}: trace flush failed: {e}", self.id),
            }
        }
        log::info!(
            "session {} closed: completed={} task_time_s={} mode_switches={}",
            self.id,
            metrics.completed,
            metrics.task_time_s,
            metrics.mode_switches
        );
    }
}
