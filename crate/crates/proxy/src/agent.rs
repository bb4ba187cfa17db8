//! The per-agent loop: server protocol on one side, playmaker calls on the other.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use cls_core::codec::{decode_server_text, encode_client_command, Command, MoveTarget, ServerMessage};
use cls_core::model::{ModelConfig, WorldState};
use cls_core::{AgentType, PlayMode, Side};
use cls_rpc::actions::{unmarshal_coach_actions, unmarshal_player_actions, unmarshal_trainer_actions};
use cls_rpc::params::sim_params_from_map;
use cls_rpc::{
    marshal_state, registration_sequence, AgentMeta, Call, CallError, CallLog, CapturedParams, CoachAction,
    GameHandler, GameTransport, GrpcTransport, LocalTransport, Reply, RpcClient, TrainerAction,
};
use log::{debug, info, warn};
use serde::Serialize;
use tokio::net::UdpSocket;
use tokio::sync::oneshot;
use tokio::time::{timeout, Instant};

use crate::compile::{dead_ball_move, plan_actions, ActionSource};

/// Where an agent's decisions come from.
#[derive(Clone)]
pub enum PlaymakerEndpoint {
    /// A gRPC playmaker at `host:port`.
    Grpc(String),
    /// A handler in this process, called through the same wire encoding.
    Local(Arc<dyn GameHandler>),
}

impl std::fmt::Debug for PlaymakerEndpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlaymakerEndpoint::Grpc(e) => write!(f, "Grpc({e})"),
            PlaymakerEndpoint::Local(_) => f.write_str("Local"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AgentConfig {
    pub team_name: String,
    pub agent_type: AgentType,
    /// Server socket for this agent type (player, coach or trainer port).
    pub server: SocketAddr,
    pub playmaker: PlaymakerEndpoint,
    /// Per-cycle decision budget; must be below the cycle length.
    pub deadline: Duration,
    pub goalie: bool,
    /// Init attempts before giving up on the server.
    pub init_attempts: u32,
    pub init_timeout: Duration,
    /// Give up when the server stays silent this long.
    pub idle_timeout: Duration,
    /// Budget for the first registration with the playmaker.
    pub register_timeout: Duration,
    /// Line-delimited JSON decision log.
    pub log_path: Option<PathBuf>,
    /// Shared record of every RPC attempt.
    pub call_log: Option<CallLog>,
}

impl AgentConfig {
    pub fn new(team_name: impl Into<String>, agent_type: AgentType, server: SocketAddr, playmaker: PlaymakerEndpoint) -> Self {
        AgentConfig {
            team_name: team_name.into(),
            agent_type,
            server,
            playmaker,
            deadline: Duration::from_millis(cls_rpc::DEFAULT_DEADLINE_MS),
            goalie: false,
            init_attempts: 5,
            init_timeout: Duration::from_millis(500),
            idle_timeout: Duration::from_secs(60),
            register_timeout: Duration::from_secs(1),
            log_path: None,
            call_log: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("server at {0} did not answer init")]
    ServerUnreachable(SocketAddr),
    #[error("server refused init: {0}")]
    Rejected(String),
    #[error("server went silent")]
    ServerLost,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-agent summary at the end of a match.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AgentReport {
    pub name: String,
    pub register_id: i32,
    /// Cycles in which a decision was due.
    pub cycles: u32,
    /// Cycles in which a body command was sent.
    pub command_cycles: u32,
    pub playmaker_cycles: u32,
    pub fallback_cycles: u32,
    pub preprocess_cycles: u32,
    /// Decision calls that hit the deadline.
    pub deadline_misses: u32,
    pub channel_down: u32,
    pub rpc_failures: u32,
    /// Longest time from building the state to sending the commands.
    pub max_decision_ms: f64,
    /// `(error ...)` replies from the server.
    pub protocol_errors: u32,
    pub final_scores: (u32, u32),
}

#[derive(Serialize)]
struct LogLine<'a> {
    cycle: u32,
    agent: &'a str,
    rpc_latency_ms: f64,
    action_source: ActionSource,
    rpc_error: Option<String>,
    command: Vec<String>,
}

struct Link {
    sock: UdpSocket,
    peer: SocketAddr,
    buf: Vec<u8>,
}

impl Link {
    async fn send(&self, cmd: &Command) -> std::io::Result<()> {
        match encode_client_command(cmd) {
            Ok(text) => {
                self.sock.send_to(text.as_bytes(), self.peer).await?;
            }
            Err(e) => warn!("dropping unencodable command {cmd:?}: {e}"),
        }
        Ok(())
    }

    /// Next message from the server; `None` on timeout.
    async fn recv(&mut self, wait: Duration) -> std::io::Result<Option<ServerMessage>> {
        loop {
            let (n, from) = match timeout(wait, self.sock.recv_from(&mut self.buf)).await {
                Err(_) => return Ok(None),
                Ok(r) => r?,
            };
            if from.ip() != self.peer.ip() {
                continue;
            }
            self.peer = from;
            let text = String::from_utf8_lossy(&self.buf[..n]);
            match decode_server_text(text.trim_end_matches(['\0', '\n'])) {
                Ok(m) => return Ok(Some(m)),
                Err(e) => warn!("undecodable server message: {e}"),
            }
        }
    }
}

fn transport(endpoint: &PlaymakerEndpoint) -> Result<Box<dyn GameTransport>, AgentError> {
    Ok(match endpoint {
        PlaymakerEndpoint::Grpc(e) => {
            Box::new(GrpcTransport::connect_lazy(e).map_err(|e| AgentError::Config(e.to_string()))?)
        }
        PlaymakerEndpoint::Local(h) => Box::new(LocalTransport::new(h.clone())),
    })
}

/// Runs one agent until the match ends. `registered` fires once the server
/// has accepted the agent (or registration failed).
pub async fn run_agent(cfg: AgentConfig, registered: Option<oneshot::Sender<()>>) -> Result<AgentReport, AgentError> {
    let mut registered = registered;
    let result = run_agent_inner(cfg, &mut registered).await;
    if let Some(tx) = registered.take() {
        let _ = tx.send(());
    }
    result
}

async fn run_agent_inner(
    cfg: AgentConfig,
    registered: &mut Option<oneshot::Sender<()>>,
) -> Result<AgentReport, AgentError> {
    let bind: SocketAddr = if cfg.server.is_ipv4() { "0.0.0.0:0" } else { "[::]:0" }.parse().expect("literal");
    let mut link = Link { sock: UdpSocket::bind(bind).await?, peer: cfg.server, buf: vec![0u8; 16384] };

    let team = match cfg.agent_type {
        AgentType::Trainer => None,
        _ => Some(cfg.team_name.clone()),
    };
    let init = Command::Init { team: team.clone(), version: 18, goalie: cfg.goalie };
    let mut reply = None;
    for attempt in 0..cfg.init_attempts.max(1) {
        link.send(&init).await?;
        if let Some(m) = link.recv(cfg.init_timeout).await? {
            reply = Some(m);
            break;
        }
        debug!("init attempt {} to {} unanswered", attempt + 1, cfg.server);
    }
    let (side, unum, play_mode) = match reply {
        None => return Err(AgentError::ServerUnreachable(cfg.server)),
        Some(ServerMessage::Init { side, unum, play_mode }) => (Some(side), unum, play_mode),
        Some(ServerMessage::Ok(_)) => (None, 0, PlayMode::BeforeKickOff),
        Some(ServerMessage::Error(e)) => return Err(AgentError::Rejected(e)),
        Some(other) => return Err(AgentError::Rejected(format!("unexpected reply {other:?}"))),
    };
    if let Some(tx) = registered.take() {
        let _ = tx.send(());
    }

    let meta = AgentMeta::new(cfg.agent_type, cfg.team_name.clone(), side, unum);
    let name = match (cfg.agent_type, side) {
        (AgentType::Player, Some(s)) => format!("{}{}", s, unum),
        (AgentType::Coach, Some(s)) => format!("coach_{s}"),
        _ => "trainer".to_string(),
    };
    info!("{name} registered with the server as {}", meta.register_id);

    // the parameter messages follow the init reply directly
    let mut params = CapturedParams::default();
    let mut early = Vec::new();
    while !params.is_complete() {
        match link.recv(cfg.init_timeout).await? {
            Some(m) => {
                if !params.capture(&m) {
                    early.push(m);
                }
            }
            None => return Err(AgentError::Config("server parameters incomplete".into())),
        }
    }
    let server_map = params.server.as_ref().expect("complete");
    let (sim, _) = sim_params_from_map(server_map).map_err(|e| AgentError::Config(e.to_string()))?;
    if cfg.deadline.as_millis() >= sim.cycle_ms as u128 {
        return Err(AgentError::Config(format!(
            "deadline {} ms is not below the {} ms cycle",
            cfg.deadline.as_millis(),
            sim.cycle_ms
        )));
    }

    let mut client = RpcClient::new(transport(&cfg.playmaker)?, cfg.deadline);
    if let Some(log) = &cfg.call_log {
        client = client.with_log(log.clone());
    }
    let calls = registration_sequence(&meta, &params).map_err(|e| AgentError::Config(e.to_string()))?;
    client.set_registration(calls);
    if let Err(e) = client.register(cfg.register_timeout).await {
        warn!("{name}: playmaker registration failed ({e}); using fallback until it succeeds");
    }

    let mut ws = WorldState::new(ModelConfig { sim, ..ModelConfig::default() }, team);
    let init_msg = ServerMessage::Init { side: side.unwrap_or(Side::Left), unum, play_mode };
    if side.is_some() {
        let _ = ws.integrate(&init_msg);
    }

    let mut log = match &cfg.log_path {
        Some(p) => Some(BufWriter::new(File::create(p)?)),
        None => None,
    };
    let mut report = AgentReport { name: name.clone(), register_id: meta.register_id, ..Default::default() };
    let mut pending: std::collections::VecDeque<ServerMessage> = early.into();

    loop {
        let msg = match pending.pop_front() {
            Some(m) => m,
            None => match link.recv(cfg.idle_timeout).await? {
                Some(m) => m,
                None => return Err(AgentError::ServerLost),
            },
        };
        if let ServerMessage::Error(e) = &msg {
            warn!("{name}: server error `{e}`");
            report.protocol_errors += 1;
            continue;
        }
        let _ = ws.integrate(&msg);
        // the see (or full state) closes a cycle's observations
        if !matches!(msg, ServerMessage::See { .. } | ServerMessage::FullState(_)) {
            continue;
        }
        report.final_scores = ws.scores;
        if ws.play_mode == PlayMode::TimeOver {
            break;
        }
        ws.refresh_intercept();
        report.cycles += 1;

        let started = Instant::now();
        let preprocess = dead_ball_move(&ws);
        let state = marshal_state(&ws, &meta, preprocess.is_some());
        let rpc_started = Instant::now();
        let reply = client.decide(Call::decision(cfg.agent_type, state)).await;
        let rpc_ms = rpc_started.elapsed().as_secs_f64() * 1e3;
        let rpc_error = reply.as_ref().err().map(|e| e.to_string());
        match &reply {
            Err(CallError::Timeout(_)) => report.deadline_misses += 1,
            Err(CallError::ChannelDown(_)) => report.channel_down += 1,
            Err(_) => report.rpc_failures += 1,
            Ok(_) => {}
        }

        let (source, commands) = match cfg.agent_type {
            AgentType::Player => {
                let actions = match reply {
                    Ok(Reply::PlayerActions(a)) => unmarshal_player_actions(&a).unwrap_or_else(|e| {
                        report.rpc_failures += 1;
                        debug!("{name}: {e}");
                        Vec::new()
                    }),
                    _ => Vec::new(),
                };
                let plan = plan_actions(actions, &ws);
                let (source, plan_cmds): (_, Vec<Command>) = match preprocess {
                    Some(mv) => (ActionSource::Preprocess, vec![mv]),
                    None => (plan.source, plan.commands().cloned().collect()),
                };
                (source, plan_cmds)
            }
            AgentType::Coach => {
                let actions = match reply {
                    Ok(Reply::CoachActions(a)) => unmarshal_coach_actions(&a).unwrap_or_default(),
                    _ => Vec::new(),
                };
                let cmds = actions
                    .into_iter()
                    .filter_map(|a| match a {
                        CoachAction::Say { text } => Some(Command::Say { text }),
                        CoachAction::DoNothing => None,
                    })
                    .collect();
                (ActionSource::Playmaker, cmds)
            }
            AgentType::Trainer => {
                let actions = match reply {
                    Ok(Reply::TrainerActions(a)) => unmarshal_trainer_actions(&a).unwrap_or_default(),
                    _ => Vec::new(),
                };
                (ActionSource::Playmaker, actions.iter().map(trainer_command).collect())
            }
        };
        match source {
            ActionSource::Playmaker => report.playmaker_cycles += 1,
            ActionSource::Fallback => report.fallback_cycles += 1,
            ActionSource::Preprocess => report.preprocess_cycles += 1,
        }
        for c in &commands {
            link.send(c).await?;
        }
        if commands.iter().any(Command::is_body) {
            report.command_cycles += 1;
        }
        link.send(&Command::Done { cycle: Some(ws.cycle) }).await?;
        let decision_ms = started.elapsed().as_secs_f64() * 1e3;
        report.max_decision_ms = report.max_decision_ms.max(decision_ms);

        if let Some(out) = log.as_mut() {
            let line = LogLine {
                cycle: ws.cycle,
                agent: &name,
                rpc_latency_ms: rpc_ms,
                action_source: source,
                rpc_error,
                command: commands.iter().filter_map(|c| encode_client_command(c).ok()).collect(),
            };
            serde_json::to_writer(&mut *out, &line).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
    }
    let _ = link.send(&Command::Bye).await;
    if let Some(mut out) = log {
        out.flush()?;
    }
    info!("{name} finished: {report:?}");
    Ok(report)
}

fn trainer_command(a: &TrainerAction) -> Command {
    match a {
        TrainerAction::MoveBall { pos, vel } => {
            Command::TrainerMove { target: MoveTarget::Ball, x: pos.x, y: pos.y, body_dir: None, vel: Some(*vel) }
        }
        TrainerAction::MovePlayer { side, unum, pos, body_dir } => Command::TrainerMove {
            target: MoveTarget::Player { side: *side, unum: *unum },
            x: pos.x,
            y: pos.y,
            body_dir: Some(cls_core::geom::normalize_angle(*body_dir)),
            vel: None,
        },
        TrainerAction::ChangePlayMode(m) => Command::ChangeMode(*m),
        TrainerAction::Recover => Command::Recover,
    }
}
