use std::collections::BTreeMap;
use std::fs::File;
use std::io;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use cls_core::codec::{decode_client_command, encode_server_message, Command, ParamMap, ParamValue, ServerMessage};
use cls_core::replay::{ReplayError, ReplayLog};
use cls_core::sim::{advance, render_observation, AgentId, Event, ObservationMode, SimParams, SimWorld, Teams};
use cls_core::{PlayMode, Side};
use log::{debug, info, warn};
use serde::Serialize;
use tokio::net::UdpSocket;
use tokio::sync::mpsc;
use tokio::task::JoinHandle;
use tokio::time::{sleep_until, Instant};

use crate::config::{ServerConfig, TickMode};
use crate::registry::{PortKind, Registry};

const MAX_DATAGRAM: usize = 8192;

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("cannot bind {port:?} socket: {source}")]
    Bind { port: PortKind, source: io::Error },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

/// Addresses the server actually listens on (useful when configured with port 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ports {
    pub player: SocketAddr,
    pub trainer: SocketAddr,
    pub coach: SocketAddr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentStats {
    pub agent: AgentId,
    /// Cycles in which the agent submitted at least one body command.
    pub body_command_cycles: u32,
    pub protocol_errors: u32,
    pub rejected_commands: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchOutcome {
    pub teams: Teams,
    pub scores: (u32, u32),
    /// Cycle the match ended on.
    pub cycles: u32,
    pub agents: Vec<AgentStats>,
    /// Malformed datagrams, including those from unregistered senders.
    pub protocol_errors: u32,
    pub rejected_commands: u32,
    /// Accelerated ticks that closed on the timeout rather than on `(done)`.
    pub late_ticks: u32,
}

struct Inbound {
    port: PortKind,
    addr: SocketAddr,
    data: Vec<u8>,
}

struct Hear {
    sender: String,
    text: String,
    from: Option<AgentId>,
}

pub struct Server {
    cfg: ServerConfig,
    params: SimParams,
    world: SimWorld,
    registry: Registry,
    sockets: [Arc<UdpSocket>; 3],
    rx: mpsc::Receiver<Inbound>,
    receivers: Vec<JoinHandle<()>>,
    script: Vec<(u32, Command)>,
    pending: Vec<(AgentId, Command)>,
    hears: Vec<Hear>,
    stats: BTreeMap<AgentId, AgentStats>,
    protocol_errors: u32,
    late_ticks: u32,
}

fn slot(port: PortKind) -> usize {
    match port {
        PortKind::Player => 0,
        PortKind::Trainer => 1,
        PortKind::Coach => 2,
    }
}

/// Binds, runs a whole match and returns its outcome.
pub async fn run_server(cfg: ServerConfig) -> Result<MatchOutcome, ServerError> {
    Server::bind(cfg).await?.run().await
}

impl Server {
    pub async fn bind(cfg: ServerConfig) -> Result<Server, ServerError> {
        cfg.sim.params.validate().map_err(|e| ServerError::Config(e.to_string()))?;
        let mut script = Vec::with_capacity(cfg.script.len());
        for s in &cfg.script {
            let cmd = decode_client_command(&s.command)
                .map_err(|e| ServerError::Config(format!("script command `{}`: {e}", s.command)))?;
            script.push((s.cycle, cmd));
        }

        let (tx, rx) = mpsc::channel(4096);
        let mut sockets = Vec::new();
        let mut receivers = Vec::new();
        for (port, number) in
            [(PortKind::Player, cfg.player_port), (PortKind::Trainer, cfg.trainer_port), (PortKind::Coach, cfg.coach_port)]
        {
            let sock = UdpSocket::bind((cfg.host, number))
                .await
                .map_err(|source| ServerError::Bind { port, source })?;
            let sock = Arc::new(sock);
            receivers.push(tokio::spawn(receive_loop(port, sock.clone(), tx.clone())));
            sockets.push(sock);
        }
        let sockets: [Arc<UdpSocket>; 3] = sockets.try_into().expect("three sockets");

        Ok(Server {
            params: cfg.sim.params.clone(),
            world: SimWorld::new(cfg.sim.seed),
            cfg,
            registry: Registry::default(),
            sockets,
            rx,
            receivers,
            script,
            pending: Vec::new(),
            hears: Vec::new(),
            stats: BTreeMap::new(),
            protocol_errors: 0,
            late_ticks: 0,
        })
    }

    pub fn ports(&self) -> Ports {
        let addr = |i: usize| self.sockets[i].local_addr().expect("bound socket");
        Ports { player: addr(0), trainer: addr(1), coach: addr(2) }
    }

    pub async fn run(mut self) -> Result<MatchOutcome, ServerError> {
        let result = self.run_inner().await;
        for r in &self.receivers {
            r.abort();
        }
        result
    }

    async fn run_inner(&mut self) -> Result<MatchOutcome, ServerError> {
        let mut replay = match &self.cfg.replay {
            Some(path) => Some(ReplayLog::new(File::create(path).map_err(ReplayError::Io)?, &self.cfg.sim)?),
            None => None,
        };

        self.wait_for_agents().await;
        info!("kick-off clock starts with {} agents", self.registry.len());
        // agents that spoke before the clock started get a clean slate
        self.pending.clear();
        if let Some(log) = replay.as_mut() {
            log.append(&self.world, &[])?;
        }

        loop {
            self.send_observations().await;
            if self.world.play_mode == PlayMode::TimeOver {
                break;
            }
            self.collect().await;

            let mut commands: Vec<(AgentId, Command)> = self
                .script
                .iter()
                .filter(|(c, _)| *c == self.world.cycle)
                .map(|(_, cmd)| (AgentId::Trainer, cmd.clone()))
                .collect();
            let mut from_agents = std::mem::take(&mut self.pending);
            // arrival order across agents depends on scheduling; sort for determinism
            from_agents.sort_by_key(|(id, _)| *id);
            self.count_body_commands(&from_agents);
            commands.extend(from_agents);

            let (next, events) = advance(&self.world, &self.params, &commands);
            if let Some(log) = replay.as_mut() {
                log.append(&next, &events)?;
            }
            self.world = next;
            self.absorb_events(&events);
        }

        if let Some(log) = replay {
            log.finish()?;
        }
        Ok(self.outcome())
    }

    fn outcome(&self) -> MatchOutcome {
        MatchOutcome {
            teams: self.world.teams.clone(),
            scores: self.world.scores,
            cycles: self.world.cycle,
            agents: self.stats.values().cloned().collect(),
            protocol_errors: self.protocol_errors,
            rejected_commands: self.stats.values().map(|s| s.rejected_commands).sum(),
            late_ticks: self.late_ticks,
        }
    }

    async fn wait_for_agents(&mut self) {
        if self.registry.len() >= self.cfg.wait_for_agents {
            return;
        }
        let deadline = Instant::now() + Duration::from_millis(self.cfg.wait_timeout_ms);
        while self.registry.len() < self.cfg.wait_for_agents {
            tokio::select! {
                msg = self.rx.recv() => match msg {
                    Some(m) => self.handle(m).await,
                    None => return,
                },
                _ = sleep_until(deadline) => {
                    warn!(
                        "starting with {} of {} expected agents",
                        self.registry.len(),
                        self.cfg.wait_for_agents
                    );
                    return;
                }
            }
        }
    }

    /// Gathers commands until the tick closes.
    async fn collect(&mut self) {
        let cycle = self.world.cycle;
        let (deadline, lockstep) = match self.cfg.tick {
            TickMode::Realtime => (Instant::now() + Duration::from_millis(self.params.cycle_ms as u64), false),
            TickMode::Accelerated => (Instant::now() + Duration::from_millis(self.cfg.lockstep_timeout_ms), true),
        };
        loop {
            if lockstep && self.registry.all_done(cycle) {
                return;
            }
            tokio::select! {
                msg = self.rx.recv() => match msg {
                    Some(m) => self.handle(m).await,
                    None => return,
                },
                _ = sleep_until(deadline) => {
                    if lockstep {
                        self.late_ticks += 1;
                        debug!("cycle {cycle} closed on timeout");
                    }
                    return;
                }
            }
        }
    }

    async fn send(&self, port: PortKind, addr: SocketAddr, msg: &ServerMessage) {
        let text = encode_server_message(msg);
        if let Err(e) = self.sockets[slot(port)].send_to(text.as_bytes(), addr).await {
            debug!("send to {addr} failed: {e}");
        }
    }

    async fn reply_error(&mut self, port: PortKind, addr: SocketAddr, what: &str) {
        self.protocol_errors += 1;
        self.send(port, addr, &ServerMessage::Error(what.to_string())).await;
    }

    async fn handle(&mut self, m: Inbound) {
        let Inbound { port, addr, data } = m;
        let cmd = std::str::from_utf8(&data)
            .map_err(|_| ())
            .and_then(|t| decode_client_command(t.trim_end_matches(['\0', '\n'])).map_err(|_| ()));
        let id = self.registry.lookup(port, addr);
        let cmd = match cmd {
            Ok(c) => c,
            Err(()) => {
                if let Some(id) = id {
                    stats_for(&mut self.stats, id).protocol_errors += 1;
                }
                self.reply_error(port, addr, "illegal_command_form").await;
                return;
            }
        };
        let Some(id) = id else {
            if let Command::Init { team, .. } = &cmd {
                self.register(port, addr, team.clone()).await;
            } else {
                self.reply_error(port, addr, "not_registered").await;
            }
            return;
        };
        match cmd {
            Command::Init { .. } => self.reply_error(port, addr, "already_registered").await,
            Command::Done { cycle } => {
                if cycle.map_or(true, |c| c == self.world.cycle) {
                    if let Some(c) = self.registry.get_mut(id) {
                        c.done_cycle = Some(self.world.cycle);
                    }
                }
            }
            Command::Bye => {
                info!("{id} left");
                self.registry.remove(&mut self.world, id);
            }
            cmd => {
                if id == AgentId::Trainer {
                    let ok = ServerMessage::Ok(cmd.head().to_string());
                    self.send(port, addr, &ok).await;
                }
                self.pending.push((id, cmd));
            }
        }
    }

    async fn register(&mut self, port: PortKind, addr: SocketAddr, team: Option<String>) {
        let id = match self.registry.register(&mut self.world, &self.params, port, addr, team.as_deref()) {
            Ok(id) => id,
            Err(e) => {
                warn!("rejected init from {addr}: {e}");
                self.reply_error(port, addr, &e.to_string()).await;
                return;
            }
        };
        info!("{id} registered from {addr}");
        stats_for(&mut self.stats, id);
        let play_mode = self.world.play_mode;
        let reply = match id {
            AgentId::Trainer => ServerMessage::Ok("init".into()),
            AgentId::Coach(side) => ServerMessage::Init { side, unum: 0, play_mode },
            AgentId::Player { side, unum } => ServerMessage::Init { side, unum, play_mode },
        };
        self.send(port, addr, &reply).await;
        for msg in self.param_messages() {
            self.send(port, addr, &msg).await;
        }
    }

    /// `server_param`, `player_param` and one `player_type` per type.
    fn param_messages(&self) -> Vec<ServerMessage> {
        let p = &self.params;
        let mut server = p.to_param_map();
        let mode = match self.cfg.sim.observation_mode {
            ObservationMode::See => "see",
            ObservationMode::FullState => "full_state",
        };
        server.insert("observation_mode".into(), ParamValue::Text(mode.into()));

        let num = |v: f64| ParamValue::Num(v);
        let mut player = ParamMap::new();
        player.insert("player_types".into(), num(p.player_types as f64));
        player.insert("subs_max".into(), num(p.subs_max as f64));
        player.insert("pt_max".into(), num(1.0));

        let mut out = vec![ServerMessage::ServerParam(server), ServerMessage::PlayerParam(player)];
        for id in 0..p.player_types {
            let mut t = ParamMap::new();
            for (k, v) in [
                ("player_speed_max", p.player_speed_max),
                ("stamina_inc_max", p.stamina_recovery),
                ("player_decay", p.player_decay),
                ("inertia_moment", p.inertia_moment),
                ("dash_power_rate", p.dash_power_rate),
                ("player_size", p.player_size),
                ("kickable_margin", p.kickable_margin),
                ("kick_rand", 0.0),
                ("effort_max", 1.0),
                ("effort_min", 0.6),
            ] {
                t.insert(k.into(), num(v));
            }
            out.push(ServerMessage::PlayerType { id, params: t });
        }
        out
    }

    fn count_body_commands(&mut self, commands: &[(AgentId, Command)]) {
        let mut last = None;
        for (id, cmd) in commands {
            if cmd.is_body() && last != Some(*id) {
                stats_for(&mut self.stats, *id).body_command_cycles += 1;
                last = Some(*id);
            }
        }
    }

    fn absorb_events(&mut self, events: &[Event]) {
        for e in events {
            match e {
                Event::PlayModeChange { to, .. } => {
                    let text = match to {
                        PlayMode::Goal(side) => {
                            let n = match side {
                                Side::Left => self.world.scores.0,
                                Side::Right => self.world.scores.1,
                            };
                            format!("goal_{side}_{n}")
                        }
                        m => m.wire_name(),
                    };
                    self.hears.push(Hear { sender: "referee".into(), text, from: None });
                }
                Event::Say { agent, text } => {
                    self.hears.push(Hear { sender: agent.to_string(), text: text.clone(), from: Some(*agent) });
                }
                Event::CommandRejected { agent, command, reason } => {
                    debug!("cycle {}: {agent} `{command}` rejected ({reason:?})", self.world.cycle);
                    stats_for(&mut self.stats, *agent).rejected_commands += 1;
                }
                Event::Goal { .. } => {}
            }
        }
    }

    /// Hear messages first, then each agent's sensory view of the new cycle.
    async fn send_observations(&mut self) {
        let hears = std::mem::take(&mut self.hears);
        let cycle = self.world.cycle;
        let clients: Vec<_> = self.registry.clients().map(|c| (c.id, c.port, c.addr)).collect();
        for (id, port, addr) in clients {
            for h in hears.iter().filter(|h| h.from != Some(id)) {
                let msg = ServerMessage::Hear { cycle, sender: h.sender.clone(), text: h.text.clone() };
                self.send(port, addr, &msg).await;
            }
            match render_observation(&self.world, &self.params, id, self.cfg.sim.observation_mode) {
                Ok(msgs) => {
                    for m in &msgs {
                        self.send(port, addr, m).await;
                    }
                }
                Err(e) => warn!("no observation for {}: {e:?}", e.0),
            }
        }
    }
}

fn stats_for(stats: &mut BTreeMap<AgentId, AgentStats>, id: AgentId) -> &mut AgentStats {
    stats.entry(id).or_insert(AgentStats { agent: id, body_command_cycles: 0, protocol_errors: 0, rejected_commands: 0 })
}

async fn receive_loop(port: PortKind, sock: Arc<UdpSocket>, tx: mpsc::Sender<Inbound>) {
    let mut buf = vec![0u8; MAX_DATAGRAM];
    loop {
        match sock.recv_from(&mut buf).await {
            Ok((n, addr)) => {
                if tx.send(Inbound { port, addr, data: buf[..n].to_vec() }).await.is_err() {
                    return;
                }
            }
            // ICMP port-unreachable from a vanished agent surfaces here on some platforms
            Err(e) => debug!("{port:?} socket: {e}"),
        }
    }
}
