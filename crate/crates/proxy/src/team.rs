//! Launching a whole team of agents against one server.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use cls_core::AgentType;
use cls_rpc::CallLog;
use serde::Serialize;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use crate::agent::{run_agent, AgentConfig, AgentError, AgentReport, PlaymakerEndpoint};

#[derive(Debug, Clone)]
pub struct TeamConfig {
    pub name: String,
    pub players: u8,
    pub with_coach: bool,
    pub player_server: SocketAddr,
    pub coach_server: SocketAddr,
    pub playmaker: PlaymakerEndpoint,
    pub deadline: Duration,
    /// Pause between one agent's acceptance and the next agent's init.
    pub stagger: Duration,
    /// Directory for per-agent decision logs.
    pub log_dir: Option<PathBuf>,
    pub call_log: Option<CallLog>,
    pub idle_timeout: Duration,
}

impl TeamConfig {
    pub fn new(name: impl Into<String>, player_server: SocketAddr, playmaker: PlaymakerEndpoint) -> Self {
        let coach_server = SocketAddr::new(player_server.ip(), player_server.port() + 2);
        TeamConfig {
            name: name.into(),
            players: 11,
            with_coach: false,
            player_server,
            coach_server,
            playmaker,
            deadline: Duration::from_millis(cls_rpc::DEFAULT_DEADLINE_MS),
            stagger: Duration::from_millis(10),
            log_dir: None,
            call_log: None,
            idle_timeout: Duration::from_secs(60),
        }
    }

    fn agent(&self, agent_type: AgentType, index: usize) -> AgentConfig {
        let server = if agent_type == AgentType::Coach { self.coach_server } else { self.player_server };
        let mut cfg = AgentConfig::new(self.name.clone(), agent_type, server, self.playmaker.clone());
        cfg.deadline = self.deadline;
        cfg.goalie = agent_type == AgentType::Player && index == 0;
        cfg.idle_timeout = self.idle_timeout;
        cfg.call_log = self.call_log.clone();
        cfg.log_path = self.log_dir.as_ref().map(|d| match agent_type {
            AgentType::Coach => d.join(format!("{}-coach.jsonl", self.name)),
            _ => d.join(format!("{}-{}.jsonl", self.name, index + 1)),
        });
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentFailure {
    /// Launch order, from 0.
    pub index: usize,
    /// The agent never got into the match.
    pub at_launch: bool,
    pub message: String,
}

#[derive(Debug, Default, Serialize)]
pub struct TeamReport {
    pub name: String,
    pub agents: Vec<AgentReport>,
    pub failures: Vec<AgentFailure>,
}

impl TeamReport {
    pub fn cycles(&self) -> u32 {
        self.agents.iter().map(|a| a.cycles).sum()
    }

    pub fn deadline_misses(&self) -> u32 {
        self.agents.iter().map(|a| a.deadline_misses).sum()
    }
}

pub struct TeamHandle {
    name: String,
    tasks: Vec<JoinHandle<Result<AgentReport, AgentError>>>,
}

impl TeamHandle {
    pub async fn join(self) -> TeamReport {
        let mut report = TeamReport { name: self.name, ..Default::default() };
        for (i, task) in self.tasks.into_iter().enumerate() {
            match task.await {
                Ok(Ok(r)) => report.agents.push(r),
                Ok(Err(e)) => report.failures.push(AgentFailure {
                    index: i,
                    at_launch: matches!(
                        e,
                        AgentError::ServerUnreachable(_) | AgentError::Rejected(_) | AgentError::Config(_)
                    ),
                    message: e.to_string(),
                }),
                Err(e) => report.failures.push(AgentFailure {
                    index: i,
                    at_launch: false,
                    message: format!("agent task panicked: {e}"),
                }),
            }
        }
        report
    }
}

/// Starts the team's agents one at a time so that uniform numbers follow
/// launch order. Returns once every agent has been accepted or refused.
pub async fn start_team(cfg: &TeamConfig) -> TeamHandle {
    let mut tasks = Vec::new();
    let mut kinds: Vec<(AgentType, usize)> = (0..cfg.players as usize).map(|i| (AgentType::Player, i)).collect();
    if cfg.with_coach {
        kinds.push((AgentType::Coach, 0));
    }
    for (kind, index) in kinds {
        let (tx, rx) = oneshot::channel();
        tasks.push(tokio::spawn(run_agent(cfg.agent(kind, index), Some(tx))));
        let _ = rx.await;
        tokio::time::sleep(cfg.stagger).await;
    }
    TeamHandle { name: cfg.name.clone(), tasks }
}
