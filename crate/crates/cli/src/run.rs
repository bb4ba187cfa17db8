//! Running a whole match in one process: server, both teams and, when asked
//! for, the built-in playmaker.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cls_proxy::{start_team, AgentReport, PlaymakerEndpoint, TeamConfig, TeamReport};
use cls_rpc::CallLog;
use cls_server::{MatchOutcome, Server, ServerConfig, ServerError, TickMode};
use serde::Serialize;

use crate::builtin::BuiltinPlaymaker;
use crate::config::{ConfigError, MatchConfig, TeamSpec};
use crate::corpus::Recorder;

#[derive(Debug, thiserror::Error)]
pub enum MatchError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("failed to launch {component}: {reason}")]
    Launch { component: String, reason: String },
    #[error("server: {0}")]
    Server(#[from] ServerError),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TeamSummary {
    pub name: String,
    pub agents: usize,
    pub cycles: u32,
    pub command_cycles: u32,
    pub playmaker_cycles: u32,
    pub fallback_cycles: u32,
    pub preprocess_cycles: u32,
    pub deadline_misses: u32,
    pub deadline_miss_rate: f64,
    pub channel_down: u32,
    pub rpc_failures: u32,
    pub protocol_errors: u32,
    pub max_decision_ms: f64,
    /// Agents that did not finish, with the reason.
    pub failures: Vec<String>,
}

impl TeamSummary {
    fn from_report(r: &TeamReport) -> Self {
        let sum = |f: fn(&AgentReport) -> u32| r.agents.iter().map(f).sum::<u32>();
        let cycles = sum(|a| a.cycles);
        let deadline_misses = sum(|a| a.deadline_misses);
        TeamSummary {
            name: r.name.clone(),
            agents: r.agents.len(),
            cycles,
            command_cycles: sum(|a| a.command_cycles),
            playmaker_cycles: sum(|a| a.playmaker_cycles),
            fallback_cycles: sum(|a| a.fallback_cycles),
            preprocess_cycles: sum(|a| a.preprocess_cycles),
            deadline_misses,
            deadline_miss_rate: if cycles == 0 { 0.0 } else { deadline_misses as f64 / cycles as f64 },
            channel_down: sum(|a| a.channel_down),
            rpc_failures: sum(|a| a.rpc_failures),
            protocol_errors: sum(|a| a.protocol_errors),
            max_decision_ms: r.agents.iter().map(|a| a.max_decision_ms).fold(0.0, f64::max),
            failures: r.failures.iter().map(|f| format!("agent {}: {}", f.index + 1, f.message)).collect(),
        }
    }

    /// Share of agent-cycles whose commands did not come from the playmaker.
    pub fn fallback_rate(&self) -> f64 {
        if self.cycles == 0 {
            0.0
        } else {
            (self.fallback_cycles + self.preprocess_cycles) as f64 / self.cycles as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub scores: (u32, u32),
    pub cycles: u32,
    pub left: TeamSummary,
    pub right: TeamSummary,
    /// Malformed datagrams seen by the server plus error replies seen by agents.
    pub protocol_errors: u32,
    pub rejected_commands: u32,
    pub late_ticks: u32,
    pub replay: Option<PathBuf>,
    pub recorded_states: Option<usize>,
    pub wall_seconds: f64,
}

impl MatchResult {
    pub fn deadline_miss_rate(&self) -> f64 {
        let cycles = self.left.cycles + self.right.cycles;
        if cycles == 0 {
            0.0
        } else {
            (self.left.deadline_misses + self.right.deadline_misses) as f64 / cycles as f64
        }
    }

    pub fn within_error_budget(&self, budget: u32) -> bool {
        self.protocol_errors <= budget
    }
}

/// Extra hooks for callers that inspect a match from the inside.
#[derive(Debug, Clone, Default)]
pub struct MatchHooks {
    /// Receives every playmaker call of every agent.
    pub call_log: Option<CallLog>,
}

pub fn server_config(cfg: &MatchConfig) -> ServerConfig {
    let s = &cfg.server;
    let agents = [&cfg.left, &cfg.right].iter().map(|t| t.players as usize + t.coach as usize).sum();
    ServerConfig {
        sim: cfg.sim_config(),
        host: s.host,
        player_port: s.player_port,
        trainer_port: s.trainer_port,
        coach_port: s.coach_port,
        tick: if cfg.accelerated { TickMode::Accelerated } else { TickMode::Realtime },
        lockstep_timeout_ms: s.lockstep_timeout_ms,
        wait_for_agents: agents,
        wait_timeout_ms: s.wait_timeout_ms,
        replay: cfg.replay.clone(),
        script: cfg.script.clone(),
    }
}

fn endpoint(spec: &TeamSpec, builtin: &Option<Arc<BuiltinPlaymaker>>) -> PlaymakerEndpoint {
    match builtin {
        Some(b) if spec.is_builtin() => PlaymakerEndpoint::Local(b.clone()),
        _ => PlaymakerEndpoint::Grpc(spec.playmaker.clone()),
    }
}

pub async fn run_match(cfg: &MatchConfig, hooks: MatchHooks) -> Result<MatchResult, MatchError> {
    cfg.validate()?;
    let started = Instant::now();
    let server = Server::bind(server_config(cfg))
        .await
        .map_err(|e| MatchError::Launch { component: "server".into(), reason: e.to_string() })?;
    let ports = server.ports();
    let server = tokio::spawn(server.run());

    let builtin = (cfg.left.is_builtin() || cfg.right.is_builtin()).then(|| {
        Arc::new(match &cfg.record.path {
            Some(_) => BuiltinPlaymaker::with_recorder(Recorder::new(cfg.record.stride, cfg.record.limit)),
            None => BuiltinPlaymaker::new(),
        })
    });

    let mut handles = Vec::new();
    for spec in [&cfg.left, &cfg.right] {
        let mut team = TeamConfig::new(spec.name.clone(), ports.player, endpoint(spec, &builtin));
        team.players = spec.players;
        team.with_coach = spec.coach;
        team.coach_server = ports.coach;
        team.deadline = Duration::from_millis(cfg.deadline_ms);
        team.log_dir = cfg.log_dir.clone();
        team.call_log = hooks.call_log.clone();
        handles.push(start_team(&team).await);
    }
    let mut reports = Vec::new();
    for h in handles {
        reports.push(h.join().await);
    }
    let outcome: MatchOutcome = server
        .await
        .map_err(|e| MatchError::Launch { component: "server".into(), reason: e.to_string() })??;

    // an agent that never got in is a launch failure, not a quiet forfeit
    for r in &reports {
        if let Some(f) = r.failures.iter().find(|f| f.at_launch) {
            return Err(MatchError::Launch {
                component: format!("{} agent {}", r.name, f.index + 1),
                reason: f.message.clone(),
            });
        }
    }

    let recorded_states = match (&builtin, &cfg.record.path) {
        (Some(b), Some(path)) => Some(
            b.recorder()
                .expect("recorder configured")
                .write(path)
                .map_err(|e| MatchError::Launch { component: "state recorder".into(), reason: e.to_string() })?,
        ),
        _ => None,
    };

    let left = TeamSummary::from_report(&reports[0]);
    let right = TeamSummary::from_report(&reports[1]);
    Ok(MatchResult {
        scores: outcome.scores,
        cycles: outcome.cycles,
        protocol_errors: outcome.protocol_errors + left.protocol_errors + right.protocol_errors,
        rejected_commands: outcome.rejected_commands,
        late_ticks: outcome.late_ticks,
        left,
        right,
        replay: cfg.replay.clone(),
        recorded_states,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}
