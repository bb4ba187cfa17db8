use std::net::{IpAddr, Ipv4Addr};
use std::path::PathBuf;

use cls_core::sim::SimConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TickMode {
    /// One cycle every `cycle_ms` of wall time.
    #[default]
    Realtime,
    /// A cycle closes as soon as every agent reports `(done)`, or after
    /// `lockstep_timeout_ms`. Runs are deterministic and as fast as the agents.
    Accelerated,
}

/// A trainer command the server issues itself at the start of `cycle`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedCommand {
    pub cycle: u32,
    /// Command text, e.g. `(move (ball) 0 0)`.
    pub command: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerConfig {
    pub sim: SimConfig,
    pub host: IpAddr,
    pub player_port: u16,
    pub trainer_port: u16,
    pub coach_port: u16,
    pub tick: TickMode,
    pub lockstep_timeout_ms: u64,
    /// The clock starts once this many agents are registered.
    pub wait_for_agents: usize,
    /// Start anyway after this long without the expected agents.
    pub wait_timeout_ms: u64,
    pub replay: Option<PathBuf>,
    pub script: Vec<ScriptedCommand>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            sim: SimConfig::default(),
            host: IpAddr::V4(Ipv4Addr::LOCALHOST),
            player_port: 6000,
            trainer_port: 6001,
            coach_port: 6002,
            tick: TickMode::Realtime,
            lockstep_timeout_ms: 1000,
            wait_for_agents: 0,
            wait_timeout_ms: 30_000,
            replay: None,
            script: Vec::new(),
        }
    }
}
