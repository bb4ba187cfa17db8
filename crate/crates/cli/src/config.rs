//! Match configuration: a TOML file plus command-line overrides.

use std::net::{IpAddr, Ipv4Addr};
use std::path::{Path, PathBuf};

use cls_core::codec::ParamValue;
use cls_core::sim::{ObservationMode, SimConfig, SimParams};
use cls_server::ScriptedCommand;
use serde::{Deserialize, Serialize};

/// Playmaker value meaning "use the in-process built-in policy".
pub const BUILTIN: &str = "builtin";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("unknown simulation parameter `{0}`")]
    UnknownParam(String),
    #[error("bad value for `{key}`: {value}")]
    BadValue { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TeamSpec {
    pub name: String,
    /// `builtin`, or a gRPC endpoint such as `http://127.0.0.1:50051`.
    pub playmaker: String,
    pub players: u8,
    pub coach: bool,
}

impl TeamSpec {
    fn named(name: &str) -> Self {
        TeamSpec { name: name.into(), playmaker: BUILTIN.into(), players: 11, coach: false }
    }

    pub fn is_builtin(&self) -> bool {
        self.playmaker == BUILTIN
    }
}

impl Default for TeamSpec {
    fn default() -> Self {
        TeamSpec::named("Team")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerSection {
    pub host: IpAddr,
    /// 0 picks a free port.
    pub player_port: u16,
    pub trainer_port: u16,
    pub coach_port: u16,
    pub lockstep_timeout_ms: u64,
    pub wait_timeout_ms: u64,
}

impl Default for ServerSection {
    fn default() -> Self {
        ServerSection {
            host: IpAddr::V4(Ipv4Addr::LOCALHOST),
            player_port: 0,
            trainer_port: 0,
            coach_port: 0,
            lockstep_timeout_ms: 1000,
            wait_timeout_ms: 30_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecordSection {
    /// Where to write the decision corpus; nothing is recorded when unset.
    pub path: Option<PathBuf>,
    pub stride: u32,
    pub limit: usize,
}

impl Default for RecordSection {
    fn default() -> Self {
        RecordSection { path: None, stride: 24, limit: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchConfig {
    pub seed: u64,
    /// Close each tick as soon as every agent reports `(done)`.
    pub accelerated: bool,
    pub observation_mode: ObservationMode,
    pub deadline_ms: u64,
    /// More protocol errors than this fails the run.
    pub protocol_error_budget: u32,
    pub replay: Option<PathBuf>,
    /// Per-agent decision logs.
    pub log_dir: Option<PathBuf>,
    pub params: SimParams,
    pub server: ServerSection,
    pub left: TeamSpec,
    pub right: TeamSpec,
    pub record: RecordSection,
    pub script: Vec<ScriptedCommand>,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            seed: 1,
            accelerated: false,
            observation_mode: ObservationMode::See,
            deadline_ms: cls_rpc::DEFAULT_DEADLINE_MS,
            protocol_error_budget: 0,
            replay: None,
            log_dir: None,
            params: SimParams::default(),
            server: ServerSection::default(),
            left: TeamSpec::named("Left"),
            right: TeamSpec::named("Right"),
            record: RecordSection::default(),
            script: Vec::new(),
        }
    }
}

impl MatchConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_toml(&text, path)
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig { params: self.params.clone(), observation_mode: self.observation_mode, seed: self.seed }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        for t in [&self.left, &self.right] {
            if t.name.is_empty() || t.name.contains(|c: char| c.is_whitespace() || c == '(' || c == ')') {
                return Err(ConfigError::Invalid(format!("team name `{}` is not a protocol token", t.name)));
            }
            if !(1..=11).contains(&t.players) {
                return Err(ConfigError::Invalid(format!("team {} needs 1 to 11 players", t.name)));
            }
        }
        if self.left.name == self.right.name {
            return Err(ConfigError::Invalid("the teams need different names".into()));
        }
        if self.deadline_ms == 0 || self.deadline_ms >= self.params.cycle_ms as u64 {
            return Err(ConfigError::Invalid(format!(
                "deadline {} ms must be positive and below the {} ms cycle",
                self.deadline_ms, self.params.cycle_ms
            )));
        }
        Ok(())
    }
}

/// Applies `name=value` overrides to simulation parameters.
pub fn apply_param_overrides(params: &SimParams, overrides: &[String]) -> Result<SimParams, ConfigError> {
    let mut map = params.to_param_map();
    for o in overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| ConfigError::BadValue { key: o.clone(), value: "expected name=value".into() })?;
        let (key, value) = (key.trim(), value.trim());
        if !map.contains_key(key) {
            return Err(ConfigError::UnknownParam(key.into()));
        }
        let num: f64 = value.parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: value.into() })?;
        map.insert(key.into(), ParamValue::Num(num));
    }
    SimParams::from_param_map(&map).map_err(|e| ConfigError::Invalid(e.to_string()))
}
