use std::fmt;

use serde::{Deserialize, Serialize};

use crate::types::{PlayMode, Side};

/// Anything that can send commands to the server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentId {
    Trainer,
    Coach(Side),
    Player { side: Side, unum: u8 },
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentId::Trainer => f.write_str("trainer"),
            AgentId::Coach(s) => write!(f, "coach_{s}"),
            AgentId::Player { side, unum } => write!(f, "{side}{unum}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    IllegalCommandForPlayMode,
    MultipleBodyCommands,
    BallNotKickable,
    NotPermitted,
    UnknownAgent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Goal { side: Side, scores: (u32, u32) },
    PlayModeChange { from: PlayMode, to: PlayMode },
    CommandRejected { agent: AgentId, command: String, reason: RejectReason },
    Say { agent: AgentId, text: String },
}
