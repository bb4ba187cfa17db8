//! The match server: owns the ground-truth world, speaks the text protocol
//! over UDP and records every cycle to a replay file.

pub mod config;
pub mod registry;
mod server;

pub use config::{ScriptedCommand, ServerConfig, TickMode};
pub use registry::{PortKind, RegisterError, Registry};
pub use server::{run_server, AgentStats, MatchOutcome, Ports, Server, ServerError};
