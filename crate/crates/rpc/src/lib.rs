//! The 'Game' service boundary between a proxy (RPC client) and a playmaker
//! (RPC server): the protobuf schema, conversions to and from the world
//! model, the registration handshake and deadline-bounded calls.

pub mod actions;
pub mod client;
mod convert;
pub mod handler;
pub mod marshal;
pub mod params;
pub mod session;

/// Generated protobuf types and gRPC stubs.
pub mod pb {
    tonic::include_proto!("cls.game");
}

pub use actions::{CoachAction, PlayerAction, SchemaViolation, TrainerAction};
pub use client::{CallError, CallLog, CallOutcome, CallRecord, GameTransport, GrpcTransport, LocalTransport, RpcClient};
pub use convert::{agent_type_from_pb, agent_type_to_pb, play_mode_from_pb, play_mode_to_pb, side_from_pb, side_to_pb};
pub use handler::{serve, spawn_server, GameHandler, GameService};
pub use marshal::{marshal_state, marshal_world, unmarshal_world, AgentMeta};
pub use session::{registration_sequence, Call, CapturedParams, MissingPrerequisite, Reply, RpcSession};

/// Port a playmaker listens on unless configured otherwise.
pub const DEFAULT_PORT: u16 = 50051;
/// Per-cycle budget for a decision call, in milliseconds.
pub const DEFAULT_DEADLINE_MS: u64 = 70;
/// The schema every playmaker implementation compiles against.
pub const PROTO_SOURCE: &str = include_str!("../proto/game.proto");

/// Stable agent identifier used across calls: left players 1..=11, left
/// coach 12, right players 13..=23, right coach 24, trainer 25.
pub fn register_id(agent_type: cls_core::AgentType, side: Option<cls_core::Side>, unum: u8) -> i32 {
    use cls_core::{AgentType, Side};
    let base = match side {
        Some(Side::Right) => 12,
        _ => 0,
    };
    match agent_type {
        AgentType::Player => base + unum as i32,
        AgentType::Coach => base + 12,
        AgentType::Trainer => 25,
    }
}
