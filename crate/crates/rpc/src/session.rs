//! The registration handshake that precedes any decision call.

use std::collections::BTreeMap;

use cls_core::codec::{ParamMap, ServerMessage};
use cls_core::AgentType;

use crate::convert::agent_type_to_pb;
use crate::marshal::AgentMeta;
use crate::params::{player_param_msg, player_type_msg, server_param_msg, sim_params_from_map};
use crate::pb;

/// Version tag sent in `InitMessage`.
pub const CONTRACT_VERSION: &str = "cls-game/1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MissingPrerequisite {
    #[error("server_param not received")]
    ServerParams,
    #[error("player_param not received")]
    PlayerParams,
    #[error("received {got} of {want} player types")]
    PlayerTypes { got: usize, want: usize },
    #[error("server parameters are invalid: {0}")]
    InvalidParams(String),
    #[error("registration incomplete: {acked} of {total} calls acknowledged")]
    RegistrationIncomplete { acked: usize, total: usize },
}

/// An outbound RPC.
#[derive(Debug, Clone, PartialEq)]
pub enum Call {
    Init(pb::InitMessage),
    ServerParams(pb::ServerParam),
    PlayerParams(pb::PlayerParam),
    PlayerType(pb::PlayerType),
    PlayerActions(pb::State),
    CoachActions(pb::State),
    TrainerActions(pb::State),
}

impl Call {
    /// The RPC method name, as in the schema.
    pub fn method(&self) -> &'static str {
        match self {
            Call::Init(_) => "SendInitMessage",
            Call::ServerParams(_) => "SendServerParams",
            Call::PlayerParams(_) => "SendPlayerParams",
            Call::PlayerType(_) => "SendPlayerType",
            Call::PlayerActions(_) => "GetPlayerActions",
            Call::CoachActions(_) => "GetCoachActions",
            Call::TrainerActions(_) => "GetTrainerActions",
        }
    }

    pub fn register_id(&self) -> i32 {
        match self {
            Call::Init(m) => m.register_id,
            Call::ServerParams(m) => m.register_id,
            Call::PlayerParams(m) => m.register_id,
            Call::PlayerType(m) => m.register_id,
            Call::PlayerActions(s) | Call::CoachActions(s) | Call::TrainerActions(s) => s.register_id,
        }
    }

    pub fn is_registration(&self) -> bool {
        matches!(self, Call::Init(_) | Call::ServerParams(_) | Call::PlayerParams(_) | Call::PlayerType(_))
    }

    /// The decision call matching an agent type.
    pub fn decision(agent_type: AgentType, state: pb::State) -> Call {
        match agent_type {
            AgentType::Player => Call::PlayerActions(state),
            AgentType::Coach => Call::CoachActions(state),
            AgentType::Trainer => Call::TrainerActions(state),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reply {
    Ack,
    PlayerActions(pb::PlayerActions),
    CoachActions(pb::CoachActions),
    TrainerActions(pb::TrainerActions),
}

/// Parameter messages collected from the simulation server after `init`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CapturedParams {
    pub server: Option<ParamMap>,
    pub player: Option<ParamMap>,
    pub types: BTreeMap<u32, ParamMap>,
}

impl CapturedParams {
    /// Keeps `msg` if it is a parameter message; returns whether it was.
    pub fn capture(&mut self, msg: &ServerMessage) -> bool {
        match msg {
            ServerMessage::ServerParam(m) => self.server = Some(m.clone()),
            ServerMessage::PlayerParam(m) => self.player = Some(m.clone()),
            ServerMessage::PlayerType { id, params } => {
                self.types.insert(*id, params.clone());
            }
            _ => return false,
        }
        true
    }

    fn expected_types(&self) -> Option<usize> {
        let p = self.player.as_ref()?;
        Some(player_param_msg(p, 0).player_types as usize)
    }

    pub fn is_complete(&self) -> bool {
        self.server.is_some() && self.expected_types().is_some_and(|n| self.types.len() >= n)
    }
}

/// The calls that register an agent with its playmaker, in order: init,
/// server parameters, player parameters, then one call per player type.
pub fn registration_sequence(meta: &AgentMeta, params: &CapturedParams) -> Result<Vec<Call>, MissingPrerequisite> {
    let server = params.server.as_ref().ok_or(MissingPrerequisite::ServerParams)?;
    let player = params.player.as_ref().ok_or(MissingPrerequisite::PlayerParams)?;
    let want = params.expected_types().unwrap_or(0);
    if params.types.len() < want {
        return Err(MissingPrerequisite::PlayerTypes { got: params.types.len(), want });
    }
    let (sim, full_state) = sim_params_from_map(server).map_err(|e| MissingPrerequisite::InvalidParams(e.to_string()))?;
    let rid = meta.register_id;
    let mut calls = vec![
        Call::Init(pb::InitMessage {
            register_id: rid,
            team_name: meta.team_name.clone(),
            unum: meta.unum as u32,
            agent_type: agent_type_to_pb(meta.agent_type) as i32,
            version: CONTRACT_VERSION.to_string(),
            debug_mode: false,
        }),
        Call::ServerParams(server_param_msg(&sim, full_state, rid)),
        Call::PlayerParams(player_param_msg(player, rid)),
    ];
    calls.extend(params.types.iter().take(want).map(|(id, m)| Call::PlayerType(player_type_msg(*id, m, rid))));
    Ok(calls)
}

/// Tracks how far registration has progressed and guards decision calls.
#[derive(Debug, Clone, Default)]
pub struct RpcSession {
    calls: Vec<Call>,
    acked: usize,
}

impl RpcSession {
    pub fn new(calls: Vec<Call>) -> Self {
        RpcSession { calls, acked: 0 }
    }

    /// Next registration call still awaiting an acknowledgment.
    pub fn next_registration(&self) -> Option<&Call> {
        self.calls.get(self.acked)
    }

    pub fn ack(&mut self) {
        self.acked = (self.acked + 1).min(self.calls.len());
    }

    /// Forget acknowledgments, e.g. after the playmaker went away.
    pub fn reset(&mut self) {
        self.acked = 0;
    }

    pub fn is_registered(&self) -> bool {
        !self.calls.is_empty() && self.acked == self.calls.len()
    }

    pub fn check_ready(&self) -> Result<(), MissingPrerequisite> {
        if self.is_registered() {
            Ok(())
        } else {
            Err(MissingPrerequisite::RegistrationIncomplete { acked: self.acked, total: self.calls.len() })
        }
    }
}
