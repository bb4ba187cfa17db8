//! The soccer proxy: one loop per agent that keeps a world model from server
//! observations, asks a playmaker for actions every cycle and turns them into
//! protocol commands, falling back to a built-in policy when the playmaker is
//! slow or gone.

pub mod agent;
pub mod compile;
pub mod team;

pub use agent::{run_agent, AgentConfig, AgentError, AgentReport, PlaymakerEndpoint};
pub use compile::{
    compile_action, dead_ball_move, fallback_command, plan_actions, ActionPlan, ActionSource, Infeasible,
    KICKOFF_POSITIONS,
};
pub use team::{start_team, AgentFailure, TeamConfig, TeamHandle, TeamReport};
