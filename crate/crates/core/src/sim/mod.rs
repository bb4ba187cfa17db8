//! Ground-truth match simulation: kinematics, referee and observation rendering.

pub mod config;
pub mod event;
pub mod observe;
pub mod referee;
pub mod step;
pub mod world;

pub use config::{ConfigError, ObservationMode, SimConfig, SimParams};
pub use event::{AgentId, Event, RejectReason};
pub use observe::{quantize_distance, quantize_grid, render_observation, UnknownAgent};
pub use referee::referee_judge;
pub use step::{advance, kick_accel, snap_dash_dir, step_simulation};
pub use world::{BallState, PlayerState, SimWorld, Snapshot, Teams};
