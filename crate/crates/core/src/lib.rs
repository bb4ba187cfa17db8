//! Core of a desk-scale 2D soccer simulation: the S-expression wire codec,
//! the ground-truth match simulation, the replay format and the agent-side
//! world model.

pub mod codec;
pub mod geom;
pub mod landmarks;
pub mod model;
pub mod replay;
pub mod sim;
pub mod types;

pub use geom::Vec2;
pub use types::{AgentType, PlayMode, Side};
