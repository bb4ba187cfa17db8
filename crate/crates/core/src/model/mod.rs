//! Agent-side world model: self-localization, object tracking and the
//! intercept table, all in the team-normalized frame (own goal at x = -52.5).

mod intercept;
mod localize;
mod state;

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::sim::SimParams;
use crate::types::Side;

pub use intercept::{
    build_intercept_table, intercept_cycles, predict_ball_position, InterceptParams, InterceptTable, Reach,
    INTERCEPT_HORIZON,
};
pub use localize::{localize, LocalizeError, MAX_VALID_RESIDUAL};
pub use state::{IntegrateError, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseEstimate {
    pub pos: Vec2,
    /// Current velocity, same convention as the simulation.
    pub vel: Vec2,
    pub body_dir: f64,
    /// Relative to the body.
    pub neck_dir: f64,
    /// Estimated 1-sigma position error in metres.
    pub pos_error: f64,
    pub valid: bool,
    /// Cycles since the last fresh fix.
    pub age: u32,
}

impl Default for PoseEstimate {
    fn default() -> Self {
        PoseEstimate {
            pos: Vec2::ZERO,
            vel: Vec2::ZERO,
            body_dir: 0.0,
            neck_dir: 0.0,
            pos_error: 0.0,
            valid: false,
            age: 0,
        }
    }
}

impl PoseEstimate {
    pub fn face_dir(&self) -> f64 {
        crate::geom::normalize_angle(self.body_dir + self.neck_dir)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrackedKind {
    Ball,
    Player { side: Side, unum: u8 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedObject {
    pub kind: TrackedKind,
    pub pos: Vec2,
    pub vel: Vec2,
    /// Known only from a full-state observation.
    pub body_dir: Option<f64>,
    /// 1 at the cycle of a direct observation, then decays while unseen.
    pub confidence: f64,
    pub last_seen_cycle: Option<u32>,
    /// Position measured at `last_seen_cycle`, kept for velocity differencing.
    pub last_seen_pos: Vec2,
}

impl TrackedObject {
    pub fn unseen(kind: TrackedKind) -> Self {
        TrackedObject {
            kind,
            pos: Vec2::ZERO,
            vel: Vec2::ZERO,
            body_dir: None,
            confidence: 0.0,
            last_seen_cycle: None,
            last_seen_pos: Vec2::ZERO,
        }
    }

    pub fn seen(&self) -> bool {
        self.last_seen_cycle.is_some()
    }

    pub fn unum(&self) -> Option<u8> {
        match self.kind {
            TrackedKind::Player { unum, .. } => Some(unum),
            TrackedKind::Ball => None,
        }
    }
}

/// Tunables of the world model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub sim: SimParams,
    /// Per-cycle confidence factor while an object is unseen.
    pub confidence_decay: f64,
    /// A dead-reckoned self pose stays valid for fewer than this many cycles.
    pub dead_reckon_horizon: u32,
    /// Bearing error beyond which the intercept model charges a turn cycle.
    pub turn_threshold_deg: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            sim: SimParams::default(),
            confidence_decay: 0.95,
            dead_reckon_horizon: 5,
            turn_threshold_deg: 15.0,
        }
    }
}

impl ModelConfig {
    pub fn intercept_params(&self) -> InterceptParams {
        InterceptParams {
            ball_decay: self.sim.ball_decay,
            player_speed_max: self.sim.player_speed_max,
            dash_accel_gain: self.sim.dash_accel_gain(),
            kickable_area: self.sim.kickable_area(),
            turn_threshold_deg: self.turn_threshold_deg,
        }
    }
}
