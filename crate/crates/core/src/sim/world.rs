use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::types::{PlayMode, Side};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BallState {
    pub pos: Vec2,
    /// Displacement the ball will make next cycle absent any kick.
    pub vel: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerState {
    pub side: Side,
    pub unum: u8,
    pub pos: Vec2,
    pub vel: Vec2,
    /// Global body direction in degrees.
    pub body_dir: f64,
    /// Neck angle relative to the body, in [-90, 90].
    pub neck_dir: f64,
    pub stamina: f64,
    pub effort: f64,
}

impl PlayerState {
    pub fn new(side: Side, unum: u8, pos: Vec2, stamina: f64) -> Self {
        PlayerState {
            side,
            unum,
            pos,
            vel: Vec2::ZERO,
            body_dir: if side == Side::Left { 0.0 } else { -180.0 },
            neck_dir: 0.0,
            stamina,
            effort: 1.0,
        }
    }

    /// Direction the player's eyes point at: body plus neck.
    pub fn face_dir(&self) -> f64 {
        crate::geom::normalize_angle(self.body_dir + self.neck_dir)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Teams {
    pub left: Option<String>,
    pub right: Option<String>,
}

impl Teams {
    pub fn name(&self, side: Side) -> Option<&str> {
        match side {
            Side::Left => self.left.as_deref(),
            Side::Right => self.right.as_deref(),
        }
    }

    pub fn side_of(&self, team: &str) -> Option<Side> {
        if self.left.as_deref() == Some(team) {
            Some(Side::Left)
        } else if self.right.as_deref() == Some(team) {
            Some(Side::Right)
        } else {
            None
        }
    }
}

/// Everything the server exposes in a full-state observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub cycle: u32,
    pub play_mode: PlayMode,
    /// (left, right)
    pub scores: (u32, u32),
    pub teams: Teams,
    pub ball: BallState,
    /// Sorted by (side, unum).
    pub players: Vec<PlayerState>,
}

/// Ground-truth match state owned by the simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimWorld {
    pub cycle: u32,
    pub play_mode: PlayMode,
    pub scores: (u32, u32),
    pub teams: Teams,
    pub ball: BallState,
    /// Sorted by (side, unum); at most 11 per side.
    pub players: Vec<PlayerState>,
    /// Side of the last player to kick the ball.
    pub last_touch: Option<Side>,
    /// Cycle at which the current play mode began.
    pub mode_since: u32,
    pub rng_seed: u64,
}

impl SimWorld {
    pub fn new(seed: u64) -> Self {
        SimWorld {
            cycle: 0,
            play_mode: PlayMode::BeforeKickOff,
            scores: (0, 0),
            teams: Teams::default(),
            ball: BallState::default(),
            players: Vec::new(),
            last_touch: None,
            mode_since: 0,
            rng_seed: seed,
        }
    }

    pub fn player(&self, side: Side, unum: u8) -> Option<&PlayerState> {
        self.players.iter().find(|p| p.side == side && p.unum == unum)
    }

    pub fn player_mut(&mut self, side: Side, unum: u8) -> Option<&mut PlayerState> {
        self.players.iter_mut().find(|p| p.side == side && p.unum == unum)
    }

    /// Adds a player keeping the (side, unum) ordering.
    pub fn insert_player(&mut self, player: PlayerState) {
        let key = (player.side, player.unum);
        let at = self
            .players
            .partition_point(|p| (p.side, p.unum) < key);
        if self.players.get(at).map(|p| (p.side, p.unum)) == Some(key) {
            self.players[at] = player;
        } else {
            self.players.insert(at, player);
        }
    }

    pub fn remove_player(&mut self, side: Side, unum: u8) {
        self.players.retain(|p| !(p.side == side && p.unum == unum));
    }

    pub fn set_play_mode(&mut self, mode: PlayMode) {
        if self.play_mode != mode {
            self.play_mode = mode;
            self.mode_since = self.cycle;
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            cycle: self.cycle,
            play_mode: self.play_mode,
            scores: self.scores,
            teams: self.teams.clone(),
            ball: self.ball,
            players: self.players.clone(),
        }
    }
}
