use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// Single-letter wire form (`l` / `r`).
    pub fn letter(self) -> &'static str {
        match self {
            Side::Left => "l",
            Side::Right => "r",
        }
    }

    pub fn from_letter(s: &str) -> Option<Side> {
        match s {
            "l" => Some(Side::Left),
            "r" => Some(Side::Right),
            _ => None,
        }
    }

    /// +1 for left, -1 for right: the factor that maps global coordinates into
    /// the team frame where the own goal sits at x = -52.5.
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

/// Referee state. Sided variants name the team entitled to restart play,
/// except `Goal(side)` which names the team that scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlayMode {
    BeforeKickOff,
    KickOff(Side),
    PlayOn,
    KickIn(Side),
    GoalKick(Side),
    CornerKick(Side),
    Goal(Side),
    TimeOver,
}

impl PlayMode {
    /// Dead-ball modes freeze the ball until the entitled side kicks.
    pub fn dead_ball_side(self) -> Option<Side> {
        match self {
            PlayMode::KickOff(s)
            | PlayMode::KickIn(s)
            | PlayMode::GoalKick(s)
            | PlayMode::CornerKick(s) => Some(s),
            _ => None,
        }
    }

    /// Players may teleport with `move` only while play is stopped for a kickoff.
    pub fn allows_player_move(self) -> bool {
        matches!(self, PlayMode::BeforeKickOff | PlayMode::Goal(_))
    }

    pub fn allows_kick_by(self, side: Side) -> bool {
        match self {
            PlayMode::PlayOn => true,
            m => m.dead_ball_side() == Some(side),
        }
    }

    pub fn wire_name(self) -> String {
        let (base, side) = match self {
            PlayMode::BeforeKickOff => return "before_kick_off".into(),
            PlayMode::PlayOn => return "play_on".into(),
            PlayMode::TimeOver => return "time_over".into(),
            PlayMode::KickOff(s) => ("kick_off", s),
            PlayMode::KickIn(s) => ("kick_in", s),
            PlayMode::GoalKick(s) => ("goal_kick", s),
            PlayMode::CornerKick(s) => ("corner_kick", s),
            PlayMode::Goal(s) => ("goal", s),
        };
        format!("{base}_{side}")
    }
}

impl fmt::Display for PlayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.wire_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown play mode `{0}`")]
pub struct UnknownPlayMode(pub String);

impl FromStr for PlayMode {
    type Err = UnknownPlayMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "before_kick_off" => return Ok(PlayMode::BeforeKickOff),
            "play_on" => return Ok(PlayMode::PlayOn),
            "time_over" => return Ok(PlayMode::TimeOver),
            _ => {}
        }
        let err = || UnknownPlayMode(s.to_string());
        let (base, letter) = s.rsplit_once('_').ok_or_else(err)?;
        let side = Side::from_letter(letter).ok_or_else(err)?;
        Ok(match base {
            "kick_off" => PlayMode::KickOff(side),
            "kick_in" => PlayMode::KickIn(side),
            "goal_kick" => PlayMode::GoalKick(side),
            "corner_kick" => PlayMode::CornerKick(side),
            "goal" => PlayMode::Goal(side),
            _ => return Err(err()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentType {
    Player,
    Coach,
    Trainer,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn play_mode_names_round_trip() {
        let all = [
            PlayMode::BeforeKickOff,
            PlayMode::PlayOn,
            PlayMode::TimeOver,
            PlayMode::KickOff(Side::Left),
            PlayMode::KickIn(Side::Right),
            PlayMode::GoalKick(Side::Left),
            PlayMode::CornerKick(Side::Right),
            PlayMode::Goal(Side::Left),
        ];
        for m in all {
            assert_eq!(m.wire_name().parse::<PlayMode>(), Ok(m));
        }
        assert!("kick_off_x".parse::<PlayMode>().is_err());
        assert!("free_kick_l".parse::<PlayMode>().is_err());
    }
}
