//! Typed actions exchanged across the RPC boundary.

use cls_core::{PlayMode, Side, Vec2};

use crate::convert::{finite, play_mode_from_pb, play_mode_to_pb, side_from_pb, side_to_pb, vec_field};
use crate::pb;
use crate::pb::player_action::Action as PA;

/// A reply that decodes under the schema but cannot be given meaning.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemaViolation {
    #[error("action {0} has no variant set")]
    EmptyAction(usize),
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("non-finite value in `{0}`")]
    NonFinite(&'static str),
    #[error("unknown {0} enum value {1}")]
    BadEnum(&'static str, i32),
    #[error("uniform number {0} out of range")]
    Unum(u32),
    #[error("wire decode: {0}")]
    Decode(String),
}

/// One entry of a playmaker's reply. Targets are in the team frame.
#[derive(Debug, Clone, PartialEq)]
pub enum PlayerAction {
    Dash { power: f64, dir: f64 },
    Turn { moment: f64 },
    Kick { power: f64, dir: f64 },
    TurnNeck { moment: f64 },
    Move { x: f64, y: f64 },
    Say { text: String },
    BodyGoToPoint { target: Vec2, dist_thr: f64, max_power: f64 },
    BodySmartKick { target: Vec2, first_speed: f64, speed_thr: f64, max_steps: i32 },
    BodyTurnToPoint { target: Vec2 },
    BodyInterceptBall,
    NeckTurnToBall,
    DoNothing,
}

impl PlayerAction {
    /// Neck and say actions may accompany the cycle's single body action.
    pub fn is_body(&self) -> bool {
        !matches!(self, PlayerAction::TurnNeck { .. } | PlayerAction::Say { .. } | PlayerAction::NeckTurnToBall)
    }
}

impl From<&PlayerAction> for pb::PlayerAction {
    fn from(a: &PlayerAction) -> Self {
        let action = match a {
            PlayerAction::Dash { power, dir } => PA::Dash(pb::Dash { power: *power, relative_direction: *dir }),
            PlayerAction::Turn { moment } => PA::Turn(pb::Turn { relative_direction: *moment }),
            PlayerAction::Kick { power, dir } => PA::Kick(pb::Kick { power: *power, relative_direction: *dir }),
            PlayerAction::TurnNeck { moment } => PA::TurnNeck(pb::TurnNeck { moment: *moment }),
            PlayerAction::Move { x, y } => PA::Move(pb::Move { x: *x, y: *y }),
            PlayerAction::Say { text } => PA::Say(pb::Say { message: text.clone() }),
            PlayerAction::BodyGoToPoint { target, dist_thr, max_power } => PA::BodyGoToPoint(pb::BodyGoToPoint {
                target_point: Some((*target).into()),
                distance_threshold: *dist_thr,
                max_dash_power: *max_power,
            }),
            PlayerAction::BodySmartKick { target, first_speed, speed_thr, max_steps } => {
                PA::BodySmartKick(pb::BodySmartKick {
                    target_point: Some((*target).into()),
                    first_speed: *first_speed,
                    first_speed_threshold: *speed_thr,
                    max_steps: *max_steps,
                })
            }
            PlayerAction::BodyTurnToPoint { target } => {
                PA::BodyTurnToPoint(pb::BodyTurnToPoint { target_point: Some((*target).into()) })
            }
            PlayerAction::BodyInterceptBall => PA::BodyInterceptBall(pb::BodyInterceptBall {}),
            PlayerAction::NeckTurnToBall => PA::NeckTurnToBall(pb::NeckTurnToBall {}),
            PlayerAction::DoNothing => PA::DoNothing(pb::DoNothing {}),
        };
        pb::PlayerAction { action: Some(action) }
    }
}

fn player_action_from_pb(i: usize, a: &pb::PlayerAction) -> Result<PlayerAction, SchemaViolation> {
    Ok(match a.action.as_ref().ok_or(SchemaViolation::EmptyAction(i))? {
        PA::Dash(d) => PlayerAction::Dash {
            power: finite(d.power, "dash.power")?,
            dir: finite(d.relative_direction, "dash.relative_direction")?,
        },
        PA::Turn(t) => PlayerAction::Turn { moment: finite(t.relative_direction, "turn.relative_direction")? },
        PA::Kick(k) => PlayerAction::Kick {
            power: finite(k.power, "kick.power")?,
            dir: finite(k.relative_direction, "kick.relative_direction")?,
        },
        PA::TurnNeck(t) => PlayerAction::TurnNeck { moment: finite(t.moment, "turn_neck.moment")? },
        PA::Move(m) => PlayerAction::Move { x: finite(m.x, "move.x")?, y: finite(m.y, "move.y")? },
        PA::Say(s) => PlayerAction::Say { text: s.message.clone() },
        PA::BodyGoToPoint(g) => PlayerAction::BodyGoToPoint {
            target: vec_field(&g.target_point, "body_go_to_point.target_point")?,
            dist_thr: finite(g.distance_threshold, "body_go_to_point.distance_threshold")?,
            max_power: finite(g.max_dash_power, "body_go_to_point.max_dash_power")?,
        },
        PA::BodySmartKick(k) => PlayerAction::BodySmartKick {
            target: vec_field(&k.target_point, "body_smart_kick.target_point")?,
            first_speed: finite(k.first_speed, "body_smart_kick.first_speed")?,
            speed_thr: finite(k.first_speed_threshold, "body_smart_kick.first_speed_threshold")?,
            max_steps: k.max_steps,
        },
        PA::BodyTurnToPoint(t) => {
            PlayerAction::BodyTurnToPoint { target: vec_field(&t.target_point, "body_turn_to_point.target_point")? }
        }
        PA::BodyInterceptBall(_) => PlayerAction::BodyInterceptBall,
        PA::NeckTurnToBall(_) => PlayerAction::NeckTurnToBall,
        PA::DoNothing(_) => PlayerAction::DoNothing,
    })
}

pub fn marshal_player_actions(actions: &[PlayerAction]) -> pb::PlayerActions {
    pb::PlayerActions { actions: actions.iter().map(Into::into).collect() }
}

/// Order is preserved; an empty reply is legal.
pub fn unmarshal_player_actions(reply: &pb::PlayerActions) -> Result<Vec<PlayerAction>, SchemaViolation> {
    reply.actions.iter().enumerate().map(|(i, a)| player_action_from_pb(i, a)).collect()
}

/// Trainer actions use absolute coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainerAction {
    MoveBall { pos: Vec2, vel: Vec2 },
    MovePlayer { side: Side, unum: u8, pos: Vec2, body_dir: f64 },
    ChangePlayMode(PlayMode),
    Recover,
}

impl From<&TrainerAction> for pb::TrainerAction {
    fn from(a: &TrainerAction) -> Self {
        use pb::trainer_action::Action as TA;
        let action = match a {
            TrainerAction::MoveBall { pos, vel } => {
                TA::MoveBall(pb::MoveBall { position: Some((*pos).into()), velocity: Some((*vel).into()) })
            }
            TrainerAction::MovePlayer { side, unum, pos, body_dir } => TA::MovePlayer(pb::MovePlayer {
                side: side_to_pb(Some(*side)) as i32,
                unum: *unum as u32,
                position: Some((*pos).into()),
                body_direction: *body_dir,
            }),
            TrainerAction::ChangePlayMode(m) => {
                TA::ChangePlayMode(pb::ChangePlayMode { play_mode: Some(play_mode_to_pb(*m)) })
            }
            TrainerAction::Recover => TA::Recover(pb::Recover {}),
        };
        pb::TrainerAction { action: Some(action) }
    }
}

pub fn marshal_trainer_actions(actions: &[TrainerAction]) -> pb::TrainerActions {
    pb::TrainerActions { actions: actions.iter().map(Into::into).collect() }
}

pub fn unmarshal_trainer_actions(reply: &pb::TrainerActions) -> Result<Vec<TrainerAction>, SchemaViolation> {
    use pb::trainer_action::Action as TA;
    let mut out = Vec::with_capacity(reply.actions.len());
    for (i, a) in reply.actions.iter().enumerate() {
        out.push(match a.action.as_ref().ok_or(SchemaViolation::EmptyAction(i))? {
            TA::MoveBall(m) => TrainerAction::MoveBall {
                pos: vec_field(&m.position, "move_ball.position")?,
                vel: m.velocity.map(Vec2::from).unwrap_or(Vec2::ZERO),
            },
            TA::MovePlayer(m) => {
                if !(1..=11).contains(&m.unum) {
                    return Err(SchemaViolation::Unum(m.unum));
                }
                TrainerAction::MovePlayer {
                    side: side_from_pb(m.side)?.ok_or(SchemaViolation::MissingField("move_player.side"))?,
                    unum: m.unum as u8,
                    pos: vec_field(&m.position, "move_player.position")?,
                    body_dir: finite(m.body_direction, "move_player.body_direction")?,
                }
            }
            TA::ChangePlayMode(c) => TrainerAction::ChangePlayMode(play_mode_from_pb(
                c.play_mode.as_ref().ok_or(SchemaViolation::MissingField("change_play_mode.play_mode"))?,
            )?),
            TA::Recover(_) => TrainerAction::Recover,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoachAction {
    Say { text: String },
    DoNothing,
}

pub fn marshal_coach_actions(actions: &[CoachAction]) -> pb::CoachActions {
    use pb::coach_action::Action as CA;
    pb::CoachActions {
        actions: actions
            .iter()
            .map(|a| pb::CoachAction {
                action: Some(match a {
                    CoachAction::Say { text } => CA::Say(pb::Say { message: text.clone() }),
                    CoachAction::DoNothing => CA::DoNothing(pb::DoNothing {}),
                }),
            })
            .collect(),
    }
}

pub fn unmarshal_coach_actions(reply: &pb::CoachActions) -> Result<Vec<CoachAction>, SchemaViolation> {
    use pb::coach_action::Action as CA;
    reply
        .actions
        .iter()
        .enumerate()
        .map(|(i, a)| match a.action.as_ref().ok_or(SchemaViolation::EmptyAction(i))? {
            CA::Say(s) => Ok(CoachAction::Say { text: s.message.clone() }),
            CA::DoNothing(_) => Ok(CoachAction::DoNothing),
        })
        .collect()
}
