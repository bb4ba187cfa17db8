use cls_core::{AgentType, PlayMode, Side, Vec2};

use crate::actions::SchemaViolation;
use crate::pb;

impl From<Vec2> for pb::Vector2 {
    fn from(v: Vec2) -> Self {
        pb::Vector2 { x: v.x, y: v.y }
    }
}

impl From<pb::Vector2> for Vec2 {
    fn from(v: pb::Vector2) -> Self {
        Vec2::new(v.x, v.y)
    }
}

/// A required vector field; absent or non-finite is a schema violation.
pub(crate) fn vec_field(v: &Option<pb::Vector2>, name: &'static str) -> Result<Vec2, SchemaViolation> {
    let v: Vec2 = v.ok_or(SchemaViolation::MissingField(name))?.into();
    if !v.is_finite() {
        return Err(SchemaViolation::NonFinite(name));
    }
    Ok(v)
}

pub(crate) fn finite(v: f64, name: &'static str) -> Result<f64, SchemaViolation> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SchemaViolation::NonFinite(name))
    }
}

pub fn side_to_pb(side: Option<Side>) -> pb::Side {
    match side {
        None => pb::Side::UnknownSide,
        Some(Side::Left) => pb::Side::Left,
        Some(Side::Right) => pb::Side::Right,
    }
}

pub fn side_from_pb(raw: i32) -> Result<Option<Side>, SchemaViolation> {
    match pb::Side::try_from(raw).map_err(|_| SchemaViolation::BadEnum("side", raw))? {
        pb::Side::UnknownSide => Ok(None),
        pb::Side::Left => Ok(Some(Side::Left)),
        pb::Side::Right => Ok(Some(Side::Right)),
    }
}

pub fn agent_type_to_pb(t: AgentType) -> pb::AgentType {
    match t {
        AgentType::Player => pb::AgentType::Player,
        AgentType::Coach => pb::AgentType::Coach,
        AgentType::Trainer => pb::AgentType::Trainer,
    }
}

pub fn agent_type_from_pb(raw: i32) -> Result<AgentType, SchemaViolation> {
    Ok(match pb::AgentType::try_from(raw).map_err(|_| SchemaViolation::BadEnum("agent_type", raw))? {
        pb::AgentType::Player => AgentType::Player,
        pb::AgentType::Coach => AgentType::Coach,
        pb::AgentType::Trainer => AgentType::Trainer,
    })
}

pub fn play_mode_to_pb(m: PlayMode) -> pb::PlayMode {
    use pb::PlayModeKind as K;
    let (kind, side) = match m {
        PlayMode::BeforeKickOff => (K::BeforeKickOff, None),
        PlayMode::PlayOn => (K::PlayOn, None),
        PlayMode::TimeOver => (K::TimeOver, None),
        PlayMode::KickOff(s) => (K::KickOff, Some(s)),
        PlayMode::KickIn(s) => (K::KickIn, Some(s)),
        PlayMode::GoalKick(s) => (K::GoalKick, Some(s)),
        PlayMode::CornerKick(s) => (K::CornerKick, Some(s)),
        PlayMode::Goal(s) => (K::Goal, Some(s)),
    };
    pb::PlayMode { kind: kind as i32, side: side_to_pb(side) as i32 }
}

pub fn play_mode_from_pb(m: &pb::PlayMode) -> Result<PlayMode, SchemaViolation> {
    use pb::PlayModeKind as K;
    let kind = K::try_from(m.kind).map_err(|_| SchemaViolation::BadEnum("play_mode", m.kind))?;
    let side = side_from_pb(m.side)?;
    let sided = |f: fn(Side) -> PlayMode| side.map(f).ok_or(SchemaViolation::MissingField("play_mode.side"));
    match kind {
        K::BeforeKickOff => Ok(PlayMode::BeforeKickOff),
        K::PlayOn => Ok(PlayMode::PlayOn),
        K::TimeOver => Ok(PlayMode::TimeOver),
        K::KickOff => sided(PlayMode::KickOff),
        K::KickIn => sided(PlayMode::KickIn),
        K::GoalKick => sided(PlayMode::GoalKick),
        K::CornerKick => sided(PlayMode::CornerKick),
        K::Goal => sided(PlayMode::Goal),
    }
}
