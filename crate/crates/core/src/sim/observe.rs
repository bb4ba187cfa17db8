use crate::codec::{ObjectKind, ObservedObject, ServerMessage};
use crate::geom::{normalize_angle, Vec2};
use crate::landmarks::LandmarkMap;
use crate::types::Side;

use super::config::{ObservationMode, SimParams};
use super::event::AgentId;
use super::world::SimWorld;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("unknown agent {0}")]
pub struct UnknownAgent(pub AgentId);

/// Distance as reported to players: rounded to a grid of `qstep` within 10 m,
/// with the grid widening by `qstep` for every further 10 m band. Values are
/// capped at the top of their band so the mapping stays monotone.
pub fn quantize_distance(d: f64, qstep: f64) -> f64 {
    let step = quantize_grid(d, qstep);
    let band_top = ((d / 10.0).floor() + 1.0) * 10.0;
    ((d / step).round_ties_even() * step).min(band_top)
}

/// Grid spacing [`quantize_distance`] uses at distance `d`.
pub fn quantize_grid(d: f64, qstep: f64) -> f64 {
    qstep * (d / 10.0).floor().max(1.0)
}

/// Observations the server sends to `agent` at the end of a cycle.
///
/// Trainers and coaches always get a full-state view. Players get either the
/// full state or a `sense_body` followed by a `see` of the objects inside
/// their view cone.
pub fn render_observation(
    world: &SimWorld,
    params: &SimParams,
    agent: AgentId,
    mode: ObservationMode,
) -> Result<Vec<ServerMessage>, UnknownAgent> {
    let (side, unum) = match agent {
        AgentId::Trainer | AgentId::Coach(_) => return Ok(vec![ServerMessage::FullState(world.snapshot())]),
        AgentId::Player { side, unum } => (side, unum),
    };
    let me = world.player(side, unum).ok_or(UnknownAgent(agent))?;
    if mode == ObservationMode::FullState {
        return Ok(vec![ServerMessage::FullState(world.snapshot())]);
    }

    let face = me.face_dir();
    let speed = me.vel.length();
    let sense = ServerMessage::SenseBody {
        cycle: world.cycle,
        stamina: me.stamina,
        effort: me.effort,
        speed_mag: speed,
        speed_dir: if speed > 0.0 { normalize_angle(me.vel.dir_deg() - face) } else { 0.0 },
        neck_dir: me.neck_dir,
    };

    let half_cone = params.visible_angle / 2.0;
    let mut objects = Vec::new();
    let mut look = |kind: ObjectKind, pos: Vec2| {
        let rel = pos - me.pos;
        let dist = rel.length();
        let bearing = if dist > 0.0 { normalize_angle(rel.dir_deg() - face) } else { 0.0 };
        if bearing.abs() <= half_cone {
            objects.push(ObservedObject::new(
                kind,
                quantize_distance(dist, params.quantize_step),
                normalize_angle(bearing.round()),
            ));
        }
    };

    let map = LandmarkMap::standard();
    for (id, pos) in map.flags() {
        look(ObjectKind::Flag(id.clone()), pos);
    }
    for s in [Side::Left, Side::Right] {
        look(ObjectKind::Goal(s), map.goal(s));
    }
    look(ObjectKind::Ball, world.ball.pos);
    for p in &world.players {
        if p.side == side && p.unum == unum {
            continue;
        }
        let team = world.teams.name(p.side).map(str::to_string);
        let unum = team.as_ref().map(|_| p.unum);
        look(ObjectKind::Player { team, unum }, p.pos);
    }

    Ok(vec![sense, ServerMessage::See { cycle: world.cycle, objects }])
}
